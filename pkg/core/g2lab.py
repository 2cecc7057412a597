"""
G2 link laboratory.

Builds the two G2 squared link sides that are not abelian Cayley graphs,
measures their spectral gap, and counts closed walks two ways: by solving
the closed-walk equation system over linear f_i, g_i, and by walking the
built graph. No expansion bound is known for these links; every number
here is exploratory.

Case I: α, β simple, 150° apart. Vertices (t01, t11, t21, t31, t32).
Case II: α, β short, 120° apart. Vertices (t01, t11, t21, t12).
Coordinate t_ij belongs to x_{iα+jβ} and has degree ≤ min(i+j, m−1).
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from core.algebra.gf import FieldSpec
from core.algebra.matgroups import calibrated_engine
from core.algebra.rootsys import Root, RootSystem, build_root_system, combine, positive_cone
from core.algebra.steinberg import SpanEngine
from core.config import config
from core.errors import DomainError, IntegrityError, ResourceBudgetError
from core.spectra import SparseWalkGraph, SpectralReport, link_operator, second_eigenvalue
from utils.logging_setup import get_logger, log_performance

logger = get_logger(__name__)

CASES = ("I", "II")
VARIANTS = ("derived", "printed")

# (i, j) of the printed vertex coordinates, in display order
_PRINTED_COORDS = {
    "I": ((0, 1), (1, 1), (2, 1), (3, 1), (3, 2)),
    "II": ((0, 1), (1, 1), (2, 1), (1, 2)),
}


def g2_pair(case: str) -> Tuple[RootSystem, Root, Root]:
    """(G2, α, β) for the requested case, α the short simple root."""
    if case not in CASES:
        raise DomainError(f"G2 case must be I or II, got '{case}'")
    system = build_root_system("G", 2)
    short = min(system.simples, key=lambda r: r.norm2)
    long_root = max(system.simples, key=lambda r: r.norm2)
    beta = long_root if case == "I" else system.get(combine([(1, short), (1, long_root)]))
    cone = positive_cone(system, short, beta)
    if cone.link_case != f"g2_{case}":
        raise IntegrityError(f"pair {short}, {beta} classifies as {cone.link_case}, expected g2_{case}")
    return system, short, beta


def _printed_step(case: str, f: FieldSpec) -> Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
    """Neighbor map exactly as displayed, evaluated in F_{p^m}."""
    add, mul = f.add, f.mul

    def c(k, a):
        return f.mul_scalar(k, a)

    if case == "I":
        def step(rows, f0, f1):
            t01, t11, t21, t31, t32 = rows.T
            f0f1 = mul(f0, f1)
            f0sq_f1 = mul(f0, f0f1)
            f0cu_f1 = mul(f0, f0sq_f1)
            inner = add(add(t31, c(3, mul(t21, f0))), f0cu_f1)
            return np.stack([
                add(f1, t01),
                add(f.neg(f0f1), t11),
                add(f0sq_f1, t21),
                add(f.neg(f0cu_f1), t31),
                add(f.neg(mul(f1, inner)), t32),
            ], axis=1)
    else:
        def step(rows, f0, f1):
            t01, t11, t21, t12 = rows.T
            f0f1 = mul(f0, f1)
            return np.stack([
                add(f1, t01),
                add(c(-2, f0f1), t11),
                add(c(3, mul(f0, f0f1)), t21),
                add(c(3, mul(f1, add(t11, f0f1))), t12),
            ], axis=1)
    return step


def _printed_system(case: str, f: FieldSpec, fs: List[np.ndarray], gs: List[np.ndarray]) -> np.ndarray:
    """Mask of parameter tuples solving the displayed closed-walk system."""
    add, mul = f.add, f.mul
    zero = np.zeros_like(fs[0])
    sums = [zero] * (4 if case == "I" else 3)
    last = zero
    prefix_fg = zero
    prefix_f3g = zero
    prefix_f2g = zero
    for fi, gi in zip(fs, gs):
        fg = mul(fi, gi)
        f2g = mul(fi, fg)
        f3g = mul(fi, f2g)
        sums[0] = add(sums[0], gi)
        sums[1] = add(sums[1], fg)
        sums[2] = add(sums[2], f2g)
        if case == "I":
            sums[3] = add(sums[3], f3g)
            # −g_i(f_i³g_i + Σ_{j<i}(f_j³g_j + 3f_j²g_j f_i))
            inner = add(f3g, add(prefix_f3g, f.mul_scalar(3, mul(prefix_f2g, fi))))
            last = add(last, f.neg(mul(gi, inner)))
        else:
            # g_i(f_ig_i − 2Σ_{j<i} f_jg_j)
            last = add(last, mul(gi, add(fg, f.mul_scalar(-2, prefix_fg))))
        prefix_fg = add(prefix_fg, fg)
        prefix_f2g = add(prefix_f2g, f2g)
        prefix_f3g = add(prefix_f3g, f3g)
    mask = last == 0
    for s in sums:
        mask &= s == 0
    return mask


@dataclass
class G2LinkGraph:
    """
    Squared link side X_{α,β}/X_α for a G2 case.

    Vertices are coefficient rows (one field code per coordinate, capped
    in degree); steps are indexed by (f0, f1) of degree ≤ min(1, m−1).
    The adjacency is explicit when n·degree fits budgets.max_walk_tuples.
    """
    case: str
    spec: FieldSpec
    variant: str
    coords: List[str]
    caps: List[int]
    sizes: List[int]
    step_params: Tuple[np.ndarray, np.ndarray]
    stepper: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    system: RootSystem
    alpha: Root
    beta: Root
    adjacency: Optional[csr_matrix] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.logger = get_logger(__name__)

    @property
    def n(self) -> int:
        return int(np.prod(self.sizes, dtype=object))

    @property
    def degree(self) -> int:
        return len(self.step_params[0])

    def index(self, rows: np.ndarray) -> np.ndarray:
        if np.any(rows >= np.array(self.sizes)):
            raise IntegrityError("step left the vertex set (degree cap exceeded)")
        return np.ravel_multi_index(tuple(rows.T), self.sizes)

    def rows(self, indices: np.ndarray) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(indices, dtype=np.int64), self.sizes), axis=1).astype(np.int64)

    def neighbors(self, indices: np.ndarray) -> np.ndarray:
        """Neighbor indices, shape (len(indices), degree); one column per (f0, f1)."""
        indices = np.asarray(indices, dtype=np.int64)
        d = self.degree
        f0, f1 = self.step_params
        rows = np.repeat(self.rows(indices), d, axis=0)
        out = self.stepper(rows, np.tile(f0, len(indices)), np.tile(f1, len(indices)))
        return self.index(out).reshape(len(indices), d)

    def is_symmetric(self) -> Optional[bool]:
        if self.adjacency is None:
            return True if self.variant == "derived" else None
        diff = self.adjacency - self.adjacency.T
        return bool(diff.nnz == 0 or np.abs(diff.data).max() == 0)

    def walk_graph(self) -> SparseWalkGraph:
        """Walk operator: explicit CSR when built, else the coset operator (derived only)."""
        if self.adjacency is not None:
            if not self.is_symmetric():
                raise DomainError(f"{self.variant} Case {self.case} graph is not symmetric")
            return SparseWalkGraph.from_adjacency(self.adjacency, psd=self.variant == "derived",
                                                  name=f"G2 Case {self.case} ({self.variant})")
        if self.variant != "derived":
            raise ResourceBudgetError("printed graph is too large to build explicitly",
                                      predicted=self.n * self.degree,
                                      budget=int(config.get("budgets.max_walk_tuples", 5000000)))
        budget = int(config.get("budgets.max_g2_vertices", 400000)) * self.degree
        return link_operator(self.system, self.alpha, self.beta, self.spec, budget=budget)

    # closed walks

    def distribution(self, start: int, steps: int) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoints and walk counts of all walks of the given length from start."""
        budget = int(config.get("budgets.max_walk_tuples", 5000000))
        chunk = max(1, int(config.get("complex.chunk_size", 1000000)) // self.degree)
        idx = np.array([start], dtype=np.int64)
        weight = np.array([1], dtype=np.int64)
        for _ in range(steps):
            if len(idx) * self.degree > budget:
                raise ResourceBudgetError(f"walk frontier of {len(idx) * self.degree} exceeds budget",
                                          predicted=len(idx) * self.degree, budget=budget)
            targets, weights = [], []
            for s in range(0, len(idx), chunk):
                nb = self.neighbors(idx[s:s + chunk])
                targets.append(nb.reshape(-1))
                weights.append(np.repeat(weight[s:s + chunk], self.degree))
            targets = np.concatenate(targets)
            weights = np.concatenate(weights)
            idx, inverse = np.unique(targets, return_inverse=True)
            summed = np.zeros(len(idx), dtype=np.int64)
            np.add.at(summed, inverse, weights)
            weight = summed
        return idx, weight

    def closed_walks(self, k: int, start: int = 0) -> int:
        """Closed k-walks from start; meets in the middle on symmetric graphs."""
        if k < 0:
            raise DomainError("walk length must be non-negative")
        if k == 0:
            return 1
        if self.is_symmetric():
            half = (k + 1) // 2
            a_idx, a_w = self.distribution(start, half)
            b_idx, b_w = (a_idx, a_w) if half == k - half else self.distribution(start, k - half)
            common, ia, ib = np.intersect1d(a_idx, b_idx, return_indices=True)
            return int(sum(int(x) * int(y) for x, y in zip(a_w[ia], b_w[ib])))
        idx, w = self.distribution(start, k)
        hit = np.flatnonzero(idx == start)
        return int(w[hit[0]]) if len(hit) else 0


@log_performance
def build_g2_link(case: str, spec: FieldSpec, variant: str = "derived") -> G2LinkGraph:
    """
    Build the squared G2 link side.

    Args:
        case: I or II
        spec: field; p > 3
        variant: derived (collection engine) or printed (displayed formulas)

    Raises:
        DomainError: p ≤ 3 or unknown case/variant
        ResourceBudgetError: vertex count above budgets.max_g2_vertices
    """
    if variant not in VARIANTS:
        raise DomainError(f"variant must be derived or printed, got '{variant}'")
    if spec.p <= 3:
        raise DomainError("G2 links need p > 3")
    system, alpha, beta = g2_pair(case)
    f = spec
    low = f.elements_up_to_degree(min(1, f.m - 1))
    f0, f1 = (a.reshape(-1) for a in np.meshgrid(low, low, indexing="ij"))

    engine = calibrated_engine(system, (alpha, beta), f)
    ea: SpanEngine = engine.with_order(engine.order_with_last(alpha))
    if variant == "derived":
        coords = [str(r) for r in ea.order[:-1]]
        caps = ea.caps()[:-1]

        def stepper(rows, s0, s1):
            full = np.concatenate([rows, np.zeros((len(rows), 1), dtype=np.int64)], axis=1)
            out = ea.collect_arrays(ea.rows_word(full) + [(alpha, s0), (beta, s1)], lanes=len(rows))
            return out[:, :-1]
    else:
        coords = [f"t{i}{j}" for i, j in _PRINTED_COORDS[case]]
        caps = [min(i + j, f.m - 1) for i, j in _PRINTED_COORDS[case]]
        stepper = _printed_step(case, f)

    sizes = [f.count_up_to_degree(c) for c in caps]
    n = int(np.prod(sizes, dtype=object))
    vertex_budget = int(config.get("budgets.max_g2_vertices", 400000))
    if n > vertex_budget:
        logger.error(f"❌ G2 Case {case} over F_{f.q}: {n} vertices exceeds budget {vertex_budget}")
        raise ResourceBudgetError(f"G2 Case {case} side has {n} vertices, budget is {vertex_budget}",
                                  predicted=n, budget=vertex_budget)

    graph = G2LinkGraph(case, f, variant, coords, caps, sizes, (f0, f1), stepper, system, alpha, beta,
                        metadata={"p": f.p, "m": f.m, "alpha": str(alpha), "beta": str(beta)})
    edges = n * graph.degree
    if edges <= int(config.get("budgets.max_walk_tuples", 5000000)):
        src = np.repeat(np.arange(n, dtype=np.int64), graph.degree)
        dst = graph.neighbors(np.arange(n, dtype=np.int64)).reshape(-1)
        graph.adjacency = csr_matrix((np.ones(edges, dtype=np.int64), (src, dst)), shape=(n, n))
    logger.info(f"🔧 G2 Case {case} ({variant}) over F_{f.q}: {n} vertices, degree {graph.degree}, "
                f"{'explicit' if graph.adjacency is not None else 'implicit'}")
    return graph


# ----------------------------------------------------------------------
# walk counts


def count_solutions(case: str, k: int, spec: FieldSpec, variant: str = "derived") -> int:
    """
    Mode (a): parameter tuples (f_1, g_1, …, f_k, g_k) whose walk closes.

    derived: x_α(f_1)x_β(g_1)…x_α(f_k)x_β(g_k) lies in X_α.
    printed: the displayed equation system holds.
    """
    system, alpha, beta = g2_pair(case)
    low = spec.elements_up_to_degree(min(1, spec.m - 1))
    total = len(low) ** (2 * k)
    budget = int(config.get("budgets.max_walk_tuples", 5000000))
    if total > budget:
        raise ResourceBudgetError(f"{total} parameter tuples exceed budget {budget}", predicted=total, budget=budget)
    engine = calibrated_engine(system, (alpha, beta), spec)
    ea = engine.with_order(engine.order_with_last(alpha))
    chunk = int(config.get("complex.chunk_size", 1000000))
    solutions = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        params = [low[c] for c in np.unravel_index(idx, (len(low),) * (2 * k))]
        fs, gs = params[0::2], params[1::2]
        if variant == "derived":
            word = []
            for fi, gi in zip(fs, gs):
                word += [(alpha, fi), (beta, gi)]
            rows = ea.collect_arrays(word, lanes=len(idx))
            solutions += int(np.sum(~rows[:, :-1].any(axis=1)))
        else:
            solutions += int(np.sum(_printed_system(case, spec, fs, gs)))
    return solutions


def walk_count_modes(case: str, k: int, spec: FieldSpec, variant: str = "derived",
                     graph: Optional[G2LinkGraph] = None) -> Dict[str, Any]:
    """Closed k-walks from the base vertex by solution counting and by traversal."""
    out: Dict[str, Any] = {"k": k, "solutions": None, "traversal": None}
    try:
        out["solutions"] = count_solutions(case, k, spec, variant)
    except ResourceBudgetError as e:
        out["solutions_skipped"] = str(e)
    try:
        graph = graph or build_g2_link(case, spec, variant)
        out["traversal"] = graph.closed_walks(k, 0)
    except ResourceBudgetError as e:
        out["traversal_skipped"] = str(e)
    if out["solutions"] is None and out["traversal"] is None:
        raise ResourceBudgetError(f"closed {k}-walks of Case {case} over F_{spec.q}: both modes over budget")
    if out["solutions"] is not None and out["traversal"] is not None:
        out["agree"] = out["solutions"] == out["traversal"]
    return out


def walk_count(case: str, k: int, spec: FieldSpec, variant: str = "derived",
               graph: Optional[G2LinkGraph] = None) -> int:
    """
    Number of closed k-walks from a fixed vertex.

    Raises:
        IntegrityError: the two counting modes disagree
        ResourceBudgetError: neither mode fits the budget
    """
    modes = walk_count_modes(case, k, spec, variant, graph)
    if modes.get("agree") is False:
        logger.error(f"❌ Walk count mismatch Case {case} k={k}: {modes['solutions']} vs {modes['traversal']}")
        raise IntegrityError(f"walk counts disagree: solutions {modes['solutions']}, traversal {modes['traversal']}")
    return modes["solutions"] if modes["solutions"] is not None else modes["traversal"]


def transitivity_sample(graph: G2LinkGraph, k: int, samples: int = 10, seed: Optional[int] = None) -> List[int]:
    """Closed k-walk counts from random start vertices."""
    rng = np.random.default_rng(int(config.get("spectra.seed", 42)) if seed is None else seed)
    starts = rng.choice(graph.n, size=min(samples, graph.n), replace=False)
    return [graph.closed_walks(k, int(s)) for s in starts]


def trace_identity(graph: G2LinkGraph, k: int) -> Dict[str, Any]:
    """n · (closed k-walks from one vertex) against Σ (λ·degree)^k over the dense spectrum."""
    walk = graph.walk_graph()
    limit = int(config.get("spectra.dense_limit", 4000))
    if walk.n > limit:
        raise DomainError(f"trace identity needs a dense spectrum, graph has {walk.n} vertices")
    eig = np.linalg.eigvalsh(walk.to_dense())
    trace = float(np.sum((eig * graph.degree) ** k))
    walks_total = graph.n * graph.closed_walks(k, 0)
    return {"k": k, "trace": trace, "walks_total": walks_total,
            "agree": bool(abs(trace - walks_total) <= 1e-6 * max(1.0, abs(walks_total)))}


# ----------------------------------------------------------------------
# spectra


@log_performance
def estimate_g2_lambda2(case: str, spec: FieldSpec, tol: Optional[float] = None, variant: str = "derived",
                        graph: Optional[G2LinkGraph] = None) -> SpectralReport:
    """
    λ₂ of the squared side with its enclosure. A disconnected graph is a
    finding: λ₂ = 1 with the component count in the notes.
    """
    graph = graph or build_g2_link(case, spec, variant)
    walk = graph.walk_graph()
    components = walk.components()
    notes: Dict[str, Any] = {"exploratory": True, "case": case, "variant": variant, "components": components,
                             "connected": components == 1}
    if components > 1:
        logger.warning(f"⚠️ G2 Case {case} over F_{spec.q}: squared side has {components} components")
        return SpectralReport(1.0, 1.0, 1.0, "components", walk.n, graph.degree, notes=notes)

    report = second_eigenvalue(walk, tol=tol, method="power")
    if walk.n <= int(config.get("spectra.dense_limit", 4000)):
        dense = second_eigenvalue(walk, method="dense")
        notes["dense_lambda2"] = round(dense.lambda2, 12)
        notes["dense_agree"] = bool(abs(dense.lambda2 - report.lambda2) <= 1e-6)
    report.notes.update(notes)
    report.degree = graph.degree
    logger.info(f"📊 G2 Case {case} ({variant}) over F_{spec.q}: squared λ₂ = {report.lambda2:.8f} (exploratory)")
    return report


def explore(case: str, spec: FieldSpec, k_max: int = 2, tol: Optional[float] = None,
            compare_printed: bool = True) -> Dict[str, Any]:
    """Exploration report: size, connectivity, walk counts and λ₂."""
    graph = build_g2_link(case, spec, "derived")
    walk_counts = {str(k): walk_count_modes(case, k, spec, "derived", graph) for k in range(1, k_max + 1)}
    report = estimate_g2_lambda2(case, spec, tol, "derived", graph)
    result: Dict[str, Any] = {
        "case": case,
        "p": spec.p,
        "m": spec.m,
        "vertices": graph.n,
        "degree": graph.degree,
        "coordinates": graph.coords,
        "connected": report.notes["connected"],
        "components": report.notes["components"],
        "walk_counts": walk_counts,
        "lambda2_square": report.as_dict(),
        "lambda2": round(float(np.sqrt(max(report.lambda2, 0.0))), 12),
        "exploratory": True,
    }
    if compare_printed:
        printed = build_g2_link(case, spec, "printed")
        comparison = {}
        for k in range(1, k_max + 1):
            try:
                comparison[str(k)] = walk_count_modes(case, k, spec, "printed", printed)
            except ResourceBudgetError as e:
                comparison[str(k)] = {"skipped": str(e)}
        derived_counts = [_count_of(v) for v in walk_counts.values()]
        printed_counts = [_count_of(v) for v in comparison.values()]
        result["printed"] = {
            "walk_counts": comparison,
            "symmetric": printed.is_symmetric(),
            "agrees_with_derived": derived_counts == printed_counts,
        }
    return result


def _count_of(modes: Dict[str, Any]) -> Optional[int]:
    return modes.get("traversal") if modes.get("traversal") is not None else modes.get("solutions")
