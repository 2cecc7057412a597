"""
Spectral analysis of links.

Walk operators come in three backends:

- ``csr``: explicit scipy adjacency with integer multiplicities;
- ``cayley``: an abelian Cayley multigraph on a digit space (p,)^D, applied
  by FFT convolution, whose exact spectrum is the FFT of the generator counts;
- ``coset``: the squared side X_{α,β}/X_α of a rank-2 link, applied as
  averaging over X_β and X_α through the permutation between the α-last
  and β-last normal forms. It needs no abelian structure.

Squared sides are positive semidefinite; power iteration runs on them
directly and on the lazy walk (W + I)/2 otherwise.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix, diags
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import LinearOperator, eigsh

from core.algebra.gf import FieldSpec
from core.algebra.matgroups import calibrated_engine
from core.algebra.rootsys import Root, RootSystem, build_root_system, positive_cone, special_set
from core.algebra.steinberg import SpanEngine
from core.config import config
from core.errors import CertificateFailure, DomainError, IntegrityError, ResourceBudgetError
from utils.diagnostics import check_budget
from utils.logging_setup import get_logger, log_performance

logger = get_logger(__name__)


# ----------------------------------------------------------------------
# reports


@dataclass
class SpectralReport:
    """λ₂ with an enclosure; exact spectra are kept as {Fraction: multiplicity}."""
    lambda2: float
    lower: float
    upper: float
    method: str
    n: int
    degree: Optional[int] = None
    bipartite: bool = False
    converged: bool = True
    iterations: int = 0
    eigenvalues: Optional[List[float]] = None
    exact: Optional[Dict[Fraction, int]] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        out = {
            "lambda2": round(float(self.lambda2), 12),
            "enclosure": [round(float(self.lower), 12), round(float(self.upper), 12)],
            "method": self.method,
            "vertices": int(self.n),
            "degree": self.degree,
            "bipartite": self.bipartite,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if self.exact is not None:
            out["exact"] = {str(k): v for k, v in sorted(self.exact.items(), reverse=True)}
        if self.notes:
            out["notes"] = self.notes
        return out


# ----------------------------------------------------------------------
# walk graphs


class SparseWalkGraph:
    """
    A regular (or degree-normalized) walk operator with one of three backends.

    The operator applied is D^{-1/2} A D^{-1/2}, which is the walk matrix
    itself for regular graphs.
    """

    def __init__(self, n: int, backend: str, degree: Optional[int] = None, adjacency: Optional[csr_matrix] = None,
                 sides: Optional[np.ndarray] = None, psd: bool = False, name: str = "",
                 counts: Optional[np.ndarray] = None, perm: Optional[np.ndarray] = None,
                 coset_sizes: Optional[Tuple[int, int]] = None):
        self.logger = get_logger(__name__)
        self.n = int(n)
        self.backend = backend
        self.degree = degree
        self.adjacency = adjacency
        self.sides = sides
        self.psd = psd
        self.name = name
        self.counts = counts
        self.perm = perm
        self.coset_sizes = coset_sizes
        self._sqrt_deg = None
        self._symbol = None
        if backend == "csr":
            row_sums = np.asarray(adjacency.sum(axis=1)).ravel()
            if np.any(row_sums <= 0):
                raise DomainError("walk graph has an isolated vertex")
            if not _is_symmetric(adjacency):
                raise DomainError("adjacency is not symmetric")
            values = np.unique(row_sums)
            self.degree = int(values[0]) if len(values) == 1 else None
            self._sqrt_deg = np.sqrt(row_sums.astype(float))
        elif backend == "cayley":
            self.degree = int(counts.sum())
            self._symbol = np.fft.fftn(counts.astype(float))
            if np.max(np.abs(self._symbol.imag)) > 1e-6 * self.degree:
                raise DomainError("Cayley generating multiset is not symmetric")
            self._symbol = self._symbol.real
        elif backend != "coset":
            raise DomainError(f"unknown walk backend '{backend}'")

    def __repr__(self) -> str:
        return f"SparseWalkGraph({self.name or self.backend}, n={self.n}, degree={self.degree})"

    # constructors

    @classmethod
    def from_adjacency(cls, adjacency, sides: Optional[np.ndarray] = None, psd: bool = False,
                       name: str = "") -> "SparseWalkGraph":
        adjacency = csr_matrix(adjacency)
        return cls(adjacency.shape[0], "csr", adjacency=adjacency, sides=sides, psd=psd, name=name)

    @classmethod
    def from_link(cls, link_graph) -> "SparseWalkGraph":
        """Bipartite walk graph of a LinkGraph (left side first)."""
        return cls.from_adjacency(link_graph.adjacency(), sides=link_graph.sides(),
                                  name=f"link {link_graph.types[0]}|{link_graph.types[1]}")

    @classmethod
    def cayley(cls, counts: np.ndarray, name: str = "") -> "SparseWalkGraph":
        """Cayley multigraph on Z_p^D from a generator-count tensor of shape (p,)*D."""
        counts = np.asarray(counts)
        return cls(int(counts.size), "cayley", counts=counts, psd=True, name=name)

    @classmethod
    def coset(cls, perm: np.ndarray, size_a: int, size_b: int, name: str = "") -> "SparseWalkGraph":
        """Square side X/X_α of a rank-2 link; perm maps α-last indices to β-last indices."""
        total = len(perm)
        return cls(total // size_a, "coset", degree=size_a * size_b, psd=True, name=name,
                   perm=np.asarray(perm, dtype=np.int64), coset_sizes=(size_a, size_b))

    # operator

    @property
    def is_bipartite(self) -> bool:
        return self.sides is not None

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self.backend == "csr":
            s = self._sqrt_deg if x.ndim == 1 else self._sqrt_deg[:, None]
            return (self.adjacency @ (x / s)) / s
        if self.backend == "cayley":
            shape = self.counts.shape
            spectrum = np.fft.fftn(x.reshape(shape)) * self._symbol
            return np.fft.ifftn(spectrum).real.reshape(-1) / self.degree
        size_a, size_b = self.coset_sizes
        lifted = np.repeat(x, size_a)
        beta_side = np.empty_like(lifted)
        beta_side[self.perm] = lifted
        averaged = np.repeat(beta_side.reshape(-1, size_b).mean(axis=1), size_b)
        back = averaged[self.perm]
        return back.reshape(-1, size_a).mean(axis=1)

    def trivial_vector(self) -> np.ndarray:
        v = self._sqrt_deg.copy() if self._sqrt_deg is not None else np.ones(self.n)
        return v / np.linalg.norm(v)

    def sign_vector(self) -> Optional[np.ndarray]:
        if self.sides is None:
            return None
        v = self.trivial_vector() * np.where(self.sides == 0, 1.0, -1.0)
        return v / np.linalg.norm(v)

    def components(self) -> int:
        """Number of connected components."""
        if self.backend == "csr":
            return int(connected_components(self.adjacency, directed=False)[0])
        if self.backend == "cayley":
            return int(np.sum(np.abs(self._symbol / self.degree - 1.0) < 1e-9))
        size_a, size_b = self.coset_sizes
        total = len(self.perm)
        n_left = total // size_a
        left = np.arange(total, dtype=np.int64) // size_a
        right = self.perm // size_b + n_left
        graph = csr_matrix((np.ones(total, dtype=np.int8), (left, right)), shape=(n_left + total // size_b,) * 2)
        return int(connected_components(graph, directed=False)[0])

    def is_connected(self) -> bool:
        return self.components() == 1

    def to_dense(self) -> np.ndarray:
        """Dense symmetric walk matrix (small graphs only)."""
        check_budget(self.n * self.n, 8, f"dense walk matrix of {self.n} vertices")
        if self.backend == "csr":
            inv = diags(1.0 / self._sqrt_deg)
            return (inv @ self.adjacency @ inv).toarray()
        out = np.empty((self.n, self.n))
        eye = np.eye(self.n)
        for j in range(self.n):
            out[:, j] = self.matvec(eye[:, j])
        return (out + out.T) / 2

    def exact_eigenvalues(self) -> np.ndarray:
        """All eigenvalues of a Cayley walk, from the FFT of the generator counts."""
        if self.backend != "cayley":
            raise DomainError("exact eigenvalues are available for Cayley walks only")
        return (self._symbol / self.degree).reshape(-1)


def _is_symmetric(adjacency) -> bool:
    diff = adjacency - adjacency.T
    return diff.nnz == 0 or np.abs(diff.data).max() == 0


# ----------------------------------------------------------------------
# second eigenvalue


def _deflate(x: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    for b in basis:
        x = x - (b @ x) * b
    return x


def _power(g: SparseWalkGraph, tol: float, max_iterations: int, seed: int,
           check_freq: int = 10) -> Tuple[float, float, int, bool]:
    """Top eigenvalue of the (lazy) walk on the complement of the deflated vectors."""
    basis = [g.trivial_vector()]
    sign = g.sign_vector()
    if sign is not None:
        basis.append(sign)
    lazy = not g.psd

    def op(x):
        y = g.matvec(x)
        return (y + x) / 2 if lazy else y

    rng = np.random.default_rng(seed)
    v = _deflate(rng.standard_normal(g.n), basis)
    v /= np.linalg.norm(v)
    rho = 0.0
    history = []
    residual = float("inf")
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        w = _deflate(op(v), basis)
        rho = float(v @ w)
        residual = float(np.linalg.norm(w - rho * v))
        norm = np.linalg.norm(w)
        if norm == 0:
            rho, residual, converged = 0.0, 0.0, True
            break
        v = w / norm
        history.append(rho)
        if residual <= tol:
            converged = True
            break
        if it % check_freq == 0 and len(history) > check_freq and abs(history[-1] - history[-1 - check_freq]) <= tol:
            converged = True
            break
    if lazy:
        return 2 * rho - 1, 2 * residual, it, converged
    return rho, residual, it, converged


def second_eigenvalue(g: SparseWalkGraph, tol: Optional[float] = None, method: str = "power",
                      seed: Optional[int] = None, max_iterations: Optional[int] = None) -> SpectralReport:
    """
    Second largest eigenvalue of the walk.

    Args:
        g: connected walk graph
        tol: target accuracy (spectra.tolerance by default)
        method: power | lanczos | dense
        seed: start-vector seed (spectra.seed by default)

    Raises:
        DomainError: disconnected graph, or dense requested above spectra.dense_limit
    """
    tol = tol or float(config.get("spectra.tolerance", 1e-9))
    seed = int(config.get("spectra.seed", 42)) if seed is None else seed
    max_iterations = max_iterations or int(config.get("spectra.max_iterations", 2000))
    components = g.components()
    if components > 1:
        g.logger.error(f"❌ {g}: eigenvalue 1 has multiplicity {components}")
        raise DomainError(f"walk graph is disconnected ({components} components)")
    if g.n < 2:
        return SpectralReport(0.0, 0.0, 0.0, method, g.n, g.degree, g.is_bipartite)

    if method == "dense":
        limit = int(config.get("spectra.dense_limit", 4000))
        if g.n > limit:
            raise DomainError(f"dense solve limited to {limit} vertices, graph has {g.n}")
        eig = np.sort(np.linalg.eigvalsh(g.to_dense()))[::-1]
        lam = float(eig[1])
        report = SpectralReport(lam, lam, lam, "dense", g.n, g.degree, g.is_bipartite,
                                eigenvalues=[float(x) for x in eig])
    elif method == "lanczos":
        op = LinearOperator((g.n, g.n), matvec=g.matvec, dtype=float)
        k = min(3, g.n - 1)
        vals, vecs = eigsh(op, k=k, which="LA", tol=tol, v0=np.random.default_rng(seed).standard_normal(g.n))
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        lam = float(vals[1])
        residual = float(np.linalg.norm(g.matvec(vecs[:, 1]) - lam * vecs[:, 1]))
        report = SpectralReport(lam, lam - residual, lam + residual, "lanczos", g.n, g.degree, g.is_bipartite)
    elif method == "power":
        lam, residual, iterations, converged = _power(g, tol, max_iterations, seed)
        report = SpectralReport(lam, lam - residual, lam + residual, "power-iteration", g.n, g.degree,
                                g.is_bipartite, converged=converged, iterations=iterations)
        if not converged:
            g.logger.warning(f"⚠️ Power iteration on {g} stopped after {iterations} iterations (residual {residual:.2e})")
    else:
        raise DomainError(f"unknown eigenvalue method '{method}'")

    g.logger.debug(f"📊 {g}: λ₂ = {report.lambda2:.10f} via {report.method}")
    return report


def square_one_side(g: SparseWalkGraph, side: str = "left") -> SparseWalkGraph:
    """
    Two-step walks of a bipartite graph restricted to one side.

    Raises:
        DomainError: g is not bipartite
    """
    if g.backend != "csr" or g.sides is None:
        raise DomainError("graph square needs an explicit bipartite graph")
    which = {"left": 0, "right": 1}.get(side)
    if which is None:
        raise DomainError(f"side must be left or right, got '{side}'")
    here = np.flatnonzero(g.sides == which)
    there = np.flatnonzero(g.sides != which)
    adj = g.adjacency
    if adj[here][:, here].nnz or adj[there][:, there].nnz:
        raise DomainError("graph has edges inside a side; it is not bipartite")
    block = adj[here][:, there]
    square = (block @ block.T).tocsr()
    return SparseWalkGraph.from_adjacency(square, psd=True, name=f"square({g.name}, {side})")


# ----------------------------------------------------------------------
# rank-2 links from normal forms


def _oriented_pair(system: RootSystem, alpha: Root, beta: Root):
    cone = positive_cone(system, alpha, beta)
    return cone, cone.short, cone.long


def _side_engines(system: RootSystem, a: Root, b: Root, spec: FieldSpec) -> Tuple[SpanEngine, SpanEngine]:
    engine = calibrated_engine(system, (a, b), spec)
    return engine.with_order(engine.order_with_last(a)), engine.with_order(engine.order_with_last(b))


def step_rows(engine_a_last: SpanEngine, a: Root, b: Root, f0: np.ndarray, f1: np.ndarray) -> np.ndarray:
    """
    Rows of x_a(f0)·x_b(f1)·x_a(−f0) in α-last normal form, one per lane.

    Raises:
        IntegrityError: the α coordinate does not vanish
    """
    spec = engine_a_last.field
    rows = engine_a_last.collect_arrays([(a, f0), (b, f1), (a, spec.neg(f0))], lanes=len(f0))
    if np.any(rows[:, -1]):
        raise IntegrityError("step element has a non-zero α coordinate")
    return rows


def coset_structure(system: RootSystem, alpha: Root, beta: Root, spec: FieldSpec,
                    budget: Optional[int] = None) -> Dict[str, Any]:
    """
    Index permutation between the α-last and β-last normal forms of X_{α,β}.

    Row i of the α-last enumeration is element i; perm[i] is its index in
    the β-last enumeration. Cosets gX_α are blocks of |X_α| consecutive
    α-last indices, and likewise for β.
    """
    ea, eb = _side_engines(system, alpha, beta, spec)
    sizes_a = [spec.count_up_to_degree(c) for c in ea.caps()]
    sizes_b = [spec.count_up_to_degree(c) for c in eb.caps()]
    total = int(np.prod(sizes_a, dtype=object))
    budget = budget or int(config.get("budgets.max_link_elements", 250000))
    if total > budget:
        raise ResourceBudgetError(f"X_(α,β) has {total} elements, link budget is {budget}",
                                  predicted=total, budget=budget)
    check_budget(total, 8 * (len(sizes_a) + 2), "rank-2 link structure")
    chunk = int(config.get("complex.chunk_size", 1000000))
    perm = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        rows = np.stack(np.unravel_index(idx, sizes_a), axis=1).astype(np.int64)
        rows_b = ea.reorder_rows(rows, eb)
        perm[start:start + len(idx)] = np.ravel_multi_index(tuple(rows_b.T), sizes_b)
    if len(np.unique(perm)) != total:
        raise IntegrityError("α-last and β-last normal forms are not in bijection")
    return {"perm": perm, "size_a": sizes_a[-1], "size_b": sizes_b[-1], "total": total,
            "engine_a": ea, "engine_b": eb}


def link_graph(system: RootSystem, alpha: Root, beta: Root, spec: FieldSpec):
    """
    The bipartite link CC(X_{α,β}, (X_α, X_β)) built from normal forms.

    Left vertices are the cosets gX_α (ids 0..), right vertices the cosets gX_β.
    """
    from core.coset_complex import LinkGraph

    s = coset_structure(system, alpha, beta, spec)
    left = np.arange(s["total"], dtype=np.int64) // s["size_a"]
    n_left = s["total"] // s["size_a"]
    right = s["perm"] // s["size_b"] + n_left
    return LinkGraph.from_pairs((str(alpha), str(beta)), left, right, "direct")


def link_operator(system: RootSystem, alpha: Root, beta: Root, spec: FieldSpec,
                  budget: Optional[int] = None) -> SparseWalkGraph:
    """Square side X_{α,β}/X_α as a coset-averaging operator."""
    s = coset_structure(system, alpha, beta, spec, budget)
    return SparseWalkGraph.coset(s["perm"], s["size_a"], s["size_b"], name=f"square side {alpha}|{beta}")


def cayley_side(system: RootSystem, alpha: Root, beta: Root, spec: FieldSpec) -> SparseWalkGraph:
    """
    Squared link side X_{α,β}/X_α as an abelian Cayley multigraph, α the shorter root.

    Steps are x_α(f0)x_β(f1)x_α(−f0) with deg f0, deg f1 ≤ min(1, m−1),
    collected with α last; the remaining coordinates are spread into base-p
    digits up to each root's degree cap.

    Raises:
        DomainError: a G2 pair, or a side that is not abelian
    """
    cone, a, b = _oriented_pair(system, alpha, beta)
    if cone.link_case.startswith("g2"):
        raise DomainError("G2 link sides are not abelian; use the coset operator")
    ea, _ = _side_engines(system, a, b, spec)
    caps = ea.caps()[:-1]
    digits_total = sum(c + 1 for c in caps)
    check_budget(spec.p ** digits_total, 16 * 3, "Cayley side")

    low = spec.elements_up_to_degree(min(1, spec.m - 1))
    f0, f1 = np.meshgrid(low, low, indexing="ij")
    f0, f1 = f0.reshape(-1), f1.reshape(-1)
    rows = step_rows(ea, a, b, f0, f1)[:, :-1]

    rng = np.random.default_rng(int(config.get("spectra.seed", 42)))
    picks = rng.integers(0, len(rows), size=(min(64, len(rows)), 2))
    for i, j in picks:
        prod = ea.collect_arrays(ea.rows_word(np.append(rows[[i]], [[0]], axis=1))
                                 + ea.rows_word(np.append(rows[[j]], [[0]], axis=1)), lanes=1)[0, :-1]
        if not np.array_equal(prod, spec.add(rows[i], rows[j])):
            raise DomainError("link side is not abelian in these coordinates")

    columns = []
    for k, cap in enumerate(caps):
        dig = spec.digits(rows[:, k])
        if np.any(dig[:, cap + 1:]):
            raise IntegrityError(f"step coordinate {k} exceeds its degree cap {cap}")
        columns.extend(dig[:, j] for j in range(cap + 1))
    counts = np.zeros((spec.p,) * digits_total, dtype=np.int64)
    np.add.at(counts, tuple(columns), 1)
    g = SparseWalkGraph.cayley(counts, name=f"cayley side {a}|{b} over F_{spec.q}")
    logger.info(f"🔧 Cayley side {cone.link_case}: {g.n} vertices, degree {g.degree}")
    return g


@log_performance
def link_lambda2(system: RootSystem, alpha: Root, beta: Root, spec: FieldSpec, tol: Optional[float] = None,
                 method: str = "both", oracle: bool = False) -> Dict[str, Any]:
    """
    λ₂ of the link CC(α, β) through its squared side.

    method: exact (FFT of a Cayley side), power, or both. G2 pairs use the
    coset operator and power iteration. With oracle=True the full Cayley
    spectrum is compared with the character sums when the side has one
    vertex per character (m = 3 for Case 2, m = 7 for Case 3).
    """
    tol = tol or float(config.get("spectra.tolerance", 1e-9))
    cone, a, b = _oriented_pair(system, alpha, beta)
    result: Dict[str, Any] = {"case": cone.link_case, "generation_case": cone.generation_case,
                              "pair": [str(a), str(b)], "p": spec.p, "m": spec.m}
    if cone.link_case.startswith("g2"):
        side = link_operator(system, a, b, spec, budget=int(config.get("budgets.max_g2_vertices", 400000)) * 64)
        method = "power"
    else:
        side = cayley_side(system, a, b, spec)
    result["vertices"] = side.n
    result["degree"] = side.degree

    if method in ("exact", "both") and side.backend == "cayley":
        eig = np.sort(side.exact_eigenvalues())[::-1]
        ones = int(np.sum(np.abs(eig - 1.0) < 1e-9))
        if ones > 1:
            raise DomainError(f"link is disconnected ({ones} components)")
        top = float(eig[1]) if len(eig) > 1 else 0.0
        result["square_exact"] = round(top, 12)
        if oracle:
            oracle_fn, k = {"case2": (charsum_case2, 5), "case3": (charsum_case3, 9)}.get(cone.link_case, (None, 0))
            if oracle_fn is not None and side.n == spec.p ** k:
                result["oracle"] = oracle_agreement(oracle_fn(spec.p), side)
    if method in ("power", "both"):
        report = second_eigenvalue(side, tol=tol)
        result["square_power"] = round(report.lambda2, 12)
        result["power_report"] = report.as_dict()
    square = result.get("square_exact", result.get("square_power"))
    result["square_lambda2"] = square
    result["lambda2"] = round(math.sqrt(max(square, 0.0)), 12)
    if "square_exact" in result and "square_power" in result:
        result["agree"] = bool(abs(result["square_exact"] - result["square_power"]) <= 1e-6)
    logger.info(f"📊 Link {cone.link_case} over F_{spec.q}: λ₂ = {result['lambda2']:.6f}")
    return result


# ----------------------------------------------------------------------
# character-sum oracles


@dataclass
class CharsumSpectrum:
    """Eigenvalue counts[r]/denominator for every character r ∈ F_p^k, r in lexicographic order."""
    case: str
    p: int
    k: int
    counts: np.ndarray
    denominator: int
    constant: Optional[int] = None

    def characters(self) -> np.ndarray:
        return np.stack(np.unravel_index(np.arange(self.p ** self.k), (self.p,) * self.k), axis=1)

    def value(self, r: Sequence[int]) -> Fraction:
        idx = int(np.ravel_multi_index(tuple(int(x) % self.p for x in r), (self.p,) * self.k))
        return Fraction(int(self.counts[idx]), self.denominator)

    def trivial(self) -> Fraction:
        return Fraction(int(self.counts[0]), self.denominator)

    def max_nontrivial(self) -> Fraction:
        return Fraction(int(self.counts[1:].max()), self.denominator)

    def distribution(self) -> Dict[Fraction, int]:
        values, mult = np.unique(self.counts, return_counts=True)
        return {Fraction(int(v), self.denominator): int(c) for v, c in zip(values, mult)}

    def sorted_values(self) -> np.ndarray:
        return np.sort(self.counts.astype(float) / self.denominator)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case,
            "p": self.p,
            "characters": self.p ** self.k,
            "denominator": self.denominator,
            "constant": self.constant,
            "trivial": self.trivial(),
            "max_nontrivial": self.max_nontrivial(),
            "distribution": {str(k): v for k, v in sorted(self.distribution().items(), reverse=True)},
        }


def _charsum(p: int, k: int, forms) -> np.ndarray:
    """counts[r] = #{(c, d) : forms(r, c, d) both vanish mod p}, chunked over r."""
    c, d = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    c, d = c.reshape(-1), d.reshape(-1)
    total = p ** k
    chunk = max(1, int(config.get("complex.chunk_size", 1000000)) // (p * p))
    counts = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        r = np.stack(np.unravel_index(idx, (p,) * k), axis=0)[:, :, None]
        h, h2 = forms(r, c[None, :], d[None, :])
        counts[start:start + len(idx)] = np.sum((h % p == 0) & (h2 % p == 0), axis=1)
    return counts


def charsum_case2(p: int) -> CharsumSpectrum:
    """Pr_{c,d}[h = h′ = 0] with h = r1 + r3c + r4d, h′ = r2 + r4c + r5d, for all r ∈ F_p^5."""
    if p <= 2:
        raise DomainError("character sums need p > 2")

    def forms(r, c, d):
        return r[0] + r[2] * c + r[3] * d, r[1] + r[3] * c + r[4] * d

    spectrum = CharsumSpectrum("case2", p, 5, _charsum(p, 5, forms), p * p)
    logger.info(f"📊 Case 2 character sums p={p}: max nontrivial eigenvalue {spectrum.max_nontrivial()}")
    return spectrum


def oracle_agreement(spectrum: CharsumSpectrum, side: SparseWalkGraph, tol: float = 1e-8) -> Dict[str, Any]:
    """
    Compare the sorted character-sum eigenvalues with the sorted Cayley spectrum.

    Raises:
        DomainError: side is not a Cayley walk
    """
    exact = np.sort(side.exact_eigenvalues())
    out: Dict[str, Any] = {"case": spectrum.case, "characters": len(spectrum.counts), "vertices": side.n}
    if side.n != len(spectrum.counts):
        out["comparable"] = False
        out["agree"] = None
        return out
    gap = float(np.max(np.abs(exact - spectrum.sorted_values())))
    out.update({"comparable": True, "max_deviation": gap, "agree": bool(gap <= tol)})
    log = logger.info if out["agree"] else logger.error
    log(f"{'✅' if out['agree'] else '❌'} {spectrum.case} eigenvalue multiset vs character sums: "
        f"max deviation {gap:.2e}")
    return out


def case3_constant(p: int) -> int:
    """
    C in the Case 3 quadratics, read off the calibrated B2 constants.

    The step x_α(f0)x_β(f1)x_α(−f0) has coordinates (f1, k1·f0f1, k2·f0²f1);
    C = k2/k1² mod p.
    """
    system = build_root_system("B", 2)
    long_root, short_root = system.simples
    spec = FieldSpec.from_params(p, 1)
    ea, _ = _side_engines(system, short_root, long_root, spec)
    row = step_rows(ea, short_root, long_root, np.array([1]), np.array([1]))[0]
    k1, k2 = int(row[1]), int(row[2])
    if k1 == 0 or k2 == 0:
        raise IntegrityError(f"degenerate Case 3 step coordinates ({k1}, {k2})")
    c = (k2 * pow(k1, -2, p)) % p
    logger.debug(f"🔍 Case 3 constant over F_{p}: k1={k1}, k2={k2}, C={c}")
    return c


def charsum_case3(p: int, constant: Optional[int] = None) -> CharsumSpectrum:
    """
    Pr_{c,d}[h = h′ = 0] over r ∈ F_p^9 with
    h = r1 + r3c + r4d + C(r6c² + 2r7cd + r8d²),
    h′ = r2 + r4c + r5d + C(r7c² + 2r8cd + r9d²).
    """
    if p <= 2:
        raise DomainError("character sums need p > 2")
    C = case3_constant(p) if constant is None else int(constant) % p
    if C == 0:
        raise DomainError("Case 3 constant must be non-zero in F_p")

    def forms(r, c, d):
        h = r[0] + r[2] * c + r[3] * d + C * (r[5] * c * c + 2 * r[6] * c * d + r[7] * d * d)
        h2 = r[1] + r[3] * c + r[4] * d + C * (r[6] * c * c + 2 * r[7] * c * d + r[8] * d * d)
        return h, h2

    spectrum = CharsumSpectrum("case3", p, 9, _charsum(p, 9, forms), p * p, constant=C)
    logger.info(f"📊 Case 3 character sums p={p}, C={C}: max nontrivial eigenvalue {spectrum.max_nontrivial()}")
    return spectrum


# ----------------------------------------------------------------------
# trickling down and certificates


def trickle_bound(gamma: float, d: int) -> float:
    """
    γ/(1 − (d−1)γ), the global bound from γ-expanding (d−2)-links.

    Raises:
        DomainError: γ outside [0, 1/d] or d < 1
    """
    if d < 1:
        raise DomainError(f"dimension d={d} must be at least 1")
    if gamma < 0 or gamma > 1.0 / d:
        raise DomainError(f"trickling down needs 0 ≤ γ ≤ 1/d, got γ={gamma:.6f}, d={d}")
    return gamma / (1 - (d - 1) * gamma)


def corollary_bound(p: int, d: int) -> float:
    """1/(√(p/2) − d + 1); meaningful only when it lies in (0, 1)."""
    denom = math.sqrt(p / 2.0) - d + 1
    if denom <= 0:
        return math.inf
    return 1.0 / denom


def corollary_threshold(lam: float, d: int = 2) -> float:
    """Smallest p with corollary_bound(p, d) ≤ λ; 2(1+λ)²/λ² for d = 2."""
    if lam <= 0:
        raise DomainError("target λ must be positive")
    return 2.0 * (1.0 / lam + d - 1) ** 2


def _chain(gammas: Dict[str, float], d: int, p: int, target: Optional[float]) -> Dict[str, Any]:
    gamma = max(gammas.values()) if gammas else 0.0
    out: Dict[str, Any] = {"link_lambda2": gammas, "gamma": round(gamma, 12), "dimension": d, "p": p}
    if gamma <= 1.0 / d:
        final = trickle_bound(gamma, d)
        out["method"] = "trickle"
    else:
        final = corollary_bound(p, d)
        out["method"] = "corollary"
        out["trickle_inapplicable"] = f"γ = {gamma:.6f} exceeds 1/d = {1.0 / d:.6f}"
    out["final_lambda"] = round(final, 12) if math.isfinite(final) else None
    passed = math.isfinite(final) and 0 < final < 1 if out["method"] == "corollary" else final < 1
    if not passed:
        out["reason"] = "p too small for the corollary bound"
    if target is not None:
        threshold = corollary_threshold(target, d)
        out["target"] = target
        out["threshold_p"] = round(threshold, 6)
        if p < threshold:
            passed = False
            out["reason"] = f"p = {p} is below the threshold {threshold:.3f} for λ = {target}"
        elif not final <= target:
            passed = False
            out["reason"] = f"final λ {final:.6f} exceeds target {target}"
    out["passed"] = bool(passed)
    return out


@log_performance
def hdx_certificate(K, tol: Optional[float] = None, target: Optional[float] = None,
                    threads: int = 1) -> Dict[str, Any]:
    """
    Certificate for a built complex: every link connected, λ₂ of each
    (d−2)-type link at the identity face, then trickling down.

    Raises:
        CertificateFailure: a disconnected link
    """
    from core.coset_complex import connectivity_check, extract_vertex_link_at_identity

    connectivity = connectivity_check(K)
    if not connectivity["connected"]:
        logger.error(f"❌ Certificate failed: disconnected link {connectivity['witness']}")
        raise CertificateFailure("complex or link is disconnected", witness=connectivity["witness"] or
                                 {"skeleton_components": connectivity["skeleton_components"]})
    d = K.dimension
    type_sets = [[t for t in range(d + 1) if t not in pair]
                 for pair in [(a, b) for a in range(d + 1) for b in range(a + 1, d + 1)]]

    def measure(face_types):
        graph = SparseWalkGraph.from_link(extract_vertex_link_at_identity(K, face_types))
        limit = int(config.get("spectra.dense_limit", 4000))
        report = second_eigenvalue(graph, tol=tol, method="dense" if graph.n <= limit else "power")
        name = "|".join(K.types[t] for t in range(d + 1) if t not in face_types)
        return name, report

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(measure, type_sets))
    gammas = {name: round(r.lambda2, 12) for name, r in results}
    cert = _chain(gammas, d, int(K.metadata.get("p", 0)), target)
    cert.update({"mode": "complex", "connectivity": connectivity,
                 "links": {name: r.as_dict() for name, r in results}})
    logger.info(f"{'✅' if cert['passed'] else '❌'} HDX certificate ({cert['method']}): final λ = {cert['final_lambda']}")
    return cert


@log_performance
def link_family_certificate(system: RootSystem, spec: FieldSpec, variant: str = "standard",
                            tol: Optional[float] = None, target: Optional[float] = None,
                            threads: int = 1) -> Dict[str, Any]:
    """
    Certificate from the links CC(α, β) for all pairs of 𝒮, at any m.

    Raises:
        CertificateFailure: Φ = G2, or a disconnected link
    """
    if system.family == "G":
        logger.error("❌ Certificate refused: Φ = G2 is not covered by the link expansion theorem")
        raise CertificateFailure("unsupported: Φ = G₂", witness={"family": "G2", "reason": "link bound needs Φ ≠ G2"})
    special = special_set(system, variant)
    members = list(special.members)
    pairs = [(members[i], members[j]) for i in range(len(members)) for j in range(i + 1, len(members))]

    def measure(pair):
        try:
            return pair, link_lambda2(system, pair[0], pair[1], spec, tol=tol, method="exact")
        except DomainError as e:
            raise CertificateFailure(f"link {pair[0]}|{pair[1]}: {e}", witness={"pair": [str(r) for r in pair]})

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(measure, pairs))
    gammas = {f"{a}|{b}": r["lambda2"] for (a, b), r in results}
    d = system.rank
    cert = _chain(gammas, d, spec.p, target)
    cert.update({"mode": "links", "system": system.name, "variant": variant, "m": spec.m,
                 "links": {f"{a}|{b}": r for (a, b), r in results}})
    logger.info(f"{'✅' if cert['passed'] else '❌'} HDX link certificate {system.name}: final λ = {cert['final_lambda']}")
    return cert
