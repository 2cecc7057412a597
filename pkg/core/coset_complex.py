"""
Coset complexes CC(G, (H_α)_{α ∈ 𝒮}) over enumerated matrix groups.

Vertices of type α are the cosets gH_α, represented by their smallest element
code. Vertex ids are global: part t holds ids offset_t .. offset_t + n_t − 1.
One maximal face per group element g: (gH_α)_α. Links are read off the face
list; graph links (two remaining types) come back as LinkGraph.
"""

import json
import os
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from core.algebra.gf import FieldSpec
from core.algebra.matgroups import (
    AdjointTable, CenterDesc, GroupTable, MatrixRealization, compute_center, matrix_closure, z_times,
)
from core.algebra.rootsys import GeneratingSet, Root
from core.config import config
from core.errors import DomainError, IntegrityError, ResourceBudgetError
from core.reporting import dumps_report
from utils.diagnostics import check_budget
from utils.logging_setup import get_logger, log_performance

logger = get_logger(__name__)


# ----------------------------------------------------------------------
# types


@dataclass
class LinkGraph:
    """
    Bipartite graph between two vertex types of a link.

    left/right hold global vertex ids; u/v index into them per edge.
    """
    types: Tuple[str, str]
    left: np.ndarray
    right: np.ndarray
    u: np.ndarray
    v: np.ndarray
    multiplicity: np.ndarray
    provenance: str = "extracted"

    @classmethod
    def from_pairs(cls, types: Tuple[str, str], left_ids: np.ndarray, right_ids: np.ndarray,
                   provenance: str, counts: Optional[np.ndarray] = None) -> "LinkGraph":
        """Aggregate (left id, right id) pairs into a multigraph."""
        left, u_all = np.unique(left_ids, return_inverse=True)
        right, v_all = np.unique(right_ids, return_inverse=True)
        weights = np.ones(len(u_all), dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        codes = u_all.astype(np.int64) * len(right) + v_all
        edge_codes, inverse = np.unique(codes, return_inverse=True)
        mult = np.bincount(inverse, weights=weights).astype(np.int64)
        return cls(types, left, right, edge_codes // len(right), edge_codes % len(right), mult, provenance)

    @property
    def n_left(self) -> int:
        return len(self.left)

    @property
    def n_right(self) -> int:
        return len(self.right)

    @property
    def num_edges(self) -> int:
        return int(self.multiplicity.sum())

    def degrees(self) -> Tuple[np.ndarray, np.ndarray]:
        left = np.bincount(self.u, weights=self.multiplicity, minlength=self.n_left).astype(np.int64)
        right = np.bincount(self.v, weights=self.multiplicity, minlength=self.n_right).astype(np.int64)
        return left, right

    def regular_degree(self) -> Optional[int]:
        """The common degree, or None when the graph is not regular."""
        left, right = self.degrees()
        values = np.unique(np.concatenate([left, right]))
        return int(values[0]) if len(values) == 1 else None

    def edge_multiset(self) -> np.ndarray:
        """Rows (left id, right id, multiplicity) in sorted order."""
        rows = np.stack([self.left[self.u], self.right[self.v], self.multiplicity], axis=1)
        order = np.lexsort((rows[:, 1], rows[:, 0]))
        return rows[order]

    def adjacency(self):
        """Symmetric CSR adjacency on left ids followed by right ids."""
        n = self.n_left + self.n_right
        rows = np.concatenate([self.u, self.v + self.n_left])
        cols = np.concatenate([self.v + self.n_left, self.u])
        data = np.concatenate([self.multiplicity, self.multiplicity])
        return coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    def sides(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.n_left, dtype=np.int8), np.ones(self.n_right, dtype=np.int8)])

    def to_networkx(self) -> nx.Graph:
        """Simple-graph export; multiplicity kept as an edge attribute."""
        graph = nx.Graph(collapsed_multiplicity=bool(np.any(self.multiplicity > 1)))
        graph.add_nodes_from((int(x), {"bipartite": 0}) for x in self.left)
        graph.add_nodes_from((int(x), {"bipartite": 1}) for x in self.right)
        for a, b, mult in self.edge_multiset():
            graph.add_edge(int(a), int(b), multiplicity=int(mult))
        return graph


@dataclass
class CosetComplex:
    """
    A pure partite complex given by its maximal faces.

    labels[g, t] is the vertex of type t in the face of group element g; it is
    None for links, which only keep the face list.
    """
    types: List[str]
    parts: List[np.ndarray]
    maximal_faces: np.ndarray
    labels: Optional[np.ndarray] = None
    representatives: Optional[np.ndarray] = None
    subgroup_table: Dict[str, np.ndarray] = field(default_factory=dict)
    special: Optional[GeneratingSet] = None
    table: Optional[GroupTable] = field(default=None, repr=False)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.types) - 1

    @property
    def num_vertices(self) -> int:
        return int(sum(len(p) for p in self.parts))

    @property
    def num_faces(self) -> int:
        return int(len(self.maximal_faces))

    @property
    def offsets(self) -> np.ndarray:
        return np.array([int(p[0]) if len(p) else 0 for p in self.parts], dtype=np.int64)

    def vertex_type(self, vertex: int) -> int:
        for t, part in enumerate(self.parts):
            if len(part) and part[0] <= vertex <= part[-1]:
                return t
        raise DomainError(f"vertex {vertex} is not in the complex")

    def counts(self) -> Dict[str, Any]:
        return {
            "maximal_faces": self.num_faces,
            "vertices_per_type": {t: int(len(p)) for t, p in zip(self.types, self.parts)},
            "subgroup_sizes": {t: int(len(h)) for t, h in self.subgroup_table.items()},
        }

    def identity_face(self) -> np.ndarray:
        """Vertex ids of (H_α)_α."""
        if self.labels is None or self.table is None:
            raise DomainError("complex has no group labels")
        return self.labels[self.table.identity_index]

    def is_partite(self) -> bool:
        """Every face meets each part at most once."""
        for t, part in enumerate(self.parts):
            col = self.maximal_faces[:, t]
            if len(part) and not np.all((col >= part[0]) & (col <= part[-1])):
                return False
        return True

    def is_pure(self) -> bool:
        """Every maximal face has one vertex per type and every vertex lies in a maximal face."""
        faces = self.maximal_faces
        if faces.ndim != 2 or faces.shape[1] != len(self.types):
            return False
        used = np.unique(faces)
        every = np.concatenate(self.parts) if self.parts else np.empty(0, dtype=np.int64)
        return bool(len(used) == len(every) and np.array_equal(used, np.sort(every)))


# ----------------------------------------------------------------------
# construction


def coset_labels(table: GroupTable, generators: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Label each element of the table by its coset gH, H = ⟨generators⟩.

    Returns:
        (label per element, table index of each coset's smallest element),
        labels numbered by increasing representative
    """
    n = len(table)
    if not generators:
        return np.arange(n, dtype=np.int64), np.arange(n, dtype=np.int64)
    src = np.tile(np.arange(n, dtype=np.int64), len(generators))
    dst = np.concatenate([table.right_multiply(g) for g in generators])
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n)).tocsr()
    ncomp, comp = connected_components(graph, directed=True, connection="weak")
    reps = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(reps, comp, np.arange(n, dtype=np.int64))
    order = np.argsort(reps)
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp, dtype=np.int64)
    return rank[comp], reps[order]


def _unique_rows(rows: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """Distinct rows; sizes bound each column's local labels."""
    total = 1
    for s in sizes:
        total *= max(int(s), 1)
    if total < 2 ** 62 and rows.shape[1]:
        codes = np.ravel_multi_index(tuple(rows.T), tuple(max(int(s), 1) for s in sizes))
        _, first = np.unique(codes, return_index=True)
        return rows[np.sort(first)]
    return np.unique(rows, axis=0)


def _subgroup_codes(table: GroupTable, realization: MatrixRealization, gens: Sequence[np.ndarray]) -> np.ndarray:
    if not gens:
        return np.array([table.canonical(np.array([realization.encode(realization.identity())]))[0]],
                        dtype=np.int64)
    return np.unique(table.canonical(matrix_closure(realization, gens)))


@log_performance
def build_complex(table: GroupTable, special: GeneratingSet, spec: Optional[FieldSpec] = None,
                  subgroup_generators: Optional[Dict[Root, List[np.ndarray]]] = None) -> CosetComplex:
    """
    Build CC(G, (H_α)) from an enumerated group.

    Args:
        table: the enumerated group (universal or adjoint)
        special: the generating set 𝒮
        spec: coefficient field; the realization's field when omitted
        subgroup_generators: per-root overrides of the generators of H_α

    Raises:
        ResourceBudgetError: labels for the whole group do not fit the memory budget
        IntegrityError: cosets of unequal size
    """
    realization = table.realization
    spec = spec or realization.field
    if spec != realization.field:
        raise DomainError("field of the group table differs from the requested field")
    n = len(table)
    d1 = len(special)
    check_budget(n * (d1 + 2), 8, "coset complex labels")
    logger.info(f"🚀 Building coset complex on {n} group elements, {d1} types")

    labels = np.empty((n, d1), dtype=np.int64)
    parts: List[np.ndarray] = []
    reps: List[np.ndarray] = []
    subgroups: Dict[str, np.ndarray] = {}
    types = [str(a) for a in special.members]
    offset = 0
    for t, alpha in enumerate(special.members):
        if subgroup_generators is not None and alpha in subgroup_generators:
            gens = list(subgroup_generators[alpha])
        else:
            gens = realization.subgroup_generators(alpha)
        h_codes = _subgroup_codes(table, realization, gens)
        local, rep_idx = coset_labels(table, gens)
        count = len(rep_idx)
        if count * len(h_codes) != n:
            logger.error(f"❌ Type {types[t]}: {count} cosets of a subgroup of order {len(h_codes)} in {n} elements")
            raise IntegrityError(f"cosets of H_{types[t]} have unequal sizes")
        labels[:, t] = local + offset
        parts.append(np.arange(offset, offset + count, dtype=np.int64))
        reps.append(table.codes[rep_idx])
        subgroups[types[t]] = h_codes
        logger.info(f"🔍 Type {types[t]}: |H| = {len(h_codes)}, {count} vertices")
        offset += count

    sizes = [len(p) for p in parts]
    local_rows = labels - np.array([int(p[0]) for p in parts], dtype=np.int64)
    faces = _unique_rows(local_rows, sizes) + np.array([int(p[0]) for p in parts], dtype=np.int64)
    metadata = {
        "realization": realization.name,
        "p": spec.p,
        "m": spec.m,
        "modulus": list(spec.modulus),
        "variant": special.variant,
        "adjoint": isinstance(table, AdjointTable),
        "group_order": n,
        "overridden_types": sorted(str(a) for a in (subgroup_generators or {})),
    }
    complex_ = CosetComplex(types, parts, faces, labels, np.concatenate(reps), subgroups, special, table, metadata)
    logger.info(f"✅ Coset complex built: {complex_.num_faces} maximal faces, {complex_.num_vertices} vertices")
    return complex_


# ----------------------------------------------------------------------
# links


def _face_types(K: CosetComplex, sigma: Sequence[int]) -> List[int]:
    types = [K.vertex_type(int(v)) for v in sigma]
    if len(set(types)) != len(types):
        raise DomainError("face has two vertices of the same type")
    return types


def _containing_rows(K: CosetComplex, sigma: Sequence[int], types: Sequence[int], rows: np.ndarray) -> np.ndarray:
    mask = np.ones(len(rows), dtype=bool)
    for v, t in zip(sigma, types):
        mask &= rows[:, t] == int(v)
    return mask


def link(K: CosetComplex, sigma: Sequence[int], validate: bool = False):
    """
    The link of a face, given by its vertex ids.

    Returns K for the empty face, a LinkGraph when two types remain, and a
    CosetComplex on the remaining types otherwise.

    Raises:
        DomainError: sigma is not a face, or is maximal
        IntegrityError: validation against the direct construction failed
    """
    sigma = [int(v) for v in sigma]
    if not sigma:
        return K
    types = _face_types(K, sigma)
    mask = _containing_rows(K, sigma, types, K.maximal_faces)
    if not mask.any():
        raise DomainError(f"{sigma} is not a face of the complex")
    remaining = [t for t in range(len(K.types)) if t not in types]
    if not remaining:
        raise DomainError("the link of a maximal face is empty")
    rows = K.maximal_faces[mask][:, remaining]

    if len(remaining) == 2:
        graph = LinkGraph.from_pairs((K.types[remaining[0]], K.types[remaining[1]]), rows[:, 0], rows[:, 1],
                                     "extracted")
        if validate:
            anchor = _anchor_index(K, sigma, types)
            direct = direct_link(K, types, anchor)
            if not np.array_equal(graph.edge_multiset(), direct.edge_multiset()):
                logger.error(f"❌ Link of {sigma} differs from the direct construction")
                raise IntegrityError(f"link of {sigma} differs from the direct construction")
        return graph

    parts = [np.unique(rows[:, k]) for k in range(len(remaining))]
    faces = np.unique(rows, axis=0)
    return CosetComplex([K.types[t] for t in remaining], parts, faces,
                        metadata={"link_of": sigma, "types": [K.types[t] for t in types]})


def _anchor_index(K: CosetComplex, sigma: Sequence[int], types: Sequence[int]) -> int:
    """A group element whose face contains sigma."""
    if K.labels is None:
        raise DomainError("complex has no group labels")
    hits = np.flatnonzero(_containing_rows(K, sigma, types, K.labels))
    if not len(hits):
        raise DomainError(f"{list(sigma)} is not a face of the complex")
    return int(hits[0])


def extract_vertex_link_at_identity(K: CosetComplex, face_types: Sequence[int], validate: bool = False):
    """Link of the face of the given types inside (H_α)_α."""
    identity = K.identity_face()
    return link(K, [int(identity[t]) for t in face_types], validate=validate)


def direct_link(K: CosetComplex, face_types: Sequence[int], anchor: Optional[int] = None) -> LinkGraph:
    """
    CC(X_{𝒮∖T}, (X_{𝒮∖T∖{α}})) built from matrices, relabeled by K's cosets.

    Cosets are computed inside X_{𝒮∖T}; each one is then mapped to the K
    vertex of anchor·(its representative).
    """
    if K.table is None or K.special is None or K.labels is None:
        raise DomainError("direct construction needs a complex built from a group table")
    face_types = sorted(int(t) for t in face_types)
    remaining = [t for t in range(len(K.types)) if t not in face_types]
    if len(remaining) != 2:
        raise DomainError("direct construction is implemented for graph links (two remaining types)")
    realization = K.table.realization
    members = K.special.members
    roots = [members[t] for t in remaining]
    x_codes = matrix_closure(realization, realization.graded_generators(roots))
    sub = GroupTable(realization, x_codes)

    anchor_mat = realization.identity() if anchor is None else K.table.matrices(anchor)
    mapped = []
    local = []
    for t in remaining:
        others = [r for r in roots if r != members[t]]
        lab, rep_idx = coset_labels(sub, realization.graded_generators(others))
        rep_codes = realization.encode(realization.matmul(anchor_mat, realization.decode(sub.codes[rep_idx])))
        mapped.append(K.labels[K.table.index_of(np.atleast_1d(rep_codes)), t])
        local.append(lab)
    sizes = [len(mp) for mp in mapped]
    rows = _unique_rows(np.stack(local, axis=1), sizes)
    return LinkGraph.from_pairs((K.types[remaining[0]], K.types[remaining[1]]),
                                mapped[0][rows[:, 0]], mapped[1][rows[:, 1]], "direct")


def link_agreement(K: CosetComplex, face_types: Sequence[int]) -> bool:
    """Extracted identity link equals the direct construction as an edge multiset."""
    extracted = extract_vertex_link_at_identity(K, face_types)
    direct = direct_link(K, face_types)
    ok = bool(np.array_equal(extracted.edge_multiset(), direct.edge_multiset()))
    logger.info(f"{'✅' if ok else '❌'} Link of type {[K.types[t] for t in face_types]} vs direct construction: "
                f"{extracted.num_edges} vs {direct.num_edges} edges")
    return ok


# ----------------------------------------------------------------------
# checks


def subgroup_intersection_check(realization: MatrixRealization, psi: Sequence[Root], psi2: Sequence[Root]) -> bool:
    """X_Ψ ∩ X_Ψ′ = X_{Ψ∩Ψ′}, by enumeration."""
    common = [r for r in psi if r in psi2]
    x1 = matrix_closure(realization, realization.graded_generators(psi))
    x2 = matrix_closure(realization, realization.graded_generators(psi2))
    x12 = matrix_closure(realization, realization.graded_generators(common))
    meet = np.intersect1d(x1, x2)
    ok = bool(np.array_equal(meet, x12))
    logger.info(f"{'✅' if ok else '❌'} Subgroup intersection: |X_Ψ ∩ X_Ψ′| = {len(meet)}, |X_(Ψ∩Ψ′)| = {len(x12)}")
    return ok


def transitivity_check(K: CosetComplex) -> Dict[str, Any]:
    """∩_α H_α = {1} and one maximal face per group element."""
    tables = list(K.subgroup_table.values())
    meet = tables[0]
    for h in tables[1:]:
        meet = np.intersect1d(meet, h)
    group_order = int(K.metadata.get("group_order", len(K.labels) if K.labels is not None else 0))
    trivial = len(meet) == 1
    result = {
        "intersection_size": int(len(meet)),
        "intersection_trivial": bool(trivial),
        "maximal_faces": K.num_faces,
        "group_order": group_order,
        "simply_transitive": bool(trivial and K.num_faces == group_order),
    }
    logger.info(f"{'✅' if result['simply_transitive'] else '⚠️'} Transitivity: |∩H_α| = {len(meet)}, "
                f"{K.num_faces} faces for |G| = {group_order}")
    return result


def _components(n: int, src: np.ndarray, dst: np.ndarray) -> Tuple[int, np.ndarray]:
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n)).tocsr()
    return connected_components(graph, directed=False)


@log_performance
def connectivity_check(K: CosetComplex) -> Dict[str, Any]:
    """
    Connectivity of the 1-skeleton and of every link of dimension ≥ 1.

    All links of one face type are checked together: nodes are (face, vertex)
    pairs, so each link is its own block of the graph.
    """
    faces = K.maximal_faces
    ntypes = len(K.types)
    pairs = [(a, b) for a in range(ntypes) for b in range(a + 1, ntypes)]
    n = K.num_vertices
    if pairs:
        src = np.concatenate([faces[:, a] for a, _ in pairs])
        dst = np.concatenate([faces[:, b] for _, b in pairs])
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    ncomp, _ = _components(n, src, dst)
    report: Dict[str, Any] = {
        "skeleton_connected": bool(ncomp == 1),
        "skeleton_components": int(ncomp),
        "links": {},
        "witness": None,
    }

    all_ok = True
    for size in range(1, ntypes - 1):
        for face_types in _subsets(ntypes, size):
            remaining = [t for t in range(ntypes) if t not in face_types]
            sigma_rows = faces[:, face_types]
            _, sigma_id = np.unique(sigma_rows, axis=0, return_inverse=True)
            sigma_id = sigma_id.reshape(-1).astype(np.int64)
            nsigma = int(sigma_id.max()) + 1 if len(sigma_id) else 0
            node_src, node_dst = [], []
            for i in range(len(remaining)):
                for j in range(i + 1, len(remaining)):
                    node_src.append(sigma_id * n + faces[:, remaining[i]])
                    node_dst.append(sigma_id * n + faces[:, remaining[j]])
            keys, inverse = np.unique(np.concatenate(node_src + node_dst), return_inverse=True)
            half = len(inverse) // 2
            ncomp, comp = _components(len(keys), inverse[:half], inverse[half:])
            node_sigma = keys // n
            per_sigma = np.bincount(np.unique(node_sigma * ncomp + comp) // ncomp, minlength=nsigma)
            bad = np.flatnonzero(per_sigma > 1)
            name = ",".join(K.types[t] for t in face_types)
            report["links"][name] = {"faces": nsigma, "disconnected": int(len(bad))}
            if len(bad):
                all_ok = False
                if report["witness"] is None:
                    row = sigma_rows[np.flatnonzero(sigma_id == bad[0])[0]]
                    report["witness"] = {"face": [int(v) for v in row], "types": name,
                                         "components": int(per_sigma[bad[0]])}
    report["all_links_connected"] = all_ok
    report["connected"] = bool(report["skeleton_connected"] and all_ok)
    logger.info(f"{'✅' if report['connected'] else '❌'} Connectivity: skeleton components {ncomp}, "
                f"all links connected = {all_ok}")
    return report


def _subsets(n: int, size: int) -> List[List[int]]:
    return [list(c) for c in combinations(range(n), size)]


def degree_stats(K: CosetComplex) -> Dict[str, Any]:
    """Maximal faces through each vertex, per type."""
    per_type = {}
    overall = 0
    for t, (name, part) in enumerate(zip(K.types, K.parts)):
        counts = np.bincount(K.maximal_faces[:, t] - (int(part[0]) if len(part) else 0), minlength=len(part))
        h = K.subgroup_table.get(name)
        per_type[name] = {
            "min": int(counts.min()) if len(counts) else 0,
            "max": int(counts.max()) if len(counts) else 0,
            "uniform": bool(len(counts) and counts.min() == counts.max()),
            "subgroup_size": int(len(h)) if h is not None else None,
        }
        overall = max(overall, per_type[name]["max"])
    return {"per_type": per_type, "max": int(overall)}


# ----------------------------------------------------------------------
# adjoint complex and local balls


@log_performance
def adjoint_complex(K: CosetComplex, center: Optional[CenterDesc] = None) -> CosetComplex:
    """
    The complex of G/Z with subgroups Z·H_α/Z.

    Raises:
        IntegrityError: Z ∩ H_α ≠ {1} for some α
    """
    if K.table is None or K.special is None:
        raise DomainError("adjoint complex needs a complex built from a group table")
    if K.metadata.get("overridden_types"):
        raise DomainError("adjoint complex of a complex with overridden subgroups is not supported")
    realization = K.table.realization
    center = center or compute_center(realization)
    z_codes = center.codes(realization)
    identity = realization.encode(realization.identity())
    for name, h in K.subgroup_table.items():
        meet = np.intersect1d(z_codes, h)
        if len(meet) != 1 or meet[0] != identity:
            logger.error(f"❌ Z ∩ H_{name} has {len(meet)} elements")
            raise IntegrityError(f"center meets H_{name} non-trivially")

    meet = None
    for h in K.subgroup_table.values():
        zh = z_times(realization, h, center)
        meet = zh if meet is None else np.intersect1d(meet, zh)
    certified = bool(np.array_equal(meet, z_codes))

    adjoint = AdjointTable(realization, K.table.codes, center)
    result = build_complex(adjoint, K.special, realization.field)
    result.metadata.update({"center": center.as_dict(), "center_intersection_certified": certified})
    logger.info(f"{'✅' if certified else '❌'} Adjoint complex: |Z| = {center.size}, ∩ Z·H_α = Z {certified}")
    return result


@log_performance
def local_ball(realization: MatrixRealization, radius: int, special: Optional[GeneratingSet] = None) -> CosetComplex:
    """
    Maximal faces reachable from the identity face in at most radius steps.

    A step moves from g to g·h with h in some H_α, i.e. to a face sharing the
    vertex gH_α. Works for any m; only the ball is built.
    """
    if radius < 0:
        raise DomainError("radius must be non-negative")
    special = special or realization.special
    budget = int(config.get("budgets.max_closure_elements", 20000000))
    chunk = int(config.get("complex.chunk_size", 1000000))
    subgroups = [matrix_closure(realization, realization.subgroup_generators(a)) for a in special.members]
    h_mats = [realization.decode(h) for h in subgroups]

    def expand(codes: np.ndarray, h: np.ndarray) -> np.ndarray:
        check_budget(len(codes) * len(h), 8 * realization.n * realization.n, "local ball products")
        out = []
        step = max(1, chunk // max(len(h), 1))
        for s in range(0, len(codes), step):
            mats = realization.decode(codes[s:s + step])
            prod = realization.matmul(mats[:, None, :, :], h[None, :, :, :])
            out.append(realization.encode(prod).reshape(-1))
        return np.unique(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)

    ball = np.array([realization.encode(realization.identity())], dtype=np.int64)
    frontier = ball
    for step_no in range(radius):
        reached = np.unique(np.concatenate([expand(frontier, h) for h in h_mats]))
        frontier = np.setdiff1d(reached, ball, assume_unique=True)
        ball = np.union1d(ball, frontier)
        logger.debug(f"🔄 Ball radius {step_no + 1}: {len(ball)} faces")
        if len(ball) > budget:
            raise ResourceBudgetError(f"local ball exceeded {budget} faces", predicted=len(ball), budget=budget)

    types = [str(a) for a in special.members]
    labels = np.empty((len(ball), len(types)), dtype=np.int64)
    parts, reps = [], []
    offset = 0
    for t, h in enumerate(h_mats):
        canon = np.empty(len(ball), dtype=np.int64)
        step = max(1, chunk // max(len(h), 1))
        for s in range(0, len(ball), step):
            mats = realization.decode(ball[s:s + step])
            prod = realization.encode(realization.matmul(mats[:, None, :, :], h[None, :, :, :]))
            canon[s:s + step] = prod.min(axis=1)
        uniq, inverse = np.unique(canon, return_inverse=True)
        labels[:, t] = inverse.reshape(-1) + offset
        parts.append(np.arange(offset, offset + len(uniq), dtype=np.int64))
        reps.append(uniq)
        offset += len(uniq)

    metadata = {"realization": realization.name, "p": realization.field.p, "m": realization.field.m,
                "modulus": list(realization.field.modulus), "variant": special.variant,
                "local_ball": True, "radius": radius, "adjoint": False,
                "group_order": realization.group_order()}
    subgroup_table = {name: h for name, h in zip(types, subgroups)}
    ball_table = GroupTable(realization, ball)
    K = CosetComplex(types, parts, labels.copy(), labels, np.concatenate(reps), subgroup_table, special,
                     ball_table, metadata)
    logger.info(f"✅ Local ball of radius {radius}: {K.num_faces} faces, {K.num_vertices} vertices")
    return K


# ----------------------------------------------------------------------
# persistence


def save_complex(K: CosetComplex, path: str) -> Tuple[str, str]:
    """Write the arrays to path (npz format) and a JSON manifest to path + '.json'."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    arrays = {
        "maximal_faces": K.maximal_faces,
        "part_sizes": np.array([len(p) for p in K.parts], dtype=np.int64),
        "part_offsets": K.offsets,
    }
    if K.labels is not None:
        arrays["labels"] = K.labels
    if K.representatives is not None:
        arrays["representatives"] = K.representatives
    if K.table is not None:
        arrays["group_codes"] = K.table.codes
    for t, name in enumerate(K.types):
        if name in K.subgroup_table:
            arrays[f"subgroup_{t}"] = K.subgroup_table[name]
    with open(path, "wb") as f:
        np.savez_compressed(f, **arrays)
    manifest = {"types": K.types, "metadata": K.metadata, "counts": K.counts()}
    manifest_path = path + ".json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(dumps_report(manifest))
    logger.info(f"📊 Complex saved: {path} (+ manifest)")
    return path, manifest_path


def load_complex(path: str) -> CosetComplex:
    """
    Reload a saved complex and rebuild its realization and group table.

    Raises:
        DomainError: missing manifest or archive
    """
    manifest_path = path + ".json"
    if not os.path.exists(path) or not os.path.exists(manifest_path):
        raise DomainError(f"no saved complex at {path}")
    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    meta = manifest["metadata"]
    spec = FieldSpec.from_params(int(meta["p"]), int(meta["m"]), meta.get("modulus"), allow_small_p=True)
    realization = MatrixRealization(meta["realization"], spec, meta.get("variant"))
    with np.load(path) as data:
        arrays = {k: data[k] for k in data.files}

    offsets = arrays["part_offsets"]
    sizes = arrays["part_sizes"]
    parts = [np.arange(int(o), int(o) + int(s), dtype=np.int64) for o, s in zip(offsets, sizes)]
    types = manifest["types"]
    table = None
    if "group_codes" in arrays:
        if meta.get("adjoint"):
            center = compute_center(realization)
            table = AdjointTable(realization, arrays["group_codes"], center)
        else:
            table = GroupTable(realization, arrays["group_codes"])
    subgroups = {name: arrays[f"subgroup_{t}"] for t, name in enumerate(types) if f"subgroup_{t}" in arrays}
    K = CosetComplex(types, parts, arrays["maximal_faces"], arrays.get("labels"), arrays.get("representatives"),
                     subgroups, realization.special, table, meta)
    logger.info(f"✅ Complex loaded from {path}: {K.num_faces} maximal faces")
    return K


def verify_complex(K: CosetComplex) -> Dict[str, Any]:
    """Counts, partiteness, transitivity, connectivity and degree statistics in one report."""
    report = {
        "counts": K.counts(),
        "partite": K.is_partite(),
        "pure": K.is_pure(),
        "transitivity": transitivity_check(K),
        "connectivity": connectivity_check(K),
        "degree_stats": degree_stats(K),
        "metadata": K.metadata,
    }
    report["passed"] = bool(report["pure"] and report["partite"] and report["connectivity"]["connected"]
                            and (K.metadata.get("local_ball") or report["transitivity"]["simply_transitive"]))
    return report
