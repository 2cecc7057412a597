"""
Symbolic unipotent arithmetic on rank-2 spans.

Elements of X_Ψ are kept as normal forms: one coefficient per root of Ψ⁺ in a
fixed total order. Words are brought to normal form by the collection process,
swapping letters with b·x = x·b·[b, x] where [g, h] = g⁻¹h⁻¹gh, until no
out-of-order pair remains. The commutators come from a StructureConstantTable,
either the built-in template or a table calibrated against matrices.

Every collect works on python ints or on numpy arrays of coefficients. In
array mode a letter is dropped only when it is zero in every lane, so all
lanes follow the same sequence of swaps.
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.algebra.gf import Code, FieldSpec
from core.algebra.rootsys import Root, RootSystem, binomial_magnitude, combine
from core.config import config
from core.errors import DomainError, IntegrityError, ResourceBudgetError
from utils.logging_setup import get_logger, log_performance

logger = get_logger(__name__)

# Rank-2 kinds keyed by |Φ ∩ span Ψ|
SPAN_KINDS = {2: "A1", 4: "A1xA1", 6: "A2", 8: "B2", 12: "G2"}

# Commutator templates in coordinates i·s + j·l (s short simple, l long simple).
# Key (δ, γ) with δ later than γ; value {(i, j): C} meaning
# [x_δ(u), x_γ(t)] = Π_{i+j ascending} x_{iγ+jδ}(C tⁱ uʲ).
_TEMPLATES = {
    "A1": {},
    "A1xA1": {},
    "A2": {
        ((0, 1), (1, 0)): {(1, 1): -1},
    },
    "B2": {
        ((0, 1), (1, 0)): {(1, 1): -1, (2, 1): 1},
        ((1, 1), (1, 0)): {(1, 1): -2},
    },
    "G2": {
        ((0, 1), (1, 0)): {(1, 1): 1, (2, 1): 1, (3, 1): 1, (3, 2): -1},
        ((1, 1), (1, 0)): {(1, 1): 2, (2, 1): 3, (1, 2): -3},
        ((2, 1), (1, 0)): {(1, 1): 3},
        ((3, 1), (0, 1)): {(1, 1): 1},
        ((2, 1), (1, 1)): {(1, 1): -3},
    },
}


@dataclass(frozen=True)
class RootElem:
    """The letter x_root(coeff); coeff is a field code or an array of codes."""
    root: Root
    coeff: Code


@dataclass(frozen=True)
class UnipotentNormalForm:
    """Π_{γ ∈ order} x_γ(t_γ) with one coefficient per root of Ψ⁺."""
    span: Tuple[Root, ...]
    order: Tuple[Root, ...]
    coeffs: Tuple[int, ...]

    def coeff(self, root: Root) -> int:
        return self.coeffs[self.order.index(root)]

    def is_identity(self) -> bool:
        return not any(self.coeffs)

    def as_word(self) -> List[RootElem]:
        return [RootElem(r, c) for r, c in zip(self.order, self.coeffs) if c]


# ----------------------------------------------------------------------
# span geometry


@dataclass
class SpanGeometry:
    """Φ ∩ span Ψ with a simple system (s, l) that makes Ψ positive."""
    system: RootSystem
    psi: Tuple[Root, ...]
    kind: str
    short: Root
    long: Optional[Root]
    abstract: Dict[Root, Tuple[int, int]]
    positive: Tuple[Root, ...]             # Ψ⁺ in internal (height-respecting) order
    psi_coefficients: Dict[Root, Tuple[int, ...]]
    heights: Dict[Root, int]
    span_positive: Tuple[Root, ...]        # all positive roots of the span, internal order

    def from_abstract(self, ij: Tuple[int, int]) -> Optional[Root]:
        for r, a in self.abstract.items():
            if a == ij:
                return r
        return None

    def internal_key(self, root: Root) -> Tuple[int, int]:
        i, j = self.abstract[root]
        return (i + j, -i)


def span_geometry(system: RootSystem, psi: Sequence[Root]) -> SpanGeometry:
    """
    Analyse the span of one or two roots.

    Raises:
        DomainError: roots outside Φ, a dependent pair, or more than two roots
    """
    psi = tuple(psi)
    if not 1 <= len(psi) <= 2:
        raise DomainError(f"span needs one or two roots, got {len(psi)}")
    for r in psi:
        if r not in system:
            raise DomainError(f"{r} is not a root of {system.name}")
    if len(psi) == 2:
        matrix = np.array([r.coords for r in psi], dtype=float)
        if np.linalg.matrix_rank(matrix) < 2:
            raise DomainError(f"roots {psi[0]} and {psi[1]} are linearly dependent")

    span_roots = []
    psi_coeffs: Dict[Root, Tuple[Fraction, ...]] = {}
    for r in system.roots:
        c = system.coefficients(r, psi)
        if c is not None:
            span_roots.append(r)
            psi_coeffs[r] = c
    kind = SPAN_KINDS.get(len(span_roots))
    if kind is None:
        raise IntegrityError(f"unexpected span of size {len(span_roots)}")

    short, long = _choose_simple_pair(system, psi, span_roots, kind)
    abstract: Dict[Root, Tuple[int, int]] = {}
    for r in span_roots:
        if long is None:
            k = 1 if r == short else -1
            abstract[r] = (k, 0)
            continue
        c = system.coefficients(r, (short, long))
        abstract[r] = (int(c[0]), int(c[1]))

    def key(r):
        i, j = abstract[r]
        return (i + j, -i)

    span_positive = tuple(sorted((r for r in span_roots if sum(abstract[r]) > 0), key=key))
    positive = []
    heights = {}
    int_coeffs = {}
    for r in span_positive:
        c = psi_coeffs[r]
        if all(x.denominator == 1 and x >= 0 for x in c):
            positive.append(r)
            int_coeffs[r] = tuple(int(x) for x in c)
            heights[r] = sum(int_coeffs[r])
    return SpanGeometry(system, psi, kind, short, long, abstract, tuple(positive), int_coeffs, heights, span_positive)


def _choose_simple_pair(system, psi, span_roots, kind):
    if kind == "A1":
        return psi[0], None
    candidates = []
    for s in span_roots:
        for l in span_roots:
            if s == l or s.norm2 > l.norm2:
                continue
            if kind in ("B2", "G2") and s.norm2 == l.norm2:
                continue
            coeffs = [system.coefficients(r, (s, l)) for r in span_roots]
            if any(c is None for c in coeffs):
                continue
            ok = all(
                all(x.denominator == 1 for x in c) and (min(c) >= 0 or max(c) <= 0)
                for c in coeffs
            )
            if not ok:
                continue
            psi_ok = all(min(system.coefficients(p, (s, l))) >= 0 for p in psi)
            if not psi_ok:
                continue
            rank = (0 if s == psi[0] else 1, 0 if l in psi else 1, s.coords, l.coords)
            candidates.append((rank, s, l))
    if not candidates:
        raise IntegrityError(f"no simple system of the {kind} span makes {psi} positive")
    candidates.sort(key=lambda c: c[0])
    return candidates[0][1], candidates[0][2]


# ----------------------------------------------------------------------
# structure constants


class StructureConstantTable:
    """
    Commutator constants for one rank-2 span, keyed by actual root pairs.

    entries[(δ, γ)] is a tuple of ((i, j), C) with δ later than γ in the
    span's internal order.
    """

    def __init__(self, entries: Dict[Tuple[Root, Root], Tuple[Tuple[Tuple[int, int], int], ...]],
                 source: str = "template"):
        self.entries = {k: tuple(sorted(v, key=lambda e: (e[0][0] + e[0][1], -e[0][0]))) for k, v in entries.items()}
        self.source = source

    @classmethod
    def template(cls, geometry: SpanGeometry) -> "StructureConstantTable":
        """Built-in constants for the span's type, checked against Φ."""
        entries = {}
        system = geometry.system
        for (d_abs, g_abs), terms in _TEMPLATES[geometry.kind].items():
            delta = geometry.from_abstract(d_abs)
            gamma = geometry.from_abstract(g_abs)
            entries[(delta, gamma)] = tuple((ij, c) for ij, c in terms.items())

        # every pair (δ later, γ earlier) must list exactly the (i, j) with iγ+jδ ∈ Φ
        pos = geometry.span_positive
        for a in range(len(pos)):
            for b in range(a + 1, len(pos)):
                gamma, delta = pos[a], pos[b]
                present = set()
                for i in range(1, 4):
                    for j in range(1, 4):
                        if system.get(combine([(i, gamma), (j, delta)])) is not None:
                            present.add((i, j))
                listed = {ij for ij, _ in entries.get((delta, gamma), ())}
                if present != listed:
                    raise IntegrityError(
                        f"{geometry.kind} template mismatch for ({delta}, {gamma}): {sorted(listed)} vs {sorted(present)}")
                for ij, c in entries.get((delta, gamma), ()):
                    expected = _magnitude(system, delta, gamma, ij)
                    if expected is not None and abs(c) != expected:
                        raise IntegrityError(f"template magnitude {c} for {ij} at ({delta}, {gamma}), expected {expected}")
        return cls(entries, source="template")

    def get(self, delta: Root, gamma: Root) -> Tuple[Tuple[Tuple[int, int], int], ...]:
        return self.entries.get((delta, gamma), ())

    def terms(self) -> List[Tuple[Root, Root, Tuple[int, int], int]]:
        """Flat list in a fixed order (δ, γ, (i, j), C)."""
        out = []
        for (delta, gamma) in sorted(self.entries, key=lambda k: (k[0].coords, k[1].coords)):
            for ij, c in self.entries[(delta, gamma)]:
                out.append((delta, gamma, ij, c))
        return out

    def sign_vector(self) -> List[int]:
        return [1 if c > 0 else -1 for *_, c in self.terms()]

    def with_entry(self, delta: Root, gamma: Root, terms, source: str) -> "StructureConstantTable":
        entries = dict(self.entries)
        entries[(delta, gamma)] = tuple(terms)
        return StructureConstantTable(entries, source=source)

    def constant(self, delta: Root, gamma: Root, ij: Tuple[int, int]) -> int:
        for key, c in self.get(delta, gamma):
            if key == ij:
                return c
        raise DomainError(f"no constant ({ij}) for ({delta}, {gamma})")

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "entries": [
                {"delta": str(d), "gamma": str(g), "i": ij[0], "j": ij[1], "C": c}
                for d, g, ij, c in self.terms()
            ],
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, StructureConstantTable) and self.entries == other.entries


def _magnitude(system: RootSystem, delta: Root, gamma: Root, ij: Tuple[int, int]) -> Optional[int]:
    """|C| for (i,1) and (1,j) terms; None when the rule does not apply."""
    i, j = ij

    def reach(a: Root, b: Root) -> int:
        k = 0
        while system.get(combine([(1, a), (-(k + 1), b)])) is not None:
            k += 1
        return k

    if j == 1:
        return binomial_magnitude(reach(delta, gamma), i)
    if i == 1:
        return binomial_magnitude(reach(gamma, delta), j)
    return None


# ----------------------------------------------------------------------
# collection engine


class SpanEngine:
    """
    Collection engine for X_Ψ with Ψ one or two independent roots.

    Args:
        system: ambient root system
        psi: the span roots
        field: coefficient field
        table: structure constants (template when omitted)
        order: total order on Ψ⁺ for normal forms (internal order when omitted)
    """

    def __init__(self, system: RootSystem, psi: Sequence[Root], field: FieldSpec,
                 table: Optional[StructureConstantTable] = None, order: Optional[Sequence[Root]] = None,
                 geometry: Optional[SpanGeometry] = None):
        self.logger = get_logger(__name__)
        self.system = system
        self.field = field
        self.geometry = geometry or span_geometry(system, psi)
        self.psi = self.geometry.psi
        self.table = table or StructureConstantTable.template(self.geometry)
        self.positive = self.geometry.positive
        self.heights = self.geometry.heights
        self._index = {r: k for k, r in enumerate(self.positive)}

        if order is None:
            order = self.positive
        order = tuple(order)
        if sorted(order, key=lambda r: r.coords) != sorted(self.positive, key=lambda r: r.coords):
            raise DomainError("order must list every root of Ψ⁺ exactly once")
        self.order = order
        self._rank = [order.index(r) for r in self.positive]
        self._plan = self._build_plan()

    # ------------------------------------------------------------------

    @property
    def kind(self) -> str:
        return self.geometry.kind

    def __repr__(self) -> str:
        return f"SpanEngine({self.kind}, Ψ={[str(r) for r in self.psi]}, F_{self.field.q})"

    def caps(self) -> List[int]:
        """Degree caps min(ht_Ψ(γ), m−1) in normal-form order."""
        return [min(self.heights[r], self.field.m - 1) for r in self.order]

    def with_order(self, order: Sequence[Root]) -> "SpanEngine":
        return SpanEngine(self.system, self.psi, self.field, self.table, order, self.geometry)

    def order_with_last(self, root: Root) -> Tuple[Root, ...]:
        """Internal order with one root moved to the end."""
        return tuple(r for r in self.positive if r != root) + (root,)

    def _build_plan(self):
        """plan[b][x]: terms (target, C, exp on x, exp on b) of [x_b(u), x_x(t)]."""
        n = len(self.positive)
        plan = [[() for _ in range(n)] for _ in range(n)]
        for b in range(n):
            for x in range(n):
                if b == x:
                    continue
                rb, rx = self.positive[b], self.positive[x]
                if b > x:
                    terms = []
                    for (i, j), c in self.table.get(rb, rx):
                        target = self.system.get(combine([(i, rx), (j, rb)]))
                        terms.append((self._index[target], c, i, j))
                else:
                    # [x_b, x_x] = [x_x, x_b]⁻¹: reverse and negate
                    terms = []
                    for (i, j), c in self.table.get(rx, rb):
                        target = self.system.get(combine([(i, rb), (j, rx)]))
                        terms.append((self._index[target], -c, j, i))
                    terms.reverse()
                plan[b][x] = tuple(terms)
        return plan

    # ------------------------------------------------------------------
    # letters

    def _letter_index(self, root: Root) -> int:
        idx = self._index.get(root)
        if idx is None:
            raise DomainError(f"{root} is not in Ψ⁺ for span {[str(r) for r in self.psi]}")
        return idx

    @staticmethod
    def _is_zero(c: Code) -> bool:
        if isinstance(c, np.ndarray):
            return not c.any()
        return c == 0

    def _term(self, c: int, t: Code, ex: int, u: Code, eb: int) -> Code:
        f = self.field
        return f.mul_scalar(c, f.mul(f.pow(t, ex), f.pow(u, eb)))

    def _collect_letters(self, letters: Sequence[Tuple[int, Code]]) -> List[Tuple[int, Code]]:
        f = self.field
        rank = self._rank
        pending = deque(letters)
        result: List[Tuple[int, Code]] = []
        while pending:
            idx, c = pending.popleft()
            if self._is_zero(c):
                continue
            r = rank[idx]
            pos = len(result)
            while pos > 0 and rank[result[pos - 1][0]] > r:
                pos -= 1
            tail = result[pos:]
            del result[pos:]
            if result and result[-1][0] == idx:
                merged = f.add(result[-1][1], c)
                result.pop()
                if not self._is_zero(merged):
                    result.append((idx, merged))
            else:
                result.append((idx, c))
            if tail:
                inserts = []
                for b_idx, u in tail:
                    inserts.append((b_idx, u))
                    for target, const, ex, eb in self._plan[b_idx][idx]:
                        inserts.append((target, self._term(const, c, ex, u, eb)))
                pending.extendleft(reversed(inserts))
        return result

    def _letters(self, word) -> List[Tuple[int, Code]]:
        out = []
        for w in word:
            if isinstance(w, RootElem):
                out.append((self._letter_index(w.root), w.coeff))
            else:
                root, coeff = w
                out.append((self._letter_index(root), coeff))
        return out

    # ------------------------------------------------------------------
    # scalar API

    def identity(self) -> UnipotentNormalForm:
        return UnipotentNormalForm(self.psi, self.order, tuple(0 for _ in self.order))

    def commutator(self, a: RootElem, b: RootElem) -> List[RootElem]:
        """[a, b] = a⁻¹b⁻¹ab as a word ordered by increasing i+j."""
        ia, ib = self._letter_index(a.root), self._letter_index(b.root)
        if ia == ib:
            return []
        return [RootElem(self.positive[t], self._term(c, b.coeff, ex, a.coeff, eb))
                for t, c, ex, eb in self._plan[ia][ib]]

    def collect(self, word: Sequence) -> UnipotentNormalForm:
        """Normal form of a word of RootElems (or (root, coeff) pairs)."""
        result = self._collect_letters(self._letters(word))
        coeffs = [0] * len(self.order)
        for idx, c in result:
            coeffs[self._rank[idx]] = int(c)
        return UnipotentNormalForm(self.psi, self.order, tuple(coeffs))

    def _check_same(self, g: UnipotentNormalForm) -> None:
        if g.span != self.psi or g.order != self.order:
            raise DomainError("normal forms from different spans or orders")

    def multiply(self, g: UnipotentNormalForm, h: UnipotentNormalForm) -> UnipotentNormalForm:
        self._check_same(g)
        self._check_same(h)
        return self.collect(g.as_word() + h.as_word())

    def inverse(self, g: UnipotentNormalForm) -> UnipotentNormalForm:
        self._check_same(g)
        word = [RootElem(w.root, self.field.neg(w.coeff)) for w in reversed(g.as_word())]
        return self.collect(word)

    def is_well_bounded(self, g: UnipotentNormalForm) -> bool:
        return all(self.field.degree(c) <= cap for c, cap in zip(g.coeffs, self.caps()))

    def to_json(self, g: UnipotentNormalForm) -> dict:
        return {
            "span": [str(r) for r in g.span],
            "coeffs": {str(r): self.field.format(c) for r, c in zip(g.order, g.coeffs)},
        }

    def from_json(self, data: dict) -> UnipotentNormalForm:
        by_name = {str(r): r for r in self.order}
        if data.get("span") != [str(r) for r in self.psi]:
            raise DomainError("serialized normal form belongs to another span")
        coeffs = [0] * len(self.order)
        for name, text in data.get("coeffs", {}).items():
            if name not in by_name:
                raise DomainError(f"unknown root {name} in serialized normal form")
            coeffs[self.order.index(by_name[name])] = self.field.parse(text)
        return UnipotentNormalForm(self.psi, self.order, tuple(coeffs))

    # ------------------------------------------------------------------
    # array API

    def collect_arrays(self, word: Sequence[Tuple[Root, Code]], lanes: Optional[int] = None) -> np.ndarray:
        """Collect a word whose coefficients are arrays; returns rows of shape (lanes, |Ψ⁺|)."""
        result = self._collect_letters(self._letters(word))
        if lanes is None:
            lanes = max((np.size(c) for _, c in word if isinstance(c, np.ndarray)), default=1)
        rows = np.zeros((lanes, len(self.order)), dtype=np.int64)
        for idx, c in result:
            rows[:, self._rank[idx]] = c
        return rows

    def rows_word(self, rows: np.ndarray) -> List[Tuple[Root, np.ndarray]]:
        return [(r, rows[:, k]) for k, r in enumerate(self.order)]

    def multiply_rows(self, rows: np.ndarray, other) -> np.ndarray:
        """rows · other, where other is rows of the same shape or one normal form."""
        if isinstance(other, UnipotentNormalForm):
            right = [(w.root, w.coeff) for w in other.as_word()]
        else:
            right = self.rows_word(other)
        return self.collect_arrays(self.rows_word(rows) + right, lanes=len(rows))

    def reorder_rows(self, rows: np.ndarray, target: "SpanEngine") -> np.ndarray:
        """Re-express rows (in this order) as rows in target's order."""
        return target.collect_arrays(self.rows_word(rows), lanes=len(rows))

    def pack(self, rows: np.ndarray) -> np.ndarray:
        """Injective int64 codes of rows (radix q)."""
        q, k = self.field.q, rows.shape[1]
        if q ** k >= 2 ** 62:
            raise ResourceBudgetError(f"cannot pack {k} coefficients of F_{q} into int64", predicted=q ** k, budget=2 ** 62)
        weights = np.array([q ** (k - 1 - i) for i in range(k)], dtype=np.int64)
        return rows.astype(np.int64) @ weights

    def unpack(self, codes: np.ndarray) -> np.ndarray:
        q, k = self.field.q, len(self.order)
        codes = np.asarray(codes, dtype=np.int64)
        weights = np.array([q ** (k - 1 - i) for i in range(k)], dtype=np.int64)
        return (codes[:, None] // weights) % q

    def graded_size(self, caps: Optional[Sequence[int]] = None) -> int:
        caps = self.caps() if caps is None else caps
        return int(np.prod([self.field.count_up_to_degree(c) for c in caps], dtype=object))

    def enumerate_rows(self, caps: Optional[Sequence[int]] = None) -> np.ndarray:
        """Every coefficient vector with deg(t_γ) ≤ cap_γ, in lexicographic order."""
        caps = self.caps() if caps is None else list(caps)
        sizes = [self.field.count_up_to_degree(c) for c in caps]
        total = self.graded_size(caps)
        budget = int(config.get("budgets.max_closure_elements", 20000000))
        if total > budget:
            raise ResourceBudgetError(f"graded subgroup has {total} elements", predicted=total, budget=budget)
        return np.stack(np.unravel_index(np.arange(total, dtype=np.int64), sizes), axis=1).astype(np.int64)

    def enumerate(self) -> Iterator[UnipotentNormalForm]:
        for row in self.enumerate_rows():
            yield UnipotentNormalForm(self.psi, self.order, tuple(int(c) for c in row))

    @log_performance
    def closure(self, generators: Sequence[UnipotentNormalForm], budget: Optional[int] = None) -> np.ndarray:
        """Sorted packed codes of the subgroup generated by the given normal forms."""
        budget = budget or int(config.get("budgets.max_closure_elements", 20000000))
        gens = [g for g in generators if not g.is_identity()]
        for g in gens:
            self._check_same(g)
        identity = np.zeros((1, len(self.order)), dtype=np.int64)
        seen = self.pack(identity)
        frontier = identity
        rounds = 0
        while len(frontier):
            rounds += 1
            batches = [self.multiply_rows(frontier, g) for g in gens]
            if not batches:
                break
            candidates = np.concatenate(batches)
            codes, first = np.unique(self.pack(candidates), return_index=True)
            fresh = ~np.isin(codes, seen, assume_unique=True)
            frontier = candidates[first[fresh]]
            seen = np.union1d(seen, codes[fresh])
            if len(seen) > budget:
                raise ResourceBudgetError(f"closure exceeded {budget} elements", predicted=len(seen), budget=budget)
        self.logger.debug(f"🔄 Closure finished after {rounds} rounds with {len(seen)} elements")
        return seen


# ----------------------------------------------------------------------
# module-level operations


def _engine_for(system: RootSystem, roots: Sequence[Root], field: FieldSpec,
                table: Optional[StructureConstantTable] = None) -> SpanEngine:
    return SpanEngine(system, roots, field, table=table)


def commutator(system: RootSystem, a: RootElem, b: RootElem, field: FieldSpec,
               table: Optional[StructureConstantTable] = None) -> List[RootElem]:
    """
    [a, b] as a word x_{iα+jβ}(C tⁱuʲ) ordered by increasing i+j.

    Raises:
        DomainError: b.root = −a.root
    """
    if (-a.root) == b.root:
        raise DomainError("commutator of opposite root elements is outside the unipotent engine")
    if a.root == b.root:
        return []
    engine = _engine_for(system, (a.root, b.root), field, table)
    return engine.commutator(a, b)


def enumerate_graded_subgroup(system: RootSystem, psi: Sequence[Root], field: FieldSpec) -> Iterator[UnipotentNormalForm]:
    """All elements of X_Ψ as normal forms."""
    return SpanEngine(system, psi, field).enumerate()


def _coeff_generators(engine: SpanEngine, root: Root, max_degree: int) -> List[UnipotentNormalForm]:
    return [engine.collect([RootElem(root, x)]) for x in engine.field.power_basis(max_degree)]


def closure(engine: SpanEngine, generators: Sequence[UnipotentNormalForm]) -> np.ndarray:
    return engine.closure(generators)


def graded_generators(engine: SpanEngine, degrees: Dict[Root, int]) -> List[UnipotentNormalForm]:
    """x_γ(x^k) for each γ and k ≤ min(degree, m−1)."""
    out = []
    for root, d in degrees.items():
        if d >= 0:
            out.extend(_coeff_generators(engine, root, d))
    return out


def _rank_mod_p(matrix: np.ndarray, p: int) -> int:
    a = np.array(matrix, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if a[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, col]), p - 2, p)) % p
        factors = a[:, col].copy()
        factors[rank] = 0
        a = (a - factors[:, None] * a[rank][None, :]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def _poly_batch_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros((a.shape[0], a.shape[1] + b.shape[1] - 1), dtype=np.int64)
    for i in range(a.shape[1]):
        for j in range(b.shape[1]):
            out[:, i + j] = (out[:, i + j] + a[:, i] * b[:, j]) % p
    return out


def powerspan_check(i: int, j: int, d1: int, d2: int, spec: Union[FieldSpec, int]) -> bool:
    """
    True iff span{fⁱgʲ : deg f ≤ d1, deg g ≤ d2} has dimension i·d1 + j·d2 + 1.

    spec is a FieldSpec (whose m must exceed the target degree) or a bare prime.
    """
    p = spec.p if isinstance(spec, FieldSpec) else int(spec)
    d = i * d1 + j * d2
    if max(i, j) >= p:
        raise DomainError(f"powers i={i}, j={j} must be below p={p}")
    if isinstance(spec, FieldSpec) and d > spec.m - 1:
        raise DomainError(f"degree {d} exceeds m−1={spec.m - 1}")
    if min(i, j, d1, d2) < 0:
        raise DomainError("exponents and degrees must be non-negative")

    def powers(deg: int, e: int) -> np.ndarray:
        polys = np.stack(np.unravel_index(np.arange(p ** (deg + 1)), (p,) * (deg + 1)), axis=1)[:, ::-1]
        out = np.zeros((len(polys), 1), dtype=np.int64)
        out[:, 0] = 1
        for _ in range(e):
            out = _poly_batch_mul(out, polys, p)
        return np.unique(out, axis=0)

    fi, gj = powers(d1, i), powers(d2, j)
    prods = _poly_batch_mul(np.repeat(fi, len(gj), axis=0), np.tile(gj, (len(fi), 1)), p)
    prods = np.unique(prods[:, : d + 1], axis=0)
    dim = _rank_mod_p(prods, p)
    logger.debug(f"🔍 powerspan i={i} j={j} d1={d1} d2={d2} p={p}: dimension {dim} (target {d + 1})")
    return dim == d + 1


def rk2gen_check(system: RootSystem, alpha: Root, beta: Root, d1: int, d2: int, field: FieldSpec,
                 table: Optional[StructureConstantTable] = None) -> Dict[str, object]:
    """
    Compare ⟨x_α(t), x_β(u) : deg t ≤ d1, deg u ≤ d2⟩ with Π X_{iα+jβ, i·d1+j·d2}.

    Returns a report; instances beyond the closure budget are marked skipped.
    """
    engine = SpanEngine(system, (alpha, beta), field, table=table)
    caps = []
    for r in engine.order:
        i, j = engine.geometry.psi_coefficients[r]
        caps.append(min(i * d1 + j * d2, field.m - 1))
    expected = engine.graded_size(caps)
    budget = int(config.get("budgets.max_closure_elements", 20000000))
    report = {"pair": [str(alpha), str(beta)], "d1": d1, "d2": d2, "p": field.p, "m": field.m,
              "expected_size": expected, "kind": engine.kind}
    if expected > budget:
        logger.warning(f"⚠️ rk2gen d1={d1} d2={d2} skipped: {expected} elements exceed budget {budget}")
        report.update({"skipped": True, "equal": None})
        return report

    gens = graded_generators(engine, {alpha: d1, beta: d2})
    reached = engine.closure(gens)
    target = np.sort(engine.pack(engine.enumerate_rows(caps)))
    equal = len(reached) == len(target) and bool(np.array_equal(reached, target))
    report.update({"skipped": False, "equal": equal, "closure_size": int(len(reached))})
    logger.info(f"{'✅' if equal else '❌'} rk2gen {engine.kind} d1={d1} d2={d2}: closure {len(reached)} vs {expected}")
    return report


def rootgen_check(realization) -> Dict[str, object]:
    """⟨H_α : α ∈ 𝒮⟩ = G, by matrix BFS in the given realization."""
    from core.algebra.matgroups import matrix_closure

    gens = []
    for alpha in realization.special.members:
        gens.extend(realization.subgroup_generators(alpha))
    unique = {realization.encode(g): g for g in gens}
    reached = matrix_closure(realization, list(unique.values()))
    expected = realization.group_order()
    ok = len(reached) == expected
    logger.info(f"{'✅' if ok else '❌'} rootgen {realization.name}: ⟨H_α⟩ has {len(reached)} elements, |G| = {expected}")
    return {"realization": realization.name, "generated": int(len(reached)), "order": int(expected), "equal": ok}
