"""
Finite field arithmetic in F_p[x]/(f).

Elements are integer codes: the polynomial c_0 + c_1 x + ... + c_{m-1} x^{m-1}
has code sum(c_i * p**i). With that encoding the elements of degree <= k are
exactly the codes below p**(k+1), which is what the graded subgroups need.
"""

from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config import config
from core.errors import DomainError, ResourceBudgetError
from utils.logging_setup import get_logger

Code = Union[int, np.ndarray]

logger = get_logger(__name__)


def is_prime(n: int) -> bool:
    """Trial-division primality test for desk-scale integers."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def _trim(coeffs: List[int]) -> List[int]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    """Remainder of a modulo b over F_p; coefficient lists low degree first."""
    rem = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    if not b:
        raise DomainError("polynomial division by zero")
    lead_inv = pow(b[-1], p - 2, p)
    while len(rem) >= len(b):
        factor = (rem[-1] * lead_inv) % p
        shift = len(rem) - len(b)
        for i, c in enumerate(b):
            rem[shift + i] = (rem[shift + i] - factor * c) % p
        rem = _trim(rem)
    return rem


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Exhaustive factor search: divide by every monic polynomial of degree <= m/2."""
    poly = _trim([c % p for c in poly])
    m = len(poly) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    for d in range(1, m // 2 + 1):
        for lower in product(range(p), repeat=d):
            divisor = list(lower) + [1]
            if not _poly_mod(poly, divisor, p):
                return False
    return True


def find_irreducible(p: int, m: int) -> Tuple[int, ...]:
    """
    Smallest monic irreducible polynomial of degree m over F_p.

    Candidates are ordered by the integer code of their lower coefficients,
    i.e. lexicographically with the highest lower coefficient most significant.

    Returns:
        Coefficients low degree first, length m + 1, last entry 1.
    """
    if not is_prime(p):
        raise DomainError(f"p={p} is not prime")
    if m < 1:
        raise DomainError(f"m={m} must be positive")
    for code in range(p ** m):
        lower = [(code // p ** i) % p for i in range(m)]
        candidate = lower + [1]
        if is_irreducible(candidate, p):
            return tuple(candidate)
    raise DomainError(f"no irreducible polynomial of degree {m} over F_{p}")  # unreachable


def _factor_primes(n: int) -> List[int]:
    primes, k = [], 2
    while k * k <= n:
        if n % k == 0:
            primes.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        primes.append(n)
    return primes


class FieldSpec:
    """
    The field F_q = F_p[x]/(f), q = p**m, with vectorized arithmetic on codes.

    All arithmetic methods accept python ints or numpy integer arrays. Arrays
    need the lookup tables, which exist for q up to ``field.table_limit``.
    """

    def __init__(self, p: int, m: int, modulus: Sequence[int], allow_small_p: bool = False):
        self.logger = get_logger(__name__)
        if not is_prime(p):
            raise DomainError(f"p={p} is not prime")
        if m < 1:
            raise DomainError(f"m={m} must be positive")
        min_prime = int(config.get("field.min_prime", 4))
        if p < min_prime:
            if not allow_small_p:
                raise DomainError(f"p={p} is below the supported range (p > 3); pass allow_small_p to experiment")
            self.logger.warning(f"⚠️ Small characteristic p={p}: HDX theorems need p > 3")

        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise DomainError(f"modulus must be monic of degree {m}")
        if not is_irreducible(modulus, p):
            raise DomainError(f"modulus {modulus} is reducible over F_{p}")

        self.p = p
        self.m = m
        self.q = p ** m
        self.modulus = modulus
        self._weights = np.array([p ** i for i in range(m)], dtype=np.int64)

        self.tables = self.q <= int(config.get("field.table_limit", 3200))
        if self.tables:
            self._build_tables()
        self.logger.debug(f"🔧 Field F_{self.q} ready (modulus {self.format_poly(modulus)}, tables={self.tables})")

    @classmethod
    def from_params(cls, p: int, m: int = 1, modulus: Optional[Union[str, Sequence[int]]] = None,
                    allow_small_p: bool = False) -> "FieldSpec":
        """Build the field, using the smallest irreducible unless a modulus is given."""
        if modulus is None:
            poly = find_irreducible(p, m)
        elif isinstance(modulus, str):
            poly = tuple(int(c) for c in modulus.split(","))
        else:
            poly = tuple(modulus)
        return cls(p, m, poly, allow_small_p=allow_small_p)

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and (self.p, self.m, self.modulus) == (other.p, other.m, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.m, self.modulus))

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, m={self.m}, modulus={self.format_poly(self.modulus)})"

    # ------------------------------------------------------------------
    # codes and polynomials

    def coefficients(self, t: int) -> List[int]:
        """Length-m coefficient vector, low degree first."""
        t = int(t)
        return [(t // self.p ** i) % self.p for i in range(self.m)]

    def from_coefficients(self, coeffs: Sequence[int]) -> int:
        reduced = _poly_mod(list(coeffs), self.modulus, self.p)
        return sum(int(c) * self.p ** i for i, c in enumerate(reduced))

    def digits(self, codes: np.ndarray) -> np.ndarray:
        """Coefficient array of shape codes.shape + (m,)."""
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[..., None] // self._weights) % self.p

    def from_digits(self, digits: np.ndarray) -> np.ndarray:
        return (np.asarray(digits, dtype=np.int64) * self._weights).sum(axis=-1)

    def degree(self, t: int) -> int:
        """deg(t), with deg(0) = -1."""
        t = int(t)
        deg = -1
        while t:
            t //= self.p
            deg += 1
        return deg

    def format(self, t: int) -> str:
        """Serialize as comma-separated coefficients, low degree first."""
        return ",".join(str(c) for c in self.coefficients(t))

    def parse(self, text: str) -> int:
        parts = [s.strip() for s in text.split(",") if s.strip() != ""]
        if len(parts) > self.m:
            raise DomainError(f"'{text}' has more than m={self.m} coefficients")
        return self.from_coefficients([int(c) for c in parts])

    @staticmethod
    def format_poly(coeffs: Sequence[int]) -> str:
        terms = []
        for i in range(len(coeffs) - 1, -1, -1):
            c = coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return "+".join(terms) if terms else "0"

    def scalar(self, c: int) -> int:
        """Code of the constant c mod p."""
        return int(c) % self.p

    def power_basis(self, k: int) -> List[int]:
        """Codes of x^0, ..., x^min(k, m-1)."""
        return [self.p ** i for i in range(min(k, self.m - 1) + 1)]

    # ------------------------------------------------------------------
    # degree grading

    def count_up_to_degree(self, k: int) -> int:
        if k < -1:
            raise DomainError(f"degree bound {k} must be at least -1")
        return self.p ** (min(k, self.m - 1) + 1)

    def elements_up_to_degree(self, k: int) -> np.ndarray:
        """All codes of degree <= k (deg 0 = -1, so k = -1 yields {0})."""
        return np.arange(self.count_up_to_degree(k), dtype=np.int64)

    def random(self, rng: np.random.Generator, size=None, max_degree: Optional[int] = None,
               nonzero: bool = False):
        bound = self.q if max_degree is None else self.count_up_to_degree(max_degree)
        low = 1 if nonzero else 0
        if size is None:
            return int(rng.integers(low, bound))
        return rng.integers(low, bound, size=size, dtype=np.int64)

    # ------------------------------------------------------------------
    # tables

    def _build_tables(self) -> None:
        q, p = self.q, self.p
        codes = np.arange(q, dtype=np.int64)
        if self.m == 1:
            self._add = ((codes[:, None] + codes[None, :]) % p).astype(np.int32)
            self._mul = ((codes[:, None] * codes[None, :]) % p).astype(np.int32)
            self._neg = ((-codes) % p).astype(np.int32)
            self._inv = np.zeros(q, dtype=np.int32)
            for a in range(1, q):
                self._inv[a] = pow(a, p - 2, p)
            self._exp = None
            self._log = None
            return

        digits = self.digits(codes)
        self._add = self.from_digits((digits[:, None, :] + digits[None, :, :]) % p).astype(np.int32)
        self._neg = self.from_digits((-digits) % p).astype(np.int32)

        generator = self._primitive_element()
        exp = np.zeros(q - 1, dtype=np.int64)
        cur = 1
        for k in range(q - 1):
            exp[k] = cur
            cur = self._poly_mul_codes(cur, generator)
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(q - 1)
        self._exp = exp
        self._log = log

        lsum = (log[:, None] + log[None, :]) % (q - 1)
        mul = exp[lsum]
        mul[0, :] = 0
        mul[:, 0] = 0
        self._mul = mul.astype(np.int32)
        inv = np.zeros(q, dtype=np.int32)
        inv[1:] = exp[(-log[1:]) % (q - 1)]
        self._inv = inv

    def _poly_mul_codes(self, a: int, b: int) -> int:
        prod_coeffs = _poly_mul(self.coefficients(a), self.coefficients(b), self.p)
        return self.from_coefficients(prod_coeffs)

    def _primitive_element(self) -> int:
        order = self.q - 1
        primes = _factor_primes(order)
        for g in range(2, self.q):
            if all(self._pow_scalar(g, order // r) != 1 for r in primes):
                return g
        return 1  # q = 2

    def _pow_scalar(self, a: int, e: int) -> int:
        result, base = 1, int(a)
        while e > 0:
            if e & 1:
                result = self._poly_mul_codes(result, base)
            base = self._poly_mul_codes(base, base)
            e >>= 1
        return result

    def _require_tables(self, *values) -> bool:
        vectorized = any(isinstance(v, np.ndarray) for v in values)
        if vectorized and not self.tables:
            raise ResourceBudgetError(
                f"vectorized arithmetic needs lookup tables; q={self.q} exceeds field.table_limit",
                predicted=self.q, budget=config.get("field.table_limit", 3200))
        return vectorized

    @staticmethod
    def _out(value):
        if isinstance(value, np.ndarray) and value.ndim > 0:
            return value
        return int(value)

    # ------------------------------------------------------------------
    # arithmetic

    def add(self, a: Code, b: Code) -> Code:
        if self.tables:
            return self._out(self._add[a, b])
        self._require_tables(a, b)
        ca, cb = self.coefficients(a), self.coefficients(b)
        return sum(((x + y) % self.p) * self.p ** i for i, (x, y) in enumerate(zip(ca, cb)))

    def neg(self, a: Code) -> Code:
        if self.tables:
            return self._out(self._neg[a])
        self._require_tables(a)
        return sum(((-x) % self.p) * self.p ** i for i, x in enumerate(self.coefficients(a)))

    def sub(self, a: Code, b: Code) -> Code:
        return self.add(a, self.neg(b))

    def mul(self, a: Code, b: Code) -> Code:
        if self.tables:
            return self._out(self._mul[a, b])
        self._require_tables(a, b)
        return self._poly_mul_codes(int(a), int(b))

    def inv(self, a: Code) -> Code:
        if isinstance(a, np.ndarray):
            self._require_tables(a)
            if np.any(a == 0):
                raise DomainError("inverse of zero")
            return self._out(self._inv[a])
        if int(a) == 0:
            raise DomainError("inverse of zero")
        if self.tables:
            return int(self._inv[int(a)])
        return self._pow_scalar(int(a), self.q - 2)

    def pow(self, a: Code, e: int) -> Code:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if e == 0:
            return np.ones_like(a) if isinstance(a, np.ndarray) else 1
        if not isinstance(a, np.ndarray) and not self.tables:
            return self._pow_scalar(int(a), e)
        result, base = None, a
        while e > 0:
            if e & 1:
                result = base if result is None else self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def mul_scalar(self, c: int, a: Code) -> Code:
        """Multiply by the integer c (structure constants)."""
        return self.mul(self.scalar(c), a)

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)
