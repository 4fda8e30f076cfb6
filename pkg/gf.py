"""
Exact arithmetic in GF(p^k).

Elements are plain ints: the coefficient vector (c0, ..., c_{k-1}) of a
residue modulo the field modulus is stored as c0 + c1*p + ... + c_{k-1}*p^(k-1).
Prime-field elements therefore have the same encoding in every extension.
"""
import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from sympy import factorint, isprime, primefactors

from errors import (
    DegenerateLeadingCoefficient,
    FieldMismatch,
    FieldTooLarge,
    NotASubfield,
    NotDefinedOverBase,
    NotPrime,
    ParseError,
    ReducibleModulus,
)
from settings import get_settings

FIELD_CAP = 1 << 24
ROOT_SCAN_LIMIT = 1 << 16


# ---------------------------------------------------------------------------
# polynomials over the prime field GF(p), coefficient lists low -> high
# ---------------------------------------------------------------------------

def _pm_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pm_mod(a: List[int], m: Sequence[int], p: int) -> List[int]:
    a = _pm_trim([x % p for x in a])
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        factor = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - dm
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - factor * c) % p
        _pm_trim(a)
    return a


def _pm_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pm_trim(out)


def _pm_mulmod(a, b, m, p) -> List[int]:
    return _pm_mod(_pm_mul(a, b, p), m, p)


def _pm_powmod(a, e: int, m, p) -> List[int]:
    result = [1]
    base = _pm_mod(list(a), m, p)
    while e:
        if e & 1:
            result = _pm_mulmod(result, base, m, p)
        base = _pm_mulmod(base, base, m, p)
        e >>= 1
    return result


def _pm_gcd(a, b, p) -> List[int]:
    a = _pm_trim([x % p for x in a])
    b = _pm_trim([x % p for x in b])
    while b:
        a, b = b, _pm_mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(x * inv) % p for x in a]
    return a


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """
    Ben-Or test: a monic f of degree k over GF(p) is irreducible iff
    gcd(x^(p^i) - x, f) = 1 for every i <= k/2.
    """
    k = len(modulus) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    if modulus[0] % p == 0:
        return False
    x = [0, 1]
    power = x
    for _ in range(k // 2):
        power = _pm_powmod(power, p, modulus, p)
        diff = list(power) + [0] * max(0, 2 - len(power))
        diff[1] = (diff[1] - 1) % p
        if len(_pm_gcd(modulus, _pm_trim(diff), p)) > 1:
            return False
    return True


@lru_cache(maxsize=None)
def smallest_irreducible(p: int, k: int) -> Tuple[int, ...]:
    """Lexicographically smallest monic irreducible, comparing c0 first."""
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        candidate = tuple(low) + (1,)
        if is_irreducible(candidate, p):
            return candidate
    raise ReducibleModulus(f"no irreducible of degree {k} over GF({p})")


# ---------------------------------------------------------------------------
# the field
# ---------------------------------------------------------------------------

class FiniteField:
    """
    GF(p^k) with a fixed monic irreducible modulus.

    Fields up to `table_limit` elements carry exp/log tables (scalar lists and
    numpy copies for vectorised arithmetic); larger fields multiply residues
    directly. Instances are immutable and shared through `construct_field`.
    """

    def __init__(self, p: int, k: int, modulus: Sequence[int], table_limit: int):
        self.p = p
        self.k = k
        self.q = p ** k
        self.modulus = tuple(modulus)
        self._powers = [p ** i for i in range(k)]
        self.tabled = k > 1 and self.q <= table_limit
        self._add_table = None
        self._neg_table = None
        self.primitive = self._find_primitive()
        if self.tabled:
            self._build_tables()

    # identity -------------------------------------------------------------
    @property
    def key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.p, self.k, self.modulus)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteField) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return format_field(self)

    def __reduce__(self):
        return (construct_field, (self.p, self.k, self.modulus))

    @property
    def generator(self) -> int:
        """The class of t modulo the modulus."""
        return self.p if self.k > 1 else (-self.modulus[0]) % self.p

    def elements(self) -> range:
        return range(self.q)

    # encoding -------------------------------------------------------------
    def coeffs(self, x: int) -> Tuple[int, ...]:
        out = []
        for _ in range(self.k):
            x, r = divmod(x, self.p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, cs: Sequence[int]) -> int:
        if len(cs) > self.k:
            raise FieldMismatch(f"{len(cs)} coefficients for a degree-{self.k} field")
        return sum((c % self.p) * self._powers[i] for i, c in enumerate(cs))

    def lex_key(self, x: int) -> Tuple[int, ...]:
        return self.coeffs(x)

    def elem(self, x: int) -> "FieldElem":
        return FieldElem(self, x)

    def in_prime_field(self, x: int) -> bool:
        return x < self.p

    # scalar arithmetic ----------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.k == 1:
            return (a + b) % self.p
        if self._add_table is not None:
            return self._add_table[a][b]
        return self._digit_add(a, b)

    def neg(self, a: int) -> int:
        if self.p == 2 or a == 0:
            return a
        if self.k == 1:
            return self.p - a
        if self._neg_table is not None:
            return self._neg_table[a]
        return self.from_coeffs([(-c) % self.p for c in self.coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.k == 1:
            return (a * b) % self.p
        if self.tabled:
            return self._exp[self._log[a] + self._log[b]]
        return self._poly_mul(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + format_field(self))
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        if self.tabled:
            return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero to a negative power")
            return 0
        if self.k == 1:
            return pow(a, e % (self.p - 1), self.p)
        if self.tabled:
            return self._exp[(self._log[a] * e) % (self.q - 1)]
        e %= self.q - 1
        result, base = 1, a
        while e:
            if e & 1:
                result = self._poly_mul(result, base)
            base = self._poly_mul(base, base)
            e >>= 1
        return result

    def scalar(self, n: int) -> int:
        """Image of the integer n in the prime field."""
        return n % self.p

    def frobenius(self, a: int, j: int = 1) -> int:
        """a -> a^(p^j)."""
        j %= self.k
        return self.pow(a, self.p ** j) if j else a

    def trace(self, a: int, sub_k: int = 1) -> int:
        """Relative trace to the subfield GF(p^sub_k)."""
        if self.k % sub_k:
            raise NotASubfield(f"GF({self.p}^{sub_k}) is not inside {format_field(self)}")
        total, y = 0, a
        for _ in range(self.k // sub_k):
            total = self.add(total, y)
            y = self.frobenius(y, sub_k)
        return total

    def norm(self, a: int, sub_k: int = 1) -> int:
        if self.k % sub_k:
            raise NotASubfield(f"GF({self.p}^{sub_k}) is not inside {format_field(self)}")
        total, y = 1, a
        for _ in range(self.k // sub_k):
            total = self.mul(total, y)
            y = self.frobenius(y, sub_k)
        return total

    def is_square(self, a: int) -> bool:
        if a == 0 or self.p == 2:
            return True
        return self.pow(a, (self.q - 1) // 2) == 1

    @property
    def non_square(self) -> int:
        for z in range(2, self.q):
            if not self.is_square(z):
                return z
        raise ValueError("characteristic 2 has no non-squares")

    def sqrt(self, a: int) -> Optional[int]:
        """A square root of a, or None when a is not a square."""
        if a == 0:
            return 0
        if self.p == 2:
            return self.pow(a, self.q // 2)
        if not self.is_square(a):
            return None
        if self.q % 4 == 3:
            return self.pow(a, (self.q + 1) // 4)
        # Tonelli-Shanks on the multiplicative group
        odd, s = self.q - 1, 0
        while odd % 2 == 0:
            odd //= 2
            s += 1
        c = self.pow(self.non_square, odd)
        t = self.pow(a, odd)
        r = self.pow(a, (odd + 1) // 2)
        m = s
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = self.mul(t2, t2)
                i += 1
            b = c
            for _ in range(m - i - 1):
                b = self.mul(b, b)
            r = self.mul(r, b)
            c = self.mul(b, b)
            t = self.mul(t, c)
            m = i
        return r

    def half_trace(self, a: int) -> int:
        """Sum of a^(4^i), i <= (k-1)/2; solves y^2 + y = a when k is odd and Tr(a) = 0."""
        total, y = 0, a
        for _ in range((self.k + 1) // 2):
            total = self.add(total, y)
            y = self.pow(y, 4)
        return total

    # vectorised arithmetic on numpy int64 arrays ------------------------------
    def varray(self, values) -> np.ndarray:
        return np.asarray(values, dtype=np.int64)

    def vadd(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return np.bitwise_xor(a, b)
        if self.k == 1:
            return (a + b) % self.p
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for pw in self._powers:
            out += (((a // pw) % self.p + (b // pw) % self.p) % self.p) * pw
        return out

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a.copy()
        if self.k == 1:
            return (-a) % self.p
        out = np.zeros_like(a)
        for pw in self._powers:
            out += ((-((a // pw) % self.p)) % self.p) * pw
        return out

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a * b) % self.p
        if self.tabled:
            out = self._exp_np[self._log_np[a] + self._log_np[b]]
            return np.where((a == 0) | (b == 0), 0, out)
        return np.vectorize(self.mul, otypes=[np.int64])(a, b)

    def vpow(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        if self.tabled:
            out = self._exp_np[(self._log_np[a] * e) % (self.q - 1)]
            return np.where(a == 0, 0, out)
        result = np.ones_like(a)
        base = a.copy()
        while e:
            if e & 1:
                result = self.vmul(result, base)
            base = self.vmul(base, base)
            e >>= 1
        return result

    def vis_square(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return np.ones(a.shape, dtype=bool)
        return (a == 0) | (self.vpow(a, (self.q - 1) // 2) == 1)

    def vtrace(self, a) -> np.ndarray:
        """Absolute trace of every entry (values land in GF(p))."""
        total = np.zeros_like(np.asarray(a, dtype=np.int64))
        y = np.asarray(a, dtype=np.int64)
        for _ in range(self.k):
            total = self.vadd(total, y)
            y = self.vpow(y, self.p)
        return total

    # construction helpers ---------------------------------------------------
    def _digit_add(self, a: int, b: int) -> int:
        out, pw = 0, 1
        for _ in range(self.k):
            a, ra = divmod(a, self.p)
            b, rb = divmod(b, self.p)
            out += ((ra + rb) % self.p) * pw
            pw *= self.p
        return out

    def _poly_mul(self, a: int, b: int) -> int:
        product = _pm_mulmod(list(self.coeffs(a)), list(self.coeffs(b)), self.modulus, self.p)
        return self.from_coeffs(product)

    def _find_primitive(self) -> int:
        if self.q == 2:
            return 1
        order = self.q - 1
        factors = primefactors(order)
        mul = (lambda a, b: (a * b) % self.p) if self.k == 1 else self._poly_mul

        def power(a, e):
            result, base = 1, a
            while e:
                if e & 1:
                    result = mul(result, base)
                base = mul(base, base)
                e >>= 1
            return result

        head = [self.generator] if self.k > 1 else []
        for g in itertools.chain(head, range(2, self.q)):
            if g == 0:
                continue
            if all(power(g, order // r) != 1 for r in factors):
                return g
        raise ReducibleModulus(f"no primitive element in {format_field(self)}")

    def _build_tables(self):
        order = self.q - 1
        exp = [0] * (2 * order)
        log = [0] * self.q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._poly_mul(x, self.primitive)
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        self._exp = exp
        self._log = log
        self._exp_np = np.array(exp, dtype=np.int64)
        self._log_np = np.array(log, dtype=np.int64)
        if self.p != 2:
            self._neg_table = [self.from_coeffs([(-c) % self.p for c in self.coeffs(a)])
                               for a in range(self.q)]
            if self.q <= 1024:
                self._add_table = [[self._digit_add(a, b) for b in range(self.q)]
                                   for a in range(self.q)]


@dataclass(frozen=True)
class FieldElem:
    """Typed wrapper around an encoded element, used at API and file boundaries."""

    field: FiniteField
    value: int

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return self.field.coeffs(self.value)

    def _check(self, other: "FieldElem") -> int:
        if isinstance(other, int):
            return self.field.scalar(other)
        if other.field != self.field:
            raise FieldMismatch(f"{other.field} vs {self.field}")
        return other.value

    def __add__(self, other):
        return FieldElem(self.field, self.field.add(self.value, self._check(other)))

    def __sub__(self, other):
        return FieldElem(self.field, self.field.sub(self.value, self._check(other)))

    def __mul__(self, other):
        return FieldElem(self.field, self.field.mul(self.value, self._check(other)))

    def __truediv__(self, other):
        return FieldElem(self.field, self.field.div(self.value, self._check(other)))

    def __pow__(self, e: int):
        return FieldElem(self.field, self.field.pow(self.value, e))

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.value))

    def __repr__(self) -> str:
        return format_element(self.field, self.value)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def construct_field(p: int, k: int = 1, modulus: Optional[Sequence[int]] = None) -> FiniteField:
    """
    Build GF(p^k).

    Args:
        p: Prime characteristic
        k: Extension degree
        modulus: Monic degree-k modulus, low-to-high; the lexicographically
            smallest irreducible is used when omitted

    Returns:
        FiniteField: shared descriptor for this (p, k, modulus)
    """
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if k < 1:
        raise ReducibleModulus(f"extension degree must be >= 1, got {k}")
    if p ** k > FIELD_CAP:
        raise FieldTooLarge(f"GF({p}^{k}) exceeds the field cap 2^24")
    if modulus is None:
        modulus = smallest_irreducible(p, k)
    modulus = tuple(int(c) % p for c in modulus)
    if len(modulus) != k + 1 or modulus[-1] != 1:
        raise ReducibleModulus(f"modulus {modulus} is not monic of degree {k}")
    return _field(p, k, modulus)


@lru_cache(maxsize=None)
def _field(p: int, k: int, modulus: Tuple[int, ...]) -> FiniteField:
    if not is_irreducible(modulus, p):
        raise ReducibleModulus(f"modulus {modulus} is reducible over GF({p})")
    field = FiniteField(p, k, modulus, get_settings().TABLE_LIMIT)
    logger.debug(f"Constructed {format_field(field)}")
    return field


def field_of_order(q: int) -> FiniteField:
    """GF(q) with its default modulus, for a prime power q."""
    factors = factorint(q) if q > 1 else {}
    if len(factors) != 1:
        raise NotPrime(f"{q} is not a prime power")
    (p, k), = factors.items()
    return construct_field(p, k)


def extension(field: FiniteField, m: int) -> FiniteField:
    """GF(q^m) with its default modulus."""
    if m == 1:
        return field
    return construct_field(field.p, field.k * m)


# ---------------------------------------------------------------------------
# univariate polynomials over a FiniteField, coefficient lists low -> high
# ---------------------------------------------------------------------------

def poly_trim(a: List[int]) -> List[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_add(field: FiniteField, a: Sequence[int], b: Sequence[int]) -> List[int]:
    n = max(len(a), len(b))
    return poly_trim([field.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0)
                      for i in range(n)])


def poly_sub(field: FiniteField, a: Sequence[int], b: Sequence[int]) -> List[int]:
    return poly_add(field, a, [field.neg(c) for c in b])


def poly_scale(field: FiniteField, a: Sequence[int], c: int) -> List[int]:
    return poly_trim([field.mul(x, c) for x in a])


def poly_mul(field: FiniteField, a: Sequence[int], b: Sequence[int]) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = field.add(out[i + j], field.mul(x, y))
    return poly_trim(out)


def poly_divmod(field: FiniteField, a: Sequence[int], b: Sequence[int]) -> Tuple[List[int], List[int]]:
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = poly_trim(a)
    if len(a) < len(b):
        return [], a
    inv_lead = field.inv(b[-1])
    quot = [0] * (len(a) - len(b) + 1)
    rem = list(a)
    for shift in range(len(a) - len(b), -1, -1):
        c = field.mul(rem[shift + len(b) - 1], inv_lead)
        quot[shift] = c
        if c:
            for i, y in enumerate(b):
                rem[shift + i] = field.sub(rem[shift + i], field.mul(c, y))
    return poly_trim(quot), poly_trim(rem[:len(b) - 1])


def poly_monic(field: FiniteField, a: Sequence[int]) -> List[int]:
    a = poly_trim(a)
    if not a:
        return a
    return poly_scale(field, a, field.inv(a[-1]))


def poly_gcd(field: FiniteField, a: Sequence[int], b: Sequence[int]) -> List[int]:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(field, a, b)[1]
    return poly_monic(field, a)


def poly_powmod(field: FiniteField, a: Sequence[int], e: int, m: Sequence[int]) -> List[int]:
    result = [1]
    base = poly_divmod(field, a, m)[1]
    while e:
        if e & 1:
            result = poly_divmod(field, poly_mul(field, result, base), m)[1]
        base = poly_divmod(field, poly_mul(field, base, base), m)[1]
        e >>= 1
    return result


def poly_eval(field: FiniteField, a: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = field.add(field.mul(acc, x), c)
    return acc


def poly_roots(field: FiniteField, a: Sequence[int]) -> List[int]:
    """Distinct roots of a in the field, sorted by encoding."""
    a = poly_trim(a)
    if not a:
        raise ZeroDivisionError("roots of the zero polynomial")
    if len(a) == 1:
        return []
    if field.q <= ROOT_SCAN_LIMIT:
        xs = np.arange(field.q, dtype=np.int64)
        acc = np.zeros_like(xs)
        for c in reversed(a):
            acc = field.vadd(field.vmul(acc, xs), c)
        return [int(x) for x in np.nonzero(acc == 0)[0]]
    # gcd with x^q - x isolates the product of the distinct linear factors
    xq = poly_powmod(field, [0, 1], field.q, a)
    split = poly_gcd(field, a, poly_sub(field, xq, [0, 1]))
    return sorted(_split_linear(field, split))


def _split_linear(field: FiniteField, g: List[int]) -> List[int]:
    if len(g) <= 1:
        return []
    if len(g) == 2:
        return [field.neg(field.div(g[0], g[1]))]
    for delta in range(1, field.q):
        if field.p == 2:
            # Tr(delta * x) mod g
            term = poly_divmod(field, [0, delta], g)[1]
            acc = list(term)
            for _ in range(field.k - 1):
                term = poly_divmod(field, poly_mul(field, term, term), g)[1]
                acc = poly_add(field, acc, term)
            h = poly_gcd(field, g, acc)
        else:
            pw = poly_powmod(field, [delta, 1], (field.q - 1) // 2, g)
            h = poly_gcd(field, g, poly_sub(field, pw, [1]))
        if 1 < len(h) < len(g):
            rest = poly_divmod(field, g, h)[0]
            return _split_linear(field, h) + _split_linear(field, poly_monic(field, rest))
    raise ArithmeticError("failed to split a product of linear factors")


def root_multiplicity(field: FiniteField, a: Sequence[int], r: int) -> int:
    mult, cur = 0, poly_trim(a)
    linear = [field.neg(r), 1]
    while cur:
        quot, rem = poly_divmod(field, cur, linear)
        if rem:
            break
        mult += 1
        cur = quot
    return mult


# ---------------------------------------------------------------------------
# embeddings, Frobenius, subfields
# ---------------------------------------------------------------------------

class Embedding:
    """Ring embedding source -> target fixed by the image of the source generator."""

    def __init__(self, source: FiniteField, target: FiniteField, image_of_t: int):
        self.source = source
        self.target = target
        self.image_of_t = image_of_t
        self._table: Optional[List[int]] = None
        self._inverse: Optional[Dict[int, int]] = None
        if source.q <= ROOT_SCAN_LIMIT:
            self._table = [self._horner(x) for x in range(source.q)]

    def _horner(self, x: int) -> int:
        acc = 0
        for c in reversed(self.source.coeffs(x)):
            acc = self.target.add(self.target.mul(acc, self.image_of_t), c)
        return acc

    def __call__(self, x: int) -> int:
        if self._table is not None:
            return self._table[x]
        return self._horner(x)

    def vmap(self, arr) -> np.ndarray:
        arr = np.asarray(arr, dtype=np.int64)
        if self._table is not None:
            return np.asarray(self._table, dtype=np.int64)[arr]
        return np.vectorize(self._horner, otypes=[np.int64])(arr)

    def restrict(self, y: int) -> int:
        """Preimage of y; raises NotDefinedOverBase when y is outside the subfield."""
        if self.source == self.target:
            return y
        if self.source.k == 1:
            if y < self.source.p:
                return y
            raise NotDefinedOverBase(
                f"{format_element(self.target, y)} is not in {format_field(self.source)}")
        if self._inverse is None:
            if self._table is None:
                raise FieldTooLarge("subfield lookup needs a tabled source field")
            self._inverse = {v: i for i, v in enumerate(self._table)}
        if y not in self._inverse:
            raise NotDefinedOverBase(
                f"{format_element(self.target, y)} is not in {format_field(self.source)}")
        return self._inverse[y]

    def contains(self, y: int) -> bool:
        return self.target.frobenius(y, self.source.k) == y


@lru_cache(maxsize=None)
def embedding(source: FiniteField, target: FiniteField) -> Embedding:
    if source.p != target.p or target.k % source.k:
        raise NotASubfield(f"{format_field(source)} does not embed in {format_field(target)}")
    ratio = target.k // source.k
    if source == target:
        return Embedding(source, target, source.generator)
    if source.k == 1:
        return Embedding(source, target, source.generator)
    if ratio > 1 and not isprime(ratio):
        step = min(factorint(ratio))
        middle = construct_field(source.p, source.k * step)
        first = embedding(source, middle)
        second = embedding(middle, target)
        return Embedding(source, target, second(first(source.generator)))
    roots = poly_roots(target, list(source.modulus))
    if not roots:
        raise NotASubfield(f"{format_field(source)} modulus has no root in {format_field(target)}")
    return Embedding(source, target, min(roots, key=target.lex_key))


def embed(x: int, source: FiniteField, target: FiniteField) -> int:
    """Image of x under the canonical embedding source -> target."""
    return embedding(source, target)(x)


def frobenius_orbit(x: int, field: FiniteField, base: FiniteField) -> List[int]:
    """The orbit x, x^q, x^(q^2), ... for q = |base|, without repetition."""
    if field.p != base.p or field.k % base.k:
        raise NotASubfield(f"{format_field(base)} is not a subfield of {format_field(field)}")
    orbit = [x]
    y = field.frobenius(x, base.k)
    while y != x:
        orbit.append(y)
        y = field.frobenius(y, base.k)
    return orbit


def minimal_polynomial(x: int, field: FiniteField, base: FiniteField) -> List[int]:
    """Minimal polynomial of x over base, coefficients encoded in base."""
    poly = [1]
    for r in frobenius_orbit(x, field, base):
        poly = poly_mul(field, poly, [field.neg(r), 1])
    emb = embedding(base, field)
    return [emb.restrict(c) for c in poly]


def prime_field_rank(field: FiniteField, xs: Iterable[int]) -> int:
    """Rank over GF(p) of the coefficient vectors of xs."""
    prime = construct_field(field.p, 1)
    return rank(prime, [list(field.coeffs(x)) for x in xs])


def subfield_coordinates(target: FiniteField, base: FiniteField):
    """
    Coordinates over base in the power basis 1, t, ..., t^(m-1) of target,
    with t the generator of target and m = [target : base].

    Returns:
        Callable[[int], List[int]]: element of target -> m elements of base
    """
    if target.p != base.p or target.k % base.k:
        raise NotASubfield(f"{format_field(base)} is not a subfield of {format_field(target)}")
    m = target.k // base.k
    emb = embedding(base, target)
    prime = construct_field(target.p, 1)
    powers = [target.pow(target.generator, l) for l in range(m)]
    columns = []
    for l in range(m):
        for r in range(base.k):
            columns.append(target.coeffs(target.mul(emb(base.p ** r), powers[l])))
    # rows: prime-field coordinates; columns: (l, r) pairs
    matrix = [[columns[c][row] for c in range(len(columns))] for row in range(target.k)]

    def coordinates(x: int) -> List[int]:
        sol = solve_linear(prime, matrix, list(target.coeffs(x)))
        out = []
        for l in range(m):
            out.append(base.from_coeffs(sol[l * base.k:(l + 1) * base.k]))
        return out

    return coordinates


@dataclass(frozen=True)
class QuadraticRoots:
    field: FiniteField
    roots: Tuple[int, int]
    rational: bool

    @property
    def conjugate_pair(self) -> bool:
        return not self.rational


def solve_quadratic(field: FiniteField, a: int, b: int, c: int) -> QuadraticRoots:
    """
    Roots of a*x^2 + b*x + c with their field of definition.

    Roots in GF(q) are returned over `field`; otherwise both roots live in
    GF(q^2) and are Frobenius conjugates.
    """
    if a == 0:
        raise DegenerateLeadingCoefficient("leading coefficient is zero")
    if field.p != 2:
        disc = field.sub(field.mul(b, b), field.mul(field.scalar(4), field.mul(a, c)))
        target = field
        if not field.is_square(disc):
            target = extension(field, 2)
            emb = embedding(field, target)
            a, b, disc = emb(a), emb(b), emb(disc)
        s = target.sqrt(disc)
        two_a = target.mul(target.scalar(2), a)
        r1 = target.div(target.add(target.neg(b), s), two_a)
        r2 = target.div(target.sub(target.neg(b), s), two_a)
        return _roots(target, r1, r2, target is field)
    if b == 0:
        r = field.sqrt(field.div(c, a))
        return QuadraticRoots(field, (r, r), True)
    # x = (b/a) y turns the equation into y^2 + y = a c / b^2
    beta = field.div(field.mul(a, c), field.mul(b, b))
    scale = field.div(b, a)
    target = field
    if field.trace(beta) != 0:
        target = extension(field, 2)
        emb = embedding(field, target)
        beta, scale = emb(beta), emb(scale)
    if target.k % 2 == 1:
        y = target.half_trace(beta)
    else:
        y = poly_roots(target, [beta, 1, 1])[0]
    r1 = target.mul(scale, y)
    r2 = target.mul(scale, target.add(y, 1))
    return _roots(target, r1, r2, target is field)


def _roots(field: FiniteField, r1: int, r2: int, rational: bool) -> QuadraticRoots:
    first, second = sorted((r1, r2), key=field.lex_key)
    return QuadraticRoots(field, (first, second), rational)


# ---------------------------------------------------------------------------
# linear algebra over GF(q)
# ---------------------------------------------------------------------------

def rref(field: FiniteField, rows, ncols: Optional[int] = None) -> Tuple[np.ndarray, List[int]]:
    """Reduced row-echelon form and pivot columns."""
    mat = np.array(rows, dtype=np.int64)
    if mat.size == 0:
        return mat.reshape(0, ncols or 0), []
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    nrows, ncols = mat.shape
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(mat[r:, col])[0]
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            mat[[r, piv]] = mat[[piv, r]]
        inv = field.inv(int(mat[r, col]))
        mat[r] = field.vmul(mat[r], inv)
        factors = mat[:, col].copy()
        factors[r] = 0
        mask = factors != 0
        if mask.any():
            mat[mask] = field.vsub(mat[mask], field.vmul(factors[mask][:, None], mat[r][None, :]))
        pivots.append(col)
        r += 1
    return mat, pivots


def rank(field: FiniteField, rows) -> int:
    if len(rows) == 0:
        return 0
    return len(rref(field, rows)[1])


def nullspace(field: FiniteField, rows, ncols: int) -> List[List[int]]:
    """Basis of {v : rows . v = 0}."""
    if len(rows) == 0:
        return [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    mat, pivots = rref(field, rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for r, pc in enumerate(pivots):
            v[pc] = field.neg(int(mat[r, f]))
        basis.append(v)
    return basis


def determinant(field: FiniteField, rows) -> int:
    mat = [list(r) for r in rows]
    n = len(mat)
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if mat[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = field.neg(det)
        det = field.mul(det, mat[col][col])
        inv = field.inv(mat[col][col])
        for r in range(col + 1, n):
            if mat[r][col]:
                factor = field.mul(mat[r][col], inv)
                mat[r] = [field.sub(x, field.mul(factor, y)) for x, y in zip(mat[r], mat[col])]
    return det


def solve_linear(field: FiniteField, rows, rhs: Sequence[int]) -> Optional[List[int]]:
    """One solution of rows . x = rhs, or None."""
    ncols = len(rows[0]) if len(rows) else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    mat, pivots = rref(field, aug)
    if ncols in pivots:
        return None
    x = [0] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = int(mat[r, ncols])
    return x


# ---------------------------------------------------------------------------
# literal syntax
# ---------------------------------------------------------------------------

_FIELD_RE = re.compile(r"^\s*GF\(\s*(\d+)(?:\s*\^\s*(\d+))?\s*(?:;\s*([\d,\s]*))?\)\s*$")


def format_field(field: FiniteField) -> str:
    return f"GF({field.p}^{field.k};{','.join(str(c) for c in field.modulus)})"


def parse_field(text: str) -> FiniteField:
    """Accepts GF(p^k;m0,...,mk), GF(q;m0,...,mk), GF(p^k) and GF(q)."""
    match = _FIELD_RE.match(text)
    if not match:
        raise ParseError(f"bad field literal {text!r}", line=1, column=1)
    base, power, modulus = match.groups()
    base = int(base)
    if power is not None:
        p, k = base, int(power)
    else:
        factors = factorint(base)
        if len(factors) != 1:
            raise NotPrime(f"{base} is not a prime power")
        (p, k), = factors.items()
    coeffs = None
    if modulus:
        coeffs = [int(c) for c in modulus.split(",") if c.strip()]
    return construct_field(p, k, coeffs)


def format_element(field: FiniteField, x: int) -> str:
    return "[" + ",".join(str(c) for c in field.coeffs(x)) + "]"


def parse_element(field: FiniteField, text: str) -> int:
    text = text.strip()
    if text.startswith("["):
        parts = [t for t in text.strip("[]").split(",") if t.strip()]
        return field.from_coeffs([int(t) for t in parts])
    return field.scalar(int(text))
