"""
Homogeneous forms over a finite field.

A form is a sparse map from exponent vectors to nonzero encoded field
elements. Binary forms (two variables, read as s and t) carry the root,
gcd and resultant tools used for line sections and rational curves.
"""
import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from errors import (
    ArityMismatch,
    BothZero,
    DegenerateSpan,
    FieldMismatch,
    ParseError,
    SearchSpaceTooLarge,
    ValidationError,
    ZeroForm,
    ZeroPolynomial,
)
from gf import (
    FiniteField,
    determinant,
    embedding,
    extension,
    format_element,
    parse_element,
    poly_gcd,
    poly_roots,
    poly_trim,
    rank,
    root_multiplicity,
)

Monomial = Tuple[int, ...]
ENUMERATION_CAP = 1 << 24
CHUNK = 1 << 16


def monomials(nvars: int, degree: int) -> List[Monomial]:
    """All exponent vectors of the given degree, lexicographically descending."""
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exp = [0] * nvars
        for i in combo:
            exp[i] += 1
        out.append(tuple(exp))
    return sorted(out, reverse=True)


class HomogeneousPoly:
    """Immutable homogeneous form in `nvars` variables of total degree `degree`."""

    __slots__ = ("field", "nvars", "degree", "terms", "_hash")

    def __init__(self, field: FiniteField, nvars: int, degree: int,
                 terms: Optional[Dict[Monomial, int]] = None):
        self.field = field
        self.nvars = nvars
        self.degree = degree
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != nvars:
                raise ArityMismatch(f"exponent {exp} in a form of {nvars} variables")
            if sum(exp) != degree:
                raise ValidationError(f"exponent {exp} is not of degree {degree}")
            if c:
                clean[exp] = c
        self.terms = clean
        self._hash = None

    # constructors --------------------------------------------------------
    @classmethod
    def zero(cls, field: FiniteField, nvars: int, degree: int = 0) -> "HomogeneousPoly":
        return cls(field, nvars, degree, {})

    @classmethod
    def constant(cls, field: FiniteField, nvars: int, c: int) -> "HomogeneousPoly":
        return cls(field, nvars, 0, {(0,) * nvars: c})

    @classmethod
    def variable(cls, field: FiniteField, nvars: int, i: int) -> "HomogeneousPoly":
        exp = [0] * nvars
        exp[i] = 1
        return cls(field, nvars, 1, {tuple(exp): 1})

    @classmethod
    def linear(cls, field: FiniteField, coeffs: Sequence[int]) -> "HomogeneousPoly":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(field, n, 1, terms)

    @classmethod
    def from_terms(cls, field: FiniteField, nvars: int, terms: Dict[Monomial, int]) -> "HomogeneousPoly":
        nonzero = [e for e, c in terms.items() if c]
        degree = sum(nonzero[0]) if nonzero else 0
        return cls(field, nvars, degree, terms)

    # basic protocol ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exp: Monomial) -> int:
        return self.terms.get(tuple(exp), 0)

    def leading(self) -> Tuple[Monomial, int]:
        if not self.terms:
            raise ZeroForm("zero form has no leading term")
        exp = max(self.terms)
        return exp, self.terms[exp]

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogeneousPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.nvars == other.nvars
        return (self.field == other.field and self.nvars == other.nvars
                and self.degree == other.degree and self.terms == other.terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.field, self.nvars, self.degree, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"HomogeneousPoly({format_poly(self)})"

    def _same_space(self, other: "HomogeneousPoly"):
        if other.field != self.field:
            raise FieldMismatch(f"{other.field} vs {self.field}")
        if other.nvars != self.nvars:
            raise ArityMismatch(f"{other.nvars} vs {self.nvars} variables")

    # ring operations -----------------------------------------------------
    def __add__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        self._same_space(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if other.degree != self.degree:
            raise ValidationError(f"adding forms of degree {self.degree} and {other.degree}")
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            terms[exp] = self.field.add(terms.get(exp, 0), c)
        return HomogeneousPoly(self.field, self.nvars, self.degree, terms)

    def __neg__(self) -> "HomogeneousPoly":
        return HomogeneousPoly(self.field, self.nvars, self.degree,
                               {e: self.field.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        return self + (-other)

    def scale(self, c: int) -> "HomogeneousPoly":
        return HomogeneousPoly(self.field, self.nvars, self.degree,
                               {e: self.field.mul(v, c) for e, v in self.terms.items()})

    def __mul__(self, other) -> "HomogeneousPoly":
        if isinstance(other, int):
            return self.scale(self.field.scalar(other))
        self._same_space(other)
        terms: Dict[Monomial, int] = {}
        add, mul = self.field.add, self.field.mul
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                terms[exp] = add(terms.get(exp, 0), mul(c1, c2))
        return HomogeneousPoly(self.field, self.nvars, self.degree + other.degree, terms)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "HomogeneousPoly":
        result = HomogeneousPoly.constant(self.field, self.nvars, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # calculus and substitution -------------------------------------------
    def partial(self, i: int) -> "HomogeneousPoly":
        terms: Dict[Monomial, int] = {}
        for exp, c in self.terms.items():
            if exp[i]:
                new = list(exp)
                new[i] -= 1
                terms[tuple(new)] = self.field.add(terms.get(tuple(new), 0),
                                                   self.field.mul(c, self.field.scalar(exp[i])))
        return HomogeneousPoly(self.field, self.nvars, max(self.degree - 1, 0), terms)

    def jacobian(self) -> List["HomogeneousPoly"]:
        return [self.partial(i) for i in range(self.nvars)]

    def compose(self, forms: Sequence["HomogeneousPoly"]) -> "HomogeneousPoly":
        """Substitute x_i -> forms[i]; all forms share one degree and variable set."""
        if len(forms) != self.nvars:
            raise ArityMismatch(f"{len(forms)} forms for {self.nvars} variables")
        target_vars = forms[0].nvars
        field = forms[0].field
        inner = max((f.degree for f in forms if not f.is_zero()), default=forms[0].degree)
        src = self if field == self.field else self.base_change(field)
        powers: Dict[Tuple[int, int], HomogeneousPoly] = {}

        def power(i: int, e: int) -> HomogeneousPoly:
            if (i, e) not in powers:
                powers[(i, e)] = forms[i] ** e if e < 2 else power(i, e - 1) * forms[i]
            return powers[(i, e)]

        total = HomogeneousPoly.zero(field, target_vars, self.degree * inner)
        for exp, c in src.terms.items():
            term = HomogeneousPoly.constant(field, target_vars, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            if not term.is_zero():
                total = total + term
        return HomogeneousPoly(field, target_vars, self.degree * inner, total.terms)

    def base_change(self, target: FiniteField) -> "HomogeneousPoly":
        if target == self.field:
            return self
        emb = embedding(self.field, target)
        return HomogeneousPoly(target, self.nvars, self.degree,
                               {e: emb(c) for e, c in self.terms.items()})

    def map_coefficients(self, fn) -> "HomogeneousPoly":
        return HomogeneousPoly(self.field, self.nvars, self.degree,
                               {e: fn(c) for e, c in self.terms.items()})

    def normalized(self) -> "HomogeneousPoly":
        """Leading coefficient (lex order, x0 first) scaled to 1."""
        if self.is_zero():
            return self
        return self.scale(self.field.inv(self.leading()[1]))

    # evaluation ----------------------------------------------------------
    def evaluate(self, point: Sequence[int], field: Optional[FiniteField] = None) -> int:
        """
        Value at a coordinate vector.

        Args:
            point: Encoded coordinates
            field: Field the coordinates live in; defaults to the form's field

        Returns:
            int: encoded value in `field`
        """
        field = field or self.field
        if len(point) != self.nvars:
            raise ArityMismatch(f"{len(point)} coordinates for {self.nvars} variables")
        if field.p != self.field.p or field.k % self.field.k:
            raise FieldMismatch(f"{self.field} does not embed in {field}")
        src = self.base_change(field)
        total = 0
        for exp, c in src.terms.items():
            val = c
            for x, e in zip(point, exp):
                if e:
                    val = field.mul(val, field.pow(x, e))
                    if val == 0:
                        break
            total = field.add(total, val)
        return total

    def veval(self, points, field: Optional[FiniteField] = None) -> np.ndarray:
        """Values at every row of an (M, nvars) array of encoded coordinates."""
        field = field or self.field
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ArityMismatch(f"points of shape {pts.shape} for {self.nvars} variables")
        src = self.base_change(field)
        cache: Dict[Tuple[int, int], np.ndarray] = {}

        def power(i: int, e: int) -> np.ndarray:
            if (i, e) not in cache:
                cache[(i, e)] = pts[:, i] if e == 1 else field.vmul(power(i, e - 1), pts[:, i])
            return cache[(i, e)]

        total = np.zeros(pts.shape[0], dtype=np.int64)
        for exp, c in src.terms.items():
            val = np.full(pts.shape[0], c, dtype=np.int64)
            for i, e in enumerate(exp):
                if e:
                    val = field.vmul(val, power(i, e))
            total = field.vadd(total, val)
        return total


def restrict_to_line(P: HomogeneousPoly, line) -> HomogeneousPoly:
    """
    The binary form P(s*A + t*B).

    Args:
        P: Form on the ambient space
        line: Anything with a `basis` pair of points, or the pair (A, B) itself;
            points carry `coords` and `field`

    Returns:
        HomogeneousPoly: binary form over the line's field, zero iff the line lies on V(P)
    """
    A, B = getattr(line, "basis", line)
    field = A.field
    if len(A.coords) != P.nvars or len(B.coords) != P.nvars:
        raise ArityMismatch(f"line in P^{len(A.coords) - 1}, form in {P.nvars} variables")
    if rank(field, [list(A.coords), list(B.coords)]) < 2:
        raise DegenerateSpan("spanning points coincide")
    forms = [HomogeneousPoly.linear(field, [a, b]) for a, b in zip(A.coords, B.coords)]
    return P.base_change(field).compose(forms)


# ---------------------------------------------------------------------------
# division
# ---------------------------------------------------------------------------

def divmod_forms(f: HomogeneousPoly, g: HomogeneousPoly) -> Tuple[HomogeneousPoly, HomogeneousPoly]:
    """Division by one form in lex order; remainder terms are not divisible by lead(g)."""
    if g.is_zero():
        raise ZeroForm("division by the zero form")
    f._same_space(g)
    field = f.field
    lead_exp, lead_c = g.leading()
    inv = field.inv(lead_c)
    qdeg = f.degree - g.degree
    quotient: Dict[Monomial, int] = {}
    remainder: Dict[Monomial, int] = {}
    current = dict(f.terms)
    while current:
        exp = max(current)
        c = current.pop(exp)
        if c == 0:
            continue
        if qdeg >= 0 and all(a >= b for a, b in zip(exp, lead_exp)):
            qe = tuple(a - b for a, b in zip(exp, lead_exp))
            qc = field.mul(c, inv)
            quotient[qe] = field.add(quotient.get(qe, 0), qc)
            for ge, gc in g.terms.items():
                if ge == lead_exp:
                    continue
                te = tuple(a + b for a, b in zip(qe, ge))
                val = field.sub(current.get(te, 0), field.mul(qc, gc))
                if val:
                    current[te] = val
                else:
                    current.pop(te, None)
        else:
            remainder[exp] = c
    return (HomogeneousPoly(field, f.nvars, max(qdeg, 0), quotient),
            HomogeneousPoly(field, f.nvars, f.degree, remainder))


def exact_quotient(f: HomogeneousPoly, g: HomogeneousPoly) -> Optional[HomogeneousPoly]:
    quotient, remainder = divmod_forms(f, g)
    return quotient if remainder.is_zero() else None


# ---------------------------------------------------------------------------
# binary forms in (s, t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryRoot:
    field: FiniteField
    point: Tuple[int, int]
    multiplicity: int


def binary_coeffs(f: HomogeneousPoly) -> List[int]:
    """c_i = coefficient of s^i t^(d-i), i = 0..d."""
    if f.nvars != 2:
        raise ArityMismatch(f"binary form expected, got {f.nvars} variables")
    return [f.coefficient((i, f.degree - i)) for i in range(f.degree + 1)]


def binary_from_coeffs(field: FiniteField, coeffs: Sequence[int], degree: Optional[int] = None) -> HomogeneousPoly:
    degree = len(coeffs) - 1 if degree is None else degree
    return HomogeneousPoly(field, 2, degree,
                           {(i, degree - i): c for i, c in enumerate(coeffs) if c})


def _t_valuation(coeffs: Sequence[int], degree: int) -> int:
    top = max(i for i, c in enumerate(coeffs) if c)
    return degree - top


def binary_roots(f: HomogeneousPoly, m: int = 1) -> Tuple[FiniteField, List[BinaryRoot]]:
    """
    Roots of a binary form in P^1(GF(q^m)) with multiplicities.

    Returns:
        Tuple[FiniteField, List[BinaryRoot]]: the field GF(q^m) and the roots,
        each normalised with first nonzero coordinate 1, sorted
    """
    if f.is_zero():
        raise ZeroForm("roots of the zero form")
    target = extension(f.field, m)
    g = f.base_change(target)
    coeffs = binary_coeffs(g)
    roots: List[BinaryRoot] = []
    at_infinity = _t_valuation(coeffs, g.degree)
    if at_infinity:
        roots.append(BinaryRoot(target, (1, 0), at_infinity))
    univariate = poly_trim(coeffs)
    if len(univariate) > 1:
        for x in poly_roots(target, univariate):
            mult = root_multiplicity(target, univariate, x)
            point = (1, target.inv(x)) if x else (0, 1)
            roots.append(BinaryRoot(target, point, mult))
    roots.sort(key=lambda r: r.point)
    return target, roots


def binary_gcd(f: HomogeneousPoly, g: HomogeneousPoly) -> HomogeneousPoly:
    """Gcd normalised so the coefficient of the highest power of s is 1."""
    if f.is_zero() and g.is_zero():
        raise BothZero("gcd of two zero forms")
    if f.is_zero():
        return g.normalized()
    if g.is_zero():
        return f.normalized()
    if f.field != g.field:
        raise FieldMismatch(f"{f.field} vs {g.field}")
    cf, cg = binary_coeffs(f), binary_coeffs(g)
    shared_t = min(_t_valuation(cf, f.degree), _t_valuation(cg, g.degree))
    univariate = poly_gcd(f.field, poly_trim(cf), poly_trim(cg))
    degree = len(univariate) - 1 + shared_t
    return binary_from_coeffs(f.field, univariate, degree)


def binary_quotient(f: HomogeneousPoly, g: HomogeneousPoly) -> HomogeneousPoly:
    quotient = exact_quotient(f, g)
    if quotient is None:
        raise ValidationError("binary form does not divide")
    return quotient


def sylvester_matrix(field: FiniteField, f: Sequence[int], g: Sequence[int]) -> List[List[int]]:
    """Rows of shifted coefficient vectors, coefficients low-to-high."""
    f, g = poly_trim(f), poly_trim(g)
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        row[i:i + m + 1] = f
        rows.append(row)
    for i in range(m):
        row = [0] * size
        row[i:i + n + 1] = g
        rows.append(row)
    return rows


def sylvester_resultant(field: FiniteField, f: Sequence[int], g: Sequence[int]) -> int:
    """Determinant of the Sylvester matrix of two univariate polynomials."""
    f, g = poly_trim(f), poly_trim(g)
    if not f or not g:
        raise ZeroPolynomial("resultant with the zero polynomial")
    if len(f) < 2 or len(g) < 2:
        raise ZeroPolynomial("resultant needs degree >= 1 on both sides")
    return determinant(field, sylvester_matrix(field, f, g))


def dehomogenize(f: HomogeneousPoly) -> List[int]:
    """Binary form -> univariate polynomial in s/t, coefficients low-to-high."""
    return poly_trim(binary_coeffs(f))


# ---------------------------------------------------------------------------
# enumeration of GF(q)^n and P^(n-1)(GF(q))
# ---------------------------------------------------------------------------

def index_block(q: int, width: int, start: int, stop: int) -> np.ndarray:
    """Rows start..stop-1 of GF(q)^width in lex order of encodings (first coordinate slowest)."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.zeros((len(idx), width), dtype=np.int64)
    for col in range(width - 1, -1, -1):
        out[:, col] = idx % q
        idx //= q
    return out


def chart_block(q: int, nvars: int, chart: int, start: int, stop: int) -> np.ndarray:
    """Points of the chart {x_j = 0 for j < chart, x_chart = 1}, rows start..stop-1."""
    tail = index_block(q, nvars - chart - 1, start, stop)
    head = np.zeros((len(tail), chart + 1), dtype=np.int64)
    head[:, chart] = 1
    return np.hstack([head, tail])


def affine_chunks(q: int, nvars: int) -> Iterator[np.ndarray]:
    total = q ** nvars
    for start in range(0, total, CHUNK):
        yield index_block(q, nvars, start, min(total, start + CHUNK))


def projective_chunks(q: int, nvars: int) -> Iterator[np.ndarray]:
    """Canonical points of P^(nvars-1)(GF(q)) in lexicographic order of encodings."""
    for chart in reversed(range(nvars)):
        size = q ** (nvars - chart - 1)
        for start in range(0, size, CHUNK):
            yield chart_block(q, nvars, chart, start, min(size, start + CHUNK))


def vanishes_on_rational_points(P: HomogeneousPoly, projective: bool = True) -> bool:
    """Exhaustive check that P vanishes on GF(q)^n (affine) or P^(n-1)(GF(q))."""
    q = P.field.q
    if P.nvars < 1:
        raise ArityMismatch("form without variables")
    if q ** P.nvars > ENUMERATION_CAP:
        raise SearchSpaceTooLarge(f"{q}^{P.nvars} points exceed 2^24")
    if P.is_zero():
        return True
    chunks = projective_chunks(q, P.nvars) if projective else affine_chunks(q, P.nvars)
    for block in chunks:
        if np.any(P.veval(block) != 0):
            return False
    return True


def vanishing_forms_dimension(field: FiniteField, nvars: int, degree: int) -> int:
    """Dimension of the space of degree-`degree` forms vanishing on all of GF(q)^nvars."""
    monos = monomials(nvars, degree)
    if field.q ** nvars * len(monos) > ENUMERATION_CAP:
        raise SearchSpaceTooLarge(f"evaluation matrix {field.q ** nvars} x {len(monos)} is too large")
    points = index_block(field.q, nvars, 0, field.q ** nvars)
    cols = []
    for exp in monos:
        P = HomogeneousPoly(field, nvars, degree, {exp: 1})
        cols.append(P.veval(points))
    matrix = np.stack(cols, axis=1)
    dim = len(monos) - rank(field, matrix)
    logger.debug(f"vanishing forms: q={field.q} n={nvars} d={degree} -> dim {dim}")
    return dim


# ---------------------------------------------------------------------------
# text syntax: coeff*x0^a0*x1^a1 + ...
# ---------------------------------------------------------------------------

_FACTOR_RE = re.compile(r"^x(\d+)(?:\^(\d+))?$")
_COEFF_RE = re.compile(r"^(\d+|\[[\d,\s]*\])$")


def parse_poly(text: str, field: FiniteField, nvars: Optional[int] = None, line: int = 1) -> HomogeneousPoly:
    """
    Parse `coeff*x0^a0*x1^a1 + ...` into a form.

    Args:
        text: Polynomial text; `-` is accepted between terms
        field: Coefficient field
        nvars: Variable count; inferred from the largest index when omitted
        line: Line number reported in diagnostics

    Returns:
        HomogeneousPoly: the parsed form; inhomogeneous input is rejected
    """
    raw_terms: List[Tuple[int, int, Dict[int, int]]] = []
    cleaned = text.replace(" ", "")
    if not cleaned:
        raise ParseError("empty polynomial", line=line, column=1)
    pieces = re.split(r"(?<=[^\^\[,])([+-])", cleaned)
    sign, column = 1, 1
    for piece in pieces:
        if piece in ("+", "-"):
            sign = -1 if piece == "-" else 1
            column += 1
            continue
        if not piece:
            continue
        coeff = 1
        start = column
        exps: Dict[int, int] = {}
        if piece.startswith("-"):
            sign, piece = -sign, piece[1:]
        for factor in piece.split("*"):
            match = _FACTOR_RE.match(factor)
            if match:
                var, power = int(match.group(1)), int(match.group(2) or 1)
                exps[var] = exps.get(var, 0) + power
            elif _COEFF_RE.match(factor):
                coeff = field.mul(coeff, parse_element(field, factor))
            else:
                raise ParseError(f"bad factor {factor!r}", line=line, column=column)
            column += len(factor) + 1
        if sign < 0:
            coeff = field.neg(coeff)
        raw_terms.append((start, coeff, exps))
        sign = 1
    width = nvars if nvars is not None else 1 + max((max(e) for _, _, e in raw_terms if e), default=0)
    nonzero = [(col, sum(e.values())) for col, c, e in raw_terms if c]
    degree = nonzero[0][1] if nonzero else 0
    for col, deg in nonzero:
        if deg != degree:
            raise ValidationError(f"term of degree {deg} in a form of degree {degree}", line=line, column=col)
    terms: Dict[Monomial, int] = {}
    for col, coeff, exps in raw_terms:
        if exps and max(exps) >= width:
            raise ValidationError(f"variable x{max(exps)} outside x0..x{width - 1}", line=line, column=col)
        exp = tuple(exps.get(i, 0) for i in range(width))
        terms[exp] = field.add(terms.get(exp, 0), coeff)
    return HomogeneousPoly(field, width, degree, {e: c for e, c in terms.items() if c})


def format_poly(P: HomogeneousPoly) -> str:
    if P.is_zero():
        return "0"
    parts = []
    for exp in sorted(P.terms, reverse=True):
        c = P.terms[exp]
        factors = [str(c) if P.field.k == 1 else format_element(P.field, c)]
        for i, e in enumerate(exp):
            if e == 1:
                factors.append(f"x{i}")
            elif e > 1:
                factors.append(f"x{i}^{e}")
        if len(factors) > 1 and factors[0] in ("1", format_element(P.field, 1)):
            factors = factors[1:]
        parts.append("*".join(factors))
    return " + ".join(parts)
