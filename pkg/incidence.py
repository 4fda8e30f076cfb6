"""
Lines and planes against hypersurfaces.

Line censuses scan canonical row-echelon matrices (or pairs of census points
in higher ambient spaces) in vectorised blocks: a form of degree d vanishes
on a line iff it vanishes at d+1 distinct points of it.
"""
import math
import time
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from errors import (
    DegenerateSpan,
    InseparableProjection,
    LineNotInPlane,
    LineNotInX,
    NoRationalPoint,
    PlaneContainedInX,
    PointNotOnHypersurface,
    SearchSpaceTooLarge,
    SecantNotFound,
    SingularConic,
    SingularPoint,
    ValidationError,
)
from gf import (
    FiniteField,
    embedding,
    extension,
    nullspace,
    rank,
    rref,
    solve_quadratic,
)
from mpoly import (
    CHUNK,
    ENUMERATION_CAP,
    HomogeneousPoly,
    binary_roots,
    exact_quotient,
    index_block,
    projective_chunks,
    restrict_to_line,
)
from projvar import (
    Hypersurface,
    ProjPoint,
    RationalCurveMap,
    enumerate_points,
    is_smooth_point,
    projective_size,
)
from settings import get_settings


# ---------------------------------------------------------------------------
# linear subspaces
# ---------------------------------------------------------------------------

def _canonical_rows(field: FiniteField, rows, expected: int) -> Tuple[Tuple[int, ...], ...]:
    mat, pivots = rref(field, rows)
    if len(pivots) < expected:
        raise DegenerateSpan(f"spanning points have rank {len(pivots)} < {expected}")
    return tuple(tuple(int(c) for c in mat[r]) for r in range(expected))


@dataclass(frozen=True, order=True)
class Line:
    """A line of P^N stored as its reduced row-echelon 2 x (N+1) matrix."""

    rows: Tuple[Tuple[int, ...], Tuple[int, ...]]
    field: FiniteField = dc_field(compare=False)

    @classmethod
    def through(cls, a: ProjPoint, b: ProjPoint) -> "Line":
        return cls(_canonical_rows(a.field, [a.coords, b.coords], 2), a.field)

    @classmethod
    def from_rows(cls, field: FiniteField, rows) -> "Line":
        return cls(_canonical_rows(field, rows, 2), field)

    def __eq__(self, other) -> bool:
        return isinstance(other, Line) and self.rows == other.rows and self.field == other.field

    def __hash__(self) -> int:
        return hash((self.rows, self.field))

    def __repr__(self) -> str:
        return f"Line({list(map(list, self.rows))})"

    @property
    def basis(self) -> Tuple[ProjPoint, ProjPoint]:
        return (ProjPoint(self.rows[0], self.field), ProjPoint(self.rows[1], self.field))

    def point_at(self, s: int, t: int, target: Optional[FiniteField] = None) -> ProjPoint:
        target = target or self.field
        A, B = self.basis
        A, B = A.base_change(target), B.base_change(target)
        return ProjPoint.of(target, [target.add(target.mul(s, a), target.mul(t, b))
                                     for a, b in zip(A.coords, B.coords)])

    def points(self) -> List[ProjPoint]:
        F = self.field
        out = [self.point_at(1, 0)] + [self.point_at(x, 1) for x in range(F.q)]
        return sorted(out)

    def contains_point(self, p: ProjPoint) -> bool:
        target = p.field
        rows = [list(r.coords) for r in (pt.base_change(target) for pt in self.basis)]
        return rank(target, rows + [list(p.coords)]) == 2

    def base_change(self, target: FiniteField) -> "Line":
        if target == self.field:
            return self
        emb = embedding(self.field, target)
        return Line(tuple(tuple(emb(c) for c in row) for row in self.rows), target)

    def frobenius(self, base: FiniteField) -> "Line":
        return Line.from_rows(self.field, [[self.field.frobenius(c, base.k) for c in row]
                                           for row in self.rows])

    def field_degree(self, base: FiniteField) -> int:
        """Size of the Frobenius orbit of the line over base."""
        size, cur = 1, self.frobenius(base)
        while cur != self:
            cur = cur.frobenius(base)
            size += 1
        return size

    def restrict(self, base: FiniteField) -> "Line":
        emb = embedding(base, self.field)
        return Line(tuple(tuple(emb.restrict(c) for c in row) for row in self.rows), base)

    def as_map(self) -> RationalCurveMap:
        return RationalCurveMap.line(*self.basis)


@dataclass(frozen=True, order=True)
class Plane:
    """A plane of P^N stored as its reduced row-echelon 3 x (N+1) matrix."""

    rows: Tuple[Tuple[int, ...], ...]
    field: FiniteField = dc_field(compare=False)

    @classmethod
    def through(cls, a: ProjPoint, b: ProjPoint, c: ProjPoint) -> "Plane":
        return cls(_canonical_rows(a.field, [a.coords, b.coords, c.coords], 3), a.field)

    @classmethod
    def from_rows(cls, field: FiniteField, rows) -> "Plane":
        return cls(_canonical_rows(field, rows, 3), field)

    @classmethod
    def from_linear_form(cls, field: FiniteField, coeffs: Sequence[int]) -> "Plane":
        """The plane {sum c_i x_i = 0} of P^3."""
        if len(coeffs) != 4:
            raise ValidationError("linear forms of planes live in P^3")
        return cls.from_rows(field, nullspace(field, [list(coeffs)], 4))

    def __eq__(self, other) -> bool:
        return isinstance(other, Plane) and self.rows == other.rows and self.field == other.field

    def __hash__(self) -> int:
        return hash((self.rows, self.field))

    @property
    def basis(self) -> Tuple[ProjPoint, ...]:
        return tuple(ProjPoint(r, self.field) for r in self.rows)

    def linear_form(self) -> Tuple[int, ...]:
        kernel = nullspace(self.field, [list(r) for r in self.rows], len(self.rows[0]))
        return ProjPoint.of(self.field, kernel[0]).coords

    def contains_line(self, line: Line) -> bool:
        target = line.field
        rows = [list(pt.base_change(target).coords) for pt in self.basis]
        return rank(target, rows + [list(r) for r in line.rows]) == 3

    def contains_point(self, p: ProjPoint) -> bool:
        rows = [list(pt.base_change(p.field).coords) for pt in self.basis]
        return rank(p.field, rows + [list(p.coords)]) == 3


def plane_from_basis_point(coeffs: Sequence[int], basis: Sequence[ProjPoint], field: FiniteField) -> ProjPoint:
    """sum coeffs[i] * basis[i] as a point of the ambient space."""
    width = len(basis[0].coords)
    out = [0] * width
    for c, pt in zip(coeffs, basis):
        coords = pt.base_change(field).coords
        for j in range(width):
            out[j] = field.add(out[j], field.mul(c, coords[j]))
    return ProjPoint.of(field, out)


def restrict_to_span(P: HomogeneousPoly, basis: Sequence[ProjPoint], field: FiniteField) -> HomogeneousPoly:
    """P(sum_i y_i * basis[i]) as a form in len(basis) variables."""
    k = len(basis)
    forms = []
    coords = [pt.base_change(field).coords for pt in basis]
    for j in range(P.nvars):
        forms.append(HomogeneousPoly.linear(field, [coords[i][j] for i in range(k)]))
    return P.base_change(field).compose(forms)


# ---------------------------------------------------------------------------
# line against hypersurface
# ---------------------------------------------------------------------------

@dataclass
class ClosedPointEntry:
    orbit: List[ProjPoint]
    multiplicity: int

    @property
    def degree(self) -> int:
        return len(self.orbit)


@dataclass
class IntersectionDivisor:
    contained: bool
    entries: List[ClosedPointEntry] = dc_field(default_factory=list)

    @property
    def degree(self) -> int:
        return sum(e.degree * e.multiplicity for e in self.entries)

    def support(self) -> List[ProjPoint]:
        return [p for e in self.entries for p in e.orbit]


def intersect_line(X: Hypersurface, L: Line) -> IntersectionDivisor:
    """Closed points of X on L with multiplicities, or the Contained marker."""
    form = restrict_to_line(X.equation, L)
    if form.is_zero():
        return IntersectionDivisor(contained=True)
    base = L.field
    entries: List[ClosedPointEntry] = []
    for m in range(1, form.degree + 1):
        target, roots = binary_roots(form, m)
        seen = set()
        for root in roots:
            point = L.point_at(root.point[0], root.point[1], target)
            if point in seen:
                continue
            orbit = [ProjPoint.of(target, [target.frobenius(c, base.k * i) for c in point.coords])
                     for i in range(m)]
            if len(set(orbit)) != m:
                continue
            seen.update(orbit)
            entries.append(ClosedPointEntry(sorted(orbit), root.multiplicity))
        if sum(e.degree * e.multiplicity for e in entries) == form.degree:
            break
    return IntersectionDivisor(contained=False, entries=entries)


def contained_mask(equation: HomogeneousPoly, A: np.ndarray, B: np.ndarray, field: FiniteField) -> np.ndarray:
    """Rows i with equation vanishing on the line spanned by A[i] and B[i] (coordinates over field)."""
    d = equation.degree
    target, m = field, 1
    while target.q < d:
        m += 1
        target = extension(field, m)
    if target != field:
        emb = embedding(field, target)
        A, B = emb.vmap(A), emb.vmap(B)
    eq = equation.base_change(target)
    mask = eq.veval(A, target) == 0
    idx = np.nonzero(mask)[0]
    if len(idx):
        mask[idx] = eq.veval(B[idx], target) == 0
    for lam in range(1, d):
        idx = np.nonzero(mask)[0]
        if not len(idx):
            break
        pts = target.vadd(A[idx], target.vmul(lam, B[idx]))
        mask[idx] = eq.veval(pts, target) == 0
    return mask


def _grassmannian_block(q: int, width: int, i: int, j: int, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
    free0 = [c for c in range(i + 1, width) if c != j]
    free1 = list(range(j + 1, width))
    values = index_block(q, len(free0) + len(free1), start, stop)
    A = np.zeros((len(values), width), dtype=np.int64)
    B = np.zeros((len(values), width), dtype=np.int64)
    A[:, i] = 1
    B[:, j] = 1
    for col, c in enumerate(free0):
        A[:, c] = values[:, col]
    for col, c in enumerate(free1):
        B[:, c] = values[:, len(free0) + col]
    return A, B


def _grassmannian_shards(q: int, width: int) -> List[Tuple[int, int, int, int]]:
    shards = []
    for i in range(width):
        for j in range(i + 1, width):
            free = (width - i - 2) + (width - j - 1)
            size = q ** free
            for start in range(0, size, CHUNK):
                shards.append((i, j, start, min(size, start + CHUNK)))
    return shards


def _scan_grassmannian_shard(equation, field, width, i, j, start, stop) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    A, B = _grassmannian_block(field.q, width, i, j, start, stop)
    mask = contained_mask(equation, A, B, field)
    return [(tuple(int(c) for c in a), tuple(int(c) for c in b)) for a, b in zip(A[mask], B[mask])]


def grassmannian_size(q: int, width: int) -> int:
    return sum(q ** ((width - i - 2) + (width - j - 1)) for i in range(width) for j in range(i + 1, width))


def lines_on(X: Hypersurface, m: int = 1, n_jobs: Optional[int] = None) -> List[Line]:
    """
    Every line of X over GF(q^m), sorted by canonical matrix.

    P^2 and P^3 are scanned through the Grassmannian strata; higher ambient
    spaces scan pairs of census points.
    """
    target = extension(X.field, m)
    equation = X.equation.base_change(target)
    width = X.nvars
    n_jobs = get_settings().N_JOBS if n_jobs is None else n_jobs
    started = time.time()
    if width <= 4:
        if grassmannian_size(target.q, width) > ENUMERATION_CAP:
            raise SearchSpaceTooLarge(f"Grassmannian of lines over GF({target.q}) is too large")
        shards = _grassmannian_shards(target.q, width)
        if n_jobs == 1 or len(shards) == 1:
            parts = [_scan_grassmannian_shard(equation, target, width, *s) for s in shards]
        else:
            parts = Parallel(n_jobs=n_jobs)(
                delayed(_scan_grassmannian_shard)(equation, target, width, *s) for s in shards)
        lines = sorted(Line(rows, target) for part in parts for rows in part)
    else:
        lines = _lines_from_point_pairs(X, equation, target, m)
    logger.info(f"Found {len(lines)} lines over GF({target.q}) in {time.time() - started:.2f}s")
    return lines


def _lines_from_point_pairs(X: Hypersurface, equation: HomogeneousPoly, target: FiniteField, m: int) -> List[Line]:
    points = enumerate_points(X, m).points
    if len(points) ** 2 // 2 > ENUMERATION_CAP:
        raise SearchSpaceTooLarge(f"{len(points)} census points give too many pairs")
    coords = np.array([p.coords for p in points], dtype=np.int64).reshape(len(points), X.nvars)
    found: set = set()
    covered: set = set()
    for i in range(len(points)):
        others = np.arange(i + 1, len(points))
        if not len(others):
            break
        A = np.repeat(coords[i:i + 1], len(others), axis=0)
        mask = contained_mask(equation, A, coords[others], target)
        for j in others[mask]:
            if (i, int(j)) in covered:
                continue
            line = Line.through(points[i], points[int(j)])
            if line in found:
                continue
            found.add(line)
            members = [k for k, p in enumerate(points) if line.contains_point(p)]
            covered.update((a, b) for a in members for b in members if a < b)
    return sorted(found)


def lines_through_point(X: Hypersurface, p: ProjPoint, m: int = 1) -> List[Line]:
    """Lines of X over GF(q^m) passing through p."""
    target = extension(X.field, m)
    if p.field != target:
        p = p.base_change(target)
    if not X.contains(p):
        raise PointNotOnHypersurface(f"{p} is not on the hypersurface")
    equation = X.equation.base_change(target)
    width = X.nvars
    if projective_size(target.q, width - 2) > ENUMERATION_CAP:
        raise SearchSpaceTooLarge(f"pencil of lines through {p} is too large")
    pivot = next(i for i, c in enumerate(p.coords) if c)
    lines = []
    for block in _directions(target.q, width, pivot):
        A = np.repeat(np.array([p.coords], dtype=np.int64), len(block), axis=0)
        mask = contained_mask(equation, A, block, target)
        for row in block[mask]:
            lines.append(Line.through(p, ProjPoint.of(target, [int(c) for c in row])))
    return sorted(set(lines))


def _directions(q: int, width: int, pivot: int):
    """Canonical points of the hyperplane {x_pivot = 0}, as blocks in P^(width-1) coordinates."""
    for block in projective_chunks(q, width - 1):
        yield np.insert(block, pivot, 0, axis=1)


# ---------------------------------------------------------------------------
# plane sections of cubic surfaces
# ---------------------------------------------------------------------------

def find_linear_factor(G: HomogeneousPoly) -> Optional[Tuple[int, int, int]]:
    """A linear factor ax+by+cz of a ternary form over its field, normalised, or None."""
    field = G.field
    z_form = HomogeneousPoly.linear(field, [0, 0, 1])
    if exact_quotient(G, z_form) is not None:
        return (0, 0, 1)
    base_line = (ProjPoint((1, 0, 0), field), ProjPoint((0, 1, 0), field))
    g0 = restrict_to_line(G, base_line)
    _, roots = binary_roots(g0, 1)
    for root in roots:
        u, v = root.point
        p0 = np.array([u, v, 0], dtype=np.int64)
        # lines v x - u y + c z = 0 through (u:v:0), one per c
        cs = np.arange(field.q, dtype=np.int64)
        R = np.zeros((field.q, 3), dtype=np.int64)
        R[:, 2] = 1
        if v:
            R[:, 0] = field.vneg(field.vmul(cs, field.inv(v)))
        else:
            R[:, 1] = field.vmul(cs, field.inv(u))
        A = np.repeat(p0[None, :], field.q, axis=0)
        mask = contained_mask(G, A, R, field)
        hits = np.nonzero(mask)[0]
        if len(hits):
            c = int(cs[hits[0]])
            return ProjPoint.of(field, [v, field.neg(u), c]).coords
    return None


def linear_factors(G: HomogeneousPoly) -> Tuple[List[Tuple[Tuple[int, int, int], int]], HomogeneousPoly]:
    """Linear factors of a ternary form over its field with multiplicities, and the cofactor."""
    factors: Dict[Tuple[int, int, int], int] = {}
    current = G
    while current.degree >= 1:
        ell = find_linear_factor(current)
        if ell is None:
            break
        form = HomogeneousPoly.linear(G.field, list(ell))
        current = exact_quotient(current, form)
        factors[ell] = factors.get(ell, 0) + 1
    return sorted(factors.items()), current


IRREDUCIBLE_CUBIC = "IrreducibleCubic"
LINE_PLUS_CONIC = "LinePlusConic"
THREE_LINES = "ThreeLines"
NON_REDUCED = "NonReduced"


@dataclass
class SectionLine:
    line: Line
    field_degree: int
    multiplicity: int
    plane_form: Tuple[int, int, int]


@dataclass
class PlaneSection:
    kind: str
    plane: Plane
    ternary: HomogeneousPoly
    lines: List[SectionLine]
    concurrent: bool = False
    residual: Optional[HomogeneousPoly] = None

    @property
    def conjugate_triple(self) -> bool:
        return self.kind == THREE_LINES and all(l.field_degree == 3 for l in self.lines)


def _frobenius_tuple(field: FiniteField, coeffs, base_k: int) -> Tuple[int, ...]:
    return ProjPoint.of(field, [field.frobenius(c, base_k) for c in coeffs]).coords


def _plane_line(form: Tuple[int, int, int], basis: Sequence[ProjPoint], field: FiniteField) -> Line:
    kernel = nullspace(field, [list(form)], 3)
    a = plane_from_basis_point(kernel[0], basis, field)
    b = plane_from_basis_point(kernel[1], basis, field)
    return Line.through(a, b)


def classify_ternary_cubic(G: HomogeneousPoly, basis: Sequence[ProjPoint], plane: Plane) -> PlaneSection:
    base = G.field
    found: Dict[Tuple[int, int, int], Tuple[FiniteField, int, int]] = {}
    residual = None
    for m in (1, 2, 3):
        target = extension(base, m)
        factors, cofactor = linear_factors(G.base_change(target))
        if m == 1 and factors and cofactor.degree == 2:
            residual = cofactor
        for ell, mult in factors:
            orbit = {ell}
            cur = _frobenius_tuple(target, ell, base.k)
            while cur != ell:
                orbit.add(cur)
                cur = _frobenius_tuple(target, cur, base.k)
            if len(orbit) != m:
                continue
            found[(m,) + ell] = (target, mult, len(orbit))
    lines = []
    for key, (target, mult, degree) in sorted(found.items()):
        ell = key[1:]
        lines.append(SectionLine(_plane_line(ell, basis, target), degree, mult, ell))
    if any(l.multiplicity > 1 for l in lines):
        kind = NON_REDUCED
    elif len(lines) == 3:
        kind = THREE_LINES
    elif lines:
        kind = LINE_PLUS_CONIC
    else:
        kind = IRREDUCIBLE_CUBIC
    concurrent = False
    if kind == THREE_LINES:
        concurrent = _concurrent([l.plane_form for l in lines], [l.line.field for l in lines], base)
    return PlaneSection(kind, plane, G, lines, concurrent, residual if kind == LINE_PLUS_CONIC else None)


def _concurrent(forms, fields, base: FiniteField) -> bool:
    k = math.lcm(*(f.k for f in fields))
    target = extension(base, k // base.k)
    rows = []
    for form, f in zip(forms, fields):
        emb = embedding(f, target)
        rows.append([emb(c) for c in form])
    return rank(target, rows) < 3


def classify_plane_section(X: Hypersurface, H: Plane) -> PlaneSection:
    """
    Factorisation type of the cubic curve X ∩ H.

    Every linear factor is reported as a line of P^3 over its minimal field of
    definition GF(q^m), m <= 3.
    """
    if X.nvars != 4 or X.degree != 3:
        raise ValidationError("plane sections are classified for cubic surfaces")
    basis = H.basis
    G = restrict_to_span(X.equation, basis, X.field)
    if G.is_zero():
        raise PlaneContainedInX(f"plane {H.linear_form()} lies on the surface")
    return classify_ternary_cubic(G, basis, H)


def all_planes(field: FiniteField) -> List[Plane]:
    planes = []
    for block in projective_chunks(field.q, 4):
        for row in block:
            planes.append(Plane.from_linear_form(field, [int(c) for c in row]))
    return planes


@dataclass
class PlaneSectionCensus:
    q: int
    planes: int
    counts: Dict[str, int]
    conjugate_triples: int
    contained: int

    @property
    def line_bound_holds(self) -> bool:
        """Each conjugate triple contributes three lines of a surface with 27."""
        return 3 * self.conjugate_triples <= 27


def plane_section_census(X: Hypersurface) -> PlaneSectionCensus:
    planes = all_planes(X.field)
    counts: Counter = Counter()
    triples = contained = 0
    for H in planes:
        try:
            section = classify_plane_section(X, H)
        except PlaneContainedInX:
            contained += 1
            continue
        counts[section.kind] += 1
        triples += section.conjugate_triple
    logger.info(f"Plane section census over GF({X.field.q}): {dict(counts)}")
    return PlaneSectionCensus(X.field.q, len(planes), dict(counts), triples, contained)


def eckardt_points(X: Hypersurface, m: int = 1) -> List[ProjPoint]:
    """Points of X(GF(q^m)) on at least three lines of X defined over GF(q^m)."""
    tally: Counter = Counter()
    for line in lines_on(X, m):
        tally.update(line.points())
    return sorted(p for p, n in tally.items() if n >= 3)


# ---------------------------------------------------------------------------
# secants through a smooth point
# ---------------------------------------------------------------------------

def affine_expansion(X: Hypersurface, p: ProjPoint) -> Tuple[HomogeneousPoly, HomogeneousPoly, HomogeneousPoly]:
    """(L, Q, C) with F(u p + v) = u^2 L(v) + u Q(v) + C(v) for a cubic F and p on X."""
    field = p.field
    width = X.nvars
    forms = []
    for j in range(width):
        coeffs = [0] * (width + 1)
        coeffs[0] = p.coords[j]
        coeffs[j + 1] = 1
        forms.append(HomogeneousPoly.linear(field, coeffs))
    expanded = X.equation.base_change(field).compose(forms)
    parts: Dict[int, Dict[Tuple[int, ...], int]] = {2: {}, 1: {}, 0: {}}
    for exp, c in expanded.terms.items():
        if exp[0] in parts:
            parts[exp[0]][exp[1:]] = c
    return (HomogeneousPoly(field, width, 1, parts[2]),
            HomogeneousPoly(field, width, 2, parts[1]),
            HomogeneousPoly(field, width, 3, parts[0]))


@dataclass
class ConjugateSecant:
    line: Line
    direction: ProjPoint
    s: ProjPoint
    s_conj: ProjPoint
    tried: int


def find_conjugate_secant(X: Hypersurface, p: ProjPoint) -> ConjugateSecant:
    """
    First line through p (directions in lexicographic order) meeting X in a
    conjugate pair of smooth points over GF(q^2).
    """
    if X.degree != 3:
        raise ValidationError("conjugate secants are searched on cubics")
    field = X.field
    if p.field != field:
        raise ValidationError("the base point must be rational over the field of X")
    if not is_smooth_point(X, p):
        raise SingularPoint(f"{p} is singular")
    L, Q, C = affine_expansion(X, p)
    if field.p == 2 and Q.is_zero():
        raise InseparableProjection("projection from the point is inseparable of degree 2")
    ext = extension(field, 2)
    emb = embedding(field, ext)
    ext_X = X.base_change(ext)
    pivot = next(i for i, c in enumerate(p.coords) if c)
    tried = 0
    for block in _directions(field.q, X.nvars, pivot):
        lv, qv, cv = L.veval(block), Q.veval(block), C.veval(block)
        if field.p == 2:
            ok = (lv != 0) & (qv != 0)
            idx = np.nonzero(ok)[0]
            ratio = field.vmul(field.vmul(lv[idx], cv[idx]), field.vpow(field.vmul(qv[idx], qv[idx]), field.q - 2))
            good = np.zeros(len(block), dtype=bool)
            good[idx] = field.vtrace(ratio) == 1
        else:
            disc = field.vsub(field.vmul(qv, qv), field.vmul(field.vmul(4 % field.p, lv), cv))
            good = (lv != 0) & (disc != 0) & ~field.vis_square(disc)
        for i in np.nonzero(good)[0]:
            tried += 1
            v = [int(c) for c in block[i]]
            roots = solve_quadratic(field, int(lv[i]), int(qv[i]), int(cv[i]))
            pts = []
            for u in roots.roots:
                coords = [ext.add(ext.mul(u, emb(pc)), emb(vc)) for pc, vc in zip(p.coords, v)]
                pts.append(ProjPoint.of(ext, coords))
            s = min(pts)
            s_conj = s.frobenius(field)
            if is_smooth_point(ext_X, s) and is_smooth_point(ext_X, s_conj):
                direction = ProjPoint.of(field, v)
                return ConjugateSecant(Line.through(p, direction), direction, s, s_conj, tried)
    raise SecantNotFound(f"no conjugate secant through {p} over GF({field.q})", tried=tried)


# ---------------------------------------------------------------------------
# conics
# ---------------------------------------------------------------------------

SMOOTH_CONIC = "SmoothConic"
TWO_LINES = "TwoLines"
DOUBLE_LINE = "DoubleLine"


def conic_status(conic: HomogeneousPoly) -> str:
    """SmoothConic, TwoLines or DoubleLine, by linear factors over GF(q^2)."""
    ext = extension(conic.field, 2)
    factors, _ = linear_factors(conic.base_change(ext))
    if any(mult >= 2 for _, mult in factors):
        return DOUBLE_LINE
    if factors:
        return TWO_LINES
    return SMOOTH_CONIC


@dataclass
class ResidualConic:
    plane_basis: Tuple[ProjPoint, ProjPoint, ProjPoint]
    conic: HomogeneousPoly
    status: str


def residual_conic(X: Hypersurface, L: Line, H: Plane) -> ResidualConic:
    """
    Cofactor of L in the plane section X ∩ H.

    The plane is given the basis (A, B, P) with A, B spanning L, so L is the
    line {c = 0} in plane coordinates (a, b, c).
    """
    if not restrict_to_line(X.equation, L).is_zero():
        raise LineNotInX(f"{L} is not on the surface")
    field = L.field
    if H.field != field:
        H = Plane.from_rows(field, [[embedding(H.field, field)(c) for c in r] for r in H.rows])
    if not H.contains_line(L):
        raise LineNotInPlane(f"{L} is not in the plane")
    A, B = L.basis
    third = next(pt for pt in H.basis if rank(field, [A.coords, B.coords, pt.coords]) == 3)
    basis = (A, B, third)
    G = restrict_to_span(X.equation, basis, field)
    if G.is_zero():
        raise PlaneContainedInX("the plane lies on the surface")
    conic = exact_quotient(G, HomogeneousPoly.linear(field, [0, 0, 1]))
    return ResidualConic(basis, conic, conic_status(conic))


def parametrize_conic(conic: HomogeneousPoly, p0: Optional[ProjPoint] = None) -> RationalCurveMap:
    """
    Degree-2 parametrisation of a smooth plane conic sending (1:0) to p0.

    x(s,t) = Q(D) p0 - beta(D) D with D = s B1 + t B2, where beta is the polar
    form at p0, B1 lies on the tangent line at p0 and B2 does not.
    """
    field = conic.field
    if conic.nvars != 3 or conic.degree != 2:
        raise ValidationError("parametrize_conic expects a ternary quadratic form")
    if conic_status(conic) != SMOOTH_CONIC:
        raise SingularConic("conic is not smooth")
    if p0 is None:
        points = enumerate_points(Hypersurface(conic)).points
        if not points:
            raise NoRationalPoint("conic has no rational point")
        p0 = points[0]
    if conic.evaluate(p0.coords) != 0:
        raise PointNotOnHypersurface(f"{p0} is not on the conic")
    grad = [D.evaluate(p0.coords) for D in conic.jacobian()]
    tangent = nullspace(field, [grad], 3)
    B1 = next(v for v in tangent if rank(field, [list(p0.coords), v]) == 2)
    B2 = next([1 if i == j else 0 for i in range(3)] for j in range(3) if grad[j])
    D = [HomogeneousPoly.linear(field, [b1, b2]) for b1, b2 in zip(B1, B2)]
    QD = conic.compose(D)
    beta = HomogeneousPoly.linear(field, [0, 0])
    for g, d in zip(grad, D):
        if g and not d.is_zero():
            beta = beta + d.scale(g)
    coords = []
    for pc, d in zip(p0.coords, D):
        term = QD.scale(pc) if pc else HomogeneousPoly.zero(field, 2, 2)
        if not beta.is_zero() and not d.is_zero():
            term = term - beta * d
        coords.append(term)
    return RationalCurveMap(field, coords)


def embed_plane_curve(f: RationalCurveMap, basis: Sequence[ProjPoint]) -> RationalCurveMap:
    """Push a map into P^2 through the plane with the given basis points."""
    field = f.field
    width = len(basis[0].coords)
    coords = [pt.base_change(field).coords for pt in basis]
    out = []
    for j in range(width):
        total = HomogeneousPoly.zero(field, 2, f.degree)
        for i, g in enumerate(f.coords):
            if coords[i][j] and not g.is_zero():
                total = total + g.scale(coords[i][j])
        out.append(total)
    return RationalCurveMap(field, out)
