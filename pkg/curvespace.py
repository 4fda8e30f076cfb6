"""
Rational curves f: P^1 -> X on hypersurfaces.

Membership is a symbolic identity F(f_0, ..., f_N) = 0. The splitting type
of f*T_X is read off a minimal homogeneous basis of the graded kernel
{g : sum_i dF/dx_i(f) * g_i = 0}, which is the bundle of which f*T_X is the
quotient by the Euler section.
"""
import itertools
import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from errors import (
    AmbientMismatch,
    DegreeTooSmall,
    DuplicateSupport,
    GeometryError,
    ImageMeetsSingularLocus,
    NotAMember,
    PointNotOnHypersurface,
    SearchSpaceTooLarge,
    SingularPoint,
    ValidationError,
)
from gf import (
    FiniteField,
    determinant,
    embedding,
    extension,
    nullspace,
    rank,
    solve_linear,
    subfield_coordinates,
)
from incidence import (
    IRREDUCIBLE_CUBIC,
    LINE_PLUS_CONIC,
    SMOOTH_CONIC,
    THREE_LINES,
    Plane,
    embed_plane_curve,
    lines_on,
    lines_through_point,
    parametrize_conic,
    residual_conic,
    restrict_to_span,
)
from mpoly import (
    CHUNK,
    HomogeneousPoly,
    binary_coeffs,
    binary_from_coeffs,
    binary_gcd,
    chart_block,
)
from projvar import (
    Hypersurface,
    ProjPoint,
    RationalCurveMap,
    enumerate_points,
    projective_size,
)
from settings import get_settings

FOUND = "Found"
EXHAUSTED = "Exhausted"
BUDGET_REACHED = "BudgetReached"

Constraint = Tuple[ProjPoint, ProjPoint]


def _ambient_check(X: Hypersurface, f: RationalCurveMap):
    if f.N + 1 != X.nvars:
        raise AmbientMismatch(f"curve in P^{f.N}, hypersurface in P^{X.nvars - 1}")


def verify_member(X: Hypersurface, f: RationalCurveMap) -> bool:
    """True iff F(f(s, t)) is the zero binary form."""
    _ambient_check(X, f)
    return f.pullback(X.equation.base_change(f.field)).is_zero()


# ---------------------------------------------------------------------------
# the equations of Hom_d(P^1, X)
# ---------------------------------------------------------------------------

@dataclass
class HomSystem:
    """
    Membership and degeneracy equations in the coefficient variables
    a_(i,j) = coefficient of s^(d-j) t^j in f_i, indexed i*(d+1) + j.

    `degeneracy` is the 2d x 2d Sylvester matrix of sum_i l_i f_i and
    sum_i m_i f_i, with entries in the variables (a, l, m); its determinant
    has degree 2d in a and vanishes for all l, m iff the f_i share a zero.
    """

    field: FiniteField
    ambient: int
    degree: int
    variables: int
    equations: List[HomogeneousPoly]
    degeneracy: List[List[HomogeneousPoly]]

    def evaluate(self, coefficients: Sequence[int]) -> List[int]:
        return [eq.evaluate(list(coefficients)) for eq in self.equations]

    def resultant_at(self, coefficients: Sequence[int], lam: Sequence[int], mu: Sequence[int]) -> int:
        point = list(coefficients) + list(lam) + list(mu)
        return determinant(self.field, [[e.evaluate(point) for e in row] for row in self.degeneracy])

    def is_degenerate(self, coefficients: Sequence[int]) -> bool:
        width = self.degree + 1
        rows = [list(coefficients[i * width:(i + 1) * width]) for i in range(self.ambient)]
        if not any(any(r) for r in rows):
            return True
        f = RationalCurveMap.from_matrix(self.field, rows, check=False)
        nonzero = [c for c in f.coords if not c.is_zero()]
        common = nonzero[0].normalized()
        for c in nonzero[1:]:
            common = binary_gcd(common, c)
        return common.degree > 0


def hom_equations(X: Hypersurface, d: int) -> HomSystem:
    """The polynomial system cutting out Hom_d(P^1, X) in P^((N+1)(d+1)-1)."""
    if d < 1:
        raise ValidationError("hom_equations needs d >= 1")
    field = X.field
    width = X.nvars
    nvar = width * (d + 1)
    total = nvar + 2
    forms = []
    for i in range(width):
        terms = {}
        for j in range(d + 1):
            exp = [0] * total
            exp[i * (d + 1) + j] = 1
            exp[-2], exp[-1] = d - j, j
            terms[tuple(exp)] = 1
        forms.append(HomogeneousPoly(field, total, d + 1, terms))
    expanded = X.equation.compose(forms)
    e = X.degree
    grouped: Dict[int, Dict[Tuple[int, ...], int]] = {k: {} for k in range(e * d + 1)}
    for exp, c in expanded.terms.items():
        grouped[exp[-1]][exp[:-2]] = c
    equations = [HomogeneousPoly(field, nvar, e, grouped[k]) for k in range(e * d + 1)]

    dvars = nvar + 2 * width
    zero = HomogeneousPoly.zero(field, dvars, 2)

    def entry(j: int, offset: int) -> HomogeneousPoly:
        terms = {}
        for i in range(width):
            exp = [0] * dvars
            exp[i * (d + 1) + j] = 1
            exp[nvar + offset + i] = 1
            terms[tuple(exp)] = 1
        return HomogeneousPoly(field, dvars, 2, terms)

    size = 2 * d
    matrix = []
    for offset in (0, width):
        for shift in range(d):
            row = [zero] * size
            for j in range(d + 1):
                row[shift + j] = entry(j, offset)
            matrix.append(row)
    logger.debug(f"Hom_{d}: {len(equations)} equations in {nvar} variables")
    return HomSystem(field, width, d, nvar, equations, matrix)


# ---------------------------------------------------------------------------
# graded kernels of maps between sums of line bundles on P^1
# ---------------------------------------------------------------------------

@dataclass
class _Generator:
    level: int
    forms: Tuple[HomogeneousPoly, ...]


def _layout(shifts: Sequence[int], k: int) -> List[int]:
    return [k + s for s in shifts]


def _kernel_space(field: FiniteField, hs: Sequence[HomogeneousPoly], shifts: Sequence[int],
                  k: int) -> Tuple[List[List[int]], List[int]]:
    """Basis of {g : deg g_j = k + shifts[j], sum_j h_j g_j = 0} in stacked coefficients."""
    layout = _layout(shifts, k)
    ncols = sum(max(D + 1, 0) for D in layout)
    if ncols == 0:
        return [], layout
    target = next((h.degree + D for h, D in zip(hs, layout) if not h.is_zero() and D >= 0), None)
    if target is None:
        return nullspace(field, [], ncols), layout
    columns = []
    for h, D in zip(hs, layout):
        if D < 0:
            continue
        eta = binary_coeffs(h) if not h.is_zero() else []
        for i in range(D + 1):
            col = [0] * (target + 1)
            for a, c in enumerate(eta):
                if c:
                    col[a + i] = c
            columns.append(col)
    rows = [[columns[c][r] for c in range(ncols)] for r in range(target + 1)]
    return nullspace(field, rows, ncols), layout


def _raise(vec: Sequence[int], src: Sequence[int], dst: Sequence[int], by_s: bool) -> List[int]:
    """Multiply every block of a stacked vector by s (or t)."""
    out: List[int] = []
    pos = 0
    for D0, D1 in zip(src, dst):
        block = [0] * max(D1 + 1, 0)
        if D0 >= 0:
            for i in range(D0 + 1):
                block[i + 1 if by_s else i] = vec[pos + i]
            pos += D0 + 1
        out.extend(block)
    return out


def _to_forms(field: FiniteField, vec: Sequence[int], layout: Sequence[int]) -> Tuple[HomogeneousPoly, ...]:
    out, pos = [], 0
    for D in layout:
        if D < 0:
            out.append(HomogeneousPoly.zero(field, 2, 0))
            continue
        out.append(binary_from_coeffs(field, vec[pos:pos + D + 1], D))
        pos += D + 1
    return tuple(out)


def _graded_kernel(field: FiniteField, hs: Sequence[HomogeneousPoly], shifts: Sequence[int],
                   levels: Sequence[int], want: Optional[int] = None) -> Tuple[List[_Generator], Dict[int, int]]:
    """
    Minimal homogeneous generators and graded dimensions of the kernel module.

    `levels` must start at or below the first nonzero level. Generators at
    level k are the part of the level-k kernel not spanned by s and t times
    the level k-1 kernel.
    """
    generators: List[_Generator] = []
    dims: Dict[int, int] = {}
    prev: List[List[int]] = []
    prev_layout: Optional[List[int]] = None
    for k in levels:
        basis, layout = _kernel_space(field, hs, shifts, k)
        dims[k] = len(basis)
        spanned = []
        if prev_layout is not None:
            spanned = [_raise(v, prev_layout, layout, by_s) for v in prev for by_s in (True, False)]
        current = rank(field, spanned) if spanned else 0
        rows = list(spanned)
        for v in basis:
            if current == len(basis):
                break
            if rank(field, rows + [v]) > current:
                rows.append(v)
                current += 1
                generators.append(_Generator(k, _to_forms(field, v, layout)))
        prev, prev_layout = basis, layout
        if want is not None and len(generators) >= want:
            break
    return generators, dims


# ---------------------------------------------------------------------------
# splitting type of f*T_X
# ---------------------------------------------------------------------------

@dataclass
class SplittingType:
    degrees: Tuple[int, ...]
    n: int
    curve_degree: int
    kernel_degrees: Tuple[int, ...]
    euler_split: bool
    h0: Dict[int, int]
    h0_kernel_route: Dict[int, int]
    probe_m: int

    @property
    def total(self) -> int:
        return sum(self.degrees)

    @property
    def is_free(self) -> bool:
        return min(self.degrees) >= 0

    @property
    def is_very_free(self) -> bool:
        return min(self.degrees) >= 1

    @property
    def routes_agree(self) -> bool:
        return all(self.h0[m] == v for m, v in self.h0_kernel_route.items())


def _image_probe(X: Hypersurface, f: RationalCurveMap, partials: Sequence[HomogeneousPoly],
                 max_m: int = 3, cap: int = 1 << 16) -> int:
    """Raise if some parameter over GF(q^m), m <= max_m, maps to a singular point."""
    reached = 0
    for m in range(1, max_m + 1):
        E = extension(f.field, m)
        if E.q > cap:
            break
        params = np.zeros((E.q + 1, 2), dtype=np.int64)
        params[:E.q, 0] = 1
        params[:E.q, 1] = np.arange(E.q)
        params[E.q, 1] = 1
        values = np.stack([h.veval(params, E) if not h.is_zero() else np.zeros(len(params), dtype=np.int64)
                           for h in partials], axis=1)
        bad = np.nonzero(~values.any(axis=1))[0]
        if len(bad):
            row = params[int(bad[0])]
            raise ImageMeetsSingularLocus(
                f"f({int(row[0])}:{int(row[1])}) over GF({E.q}) is a singular point of X")
        reached = m
    return reached


def _h0(degrees: Sequence[int], m: int) -> int:
    return sum(max(0, a + m + 1) for a in degrees)


def pullback_splitting(X: Hypersurface, f: RationalCurveMap) -> SplittingType:
    """
    Splitting type (a_1 >= ... >= a_n) of f*T_X.

    Args:
        X: Hypersurface in P^(n+1)
        f: Rational curve with f(P^1) inside X and avoiding Sing(X)

    Returns:
        SplittingType: degrees plus the h^0 table over m in [-2d-1, 2d]
    """
    _ambient_check(X, f)
    if not verify_member(X, f):
        raise NotAMember("the curve does not lie on the hypersurface")
    if f.degree == 0:
        raise ValidationError("constant maps have no splitting type to compute")
    field, d, e = f.field, f.degree, X.degree
    equation = X.equation.base_change(field)
    width = X.nvars
    partials = [D.compose(f.coords) if not D.is_zero()
                else HomogeneousPoly.zero(field, 2, (e - 1) * d) for D in equation.jacobian()]
    probe_m = _image_probe(X, f, partials)

    started = time.time()
    top = max(2 * d, (e - 2) * d)
    levels = list(range(-d, top + 1))
    generators, dims = _graded_kernel(field, partials, [d] * width, levels)
    kernel_gens = [g for g in generators if g.level <= (e - 2) * d][:width - 1]
    if len(kernel_gens) != width - 1:
        raise ValidationError(f"kernel of rank {len(kernel_gens)}, expected {width - 1}")
    kernel_degrees = tuple(-g.level for g in kernel_gens)

    # f = sum_j p_j * b_j with deg p_j = -level_j
    cols, owners = [], []
    for j, g in enumerate(kernel_gens):
        deg_p = -g.level
        for a in range(deg_p + 1):
            col = []
            for form in g.forms:
                coeffs = binary_coeffs(form) if not form.is_zero() else []
                block = [0] * (d + 1)
                for i, c in enumerate(coeffs):
                    if c:
                        block[i + a] = c
                col.extend(block)
            cols.append(col)
            owners.append((j, a))
    rhs = [c for form in f.coords for c in binary_coeffs(form)]
    rows = [[col[r] for col in cols] for r in range(len(rhs))]
    sol = solve_linear(field, rows, rhs) if cols else None
    if sol is None:
        raise ValidationError("the Euler section is not in the span of the kernel basis")
    p_coeffs: Dict[int, List[int]] = {j: [0] * (kernel_degrees[j] + 1) for j in range(len(kernel_gens))
                                      if kernel_degrees[j] >= 0}
    for (j, a), v in zip(owners, sol):
        p_coeffs[j][a] = v
    support = [j for j, cs in p_coeffs.items() if any(cs)]

    units = [j for j in support if kernel_degrees[j] == 0]
    if units:
        euler_split = True
        degrees = [c for j, c in enumerate(kernel_degrees) if j != units[0]]
    else:
        euler_split = False
        ps = [binary_from_coeffs(field, p_coeffs[j], kernel_degrees[j]) for j in support]
        shifts = [-kernel_degrees[j] for j in support]
        lo = min(kernel_degrees[j] for j in support)
        hi = sum(kernel_degrees[j] for j in support)
        syz, _ = _graded_kernel(field, ps, shifts, list(range(lo, hi + 1)), want=len(support) - 1)
        degrees = [c for j, c in enumerate(kernel_degrees) if j not in support]
        degrees += [g.level for g in syz]
    degrees = tuple(sorted(degrees, reverse=True))
    expected = (width - e) * d
    if sum(degrees) != expected or len(degrees) != X.n:
        raise ValidationError(f"splitting degrees {degrees} do not add up to {expected}")

    window = range(-2 * d - 1, 2 * d + 1)
    h0 = {m: _h0(degrees, m) for m in window}
    route = {}
    for m in window:
        if m < -2:
            continue
        kernel_h0 = dims.get(m, 0)
        route[m] = kernel_h0 - (m + 1) if m >= -1 else kernel_h0 + (0 if euler_split else 1)
    logger.info(f"Splitting type {degrees} for a degree-{d} curve in {time.time() - started:.2f}s")
    return SplittingType(degrees, X.n, d, tuple(sorted(kernel_degrees, reverse=True)),
                         euler_split, h0, route, probe_m)


def is_free(X: Hypersurface, f: RationalCurveMap) -> bool:
    return pullback_splitting(X, f).is_free


def is_very_free(X: Hypersurface, f: RationalCurveMap) -> bool:
    return pullback_splitting(X, f).is_very_free


# ---------------------------------------------------------------------------
# tangent plane sections of cubic surfaces
# ---------------------------------------------------------------------------

@dataclass
class TangentCubic:
    point: ProjPoint
    status: str
    plane_basis: Tuple[ProjPoint, ProjPoint, ProjPoint]
    curve: Optional[RationalCurveMap] = None


def tangent_cubic(S: Hypersurface, p: ProjPoint) -> TangentCubic:
    """
    The section of S by its tangent plane at p.

    With plane coordinates (a, b, c) on the basis (p, B1, B2) the section is
    a * Q(b, c) + C(b, c). When Q and C are coprime it is an irreducible cubic
    with a double point at p, parametrised by the lines through p:
    (u : v) -> -C(u, v) p + Q(u, v) (u B1 + v B2).
    """
    if S.nvars != 4 or S.degree != 3:
        raise ValidationError("tangent_cubic expects a cubic surface in P^3")
    field = p.field
    if field != S.field:
        S = S.base_change(field)
    if not S.contains(p):
        raise PointNotOnHypersurface(f"{p} is not on the surface")
    grad = list(S.gradient(p))
    if not any(grad):
        raise SingularPoint(f"{p} is singular")
    tangent = nullspace(field, [grad], 4)
    u, v = next((u, v) for u, v in itertools.combinations(tangent, 2)
                if rank(field, [list(p.coords), u, v]) == 3)
    basis = (p, ProjPoint.of(field, u), ProjPoint.of(field, v))
    B1, B2 = basis[1].coords, basis[2].coords
    G = restrict_to_span(S.equation, basis, field)
    Q = HomogeneousPoly(field, 2, 2, {e[1:]: c for e, c in G.terms.items() if e[0] == 1})
    C = HomogeneousPoly(field, 2, 3, {e[1:]: c for e, c in G.terms.items() if e[0] == 0})
    if Q.is_zero():
        return TangentCubic(p, THREE_LINES, basis)
    common = binary_gcd(Q, C)
    if common.degree == 2:
        return TangentCubic(p, THREE_LINES, basis)
    if common.degree == 1:
        return TangentCubic(p, LINE_PLUS_CONIC, basis)
    coords = []
    for j in range(4):
        direction = HomogeneousPoly.linear(field, [B1[j], B2[j]])
        term = Q * direction if not direction.is_zero() else HomogeneousPoly.zero(field, 2, 3)
        if p.coords[j] and not C.is_zero():
            term = term - C.scale(p.coords[j])
        coords.append(term)
    return TangentCubic(p, IRREDUCIBLE_CUBIC, basis, RationalCurveMap(field, coords))


# ---------------------------------------------------------------------------
# curve search
# ---------------------------------------------------------------------------

@dataclass
class CurveSearchResult:
    degree: int
    field: FiniteField
    curves: List[RationalCurveMap]
    marker: str
    strategy: str
    examined: int = 0
    space: int = 0


def _satisfies(f: RationalCurveMap, constraints: Sequence[Constraint]) -> bool:
    return all(f.evaluate(t.coords, f.field) == x for t, x in constraints)


def _preimages(f: RationalCurveMap, x: ProjPoint) -> List[Tuple[int, int]]:
    field = f.field
    params = np.zeros((field.q + 1, 2), dtype=np.int64)
    params[0, 0] = 1
    params[1:, 0] = np.arange(field.q)
    params[1:, 1] = 1
    values = f.veval(params)
    pivot = next(i for i, c in enumerate(x.coords) if c)
    scale = values[:, pivot]
    expected = np.stack([field.vmul(scale, c) for c in x.coords], axis=1)
    hits = (scale != 0) & np.all(values == expected, axis=1)
    return [tuple(int(c) for c in params[i]) for i in np.nonzero(hits)[0]]


def _fit_constraints(f: RationalCurveMap, constraints: Sequence[Constraint]) -> Optional[RationalCurveMap]:
    """Precompose f with a Moebius map so that f(t_i) = x_i, if one exists."""
    if _satisfies(f, constraints):
        return f
    if f.degree == 0:
        return None
    field = f.field
    options = [_preimages(f, x) for _, x in constraints]
    if not all(options):
        return None
    for choice in itertools.islice(itertools.product(*options), 64):
        rows = []
        for (t, _), (u0, u1) in zip(constraints, choice):
            s0, s1 = t.coords
            rows.append([field.mul(s0, u1), field.mul(s1, u1),
                         field.neg(field.mul(s0, u0)), field.neg(field.mul(s1, u0))])
        kernel = nullspace(field, rows, 4)
        candidates = list(kernel)
        for v, w in itertools.combinations(kernel, 2):
            for lam in range(1, min(field.q, 64)):
                candidates.append([field.add(a, field.mul(lam, b)) for a, b in zip(v, w)])
        for a, b, c, d in candidates:
            if field.sub(field.mul(a, d), field.mul(b, c)) == 0:
                continue
            g = f.reparametrize(a, b, c, d)
            g = RationalCurveMap(field, g.coords)
            if _satisfies(g, constraints):
                return g
    return None


def _structured(X: Hypersurface, d: int, constraints: Sequence[Constraint]) -> Iterator[RationalCurveMap]:
    field = X.field
    target = constraints[0][1] if constraints else None
    surface = X.nvars == 4 and X.degree == 3
    if d == 0:
        points = [target] if target is not None else enumerate_points(X).points
        for x in points:
            yield RationalCurveMap.constant(x)
    elif d == 1:
        lines = lines_through_point(X, target) if target is not None else lines_on(X)
        for L in lines:
            yield L.as_map()
    elif d == 2 and surface:
        for L in lines_on(X):
            anchors = [target] if target is not None else [
                ProjPoint(tuple(1 if i == j else 0 for i in range(4)), field) for j in range(4)]
            for x0 in anchors:
                if L.contains_point(x0):
                    continue
                try:
                    rc = residual_conic(X, L, Plane.through(L.basis[0], L.basis[1], x0))
                except GeometryError:
                    continue
                if rc.status != SMOOTH_CONIC:
                    continue
                p0 = None
                if target is not None:
                    rows = [[pt.coords[i] for pt in rc.plane_basis] for i in range(4)]
                    sol = solve_linear(field, rows, list(x0.coords))
                    if sol is None:
                        continue
                    p0 = ProjPoint.of(field, sol)
                try:
                    yield embed_plane_curve(parametrize_conic(rc.conic, p0), rc.plane_basis)
                except GeometryError:
                    continue
    elif d == 3 and surface:
        points = [target] if target is not None else enumerate_points(X).points[:16]
        for x in points:
            try:
                tc = tangent_cubic(X, x)
            except SingularPoint:
                continue
            if tc.curve is not None:
                yield tc.curve


def _constraint_rows(field: FiniteField, width: int, d: int, constraints: Sequence[Constraint]) -> List[List[int]]:
    """Linear conditions f(t) proportional to x on the stacked coefficient vector."""
    rows = []
    for t, x in constraints:
        s0, s1 = t.coords
        mono = [field.mul(field.pow(s0, d - j), field.pow(s1, j)) for j in range(d + 1)]
        pivot = next(i for i, c in enumerate(x.coords) if c)
        for a in range(width):
            if a == pivot:
                continue
            row = [0] * (width * (d + 1))
            for j in range(d + 1):
                row[a * (d + 1) + j] = mono[j]
                row[pivot * (d + 1) + j] = field.neg(field.mul(x.coords[a], mono[j]))
            rows.append(row)
    return rows


def _evaluation_setup(field: FiniteField, d: int, e: int) -> Tuple[FiniteField, np.ndarray]:
    """An extension with at least e*d + 1 points on P^1 and the monomial table there."""
    m = 1
    while extension(field, m).q + 1 < e * d + 1:
        m += 1
    E = extension(field, m)
    count = e * d + 1
    params = [(0, 1)] + [(1, x) for x in range(count - 1)]
    mono = np.array([[E.mul(E.pow(s0, d - j), E.pow(s1, j)) for j in range(d + 1)]
                     for s0, s1 in params], dtype=np.int64)
    return E, mono


def _member_mask(equation: HomogeneousPoly, coeffs: np.ndarray, width: int, d: int,
                 E: FiniteField, mono: np.ndarray) -> np.ndarray:
    """Rows of an (M, width*(d+1)) coefficient array whose map lands in V(equation)."""
    alive = np.ones(len(coeffs), dtype=bool)
    for row in mono:
        idx = np.nonzero(alive)[0]
        if not len(idx):
            break
        block = coeffs[idx]
        values = np.zeros((len(idx), width), dtype=np.int64)
        for i in range(width):
            acc = np.zeros(len(idx), dtype=np.int64)
            for j in range(d + 1):
                if row[j]:
                    acc = E.vadd(acc, E.vmul(block[:, i * (d + 1) + j], int(row[j])))
            values[:, i] = acc
        alive[idx] = equation.veval(values, E) == 0
    return alive


def _combine(field: FiniteField, weights: np.ndarray, basis: np.ndarray) -> np.ndarray:
    out = np.zeros((len(weights), basis.shape[1]), dtype=np.int64)
    for i in range(basis.shape[0]):
        out = field.vadd(out, field.vmul(weights[:, i:i + 1], basis[i][None, :]))
    return out


def _scan_coefficients(equation: HomogeneousPoly, field: FiniteField, basis: np.ndarray, width: int,
                       d: int, chart: int, start: int, stop: int) -> List[Tuple[int, ...]]:
    E, mono = _evaluation_setup(field, d, equation.degree)
    weights = chart_block(field.q, basis.shape[0], chart, start, stop)
    coeffs = _combine(field, weights, basis)
    lifted = embedding(field, E).vmap(coeffs) if E != field else coeffs
    mask = _member_mask(equation.base_change(E), lifted, width, d, E, mono)
    return [tuple(int(c) for c in row) for row in coeffs[mask]]


def _coefficient_shards(q: int, r: int) -> List[Tuple[int, int, int]]:
    shards = []
    for chart in reversed(range(r)):
        size = q ** (r - chart - 1)
        for start in range(0, size, CHUNK):
            shards.append((chart, start, min(size, start + CHUNK)))
    return shards


def _accept(X: Hypersurface, field: FiniteField, row: Sequence[int], width: int, d: int,
            constraints: Sequence[Constraint]) -> Optional[RationalCurveMap]:
    matrix = [list(row[i * (d + 1):(i + 1) * (d + 1)]) for i in range(width)]
    try:
        f = RationalCurveMap.from_matrix(field, matrix)
    except GeometryError:
        return None
    if not verify_member(X, f) or not _satisfies(f, constraints):
        return None
    return f


def search_curves(X: Hypersurface, d: int, constraints: Sequence[Constraint] = (),
                  budget: Optional[int] = None, limit: int = 16, seed: Optional[int] = None,
                  n_jobs: Optional[int] = None, structured: bool = True) -> CurveSearchResult:
    """
    Rational curves of degree d on X over its field with f(t_i) = x_i.

    Strategies in order: structured constructions (lines, residual conics,
    tangent cubics), exhaustion of the coefficient space cut down by the
    constraints when it fits in the budget, random sampling otherwise.

    Returns:
        CurveSearchResult: curves plus the Found / Exhausted / BudgetReached marker
    """
    settings = get_settings()
    budget = settings.SEARCH_BUDGET if budget is None else budget
    seed = settings.SEED if seed is None else seed
    n_jobs = settings.N_JOBS if n_jobs is None else n_jobs
    field, width = X.field, X.nvars
    constraints = [(t.base_change(field), x.base_change(field)) for t, x in constraints]
    for _, x in constraints:
        if not X.contains(x):
            raise PointNotOnHypersurface(f"constraint target {x} is not on X")
    started = time.time()

    if structured:
        found = []
        try:
            for f in _structured(X, d, constraints):
                fitted = _fit_constraints(f, constraints)
                if fitted is not None and verify_member(X, fitted) and fitted not in found:
                    found.append(fitted)
                if len(found) >= limit:
                    break
        except SearchSpaceTooLarge as e:
            logger.debug(f"Structured search skipped: {str(e)}")
        if found:
            logger.info(f"Structured search found {len(found)} curves of degree {d}")
            return CurveSearchResult(d, field, sorted(found, key=lambda f: f.matrix()), FOUND, "structured")

    rows = _constraint_rows(field, width, d, constraints)
    basis = np.array(nullspace(field, rows, width * (d + 1)), dtype=np.int64)
    r = len(basis)
    if r == 0:
        return CurveSearchResult(d, field, [], EXHAUSTED, "linear", 0, 0)
    space = projective_size(field.q, r - 1)
    found: List[RationalCurveMap] = []
    if space <= budget:
        shards = _coefficient_shards(field.q, r)
        logger.info(f"Exhausting {space} coefficient vectors for degree {d} over GF({field.q})")
        examined = 0
        batches = [shards[i:i + max(1, n_jobs)] for i in range(0, len(shards), max(1, n_jobs))]
        for batch in batches:
            if n_jobs == 1 or len(batch) == 1:
                parts = [_scan_coefficients(X.equation, field, basis, width, d, *s) for s in batch]
            else:
                parts = Parallel(n_jobs=n_jobs)(
                    delayed(_scan_coefficients)(X.equation, field, basis, width, d, *s) for s in batch)
            examined += sum(s[2] - s[1] for s in batch)
            for part in parts:
                for row in part:
                    f = _accept(X, field, row, width, d, constraints)
                    if f is not None and f not in found:
                        found.append(f)
            if len(found) >= limit:
                break
        marker = FOUND if found else EXHAUSTED
        logger.info(f"Exhaustive search: {len(found)} curves, {examined} vectors, "
                    f"{time.time() - started:.2f}s")
        return CurveSearchResult(d, field, sorted(found, key=lambda f: f.matrix()), marker,
                                 "exhaustive", examined, space)

    rng = np.random.default_rng(seed)
    E, mono = _evaluation_setup(field, d, X.degree)
    equation = X.equation.base_change(E)
    emb = embedding(field, E)
    examined = 0
    while examined < budget and len(found) < limit:
        size = min(CHUNK, budget - examined)
        weights = rng.integers(0, field.q, size=(size, r), dtype=np.int64)
        weights = weights[weights.any(axis=1)]
        coeffs = _combine(field, weights, basis)
        lifted = emb.vmap(coeffs) if E != field else coeffs
        mask = _member_mask(equation, lifted, width, d, E, mono)
        for row in coeffs[mask]:
            f = _accept(X, field, [int(c) for c in row], width, d, constraints)
            if f is not None and f not in found:
                found.append(f)
        examined += size
    marker = FOUND if found else BUDGET_REACHED
    logger.info(f"Sampled {examined} of {space} coefficient vectors: {len(found)} curves")
    return CurveSearchResult(d, field, sorted(found, key=lambda f: f.matrix()), marker,
                             "sampling", examined, space)


# ---------------------------------------------------------------------------
# interpolation into P^n
# ---------------------------------------------------------------------------

def _closed_point(base: FiniteField, t: ProjPoint, x: ProjPoint) -> Tuple[int, ProjPoint, ProjPoint]:
    if t.dim != 1:
        raise ValidationError("parameters must be points of P^1")
    field = t.field if t.field.k >= x.field.k else x.field
    t, x = t.base_change(field), x.base_change(field)
    k, cur = 1, t.frobenius(base)
    while cur != t:
        cur = cur.frobenius(base)
        k += 1
    residue = extension(base, k)
    if not x.is_defined_over(residue):
        raise ValidationError(f"target {x} is not defined over the residue field of {t}")
    return k, t.restrict(residue), x.restrict(residue)


def interpolate_to_Pn(base: FiniteField, targets: Sequence[Constraint], d: int) -> RationalCurveMap:
    """
    A map P^1 -> P^n over base with f(t_i) = x_i at distinct closed points.

    Each closed point is given by one representative t_i over its residue
    field GF(q^k); the conditions f(t_i) = x_i are GF(q^k)-linear and split
    into k conditions over GF(q) in the power basis of the residue field.
    A common factor of the solution is cancelled, so the degree may drop.
    """
    if not targets:
        raise ValidationError("nothing to interpolate")
    points = [_closed_point(base, t, x) for t, x in targets]
    width = points[0][2].dim + 1
    if any(x.dim + 1 != width for _, _, x in points):
        raise AmbientMismatch("targets lie in different projective spaces")
    for (k1, t1, _), (k2, t2, _) in itertools.combinations(points, 2):
        if k1 == k2:
            orbit, cur = {t1}, t1.frobenius(base)
            while cur != t1:
                orbit.add(cur)
                cur = cur.frobenius(base)
            if t2 in orbit:
                raise DuplicateSupport(f"{t1} and {t2} are the same closed point")
    z = sum(k for k, _, _ in points)
    if d < z - 1:
        raise DegreeTooSmall(f"degree {d} cannot interpolate a support of length {z}")

    nvar = width * (d + 1)
    rows, rhs = [], []
    for k, t, x in points:
        E = t.field
        coords = subfield_coordinates(E, base)
        s0, s1 = t.coords
        mono = [coords(E.mul(E.pow(s0, d - j), E.pow(s1, j))) for j in range(d + 1)]
        for a in range(width):
            value = coords(x.coords[a])
            for l in range(k):
                row = [0] * nvar
                for j in range(d + 1):
                    row[a * (d + 1) + j] = mono[j][l]
                rows.append(row)
                rhs.append(value[l])
    sol = solve_linear(base, rows, rhs)
    if sol is None:
        raise ValidationError("interpolation system is inconsistent")
    forms = [binary_from_coeffs(base, list(reversed(sol[a * (d + 1):(a + 1) * (d + 1)])), d)
             for a in range(width)]
    f = RationalCurveMap.reduced(base, forms)
    for _, t, x in points:
        if f.evaluate(t.coords, t.field) != x:
            raise ValidationError(f"interpolant misses {x} at {t}")
    logger.debug(f"Interpolated {len(points)} closed points with a degree-{f.degree} map")
    return f
