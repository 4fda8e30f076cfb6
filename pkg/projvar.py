"""
Projective points, hypersurfaces and rational curve maps.

Point censuses scan the affine charts {x_j = 0 for j < c, x_c = 1} in
vectorised blocks; blocks are independent and run through joblib.
"""
import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from errors import (
    AmbientMismatch,
    ArityMismatch,
    CommonFactor,
    FieldMismatch,
    NotDefinedOverBase,
    PointNotOnHypersurface,
    SearchSpaceTooLarge,
    ValidationError,
    ZeroForm,
)
from gf import FiniteField, embedding, extension, format_element
from mpoly import (
    CHUNK,
    ENUMERATION_CAP,
    HomogeneousPoly,
    binary_from_coeffs,
    binary_gcd,
    chart_block,
    exact_quotient,
)
from settings import get_settings


def canonical_coords(field: FiniteField, coords: Sequence[int]) -> Tuple[int, ...]:
    """Scale so the first nonzero coordinate is 1."""
    lead = next((c for c in coords if c), None)
    if lead is None:
        raise ZeroForm("the zero vector is not a projective point")
    if lead == 1:
        return tuple(int(c) for c in coords)
    inv = field.inv(lead)
    return tuple(field.mul(int(c), inv) for c in coords)


@dataclass(frozen=True, order=True)
class ProjPoint:
    """A point of P^(N)(GF(q)) in canonical form."""

    coords: Tuple[int, ...]
    field: FiniteField = dc_field(compare=False)

    @classmethod
    def of(cls, field: FiniteField, coords: Sequence[int]) -> "ProjPoint":
        return cls(canonical_coords(field, coords), field)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ProjPoint) and self.coords == other.coords
                and self.field == other.field)

    def __hash__(self) -> int:
        return hash((self.coords, self.field))

    def __repr__(self) -> str:
        if self.field.k == 1:
            return "(" + ":".join(str(c) for c in self.coords) + ")"
        return "(" + ":".join(format_element(self.field, c) for c in self.coords) + ")"

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def base_change(self, target: FiniteField) -> "ProjPoint":
        if target == self.field:
            return self
        emb = embedding(self.field, target)
        return ProjPoint(tuple(emb(c) for c in self.coords), target)

    def frobenius(self, base: FiniteField) -> "ProjPoint":
        """Coordinates raised to the power |base|."""
        return ProjPoint.of(self.field, [self.field.frobenius(c, base.k) for c in self.coords])

    def is_defined_over(self, base: FiniteField) -> bool:
        return self.frobenius(base) == self

    def restrict(self, base: FiniteField) -> "ProjPoint":
        if base == self.field:
            return self
        emb = embedding(base, self.field)
        return ProjPoint(tuple(emb.restrict(c) for c in self.coords), base)

    def to_list(self) -> List[List[int]]:
        return [list(self.field.coeffs(c)) for c in self.coords]


@dataclass(frozen=True)
class Hypersurface:
    """V(F) in P^(n+1); `equation` has n+2 variables."""

    equation: HomogeneousPoly

    def __post_init__(self):
        if self.equation.is_zero():
            raise ZeroForm("hypersurface equation is zero")
        if self.equation.nvars < 2:
            raise ArityMismatch("hypersurfaces need at least two variables")

    @property
    def field(self) -> FiniteField:
        return self.equation.field

    @property
    def n(self) -> int:
        return self.equation.nvars - 2

    @property
    def nvars(self) -> int:
        return self.equation.nvars

    @property
    def degree(self) -> int:
        return self.equation.degree

    def base_change(self, target: FiniteField) -> "Hypersurface":
        return Hypersurface(self.equation.base_change(target))

    def contains(self, point: ProjPoint) -> bool:
        if len(point.coords) != self.nvars:
            raise AmbientMismatch(f"point in P^{point.dim} for a hypersurface in P^{self.n + 1}")
        return self.equation.evaluate(point.coords, point.field) == 0

    def gradient(self, point: ProjPoint) -> Tuple[int, ...]:
        return tuple(D.evaluate(point.coords, point.field) for D in self.jacobian)

    @property
    def jacobian(self) -> List[HomogeneousPoly]:
        cached = self.__dict__.get("_jacobian")
        if cached is None:
            cached = self.equation.jacobian()
            object.__setattr__(self, "_jacobian", cached)
        return cached


def projective_size(q: int, dim: int) -> int:
    """#P^dim(GF(q))."""
    if dim < 0:
        return 0
    return (q ** (dim + 1) - 1) // (q - 1)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _scan_block(equation: HomogeneousPoly, target: FiniteField, chart: int,
                start: int, stop: int, with_partials: bool) -> np.ndarray:
    block = chart_block(target.q, equation.nvars, chart, start, stop)
    mask = equation.veval(block, target) == 0
    if with_partials and mask.any():
        for partial in equation.jacobian():
            if not partial.is_zero():
                mask[mask] = partial.veval(block[mask], target) == 0
    return block[mask]


def _shards(q: int, nvars: int) -> List[Tuple[int, int, int]]:
    shards = []
    for chart in range(nvars):
        size = q ** (nvars - chart - 1)
        for start in range(0, size, CHUNK):
            shards.append((chart, start, min(size, start + CHUNK)))
    return shards


def scan_points(equation: HomogeneousPoly, target: FiniteField, with_partials: bool = False,
                n_jobs: Optional[int] = None) -> np.ndarray:
    """Canonical coordinates of every zero in P^(nvars-1)(target), sorted."""
    scanned = projective_size(target.q, equation.nvars - 1)
    if scanned > ENUMERATION_CAP:
        raise SearchSpaceTooLarge(f"{scanned} candidate points over GF({target.q}) exceed 2^24")
    n_jobs = get_settings().N_JOBS if n_jobs is None else n_jobs
    shards = _shards(target.q, equation.nvars)
    if n_jobs == 1 or len(shards) == 1:
        parts = [_scan_block(equation, target, *shard, with_partials) for shard in shards]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_scan_block)(equation, target, *shard, with_partials) for shard in shards)
    found = np.concatenate(parts) if parts else np.zeros((0, equation.nvars), dtype=np.int64)
    if len(found):
        order = np.lexsort(found.T[::-1])
        found = found[order]
    return found


@dataclass
class PointCensus:
    field: FiniteField
    m: int
    points: List[ProjPoint]

    @property
    def count(self) -> int:
        return len(self.points)


def enumerate_points(X: Hypersurface, m: int = 1, n_jobs: Optional[int] = None) -> PointCensus:
    """
    All points of X over GF(q^m).

    Args:
        X: Hypersurface over GF(q)
        m: Extension degree
        n_jobs: joblib workers; defaults to the N_JOBS setting

    Returns:
        PointCensus: canonical points in lexicographic order
    """
    target = extension(X.field, m)
    started = time.time()
    found = scan_points(X.equation.base_change(target), target, n_jobs=n_jobs)
    points = [ProjPoint(tuple(int(c) for c in row), target) for row in found]
    logger.info(f"Enumerated {len(points)} points over GF({target.q}) in {time.time() - started:.2f}s")
    return PointCensus(target, m, points)


def is_smooth_point(X: Hypersurface, p: ProjPoint) -> bool:
    if not X.contains(p):
        raise PointNotOnHypersurface(f"{p} is not on the hypersurface")
    return any(v != 0 for v in X.gradient(p))


SINGULAR_FOUND = "singular-found"
NONE_FOUND = "no-singular-point-found"
INFEASIBLE = "infeasible"


@dataclass
class SingularProbeReport:
    verdict: str
    searched_up_to: int
    kmax: int
    singular_points: Dict[int, List[ProjPoint]]
    note: str = ""

    @property
    def certificate_of_smoothness(self) -> bool:
        return False


def singular_locus_probe(X: Hypersurface, kmax: Optional[int] = None,
                         n_jobs: Optional[int] = None) -> SingularProbeReport:
    """
    Search for singular points over GF(q^m), m = 1..kmax.

    The verdict is three-valued; finding nothing is not a proof of smoothness.
    """
    kmax = kmax or get_settings().KMAX
    found: Dict[int, List[ProjPoint]] = {}
    searched = 0
    for m in range(1, kmax + 1):
        target = extension(X.field, m)
        if projective_size(target.q, X.nvars - 1) > ENUMERATION_CAP:
            if m == 1:
                raise SearchSpaceTooLarge(f"P^{X.n + 1}(GF({target.q})) is too large to scan")
            logger.warning(f"Singular probe stops at m={m - 1}: GF({target.q}) scan is infeasible")
            break
        rows = scan_points(X.equation.base_change(target), target, with_partials=True, n_jobs=n_jobs)
        found[m] = [ProjPoint(tuple(int(c) for c in row), target) for row in rows]
        searched = m
        logger.debug(f"Singular probe m={m}: {len(found[m])} singular points")
    if any(found.values()):
        verdict, note = SINGULAR_FOUND, "singular points listed per extension degree"
    elif searched == 0:
        verdict, note = INFEASIBLE, "no extension degree could be scanned"
    else:
        verdict = NONE_FOUND
        note = (f"no singular point over GF(q^m) for m <= {searched}; "
                "this is not a smoothness certificate")
    return SingularProbeReport(verdict, searched, kmax, found, note)


# ---------------------------------------------------------------------------
# count windows
# ---------------------------------------------------------------------------

@dataclass
class CountWindows:
    q: int
    n: int
    degree: int
    count: int
    projective_count: int
    cw_r: Optional[int]
    cw_bound: Optional[int]
    cw_pass: Optional[bool]
    dw_radius: float
    dw_pass: bool
    dw_conditional: bool
    betti: int
    betti_radius: float
    betti_pass: bool
    forcing_threshold: Optional[float]
    forcing_applies: Optional[bool]


def primitive_middle_betti(n: int, d: int) -> int:
    """Primitive middle Betti number of a smooth degree-d hypersurface of dimension n."""
    return ((d - 1) ** (n + 2) + (-1) ** n * (d - 1)) // d


def count_windows(X: Hypersurface, count: Optional[int] = None, assume_smooth: bool = False) -> CountWindows:
    """
    Compare #X(GF(q)) with the Chevalley-Warning lower bound and the
    Deligne-Weil window around #P^n(GF(q)).

    The window flags are only meaningful when X is smooth; `dw_conditional`
    records that the caller has not asserted smoothness.
    """
    q, n, d = X.field.q, X.n, X.degree
    if count is None:
        count = enumerate_points(X).count
    center = projective_size(q, n)
    r = n + 1 - d
    cw_bound = projective_size(q, r) if r >= 0 else None
    cw_pass = None if cw_bound is None else count >= cw_bound
    deviation_sq = (count - center) ** 2
    # |count - center| <= c * q^(n/2)  <=>  deviation^2 <= c^2 * q^n
    dw_pass = deviation_sq <= d ** (2 * (n + 1)) * q ** n
    betti = primitive_middle_betti(n, d)
    betti_pass = deviation_sq <= betti ** 2 * q ** n
    threshold = forcing = None
    if d == n + 1 and n >= 1:
        threshold = (n + 1) ** (2 + 2 / n)
        forcing = q ** n > (n + 1) ** (2 * n + 2)
    return CountWindows(
        q=q, n=n, degree=d, count=count, projective_count=center,
        cw_r=r if r >= 0 else None, cw_bound=cw_bound, cw_pass=cw_pass,
        dw_radius=d ** (n + 1) * math.sqrt(q) ** n, dw_pass=dw_pass,
        dw_conditional=not assume_smooth,
        betti=betti, betti_radius=betti * math.sqrt(q) ** n, betti_pass=betti_pass,
        forcing_threshold=threshold, forcing_applies=forcing,
    )


def subvariety_count_bound(count: int, q: int, r: int, d: int) -> bool:
    """#V(GF(q)) <= d * #P^r(GF(q)) for V of dimension r and degree d."""
    return count <= d * projective_size(q, r)


# ---------------------------------------------------------------------------
# rational curves P^1 -> P^N
# ---------------------------------------------------------------------------

class RationalCurveMap:
    """
    (f_0 : ... : f_N), binary forms of one degree d without a common zero.

    Scaled so the leading coefficient of the first nonzero coordinate is 1.
    """

    def __init__(self, field: FiniteField, coords: Sequence[HomogeneousPoly], check: bool = True):
        if not coords:
            raise ArityMismatch("a curve needs coordinates")
        degree = max((f.degree for f in coords if not f.is_zero()), default=None)
        if degree is None:
            raise ZeroForm("all coordinates are zero")
        fixed = []
        for f in coords:
            if f.nvars != 2:
                raise ArityMismatch("curve coordinates must be binary forms")
            if f.field != field:
                raise FieldMismatch(f"coordinate over {f.field}, curve over {field}")
            if not f.is_zero() and f.degree != degree:
                raise ValidationError("curve coordinates of different degrees")
            fixed.append(f if not f.is_zero() else HomogeneousPoly.zero(field, 2, degree))
        if check and degree > 0:
            common = _coordinate_gcd(fixed)
            if common.degree > 0:
                raise CommonFactor(f"coordinates share a factor of degree {common.degree}")
        lead = next(f for f in fixed if not f.is_zero()).leading()[1]
        inv = field.inv(lead)
        self.field = field
        self.degree = degree
        self.coords: Tuple[HomogeneousPoly, ...] = tuple(f.scale(inv) for f in fixed)

    # construction --------------------------------------------------------
    @classmethod
    def reduced(cls, field: FiniteField, coords: Sequence[HomogeneousPoly]) -> "RationalCurveMap":
        """Divide out the common factor of the coordinates, then build the map."""
        nonzero = [f for f in coords if not f.is_zero()]
        if not nonzero:
            raise ZeroForm("all coordinates are zero")
        common = _coordinate_gcd(list(coords))
        if common.degree == 0:
            return cls(field, coords)
        out = []
        for f in coords:
            if f.is_zero():
                out.append(HomogeneousPoly.zero(field, 2, nonzero[0].degree - common.degree))
            else:
                out.append(exact_quotient(f, common))
        return cls(field, out)

    @classmethod
    def from_matrix(cls, field: FiniteField, rows: Sequence[Sequence[int]], check: bool = True) -> "RationalCurveMap":
        """Row i holds the coefficients of s^d, s^(d-1) t, ..., t^d of f_i."""
        degree = len(rows[0]) - 1
        coords = [binary_from_coeffs(field, list(reversed(list(row))), degree) for row in rows]
        return cls(field, coords, check=check)

    @classmethod
    def constant(cls, point: ProjPoint) -> "RationalCurveMap":
        return cls.from_matrix(point.field, [[c] for c in point.coords])

    @classmethod
    def line(cls, a: ProjPoint, b: ProjPoint) -> "RationalCurveMap":
        """s -> (1:0) maps to a, (0:1) to b."""
        return cls.from_matrix(a.field, [[x, y] for x, y in zip(a.coords, b.coords)])

    # protocol ------------------------------------------------------------
    @property
    def N(self) -> int:
        return len(self.coords) - 1

    def matrix(self) -> List[List[int]]:
        return [[f.coefficient((self.degree - j, j)) for j in range(self.degree + 1)]
                for f in self.coords]

    def __eq__(self, other) -> bool:
        return (isinstance(other, RationalCurveMap) and self.field == other.field
                and self.matrix() == other.matrix())

    def __hash__(self) -> int:
        return hash((self.field, tuple(tuple(r) for r in self.matrix())))

    def __repr__(self) -> str:
        return f"RationalCurveMap(degree={self.degree}, N={self.N}, matrix={self.matrix()})"

    # evaluation ----------------------------------------------------------
    def evaluate(self, param: Sequence[int], target: Optional[FiniteField] = None) -> ProjPoint:
        target = target or self.field
        values = [f.evaluate(param, target) for f in self.coords]
        return ProjPoint.of(target, values)

    def veval(self, params, target: Optional[FiniteField] = None) -> np.ndarray:
        """Raw (unscaled) coordinates at every row of an (M, 2) parameter array."""
        target = target or self.field
        return np.stack([f.veval(params, target) for f in self.coords], axis=1)

    def pullback(self, equation: HomogeneousPoly) -> HomogeneousPoly:
        """F(f_0, ..., f_N) as a binary form."""
        if equation.nvars != len(self.coords):
            raise AmbientMismatch(f"map into P^{self.N}, equation in {equation.nvars} variables")
        return equation.compose(self.coords)

    # field operations ----------------------------------------------------
    def base_change(self, target: FiniteField) -> "RationalCurveMap":
        if target == self.field:
            return self
        return RationalCurveMap(target, [f.base_change(target) for f in self.coords], check=False)

    def frobenius(self, base: FiniteField) -> "RationalCurveMap":
        return RationalCurveMap(
            self.field,
            [f.map_coefficients(lambda c: self.field.frobenius(c, base.k)) for f in self.coords],
            check=False)

    def is_defined_over(self, base: FiniteField) -> bool:
        return self.frobenius(base) == self

    def restrict(self, base: FiniteField) -> "RationalCurveMap":
        if base == self.field:
            return self
        emb = embedding(base, self.field)
        rows = [[emb.restrict(c) for c in row] for row in self.matrix()]
        return RationalCurveMap.from_matrix(base, rows, check=False)

    def reparametrize(self, a: int, b: int, c: int, d: int) -> "RationalCurveMap":
        """f(a s + b t, c s + d t)."""
        F = self.field
        sub = [HomogeneousPoly.linear(F, [a, b]), HomogeneousPoly.linear(F, [c, d])]
        return RationalCurveMap(F, [f.compose(sub) if not f.is_zero() else f for f in self.coords],
                                check=False)


def _coordinate_gcd(coords: Sequence[HomogeneousPoly]) -> HomogeneousPoly:
    nonzero = [f for f in coords if not f.is_zero()]
    common = nonzero[0].normalized()
    for f in nonzero[1:]:
        if common.degree == 0:
            break
        common = binary_gcd(common, f)
    return common
