"""
The third-intersection-point map on cubic hypersurfaces and what is built
from it: the symbolic chord map along two parametrised curves, the quadric
model of the Weil restriction of P^1, descent of GF(q^2)-curves to GF(q),
the extension of set maps P^1(GF(q)) -> X(GF(q)) to morphisms, and the
two-parameter unirational map of a cubic surface.

For points a, b on a cubic V(F),
    F(u a + v b) = u^2 v * c21 + u v^2 * c12,
    c21 = sum_i b_i dF/dx_i(a),  c12 = sum_i a_i dF/dx_i(b),
so the residual point on the line ab is c12 * a - c21 * b.
"""
import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from curvespace import search_curves, tangent_cubic, verify_member
from errors import (
    DegeneratePencil,
    DominanceCertificateNotFound,
    EqualPoints,
    EvenCharacteristic,
    ExtensionSearchExhausted,
    GeometryError,
    LineContainedInX,
    NotAMember,
    NotDefinedOverBase,
    PointNotOnHypersurface,
    SingularPoint,
    SquareParameter,
    TangentSectionDegenerate,
    ValidationError,
)
from gf import FiniteField, embedding, extension, field_of_order
from incidence import ConjugateSecant, find_conjugate_secant
from mpoly import HomogeneousPoly, index_block
from projvar import Hypersurface, ProjPoint, RationalCurveMap, enumerate_points, is_smooth_point
from settings import get_settings


def _require_cubic(X: Hypersurface):
    if X.degree != 3:
        raise ValidationError(f"the chord map needs a cubic, got degree {X.degree}")


def _compositum(X: Hypersurface, *fields: FiniteField) -> FiniteField:
    k = X.field.k
    for f in fields:
        k = math.lcm(k, f.k)
    return extension(X.field, k // X.field.k)


# ---------------------------------------------------------------------------
# pointwise and symbolic third point
# ---------------------------------------------------------------------------

def third_point(X: Hypersurface, p: ProjPoint, p2: ProjPoint) -> ProjPoint:
    """
    Residual intersection of X with the line through p and p2.

    Returns:
        ProjPoint: over the compositum of the fields of p and p2; equals p
        (or p2) when the line is tangent there
    """
    _require_cubic(X)
    E = _compositum(X, p.field, p2.field)
    a, b = p.base_change(E), p2.base_change(E)
    if a == b:
        raise EqualPoints(f"{a} given twice")
    for x in (a, b):
        if not X.contains(x):
            raise PointNotOnHypersurface(f"{x} is not on X")
    jac = X.equation.base_change(E).jacobian()
    grad_a = [D.evaluate(a.coords, E) for D in jac]
    grad_b = [D.evaluate(b.coords, E) for D in jac]
    c21 = 0
    c12 = 0
    for i in range(X.nvars):
        c21 = E.add(c21, E.mul(b.coords[i], grad_a[i]))
        c12 = E.add(c12, E.mul(a.coords[i], grad_b[i]))
    if c21 == 0 and c12 == 0:
        raise LineContainedInX(f"the line through {a} and {b} lies on X")
    return ProjPoint.of(E, [E.sub(E.mul(c12, x), E.mul(c21, y)) for x, y in zip(a.coords, b.coords)])


def _pairing(coords: Sequence[HomogeneousPoly], grads: Sequence[HomogeneousPoly]) -> Optional[HomogeneousPoly]:
    total = None
    for c, g in zip(coords, grads):
        if c.is_zero() or g.is_zero():
            continue
        term = c * g
        total = term if total is None else total + term
    return total


def _chord_forms(equation: HomogeneousPoly, P: Sequence[HomogeneousPoly],
                 Q: Sequence[HomogeneousPoly]) -> List[HomogeneousPoly]:
    """c12 * P - c21 * Q for coordinate forms sharing one variable set."""
    jac = equation.jacobian()
    grad_P = [D.compose(P) if not D.is_zero() else D for D in jac]
    grad_Q = [D.compose(Q) if not D.is_zero() else D for D in jac]
    c21 = _pairing(Q, grad_P)
    c12 = _pairing(P, grad_Q)
    if (c21 is None or c21.is_zero()) and (c12 is None or c12.is_zero()):
        raise DegeneratePencil("every line of the pencil lies on X")
    field, nvars = P[0].field, P[0].nvars
    out = []
    for x, y in zip(P, Q):
        term = None
        if c12 is not None and not c12.is_zero() and not x.is_zero():
            term = c12 * x
        if c21 is not None and not c21.is_zero() and not y.is_zero():
            term = -(c21 * y) if term is None else term - c21 * y
        out.append(term if term is not None else HomogeneousPoly.zero(field, nvars))
    if all(f.is_zero() for f in out):
        raise DegeneratePencil("chord map vanishes identically")
    degree = max(f.degree for f in out if not f.is_zero())
    return [f if not f.is_zero() else HomogeneousPoly.zero(field, nvars, degree) for f in out]


def third_point_symbolic(X: Hypersurface, P: RationalCurveMap, Q: RationalCurveMap) -> RationalCurveMap:
    """
    The curve t -> third_point(P(t), Q(t)) as c12(t) P(t) - c21(t) Q(t),
    with the common factor of the coordinates cancelled.
    """
    _require_cubic(X)
    E = _compositum(X, P.field, Q.field)
    P, Q = P.base_change(E), Q.base_change(E)
    for f in (P, Q):
        if not verify_member(X, f):
            raise NotAMember("both curves must lie on X")
    coords = _chord_forms(X.equation.base_change(E), P.coords, Q.coords)
    return RationalCurveMap.reduced(E, coords)


# ---------------------------------------------------------------------------
# the quadric model of the Weil restriction of P^1
# ---------------------------------------------------------------------------

@dataclass
class WeilRestrictionModel:
    """
    u3^2 - a u4^2 = 4 u1 u2 over GF(q), with a a non-square and GF(q^2) =
    GF(q)(sqrt a). A point (X : Y) of P^1(GF(q^2)) goes to (N(X), N(Y),
    Tr(X Y'), (X Y' - X' Y) / sqrt a) where ' is the Frobenius conjugate.
    """

    base: FiniteField
    ext: FiniteField
    a: int
    sqrt_a: int
    equation: HomogeneousPoly

    def split(self, y: int) -> Tuple[int, int]:
        """(x1, x2) over base with y = x1 + sqrt(a) x2."""
        E = self.ext
        emb = embedding(self.base, E)
        conj = E.frobenius(y, self.base.k)
        half = E.inv(E.scalar(2))
        x1 = E.mul(E.add(y, conj), half)
        x2 = E.div(E.mul(E.sub(y, conj), half), self.sqrt_a)
        return emb.restrict(x1), emb.restrict(x2)

    def to_model(self, point: ProjPoint) -> ProjPoint:
        if point.dim != 1:
            raise ValidationError("the model parametrises P^1")
        K, a = self.base, self.a
        X, Y = point.base_change(self.ext).coords
        x1, x2 = self.split(X)
        y1, y2 = self.split(Y)
        two = K.scalar(2)
        u1 = K.sub(K.mul(x1, x1), K.mul(a, K.mul(x2, x2)))
        u2 = K.sub(K.mul(y1, y1), K.mul(a, K.mul(y2, y2)))
        u3 = K.mul(two, K.sub(K.mul(x1, y1), K.mul(a, K.mul(x2, y2))))
        u4 = K.mul(two, K.sub(K.mul(x2, y1), K.mul(x1, y2)))
        return ProjPoint.of(K, [u1, u2, u3, u4])

    def from_model(self, u: ProjPoint) -> ProjPoint:
        E, K = self.ext, self.base
        if u.field != K or u.dim != 3:
            raise ValidationError("model points are points of P^3 over the base field")
        if self.equation.evaluate(u.coords) != 0:
            raise PointNotOnHypersurface(f"{u} is not on the model quadric")
        emb = embedding(K, E)
        u1, u2, u3, u4 = (emb(c) for c in u.coords)
        if u2 == 0:
            return ProjPoint.of(E, [1, 0])
        x = E.mul(E.add(u3, E.mul(self.sqrt_a, u4)), E.inv(E.scalar(2)))
        return ProjPoint.of(E, [x, u2])

    def conjugate(self, u: ProjPoint) -> ProjPoint:
        """Model image of the Frobenius conjugate point."""
        K = self.base
        u1, u2, u3, u4 = u.coords
        return ProjPoint.of(K, [u1, u2, u3, K.neg(u4)])

    def points(self) -> List[ProjPoint]:
        return enumerate_points(Hypersurface(self.equation)).points


def weil_restrict_p1(q: Union[int, FiniteField], a: int) -> WeilRestrictionModel:
    """The quadric model of R_{GF(q^2)/GF(q)} P^1 for a non-square a."""
    base = q if isinstance(q, FiniteField) else field_of_order(q)
    if base.p == 2:
        raise EvenCharacteristic("the quadric model needs odd characteristic")
    if not 0 <= a < base.q:
        raise ValidationError(f"{a} is not an element of GF({base.q})")
    if a == 0 or base.is_square(a):
        raise SquareParameter(f"{a} is a square in GF({base.q})")
    ext = extension(base, 2)
    root = ext.sqrt(embedding(base, ext)(a))
    sqrt_a = min(root, ext.neg(root), key=ext.lex_key)
    u = [HomogeneousPoly.variable(base, 4, i) for i in range(4)]
    equation = u[2] * u[2] - (u[3] * u[3]).scale(a) - (u[0] * u[1]).scale(base.scalar(4))
    return WeilRestrictionModel(base, ext, a, sqrt_a, equation)


# ---------------------------------------------------------------------------
# descent from GF(q^2) to GF(q)
# ---------------------------------------------------------------------------

def descend(X: Hypersurface, phi2: RationalCurveMap) -> RationalCurveMap:
    """
    The GF(q)-curve t -> third_point(phi2(t), phi2'(t)), phi2' the Frobenius
    conjugate of phi2. phi2 must differ from its conjugate: a curve defined over
    GF(q) gives a tangent pencil and raises DegeneratePencil.
    """
    _require_cubic(X)
    base = X.field
    if phi2.field.p != base.p or phi2.field.k not in (base.k, 2 * base.k):
        raise ValidationError(f"expected a curve over GF({base.q}^2), got {phi2.field}")
    if not verify_member(X, phi2):
        raise NotAMember("the curve to descend does not lie on X")
    if phi2.is_defined_over(base):
        raise DegeneratePencil("the curve equals its Frobenius conjugate; chords degenerate to tangents")
    conj = phi2.frobenius(base)
    out = third_point_symbolic(X, phi2, conj)
    if not out.is_defined_over(base):
        raise NotDefinedOverBase("descended curve is not Frobenius invariant")
    return out.restrict(base)


TableRow = Tuple[ProjPoint, ProjPoint]


@dataclass
class DescentCertificate:
    base: FiniteField
    table: List[TableRow]
    secants: List[ConjugateSecant]
    lift: List[TableRow]
    phi2: Optional[RationalCurveMap] = None
    phi: Optional[RationalCurveMap] = None
    transcript: List[Dict] = dc_field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.phi is not None


def _check_table(X: Hypersurface, table: Sequence[TableRow]):
    base = X.field
    seen = set()
    for t, x in table:
        if t.dim != 1 or t.field != base:
            raise ValidationError(f"table parameter {t} is not a point of P^1(GF({base.q}))")
        if t in seen:
            raise ValidationError(f"parameter {t} appears twice")
        seen.add(t)
        if x.field != base:
            raise ValidationError(f"table value {x} is not rational over GF({base.q})")
        if not is_smooth_point(X, x):
            raise SingularPoint(f"{x} is singular")


def descend_set_map(X: Hypersurface, table: Sequence[TableRow], dmax: Optional[int] = None,
                    allow_constant: bool = False, budget: Optional[int] = None,
                    n_jobs: Optional[int] = None) -> DescentCertificate:
    """
    Extend a set map P^1(GF(q)) -> X(GF(q)) to a morphism defined over GF(q).

    Each value x gets a line through x meeting X in a conjugate pair s, s'
    over GF(q^2); a GF(q^2)-curve through the lifts s is searched degree by
    degree, and its descent takes the value third_point(s, s') = x.

    Raises:
        ExtensionSearchExhausted: no lift curve of degree <= dmax; carries the
            partial certificate
    """
    _require_cubic(X)
    settings = get_settings()
    dmax = settings.DMAX if dmax is None else dmax
    base = X.field
    table = list(table)
    _check_table(X, table)
    if base.q < 8:
        logger.warning(f"q = {base.q} < 8: extensions are not guaranteed for every set map")
    started = time.time()
    cache: Dict[ProjPoint, ConjugateSecant] = {}
    secants = []
    for _, x in table:
        if x not in cache:
            cache[x] = find_conjugate_secant(X, x)
        secants.append(cache[x])
    ext = extension(base, 2)
    lift = [(t.base_change(ext), sec.s) for (t, _), sec in zip(table, secants)]
    certificate = DescentCertificate(base, table, secants, lift)
    X2 = X.base_change(ext)
    for d in range(0 if allow_constant else 1, dmax + 1):
        result = search_curves(X2, d, lift, budget=budget, n_jobs=n_jobs)
        entry = {"degree": d, "marker": result.marker, "strategy": result.strategy,
                 "examined": result.examined, "candidates": len(result.curves), "rejected": 0}
        certificate.transcript.append(entry)
        for phi2 in result.curves:
            try:
                phi = descend(X, phi2)
            except DegeneratePencil:
                entry["rejected"] += 1
                continue
            if all(phi.evaluate(t.coords) == x for t, x in table):
                certificate.phi2, certificate.phi = phi2, phi
                logger.success(f"Set map extended by a degree-{phi.degree} curve "
                               f"(lift degree {d}) in {time.time() - started:.2f}s")
                return certificate
            entry["rejected"] += 1
    raise ExtensionSearchExhausted(f"no lift curve of degree <= {dmax} over GF({ext.q})",
                                   certificate=certificate, dmax=dmax)


@dataclass
class CertificateCheck:
    checks: Dict[str, bool]

    @property
    def match(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]


def verify_certificate(X: Hypersurface, certificate: DescentCertificate) -> CertificateCheck:
    """Re-run every check of a descent certificate from its stored data."""
    base = certificate.base
    ext = extension(base, 2)
    X2 = X.base_change(ext)
    checks: Dict[str, bool] = {"field": X.field == base}
    secant_ok, lift_ok = True, True
    for (t, x), sec, (t2, s) in zip(certificate.table, certificate.secants, certificate.lift):
        try:
            ok = (sec.s_conj == sec.s.frobenius(base) and X2.contains(sec.s) and X2.contains(sec.s_conj)
                  and third_point(X, sec.s, sec.s_conj) == x.base_change(ext)
                  and sec.line.contains_point(x))
        except GeometryError:
            ok = False
        secant_ok = secant_ok and ok
        lift_ok = lift_ok and t2 == t.base_change(ext) and s == sec.s
    checks["secant_identity"] = secant_ok
    checks["lift"] = lift_ok
    phi2, phi = certificate.phi2, certificate.phi
    checks["complete"] = phi2 is not None and phi is not None
    if checks["complete"]:
        checks["phi2_member"] = verify_member(X2, phi2)
        checks["phi2_interpolates"] = all(phi2.evaluate(t.coords) == s for t, s in certificate.lift)
        checks["phi_rational"] = phi.field == base
        checks["phi_member"] = verify_member(X, phi)
        checks["phi_extends"] = all(phi.evaluate(t.coords) == x for t, x in certificate.table)
        try:
            checks["descent_replay"] = descend(X, phi2) == phi
        except GeometryError:
            checks["descent_replay"] = False
    report = CertificateCheck(checks)
    if not report.match:
        logger.warning(f"Certificate check failed: {report.failures}")
    return report


# ---------------------------------------------------------------------------
# unirational parametrisation of a cubic surface
# ---------------------------------------------------------------------------

@dataclass
class DominanceCertificate:
    field: FiniteField
    parameters: Tuple[int, int]
    rank: int
    examined: int


@dataclass
class UnirationalMap:
    """(s, t; s', t') -> third_point(Y_p(s, t), Y_p'(s', t')) as forms in four variables."""

    surface: Hypersurface
    points: Tuple[ProjPoint, ProjPoint]
    tangent_curves: Tuple[RationalCurveMap, RationalCurveMap]
    coords: Tuple[HomogeneousPoly, ...]
    bidegree: Tuple[int, int]
    certificate: DominanceCertificate

    def evaluate(self, st: Sequence[int], st2: Sequence[int], field: Optional[FiniteField] = None) -> ProjPoint:
        field = field or self.coords[0].field
        point = list(st) + list(st2)
        return ProjPoint.of(field, [f.evaluate(point, field) for f in self.coords])


def _lift_forms(f: RationalCurveMap, second: bool) -> List[HomogeneousPoly]:
    out = []
    for form in f.coords:
        terms = {((0, 0) + e if second else e + (0, 0)): c for e, c in form.terms.items()}
        out.append(HomogeneousPoly(f.field, 4, f.degree, terms))
    return out


def _clear_content(coords: Sequence[HomogeneousPoly]) -> List[HomogeneousPoly]:
    """Divide out the common monomial and scale the first nonzero leading coefficient to 1."""
    nonzero = [f for f in coords if not f.is_zero()]
    nvars = nonzero[0].nvars
    shift = [min(e[i] for f in nonzero for e in f.terms) for i in range(nvars)]
    drop = sum(shift)
    field = nonzero[0].field
    lead = nonzero[0].leading()[1]
    inv = field.inv(lead)
    out = []
    for f in coords:
        terms = {tuple(a - b for a, b in zip(e, shift)): field.mul(c, inv) for e, c in f.terms.items()}
        out.append(HomogeneousPoly(field, nvars, f.degree - drop if not f.is_zero() else nonzero[0].degree - drop,
                                   terms))
    return out


def _vdet3(field: FiniteField, m: np.ndarray) -> np.ndarray:
    """Determinants of a stack of 3 x 3 matrices, shape (B, 3, 3)."""
    mul, sub, add = field.vmul, field.vsub, field.vadd

    def minor(r1, r2, c1, c2):
        return sub(mul(m[:, r1, c1], m[:, r2, c2]), mul(m[:, r1, c2], m[:, r2, c1]))

    out = mul(m[:, 0, 0], minor(1, 2, 1, 2))
    out = sub(out, mul(m[:, 0, 1], minor(1, 2, 0, 2)))
    return add(out, mul(m[:, 0, 2], minor(1, 2, 0, 1)))


def _dominance_search(coords: Sequence[HomogeneousPoly], field: FiniteField, samples: int) -> DominanceCertificate:
    """First (x, y) with rank [Phi; dPhi/ds; dPhi/ds'] = 3 at (x, 1, y, 1)."""
    ds = [f.partial(0) for f in coords]
    ds2 = [f.partial(2) for f in coords]
    examined = 0
    m = 1
    while examined < samples:
        E = extension(field, m)
        total = min(E.q ** 2, samples - examined)
        for start in range(0, total, 1 << 14):
            stop = min(total, start + (1 << 14))
            xy = index_block(E.q, 2, start, stop)
            pts = np.ones((len(xy), 4), dtype=np.int64)
            pts[:, 0], pts[:, 2] = xy[:, 0], xy[:, 1]
            rows = []
            for forms in (coords, ds, ds2):
                rows.append(np.stack([f.veval(pts, E) if not f.is_zero() else np.zeros(len(pts), dtype=np.int64)
                                      for f in forms], axis=1))
            mat = np.stack(rows, axis=1)
            hit = np.zeros(len(pts), dtype=bool)
            for drop in range(4):
                cols = [c for c in range(4) if c != drop]
                hit |= _vdet3(E, mat[:, :, cols]) != 0
            idx = np.nonzero(hit)[0]
            if len(idx):
                i = int(idx[0])
                return DominanceCertificate(E, (int(xy[i, 0]), int(xy[i, 1])), 3, examined + i + 1)
            examined += len(pts)
        m += 1
    raise DominanceCertificateNotFound(f"rank 3 not observed on {examined} parameter pairs")


def unirational_map_surface(S: Hypersurface, p: ProjPoint, p2: ProjPoint,
                            samples: Optional[int] = None) -> UnirationalMap:
    """
    Chord map of the two tangent plane cubics at p and p2.

    Dominance is certified by one parameter point where the projective
    Jacobian [Phi; dPhi/ds; dPhi/ds'] has rank 3, i.e. the map has rank 2
    in an affine chart.
    """
    _require_cubic(S)
    if S.nvars != 4:
        raise ValidationError("unirational_map_surface expects a cubic surface in P^3")
    samples = get_settings().DOMINANCE_SAMPLES if samples is None else samples
    E = _compositum(S, p.field, p2.field)
    p, p2 = p.base_change(E), p2.base_change(E)
    curves = []
    for x in (p, p2):
        tc = tangent_cubic(S, x)
        if tc.curve is None:
            raise TangentSectionDegenerate(f"tangent section at {x} is {tc.status}", status=tc.status)
        curves.append(tc.curve)
    equation = S.equation.base_change(E)
    coords = _clear_content(_chord_forms(equation, _lift_forms(curves[0], False), _lift_forms(curves[1], True)))
    if not equation.compose(coords).is_zero():
        raise ValidationError("chord map does not land on the surface")
    sample = next(f for f in coords if not f.is_zero())
    exp = next(iter(sample.terms))
    bidegree = (exp[0] + exp[1], exp[2] + exp[3])
    certificate = _dominance_search(coords, E, samples)
    logger.info(f"Unirational map of bidegree {bidegree}, rank certificate at {certificate.parameters} "
                f"over GF({certificate.field.q})")
    return UnirationalMap(S, (p, p2), (curves[0], curves[1]), tuple(coords), bidegree, certificate)
