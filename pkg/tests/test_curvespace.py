import pytest

from curvespace import (
    BUDGET_REACHED,
    EXHAUSTED,
    FOUND,
    hom_equations,
    interpolate_to_Pn,
    is_free,
    is_very_free,
    pullback_splitting,
    search_curves,
    tangent_cubic,
    verify_member,
)
from errors import (
    AmbientMismatch,
    DegreeTooSmall,
    DuplicateSupport,
    NotAMember,
    PointNotOnHypersurface,
    ValidationError,
)
from gallery import fermat_cubic
from gf import extension, field_of_order
from incidence import IRREDUCIBLE_CUBIC, THREE_LINES, find_conjugate_secant, lines_on
from mpoly import parse_poly
from projvar import Hypersurface, ProjPoint, RationalCurveMap, enumerate_points


@pytest.fixture
def quadric():
    return Hypersurface(parse_poly("x0*x3 - x1*x2", field_of_order(5)))


def test_verify_member(quadric):
    F = quadric.field
    diagonal = RationalCurveMap.from_matrix(F, [[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert verify_member(quadric, diagonal)
    assert not verify_member(quadric, RationalCurveMap.from_matrix(F, [[1, 0], [0, 1], [0, 1], [1, 0]]))
    with pytest.raises(AmbientMismatch):
        verify_member(quadric, RationalCurveMap.from_matrix(F, [[1, 0], [0, 1], [1, 1]]))


def test_splitting_on_a_quadric_surface(quadric):
    F = quadric.field
    # a (1,1) curve on P^1 x P^1: T restricts to O(2) + O(2)
    conic = RationalCurveMap.from_matrix(F, [[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]])
    split = pullback_splitting(quadric, conic)
    assert split.degrees == (2, 2)
    assert split.total == (quadric.nvars - quadric.degree) * conic.degree
    assert split.is_very_free
    assert split.routes_agree
    # a ruling: O(2) + O(0)
    ruling = RationalCurveMap.from_matrix(F, [[1, 0], [0, 0], [0, 1], [0, 0]])
    assert pullback_splitting(quadric, ruling).degrees == (2, 0)
    assert is_free(quadric, ruling)
    assert not is_very_free(quadric, ruling)


def test_lines_on_fermat_split_as_2_minus_1(fermat4):
    X = fermat4.surface
    for L in lines_on(X)[:5]:
        split = pullback_splitting(X, L.as_map())
        assert split.degrees == (2, -1)
        assert split.total == 1
        assert not split.is_free
        assert split.routes_agree
        assert split.h0[-2] == 1


def test_splitting_needs_a_member(fermat4):
    X = fermat4.surface
    off = RationalCurveMap.from_matrix(X.field, [[1, 0], [0, 1], [0, 0], [0, 0]])
    with pytest.raises(NotAMember):
        pullback_splitting(X, off)


def test_hom_equations_vanish_on_lines(fermat4):
    X = fermat4.surface
    system = hom_equations(X, 1)
    assert len(system.equations) == X.degree + 1
    assert system.variables == 8
    L = lines_on(X)[0].as_map()
    coefficients = [c for row in L.matrix() for c in row]
    assert all(v == 0 for v in system.evaluate(coefficients))
    assert not system.is_degenerate(coefficients)
    off = [1, 0, 0, 1, 0, 0, 0, 0]
    assert any(system.evaluate(off))
    # (s, s, 0, 0) has the common factor s
    assert system.is_degenerate([1, 0, 1, 0, 0, 0, 0, 0])
    assert system.is_degenerate([0] * 8)
    with pytest.raises(ValidationError):
        hom_equations(X, 0)


def test_hom_equations_agree_with_membership(fermat4, rng):
    X = fermat4.surface
    F = X.field
    system = hom_equations(X, 1)
    vectors = [[c for row in L.as_map().matrix() for c in row] for L in lines_on(X)]
    vectors += [[int(c) for c in rng.integers(0, F.q, size=system.variables)] for _ in range(100)]
    members = 0
    for v in vectors:
        if system.is_degenerate(v):
            continue
        f = RationalCurveMap.from_matrix(F, [v[2 * i:2 * i + 2] for i in range(4)])
        vanishes = not any(system.evaluate(v))
        assert vanishes == verify_member(X, f)
        members += vanishes
    assert members >= 27


def test_tangent_cubic_at_a_point_off_the_lines():
    X = fermat_cubic(2, 13).surface
    F = X.field
    secant = find_conjugate_secant(X, ProjPoint.of(F, [1, 12, 0, 0]))
    XE = X.base_change(secant.s.field)
    tc = tangent_cubic(XE, secant.s)
    assert tc.status == IRREDUCIBLE_CUBIC
    assert tc.curve.degree == 3
    assert verify_member(XE, tc.curve)


def test_tangent_cubic_at_an_eckardt_point():
    X = fermat_cubic(2, 13).surface
    tc = tangent_cubic(X, ProjPoint.of(X.field, [1, 12, 0, 0]))
    assert tc.status == THREE_LINES and tc.curve is None
    with pytest.raises(PointNotOnHypersurface):
        tangent_cubic(X, ProjPoint.of(X.field, [1, 0, 0, 0]))


def test_no_lines_on_swinnerton_dyer(sd):
    result = search_curves(sd.surface, 1)
    assert result.marker == EXHAUSTED
    assert result.strategy == "exhaustive"
    assert result.curves == []
    assert result.space == 255


@pytest.mark.slow
def test_no_cubics_on_swinnerton_dyer(sd):
    result = search_curves(sd.surface, 3)
    assert result.marker == EXHAUSTED
    assert result.space == 2 ** 16 - 1


def test_structured_search_finds_lines(fermat4):
    X = fermat4.surface
    result = search_curves(X, 1, limit=5)
    assert result.marker == FOUND and result.strategy == "structured"
    assert len(result.curves) == 5
    assert all(verify_member(X, f) for f in result.curves)


def test_search_with_a_constraint(fermat4):
    X = fermat4.surface
    F = X.field
    t, x = ProjPoint.of(F, [1, 0]), ProjPoint.of(F, [1, 1, 0, 0])
    result = search_curves(X, 1, [(t, x)])
    assert result.marker == FOUND
    assert len(result.curves) == 3
    assert all(f.evaluate(t.coords) == x for f in result.curves)
    with pytest.raises(PointNotOnHypersurface):
        search_curves(X, 1, [(t, ProjPoint.of(F, [1, 0, 0, 0]))])


def test_conics_through_a_point_off_the_lines(cyclic9):
    X = cyclic9
    F = X.field
    # an irreducible tangent section means no line of X passes through x
    x = next(p for p in enumerate_points(X).points if tangent_cubic(X, p).status == IRREDUCIBLE_CUBIC)
    t = ProjPoint.of(F, [1, 0])
    result = search_curves(X, 2, [(t, x)])
    assert result.marker == FOUND and result.strategy == "structured"
    # one residual conic for each of the lines x0 = x2 = 0 and x1 = x3 = 0 at least
    assert len(result.curves) >= 2
    for f in result.curves:
        assert f.degree == 2
        assert verify_member(X, f)
        assert f.evaluate(t.coords) == x


def test_exhaustive_search_without_constructions(fermat4):
    X = fermat4.surface
    result = search_curves(X, 1, structured=False, limit=4)
    assert result.strategy == "exhaustive"
    assert result.marker == FOUND
    assert all(verify_member(X, f) for f in result.curves)


def test_sampling_stops_at_the_budget(fermat4):
    result = search_curves(fermat4.surface, 2, structured=False, budget=100)
    assert result.strategy == "sampling"
    assert result.examined == 100
    assert result.marker in (FOUND, BUDGET_REACHED)


def test_interpolate_through_a_closed_point_of_degree_two():
    K = field_of_order(3)
    E = extension(K, 2)
    a = E.generator
    targets = [
        (ProjPoint.of(K, [1, 0]), ProjPoint.of(K, [1, 0, 0])),
        (ProjPoint.of(K, [0, 1]), ProjPoint.of(K, [0, 1, 0])),
        (ProjPoint.of(E, [1, a]), ProjPoint.of(E, [1, a, 1])),
    ]
    f = interpolate_to_Pn(K, targets, 3)
    assert f.field == K
    assert f.degree <= 3
    for t, x in targets:
        assert f.evaluate(t.coords, t.field) == x
    with pytest.raises(DegreeTooSmall):
        interpolate_to_Pn(K, targets, 2)


def test_interpolation_rejects_bad_support():
    K = field_of_order(3)
    E = extension(K, 2)
    t, x = ProjPoint.of(E, [1, E.generator]), ProjPoint.of(E, [1, 1, E.generator])
    with pytest.raises(DuplicateSupport):
        interpolate_to_Pn(K, [(t, x), (t.frobenius(K), x.frobenius(K))], 4)
    # a rational parameter cannot carry a GF(9) value
    with pytest.raises(ValidationError):
        interpolate_to_Pn(K, [(ProjPoint.of(K, [1, 0]), x)], 2)
