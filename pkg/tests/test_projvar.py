import pytest

from errors import AmbientMismatch, CommonFactor, PointNotOnHypersurface, SearchSpaceTooLarge, ZeroForm
from gf import embedding, field_of_order
from mpoly import HomogeneousPoly, parse_poly
from projvar import (
    NONE_FOUND,
    SINGULAR_FOUND,
    Hypersurface,
    ProjPoint,
    RationalCurveMap,
    count_windows,
    enumerate_points,
    is_smooth_point,
    primitive_middle_betti,
    projective_size,
    singular_locus_probe,
    subvariety_count_bound,
)


def test_canonical_points(gf7):
    assert ProjPoint.of(gf7, [0, 3, 6]).coords == (0, 1, 2)
    assert ProjPoint.of(gf7, [2, 4]) == ProjPoint.of(gf7, [1, 2])
    with pytest.raises(ZeroForm):
        ProjPoint.of(gf7, [0, 0, 0])


def test_projective_size():
    assert projective_size(2, 3) == 15
    assert projective_size(4, 2) == 21


def test_swinnerton_dyer_has_one_point(sd):
    census = enumerate_points(sd.surface)
    assert census.count == 1
    assert census.points[0].coords == (0, 0, 0, 1)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_rational_points_are_the_frobenius_fixed_points(sd, m):
    X = sd.surface
    F = X.field
    census = enumerate_points(X, m)
    assert all(X.base_change(census.field).contains(p) for p in census.points)
    fixed = sorted(p.restrict(F) for p in census.points if p.is_defined_over(F))
    assert fixed == sorted(enumerate_points(X).points)
    # the census is stable under Frobenius
    assert {p.frobenius(F) for p in census.points} == set(census.points)


def test_fermat_over_gf2_is_a_plane(gf2):
    # x^3 = x on GF(2), so the census is the plane x0 + x1 + x2 + x3 = 0
    X = Hypersurface(parse_poly("x0^3 + x1^3 + x2^3 + x3^3", gf2))
    assert enumerate_points(X).count == 7


def test_points_over_extension(gf2):
    conic = Hypersurface(parse_poly("x0^2 + x0*x1 + x1^2 + x2^2", gf2))
    for m in (1, 2, 3):
        census = enumerate_points(conic, m)
        # a smooth conic is a P^1
        assert census.count == census.field.q + 1
        assert all(conic.contains(p) for p in census.points)


def test_singular_probe_finds_cone_vertex():
    F = field_of_order(3)
    cone = Hypersurface(parse_poly("x0^2 + x1^2 + x2^2", F, nvars=4))
    report = singular_locus_probe(cone, kmax=2)
    assert report.verdict == SINGULAR_FOUND
    assert ProjPoint.of(F, [0, 0, 0, 1]) in report.singular_points[1]


def test_singular_probe_is_not_a_certificate(sd):
    report = singular_locus_probe(sd.surface, kmax=2)
    assert report.verdict == NONE_FOUND
    assert report.searched_up_to == 2
    assert not report.certificate_of_smoothness
    assert "not a smoothness certificate" in report.note


def test_probe_refuses_oversized_space():
    F = field_of_order(2 ** 13)
    X = Hypersurface(parse_poly("x0^3 + x1^3 + x2^3 + x3^3", F))
    with pytest.raises(SearchSpaceTooLarge):
        singular_locus_probe(X, kmax=1)


def test_is_smooth_point(sd):
    p = ProjPoint.of(sd.surface.field, [0, 0, 0, 1])
    assert is_smooth_point(sd.surface, p)
    with pytest.raises(PointNotOnHypersurface):
        is_smooth_point(sd.surface, ProjPoint.of(sd.surface.field, [1, 0, 0, 0]))
    with pytest.raises(AmbientMismatch):
        sd.surface.contains(ProjPoint.of(sd.surface.field, [1, 0, 0]))


def test_betti_numbers():
    assert primitive_middle_betti(1, 3) == 2
    assert primitive_middle_betti(2, 3) == 6
    assert primitive_middle_betti(3, 3) == 10


def test_count_windows_on_swinnerton_dyer(sd):
    w = count_windows(sd.surface)
    assert (w.q, w.n, w.degree, w.count, w.projective_count) == (2, 2, 3, 1, 7)
    assert w.cw_bound == 1 and w.cw_pass
    assert w.dw_pass and w.betti == 6 and w.betti_pass
    assert w.dw_conditional
    assert w.forcing_applies is False
    assert count_windows(sd.surface, assume_smooth=True).dw_conditional is False


def test_subvariety_bound():
    assert subvariety_count_bound(6, 2, 1, 2)
    assert not subvariety_count_bound(7, 2, 1, 2)


def test_conic_map_lies_on_conic(gf7):
    f = RationalCurveMap.from_matrix(gf7, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert f.degree == 2 and f.N == 2
    assert f.pullback(parse_poly("x0*x2 - x1^2", gf7)).is_zero()
    assert f.evaluate((1, 0)) == ProjPoint.of(gf7, [1, 0, 0])
    assert f.evaluate((1, 1)) == ProjPoint.of(gf7, [1, 1, 1])


def test_common_factor_rejected_and_reduced(gf7):
    with pytest.raises(CommonFactor):
        RationalCurveMap.from_matrix(gf7, [[1, 0], [1, 0]])
    s2 = HomogeneousPoly(gf7, 2, 2, {(2, 0): 1})
    st = HomogeneousPoly(gf7, 2, 2, {(1, 1): 1})
    g = RationalCurveMap.reduced(gf7, [s2, st])
    assert g.degree == 1
    assert g.matrix() == [[1, 0], [0, 1]]


def test_curve_field_operations(gf2, gf4):
    emb = embedding(gf2, gf4)
    f = RationalCurveMap.from_matrix(gf2, [[1, 0], [0, 1], [1, 1]])
    lifted = f.base_change(gf4)
    assert lifted.is_defined_over(gf2)
    assert lifted.restrict(gf2) == f
    g = RationalCurveMap.from_matrix(gf4, [[1, 0], [0, 1], [2, emb(1)]])
    assert not g.is_defined_over(gf2)
    assert g.frobenius(gf2).frobenius(gf2) == g
