import itertools
import math

import pytest

from errors import LineNotInX, PlaneContainedInX, SingularConic, ValidationError
from gallery import fermat_cubic
from gf import extension, field_of_order
from incidence import (
    LINE_PLUS_CONIC,
    SMOOTH_CONIC,
    THREE_LINES,
    TWO_LINES,
    Line,
    Plane,
    all_planes,
    classify_plane_section,
    eckardt_points,
    find_conjugate_secant,
    intersect_line,
    lines_on,
    lines_through_point,
    parametrize_conic,
    plane_section_census,
    residual_conic,
)
from mpoly import HomogeneousPoly, parse_poly, projective_chunks, restrict_to_line
from projvar import Hypersurface, ProjPoint, enumerate_points


def test_line_points(gf4):
    L = Line.from_rows(gf4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    pts = L.points()
    assert len(pts) == 5
    assert all(L.contains_point(p) for p in pts)
    assert not L.contains_point(ProjPoint.of(gf4, [0, 0, 1, 0]))
    assert L.as_map().degree == 1


def test_swinnerton_dyer_line_census(sd):
    assert lines_on(sd.surface) == []
    lines = lines_on(sd.surface, 3)
    assert len(lines) == 27
    assert all(restrict_to_line(sd.surface.equation, L).is_zero() for L in lines)


def test_swinnerton_dyer_sections_are_conjugate_triples(sd):
    p = sd.points[0]
    avoiding = [H for H in all_planes(sd.surface.field) if not H.contains_point(p)]
    assert len(avoiding) == 8
    for H in avoiding:
        section = classify_plane_section(sd.surface, H)
        assert section.kind == THREE_LINES
        assert section.conjugate_triple
        assert all(line.field_degree == 3 for line in section.lines)


def test_plane_section_census(sd):
    census = plane_section_census(sd.surface)
    assert census.planes == 15
    assert census.contained == 0
    assert census.conjugate_triples == 8
    assert census.line_bound_holds
    assert sum(census.counts.values()) == 15


def test_classify_single_plane(sd):
    H = Plane.from_linear_form(sd.surface.field, [0, 0, 0, 1])
    section = classify_plane_section(sd.surface, H)
    assert section.conjugate_triple
    with pytest.raises(ValidationError):
        classify_plane_section(Hypersurface(parse_poly("x0^2 + x1*x2", sd.surface.field, nvars=4)), H)


def test_plane_on_the_surface_is_reported(gf2):
    X = Hypersurface(parse_poly("x0*x1^2 + x0*x2^2 + x0^2*x3", gf2))
    with pytest.raises(PlaneContainedInX):
        classify_plane_section(X, Plane.from_linear_form(gf2, [1, 0, 0, 0]))


def test_intersection_divisor(sd):
    L = Line.from_rows(sd.surface.field, [[0, 0, 1, 0], [0, 0, 0, 1]])
    divisor = intersect_line(sd.surface, L)
    assert not divisor.contained
    assert divisor.degree == 3
    assert sorted(e.degree for e in divisor.entries) == [1, 2]


def test_fermat_lines_over_gf4(fermat4):
    lines = lines_on(fermat4.surface)
    assert len(lines) == 27
    points = enumerate_points(fermat4.surface).points
    assert len(points) == 45
    on_lines = {p for L in lines for p in L.points()}
    assert set(points) <= on_lines


def test_fermat_eckardt_points(fermat4):
    # the Hermitian surface: every rational point is on three lines
    assert len(eckardt_points(fermat4.surface)) == 45


def test_lines_through_point(fermat4):
    p = ProjPoint.of(fermat4.surface.field, [1, 1, 0, 0])
    lines = lines_through_point(fermat4.surface, p)
    assert len(lines) == 3
    assert all(L.contains_point(p) for L in lines)


def test_conjugate_secant_on_fermat():
    X = fermat_cubic(2, 13).surface
    F = X.field
    p = ProjPoint.of(F, [1, 12, 0, 0])
    secant = find_conjugate_secant(X, p)
    E = secant.s.field
    assert E.q == 169
    assert secant.s != secant.s_conj
    assert secant.s.frobenius(F) == secant.s_conj
    ext_X = X.base_change(E)
    assert ext_X.contains(secant.s) and ext_X.contains(secant.s_conj)
    assert secant.line.base_change(E).contains_point(secant.s)
    assert secant.tried >= 1


def test_residual_conic(fermat4):
    X = fermat4.surface
    L = lines_on(X)[0]
    A, B = L.basis
    C = next(ProjPoint.of(X.field, e) for e in ([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1])
             if not L.contains_point(ProjPoint.of(X.field, e)))
    residual = residual_conic(X, L, Plane.through(A, B, C))
    assert residual.conic.degree == 2
    assert residual.status in (SMOOTH_CONIC, TWO_LINES)
    off = Line.from_rows(X.field, [[1, 0, 0, 0], [0, 1, 0, 0]])
    with pytest.raises(LineNotInX):
        residual_conic(X, off, Plane.through(A, B, C))


def test_parametrize_conic(gf7):
    conic = parse_poly("x0*x2 - x1^2", gf7)
    f = parametrize_conic(conic)
    assert f.degree == 2
    assert f.pullback(conic).is_zero()
    with pytest.raises(SingularConic):
        parametrize_conic(parse_poly("x0^2 - x1^2", gf7, nvars=3))


def test_lines_in_higher_ambient_space():
    F = field_of_order(2)
    # the hyperplane x0 = x1 inside a reducible cubic in P^4 carries lines
    X = Hypersurface(parse_poly("x0*x2*x3 + x1*x2*x3", F, nvars=5))
    lines = lines_on(X)
    assert lines
    assert all(restrict_to_line(X.equation, L).is_zero() for L in lines)


@pytest.mark.parametrize("q, m, count", [(2, 2, 27), (2, 3, 3), pytest.param(4, 2, 27, marks=pytest.mark.slow)])
def test_lines_persist_over_extensions(q, m, count):
    X = fermat_cubic(2, q).surface
    rational = lines_on(X)
    extended = lines_on(X, m)
    assert rational
    E = extended[0].field
    assert {L.base_change(E) for L in rational} <= set(extended)
    assert len(extended) == count


def test_every_line_of_p3_meets_fermat_in_three_points(fermat4):
    X = fermat4.surface
    F = X.field
    points = [ProjPoint.of(F, [int(c) for c in row]) for block in projective_chunks(F.q, 4) for row in block]
    all_lines = {Line.through(a, b) for a, b in itertools.combinations(points, 2)}
    assert len(all_lines) == 357
    contained = set()
    for L in all_lines:
        divisor = intersect_line(X, L)
        if divisor.contained:
            contained.add(L)
        else:
            assert divisor.degree == 3
            assert all(X.base_change(p.field).contains(p) for p in divisor.support())
    assert contained == set(lines_on(X))


def section_product(section):
    k = math.lcm(*(l.line.field.k for l in section.lines))
    base = section.ternary.field
    E = extension(base, k // base.k)
    product = HomogeneousPoly.constant(E, 3, 1)
    for l in section.lines:
        form = HomogeneousPoly.linear(l.line.field, list(l.plane_form)).base_change(E)
        product = product * form ** l.multiplicity
    if section.residual is not None:
        product = product * section.residual.base_change(E)
    return product, E


@pytest.mark.parametrize("surface", ["sd", "fermat4"])
def test_section_factors_multiply_back(surface, request):
    X = request.getfixturevalue(surface).surface
    checked = 0
    for H in all_planes(X.field):
        section = classify_plane_section(X, H)
        if section.kind not in (THREE_LINES, LINE_PLUS_CONIC):
            continue
        product, E = section_product(section)
        assert product.normalized() == section.ternary.base_change(E).normalized()
        checked += 1
    assert checked
