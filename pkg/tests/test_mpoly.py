import pytest

from errors import ArityMismatch, DegenerateSpan, ParseError, ValidationError, ZeroForm, ZeroPolynomial
from gf import field_of_order, poly_mul
from mpoly import (
    HomogeneousPoly,
    binary_from_coeffs,
    binary_gcd,
    binary_roots,
    divmod_forms,
    exact_quotient,
    format_poly,
    monomials,
    parse_poly,
    restrict_to_line,
    sylvester_resultant,
    vanishes_on_rational_points,
    vanishing_forms_dimension,
)
from projvar import ProjPoint


@pytest.fixture
def gf5():
    return field_of_order(5)


def test_parse_and_format(gf2):
    P = parse_poly("x0^3 + x1^2*x2", gf2)
    assert (P.nvars, P.degree) == (3, 3)
    assert format_poly(P) == "x0^3 + x1^2*x2"
    assert parse_poly(format_poly(P), gf2) == P


def test_parse_extension_coefficients(gf4):
    P = parse_poly("[0,1]*x0^2 + x1^2", gf4)
    assert P.coefficient((2, 0)) == 2
    assert P.coefficient((0, 2)) == 1


def test_mixed_degree_points_at_offending_term(gf2):
    with pytest.raises(ValidationError) as err:
        parse_poly("x0^2 + x1^3", gf2)
    assert err.value.line == 1
    assert err.value.column == 7


def test_bad_factor_is_a_parse_error(gf2):
    with pytest.raises(ParseError):
        parse_poly("x0^2 + y1^2", gf2)
    with pytest.raises(ParseError):
        parse_poly("   ", gf2)


def test_ring_operations(gf5):
    x = [HomogeneousPoly.variable(gf5, 3, i) for i in range(3)]
    P = x[0] * x[0] + x[1] * x[2]
    assert P.degree == 2
    assert (P - P).is_zero()
    assert (P * 5).is_zero()
    with pytest.raises(ValidationError):
        P + x[0]
    with pytest.raises(ArityMismatch):
        P + HomogeneousPoly.variable(gf5, 2, 0) * HomogeneousPoly.variable(gf5, 2, 1)


def test_partials_in_characteristic_two(gf2):
    P = parse_poly("x0^2*x1 + x0*x1^2", gf2)
    assert P.partial(0) == parse_poly("x1^2", gf2, nvars=2)
    assert parse_poly("x0^2", gf2).partial(0).is_zero()


def test_division(gf5):
    f = parse_poly("x0^2 - x1^2", gf5)
    g = parse_poly("x0 - x1", gf5)
    assert exact_quotient(f, g) == parse_poly("x0 + x1", gf5)
    _, remainder = divmod_forms(parse_poly("x0^2 + x1^2", gf5), g)
    assert not remainder.is_zero()
    with pytest.raises(ZeroForm):
        divmod_forms(f, HomogeneousPoly.zero(gf5, 2, 1))


def test_restrict_to_line(gf2):
    P = parse_poly("x0*x1 + x2^2", gf2)
    A = ProjPoint.of(gf2, [1, 0, 0])
    B = ProjPoint.of(gf2, [0, 1, 0])
    assert restrict_to_line(P, (A, B)) == parse_poly("x0*x1", gf2)
    with pytest.raises(DegenerateSpan):
        restrict_to_line(P, (A, A))


def test_binary_roots_with_infinity():
    F = field_of_order(3)
    # s t (s - t)
    f = binary_from_coeffs(F, [0, 2, 1, 0])
    target, roots = binary_roots(f)
    assert target == F
    assert [r.point for r in roots] == [(0, 1), (1, 0), (1, 1)]
    assert all(r.multiplicity == 1 for r in roots)


def test_binary_roots_over_extension(gf2):
    # s^2 + s t + t^2 has its roots in GF(4)
    f = parse_poly("x0^2 + x0*x1 + x1^2", gf2)
    assert binary_roots(f)[1] == []
    target, roots = binary_roots(f, 2)
    assert target.q == 4 and len(roots) == 2


def test_binary_gcd(gf5):
    f = parse_poly("x0^2 - x1^2", gf5)
    g = parse_poly("x0^2 - x0*x1", gf5)
    assert binary_gcd(f, g) == parse_poly("x0 - x1", gf5)


def test_sylvester_resultant(gf5):
    assert sylvester_resultant(gf5, [4, 1], [3, 1]) != 0
    assert sylvester_resultant(gf5, [4, 1], [2, 2, 1]) == 0
    with pytest.raises(ZeroPolynomial):
        sylvester_resultant(gf5, [1], [3, 1])


def test_vanishing_forms(gf2):
    # no nonzero quadratic form vanishes on GF(2)^2; x0^2 x1 + x0 x1^2 is the cubic that does
    assert vanishing_forms_dimension(gf2, 2, 2) == 0
    assert vanishing_forms_dimension(gf2, 2, 3) == 1
    assert vanishes_on_rational_points(parse_poly("x0^2*x1 + x0*x1^2", gf2), projective=False)
    assert not vanishes_on_rational_points(parse_poly("x0*x1", gf2))


def test_monomial_count():
    assert len(monomials(4, 3)) == 20


def random_form(rng, field, nvars, degree):
    terms = {e: int(rng.integers(0, field.q)) for e in monomials(nvars, degree)}
    return HomogeneousPoly(field, nvars, degree, terms)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 9])
def test_euler_identity(rng, q):
    F = field_of_order(q)
    x = [HomogeneousPoly.variable(F, 3, i) for i in range(3)]
    for degree in range(1, 6):
        for _ in range(4):
            P = random_form(rng, F, 3, degree)
            euler = sum((x[i] * P.partial(i) for i in range(3)), HomogeneousPoly.zero(F, 3, degree))
            assert euler == P * degree


def random_univariate(rng, field, degree):
    return [int(c) for c in rng.integers(0, field.q, size=degree)] + [int(rng.integers(1, field.q))]


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_gcd_and_resultant_agree(rng, q):
    F = field_of_order(q)
    shared = 0
    for trial in range(40):
        f = random_univariate(rng, F, int(rng.integers(1, 4)))
        g = random_univariate(rng, F, int(rng.integers(1, 4)))
        if trial % 2:
            # a common linear factor
            h = [int(rng.integers(0, q)), 1]
            f, g = poly_mul(F, f, h), poly_mul(F, g, h)
        common = binary_gcd(binary_from_coeffs(F, f), binary_from_coeffs(F, g)).degree >= 1
        assert common == (sylvester_resultant(F, f, g) == 0)
        shared += common
    assert shared >= 20
