import itertools

import numpy as np
import pytest

from errors import FieldTooLarge, NotASubfield, NotPrime, ReducibleModulus
from gf import (
    construct_field,
    embedding,
    extension,
    field_of_order,
    format_element,
    frobenius_orbit,
    minimal_polynomial,
    nullspace,
    parse_element,
    parse_field,
    rank,
    solve_quadratic,
    subfield_coordinates,
)


def test_default_moduli_are_lex_smallest():
    assert field_of_order(4).modulus == (1, 1, 1)
    assert field_of_order(8).modulus == (1, 0, 1, 1)
    assert field_of_order(9).modulus == (1, 0, 1)
    assert field_of_order(7).modulus == (0, 1)


def test_parse_field_literals(gf4):
    assert parse_field("GF(4;1,1,1)") == gf4
    assert parse_field("GF(2^2)") == gf4
    assert parse_field("GF(4)") == gf4
    with pytest.raises(ReducibleModulus):
        parse_field("GF(4;1,0,1)")
    with pytest.raises(NotPrime):
        parse_field("GF(6)")


def test_field_cap():
    with pytest.raises(FieldTooLarge):
        construct_field(2, 25)
    with pytest.raises(NotPrime):
        field_of_order(12)


@pytest.mark.parametrize("q", [4, 8, 9, 25, 27])
def test_multiplicative_group(q):
    F = field_of_order(q)
    for a in range(1, q):
        assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, q - 1) == 1
    a, b, c = 1 % q, F.generator, q - 1
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))


def test_large_field_without_tables():
    F = construct_field(2, 20)
    assert not F.tabled
    x = F.generator
    assert F.mul(x, F.inv(x)) == 1
    assert F.frobenius(F.frobenius(x, 10), 10) == x
    assert F.frobenius(x, 10) != x


def test_vectorised_ops_match_scalar(gf9, rng):
    a = rng.integers(0, 9, size=50)
    b = rng.integers(0, 9, size=50)
    assert list(gf9.vadd(a, b)) == [gf9.add(int(x), int(y)) for x, y in zip(a, b)]
    assert list(gf9.vmul(a, b)) == [gf9.mul(int(x), int(y)) for x, y in zip(a, b)]
    assert list(gf9.vpow(a, 5)) == [gf9.pow(int(x), 5) for x in a]


def test_embedding_is_a_ring_map():
    src, dst = field_of_order(4), field_of_order(16)
    emb = embedding(src, dst)
    for a, b in itertools.product(range(4), repeat=2):
        assert emb(src.add(a, b)) == dst.add(emb(a), emb(b))
        assert emb(src.mul(a, b)) == dst.mul(emb(a), emb(b))
    with pytest.raises(NotASubfield):
        embedding(field_of_order(4), field_of_order(8))


def test_embedding_tower_commutes():
    f4, f16, f256 = field_of_order(4), field_of_order(16), field_of_order(256)
    direct = embedding(f4, f256)
    step1, step2 = embedding(f4, f16), embedding(f16, f256)
    assert all(direct(x) == step2(step1(x)) for x in range(4))


def test_restrict_inverts_embedding(gf4):
    f16 = extension(gf4, 2)
    emb = embedding(gf4, f16)
    assert [emb.restrict(emb(x)) for x in range(4)] == list(range(4))
    outside = next(y for y in range(16) if not emb.contains(y))
    assert outside not in {emb(x) for x in range(4)}


def test_frobenius_orbit_and_minimal_polynomial(gf2, gf8):
    orbit = frobenius_orbit(gf8.generator, gf8, gf2)
    assert len(orbit) == 3
    assert minimal_polynomial(gf8.generator, gf8, gf2) == list(gf8.modulus)
    assert frobenius_orbit(1, gf8, gf2) == [1]


@pytest.mark.parametrize("q", [7, 13, 25, 49])
def test_sqrt_of_squares(q):
    F = field_of_order(q)
    for a in range(1, q):
        s = F.sqrt(F.mul(a, a))
        assert F.mul(s, s) == F.mul(a, a)
    assert F.sqrt(F.non_square) is None


def test_quadratic_roots_odd_characteristic(gf7):
    split = solve_quadratic(gf7, 1, 0, gf7.neg(2))
    assert split.rational and set(split.roots) == {3, 4}
    pair = solve_quadratic(gf7, 1, 0, 1)
    assert pair.conjugate_pair
    E = pair.field
    assert E.q == 49
    r, s = pair.roots
    assert E.frobenius(r, 1) == s
    assert E.mul(r, r) == E.neg(1)


def test_quadratic_roots_characteristic_two(gf2, gf8):
    # x^2 + x + 1 has no root in GF(2): the roots live in GF(4)
    pair = solve_quadratic(gf2, 1, 1, 1)
    assert pair.conjugate_pair and pair.field.q == 4
    r, s = pair.roots
    E = pair.field
    assert E.add(r, s) == 1 and E.mul(r, s) == 1
    # odd degree: solved with the half trace
    beta = next(b for b in range(1, 8) if gf8.trace(b) == 0)
    roots = solve_quadratic(gf8, 1, 1, beta)
    assert roots.rational
    for y in roots.roots:
        assert gf8.add(gf8.mul(y, y), gf8.add(y, beta)) == 0


def test_linear_algebra(gf7):
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert rank(gf7, rows) == 2
    (v,) = nullspace(gf7, rows, 3)
    for row in rows:
        assert sum(a * b for a, b in zip(row, v)) % 7 == 0


def test_subfield_coordinates_roundtrip(gf4):
    f16 = extension(gf4, 2)
    coords = subfield_coordinates(f16, gf4)
    emb = embedding(gf4, f16)
    for y in range(16):
        c0, c1 = coords(y)
        assert f16.add(emb(c0), f16.mul(emb(c1), f16.generator)) == y


def test_element_literals(gf4):
    assert parse_element(gf4, "[1,1]") == 3
    assert format_element(gf4, 2) == "[0,1]"
    assert parse_element(gf4, "3") == 1
    assert np.array_equal(gf4.varray([0, 3]), np.array([0, 3]))
