import numpy as np
import pytest

import gallery
from errors import NotAGenerator, NotInIdeal, ParameterOutOfRange, UnknownClaim, ValidationError
from gallery import (
    Claim,
    bothmer_affine_values,
    bothmer_hypersurface,
    build,
    default_claim_ids,
    format_identifier,
    in_frobenius_ideal,
    mystery_form,
    norm_factors,
    norm_hypersurface,
    norm_hypersurface_twisted,
    parse_identifier,
    run_registry,
    search_one_point,
    verify_claim,
)
from gf import field_of_order
from models import FAIL, INFEASIBLE, PASS
from mpoly import HomogeneousPoly, index_block, parse_poly
from projvar import NONE_FOUND, SINGULAR_FOUND, ProjPoint, enumerate_points, singular_locus_probe


def test_bothmer_has_one_point():
    entry = bothmer_hypersurface(2)
    census = enumerate_points(entry.surface)
    assert census.points == [ProjPoint.of(entry.surface.field, [1, 1, 1, 1])]
    values = entry.surface.equation.veval(index_block(2, 4, 0, 16))
    assert np.array_equal(np.asarray(values) % 2, bothmer_affine_values(2))
    with pytest.raises(ParameterOutOfRange):
        bothmer_hypersurface(5)


def test_norm_hypersurface_has_one_point():
    entry = norm_hypersurface(2, 3)
    assert entry.surface.degree == 3
    assert enumerate_points(entry.surface).points == entry.points
    factors = norm_factors(entry)
    assert len(factors) == 3
    with pytest.raises(NotAGenerator):
        norm_hypersurface(2, 3, alpha=1)
    with pytest.raises(ParameterOutOfRange):
        norm_hypersurface(2, 1)


def test_frobenius_ideal_membership(gf2):
    assert in_frobenius_ideal(parse_poly("x0^2*x1 + x0*x1^2", gf2, nvars=4))
    assert not in_frobenius_ideal(parse_poly("x0^3", gf2, nvars=4))
    with pytest.raises(NotInIdeal):
        norm_hypersurface_twisted(2, 3, parse_poly("x0^3", gf2, nvars=4))


def test_twisted_norm_keeps_the_point(gf2):
    H = parse_poly("x1^2*x2 + x1*x2^2", gf2, nvars=4)
    entry = norm_hypersurface_twisted(2, 3, H)
    assert enumerate_points(entry.surface).count == 1
    assert entry.parts["H"] == H


def test_one_point_search_harness():
    candidates = search_one_point(2, 3, tries=2, seed=7)
    assert len(candidates) == 2
    assert all(c.count == 1 for c in candidates)
    assert all(c.probe in (NONE_FOUND, SINGULAR_FOUND) for c in candidates)


@pytest.mark.parametrize("m, verdict", [(3, NONE_FOUND), (4, SINGULAR_FOUND)])
def test_mystery_form_singular_for_even_m(m, verdict):
    X = mystery_form(1, m).surface
    report = singular_locus_probe(X, kmax=1 if m % 2 == 0 else 2)
    assert report.verdict == verdict
    if verdict == SINGULAR_FOUND:
        assert ProjPoint.of(X.field, [1] * (m + 1)) in report.singular_points[1]


def test_parse_identifier():
    assert parse_identifier("SD") == ("SD", ())
    assert parse_identifier("NORM(2, 3)") == ("NORM", (2, 3))
    assert parse_identifier("CW_bound(BOTHMER(3))") == ("CW_bound", ("BOTHMER(3)",))
    assert format_identifier("NORM", (2, 3)) == "NORM(2,3)"
    with pytest.raises(ValidationError):
        parse_identifier("3SD")


def test_build():
    assert build("FERMAT(2,4)").surface.field.q == 4
    assert build("sd").identifier == "SD"
    with pytest.raises(ParameterOutOfRange):
        build("KLEIN")
    with pytest.raises(ParameterOutOfRange):
        build("SD(1)")


def test_default_claims_are_registered():
    ids = default_claim_ids()
    assert "SD_unique_point" in ids
    assert "SD_no_low_degree_curves(4)" in ids
    assert "NORM_unique(2,3)" in ids
    assert len(ids) == len(set(ids))


def test_verify_claim_passes(store):
    record = verify_claim("SD_unique_point", store=store)
    assert record.outcome == PASS
    assert record.actual == record.expected == "1 point(s) (0:0:0:1)"
    assert record.anchor == "swinnerton-dyer/rational-points"
    assert store.digests("claim") == [record.digest]


def test_every_claim_carries_an_anchor():
    anchors = [claim.anchor for claim in gallery.REGISTRY.values()]
    assert all(anchors)
    assert verify_claim("NORM_unique(2,3)").anchor == "norm-form/one-point-hypersurface"


def test_unknown_claims():
    with pytest.raises(UnknownClaim):
        verify_claim("SD_rational_curve")
    with pytest.raises(UnknownClaim):
        verify_claim("BOTHMER_unique(7)")
    with pytest.raises(UnknownClaim):
        verify_claim("SD_unique_point(3)")


def test_library_error_becomes_infeasible():
    # degree 5 in P^3: no lower bound on the count
    record = verify_claim("CW_bound(MYSTERY(2,3))")
    assert record.outcome == INFEASIBLE
    assert record.reason.startswith("E_PARAMETER")
    assert record.actual is None


def test_mismatch_is_a_fail(monkeypatch):
    claim = Claim("SD_two_points", "a wrong statement", gallery._sd_unique_point, lambda: "2 point(s)")
    monkeypatch.setitem(gallery.REGISTRY, claim.name, claim)
    record = verify_claim("SD_two_points")
    assert record.outcome == FAIL
    assert record.actual == "1 point(s) (0:0:0:1)"


def test_run_registry(store):
    ids = ["SD_unique_point", "NORM_unique(2,3)", "MYSTERY_vanishes(1,3)"]
    records = run_registry(ids, n_jobs=1, store=store, progress=False)
    assert [r.claim_id for r in records] == ids
    assert all(r.outcome == PASS for r in records)
    assert len(store.records("claim")) == 3


def test_quadric_weil_claim():
    assert verify_claim("QUADRIC_WEIL_COUNT(5)").outcome == PASS
    with pytest.raises(UnknownClaim):
        verify_claim("QUADRIC_WEIL_COUNT(4)")


def test_zero_twist_is_the_norm_form(gf2):
    entry = norm_hypersurface_twisted(2, 3, HomogeneousPoly.zero(gf2, 4, 3))
    assert entry.surface.equation == norm_hypersurface(2, 3).surface.equation
