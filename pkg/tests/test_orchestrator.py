import json

import pytest

from errors import ReplayMismatch, SearchSpaceTooLarge, StoreCorrupt
from gf import extension, field_of_order
from job_parser import JobParser, curve_from_dict
from models import INFEASIBLE_RUN, NEGATIVE, SUCCESS, ClaimRecord, canonical_json
from orchestrator import Orchestrator
from projvar import ProjPoint
from settings import get_settings

SD_TEXT = """GF(2)
vars 4
deg 3
x2*x3^2 + x2^2*x3 + x0^3 + x1^3 + x2^3 + x0^2*x1 + x1^2*x2 + x0*x2^2 + x0*x1*x2
"""

FERMAT7_TEXT = "GF(7)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n"
FERMAT13_TEXT = "GF(13)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n"
LARGE_TEXT = "GF(2^13)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n"
TABLE13_TEXT = "GF(13)\n(1:0) -> (1:12:0:0)\n(0:1) -> (1:12:0:0)\n"


@pytest.fixture
def orchestrator(store):
    settings = get_settings()
    return Orchestrator(job_parser=JobParser(settings), settings=settings, store=store)


def run(orchestrator, command, sources=None, **flags):
    job = orchestrator.job_parser.parse_job(command, sources or {}, flags)
    return orchestrator.dispatch(job)


def test_field_report(orchestrator):
    result = run(orchestrator, "field", field="GF(9)", embed_into="GF(81)")
    assert result.exit_code == 0
    assert result.artifact.payload_data["q"] == 9
    assert result.artifact.payload_data["modulus"] == [1, 0, 1]
    assert "embedding" in result.artifact.payload_data


def test_count_writes_a_census(orchestrator):
    result = run(orchestrator, "variety.count", {"surface": ("sd.txt", SD_TEXT)})
    assert result.outcome == SUCCESS
    assert result.artifact.payload_data["points"] == ["(0:0:0:1)"]
    header, *rows = result.files["census"].splitlines()
    assert json.loads(header)["count"] == 1
    assert rows == ["[0,0,0,1]"]
    assert result.manifest.fields == ["GF(2^1;0,1)"]


def test_replay_reproduces_the_artifact(orchestrator):
    first = run(orchestrator, "variety.count", {"surface": ("sd.txt", SD_TEXT)})
    again = orchestrator.replay(first.manifest_key)
    assert again.exit_code == first.exit_code
    assert again.manifest.artifacts == first.manifest.artifacts
    assert again.artifact.digest == first.artifact.digest


def test_edited_record_is_detected(orchestrator, store):
    first = run(orchestrator, "variety.count", {"surface": ("sd.txt", SD_TEXT)})
    entries = [json.loads(line) for line in store.path.read_text(encoding="utf-8").splitlines()]
    for entry in entries:
        if entry["kind"] == "artifact":
            entry["record"]["payload_data"]["count"] = 2
    store.path.write_text("".join(canonical_json(e) + "\n" for e in entries), encoding="utf-8")
    with pytest.raises(ReplayMismatch):
        orchestrator.replay(first.manifest_key)


def test_corrupt_store_line(orchestrator, store):
    run(orchestrator, "field", field="GF(4)")
    with open(store.path, "a", encoding="utf-8") as file:
        file.write("{truncated\n")
    with pytest.raises(StoreCorrupt):
        store.records()


def test_duplicate_runs_store_one_artifact(orchestrator, store):
    run(orchestrator, "field", field="GF(4)")
    run(orchestrator, "field", field="GF(4)")
    assert len(store.digests("artifact")) == 1
    assert len(store.digests("manifest")) == 1


def test_oversized_enumeration_is_infeasible(orchestrator):
    result = run(orchestrator, "variety.count", {"surface": ("big.txt", LARGE_TEXT)})
    assert result.exit_code == 2
    assert result.outcome == INFEASIBLE_RUN
    assert result.artifact.error["code"] == SearchSpaceTooLarge.code
    again = orchestrator.replay(result.manifest_key)
    assert again.exit_code == 2


def test_no_lines_is_a_negative_result(orchestrator):
    result = run(orchestrator, "curves.search", {"surface": ("sd.txt", SD_TEXT)}, degree=1)
    assert result.exit_code == 1
    assert result.artifact.payload_data["marker"] == "Exhausted"


def test_gallery_claim_records(orchestrator, store):
    result = run(orchestrator, "gallery.verify", claim="SD_unique_point")
    assert result.exit_code == 0
    assert isinstance(result.records[0], ClaimRecord)
    assert store.digests("claim") == [result.records[0].digest]
    assert result.records[0].digest in result.manifest.artifacts


def test_infeasible_claim_exits_2(orchestrator):
    result = run(orchestrator, "gallery.verify", claim="CW_bound(MYSTERY(2,3))")
    assert result.exit_code == 2


def test_weil_restriction(orchestrator):
    result = run(orchestrator, "chord.weil-restrict", q=5, a="2")
    assert result.exit_code == 0
    assert result.artifact.payload_data["points"] == 26
    even = run(orchestrator, "chord.weil-restrict", q=4, a="1")
    assert even.exit_code == 2
    assert even.artifact.error["error"] == "EvenCharacteristic"


def test_third_point_command(orchestrator):
    result = run(orchestrator, "chord.third-point", {"surface": ("f.txt", FERMAT7_TEXT)},
                 point="(1:6:0:0)", point2="(1:0:6:0)")
    assert result.artifact.payload_data["third"] == "(0:1:6:0)"


def test_set_map_certificate_loop(orchestrator):
    sources = {"surface": ("f.txt", FERMAT13_TEXT), "table": ("t.txt", TABLE13_TEXT)}
    result = run(orchestrator, "chord.descend-set-map", sources, allow_constant=True)
    assert result.exit_code == 0
    certificate = result.files["certificate"]
    check = run(orchestrator, "chord.verify-certificate",
                {"surface": ("f.txt", FERMAT13_TEXT), "certificate": ("c.json", certificate)})
    assert check.exit_code == 0
    assert check.artifact.payload_data["match"]


def test_exhausted_set_map_keeps_the_partial_certificate(orchestrator):
    sources = {"surface": ("f.txt", FERMAT13_TEXT), "table": ("t.txt", TABLE13_TEXT)}
    result = run(orchestrator, "chord.descend-set-map", sources, dmax=0)
    assert result.outcome == NEGATIVE
    assert result.artifact.payload_data["error"]["code"] == "E_EXTENSION_EXHAUSTED"
    partial = result.files["certificate"]
    check = run(orchestrator, "chord.verify-certificate",
                {"surface": ("f.txt", FERMAT13_TEXT), "certificate": ("c.json", partial)})
    assert check.exit_code == 1
    assert check.artifact.payload_data["failures"] == ["complete"]


def test_plane_section_command(orchestrator):
    result = run(orchestrator, "lines.classify", {"surface": ("sd.txt", SD_TEXT)}, plane="(0:0:0:1)")
    assert result.exit_code == 0
    assert result.artifact.payload_data["conjugate_triple"]
    census = run(orchestrator, "lines.classify", {"surface": ("sd.txt", SD_TEXT)})
    assert census.exit_code == 0
    assert census.artifact.payload_data["planes"] == 15


def test_hom_equation_sizes(orchestrator):
    result = run(orchestrator, "curves.equations", {"surface": ("f.txt", FERMAT7_TEXT)}, degree=2)
    payload = result.artifact.payload_data
    assert (payload["variables"], payload["equations"]) == (12, 7)
    assert payload["degeneracy_matrix"] == "4x4"


def test_interpolation_through_a_degree_two_closed_point(orchestrator):
    through = ["(1:0)=(1:0:0)", "(0:1)=(0:1:0)", "(1:[0,1])=(1:[0,1]:1)"]
    result = run(orchestrator, "curves.interpolate", field="GF(3)", degree=3, ext=2, through=through)
    assert result.exit_code == 0
    f = curve_from_dict(result.artifact.payload_data["curve"])
    assert f.field == field_of_order(3)
    E = extension(f.field, 2)
    a = E.from_coeffs([0, 1])
    assert f.evaluate((1, a), E) == ProjPoint.of(E, [1, a, 1])
    assert f.evaluate((1, 0), E) == ProjPoint.of(E, [1, 0, 0])
