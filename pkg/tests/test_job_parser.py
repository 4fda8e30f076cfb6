import pytest

from chord import descend_set_map, verify_certificate
from errors import ParseError, ValidationError
from gallery import fermat_cubic
from gf import field_of_order
from job_parser import (
    JobParser,
    certificate_to_dict,
    read_certificate,
    read_curve,
    read_hypersurface,
    read_table,
    write_curve,
    write_hypersurface,
)
from models import canonical_json
from projvar import ProjPoint, RationalCurveMap
from settings import get_settings

SD_TEXT = """# the Swinnerton-Dyer surface
GF(2)
vars 4
deg 3
x2*x3^2 + x2^2*x3 + x0^3 + x1^3 + x2^3
  + x0^2*x1 + x1^2*x2 + x0*x2^2 + x0*x1*x2
"""

FERMAT13_TEXT = "GF(13)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n"


@pytest.fixture
def parser():
    return JobParser(get_settings())


def test_read_hypersurface(sd):
    X = read_hypersurface(SD_TEXT)
    assert X.equation == sd.surface.equation
    assert read_hypersurface(write_hypersurface(X)).equation == X.equation


def test_modulus_in_the_header(gf4):
    X = read_hypersurface("GF(4;1,1,1)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n")
    assert X.field == gf4
    with pytest.raises(ValidationError) as err:
        read_hypersurface("GF(4;1,0,1)\nvars 4\ndeg 3\nx0^3 + x1^3 + x2^3 + x3^3\n")
    assert err.value.line == 1


def test_mixed_degree_reports_file_position():
    with pytest.raises(ValidationError) as err:
        read_hypersurface("GF(2)\nvars 3\ndeg 2\nx0^2 + x1^3\n")
    assert (err.value.line, err.value.column) == (4, 7)


def test_bad_headers():
    with pytest.raises(ValidationError):
        read_hypersurface("GF(2)\nvars 3\ndeg 3\nx0^2 + x1*x2\n")
    with pytest.raises(ParseError):
        read_hypersurface("GF(2)\nvars x\ndeg 2\nx0^2\n")
    with pytest.raises(ParseError):
        read_hypersurface("GF(2)\nvars 3\n")


def test_curve_files(gf4):
    f = RationalCurveMap.from_matrix(gf4, [[1, 0], [0, 1], [2, 3], [0, 0]])
    assert read_curve(write_curve(f)) == f
    with pytest.raises(ValidationError):
        read_curve("GF(4)\ndegree 1\n1 0\n0 1 1\n")
    with pytest.raises(ValidationError):
        # s and s share a factor
        read_curve("GF(2)\ndegree 1\n1 0\n1 0\n")


def test_table_files(gf7):
    field, rows = read_table("GF(7)\n(1:0) -> (1:6:0:0)\n(0:1) -> (1:0:6:0)\n")
    assert field == gf7
    assert rows[0] == (ProjPoint.of(gf7, [1, 0]), ProjPoint.of(gf7, [1, 6, 0, 0]))
    with pytest.raises(ParseError) as err:
        read_table("GF(7)\n(1:0) (1:6:0:0)\n")
    assert err.value.line == 2
    with pytest.raises(ValidationError):
        read_table("GF(7)\n(1:0:0) -> (1:6:0:0)\n")


def test_certificate_survives_serialisation():
    X = fermat_cubic(2, 13).surface
    F = X.field
    certificate = descend_set_map(X, [(ProjPoint.of(F, [1, 0]), ProjPoint.of(F, [1, 12, 0, 0]))],
                                  allow_constant=True)
    restored = read_certificate(canonical_json(certificate_to_dict(certificate)))
    assert restored.table == certificate.table
    assert restored.phi == certificate.phi
    assert verify_certificate(X, restored).match
    with pytest.raises(ParseError):
        read_certificate("{not json")
    with pytest.raises(ParseError):
        read_certificate('{"base": "GF(13)"}')


def test_parse_job(parser):
    job = parser.parse_job("curves.search", {"surface": ("sd.txt", SD_TEXT)}, {"degree": 1, "seed": None})
    assert job.parameters == {"degree": 1}
    assert set(job.inputs) == {"surface"}
    assert job.objects["surface"].nvars == 4
    with pytest.raises(ValidationError):
        parser.parse_job("curves.search", {"surface": ("sd.txt", SD_TEXT)}, {})
    with pytest.raises(ValidationError):
        parser.parse_job("curves.search", {}, {"degree": 1})
    with pytest.raises(ValidationError):
        parser.parse_job("curves.fit", {}, {})


def test_point_and_constraint_flags(parser):
    job = parser.parse_job("chord.third-point", {"surface": ("f.txt", FERMAT13_TEXT)},
                           {"point": "(1:12:0:0)", "point2": "(1:0:12:0)"})
    assert job.objects["point"] == ProjPoint.of(field_of_order(13), [1, 12, 0, 0])
    job = parser.parse_job("curves.interpolate", {},
                           {"field": "GF(3)", "degree": 1, "through": ["(1:0)=(1:0:0)", "(0:1)=(0:1:0)"]})
    (t, x), _ = job.objects["through"]
    assert t == ProjPoint.of(field_of_order(3), [1, 0]) and x.dim == 2
    with pytest.raises(ParseError):
        parser.parse_job("curves.interpolate", {}, {"field": "GF(3)", "degree": 1, "through": ["(1:0)"]})


def test_parse_inputs_reads_files(parser, tmp_path):
    path = tmp_path / "sd.txt"
    path.write_text(SD_TEXT, encoding="utf-8")
    job = parser.parse_inputs("variety.count", {"surface": str(path)}, {"m": 1})
    assert job.objects["sources"]["surface"] == (str(path), SD_TEXT)
    with pytest.raises(ParseError):
        parser.parse_inputs("variety.count", {"surface": str(tmp_path / "missing.txt")})
