import json

import pytest
from typer.testing import CliRunner

from main import app

runner = CliRunner()

SD_TEXT = """GF(2)
vars 4
deg 3
x2*x3^2 + x2^2*x3 + x0^3 + x1^3 + x2^3 + x0^2*x1 + x1^2*x2 + x0*x2^2 + x0*x1*x2
"""


@pytest.fixture
def sd_file(tmp_path):
    path = tmp_path / "sd.txt"
    path.write_text(SD_TEXT, encoding="utf-8")
    return path


def invoke(tmp_path, *args):
    result = runner.invoke(app, ["--store", str(tmp_path / "store"), "--json", *args])
    lines = [line for line in result.output.splitlines() if line.startswith("{")]
    return result, json.loads(lines[-1]) if lines else None


def test_claim_passes(tmp_path):
    result, payload = invoke(tmp_path, "gallery", "verify", "SD_unique_point")
    assert result.exit_code == 0
    assert payload["payload"]["claims"][0]["outcome"] == "Pass"
    assert payload["payload"]["claims"][0]["anchor"] == "swinnerton-dyer/rational-points"


def test_count_then_replay(tmp_path, sd_file):
    result, payload = invoke(tmp_path, "variety", "count", str(sd_file))
    assert result.exit_code == 0
    assert payload["payload"]["count"] == 1
    replayed, again = invoke(tmp_path, "replay", payload["manifest"][:16])
    assert replayed.exit_code == 0
    assert again["payload"] == payload["payload"]


def test_empty_search_exits_1(tmp_path, sd_file):
    result, payload = invoke(tmp_path, "curves", "search", str(sd_file), "--degree", "1")
    assert result.exit_code == 1
    assert payload["outcome"] == "negative"


def test_out_directory_receives_files(tmp_path, sd_file):
    out = tmp_path / "out"
    result = runner.invoke(app, ["--store", str(tmp_path / "store"), "--out", str(out),
                                 "variety", "count", str(sd_file)])
    assert result.exit_code == 0
    assert (out / "census.txt").read_text(encoding="utf-8").splitlines()[1] == "[0,0,0,1]"


def test_bad_input_exits_2(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("GF(2)\nvars 3\ndeg 2\nx0^2 + x1^3\n", encoding="utf-8")
    result, payload = invoke(tmp_path, "variety", "count", str(path))
    assert result.exit_code == 2
    assert payload["error"]["code"] == "E_VALIDATION"


def test_interpolate_reads_points_over_an_extension(tmp_path):
    result, payload = invoke(tmp_path, "curves", "interpolate", "--field", "GF(3)", "--degree", "3",
                             "--ext", "2", "--through", "(1:0)=(1:0:0)", "--through", "(0:1)=(0:1:0)",
                             "--through", "(1:[0,1])=(1:[0,1]:1)")
    assert result.exit_code == 0
    assert payload["payload"]["curve"]["degree"] <= 3
