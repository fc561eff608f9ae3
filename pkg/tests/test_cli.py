import io
import math
import subprocess
import sys

import pytest

from ribbonzeta.cli import read_sample_column, run

THETA = """\
halfedges 6
twin: 0 3
twin: 1 4
twin: 2 5
vertex: 0 1 2
vertex: 3 4 5
length: 0 1/3
length: 1 1/3
length: 2 1/3
"""


@pytest.fixture
def theta_file(tmp_path):
    p = tmp_path / "theta.txt"
    p.write_text(THETA)
    return str(p)


def _run(argv):
    buf = io.StringIO()
    code = run(argv, buf)
    return code, buf.getvalue()


def _rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [ln.split(",") for ln in lines]


def test_header_comments(theta_file):
    code, text = _run(["validate", theta_file])
    assert code == 0
    head = text.splitlines()[:3]
    assert head[0].startswith("# ribbonzeta ")
    assert head[1].startswith("# config: {") and head[2] == "# seed: 0"
    rows = _rows(text)
    assert rows[0] == ["face", "genus", "n_faces", "half_edges", "length"]
    assert rows[1][1:3] == ["1", "1"] and float(rows[1][4]) == pytest.approx(2)


@pytest.mark.parametrize("method", ["spectral", "polynomial"])
def test_delta(theta_file, method):
    code, text = _run(["delta", theta_file, "--method", method])
    assert code == 0
    assert float(_rows(text)[1][0]) == pytest.approx(3 * math.log(2), abs=1e-9)


def test_verify_passes(theta_file):
    code, text = _run(["verify", theta_file])
    assert code == 0
    assert [r[0] for r in _rows(text)[1:]] == ["spectral", "polynomial", "oracle"]


def test_geodesics(theta_file):
    code, text = _run(["geodesics", theta_file, "--max-length", "0.7"])
    assert code == 0 and len(_rows(text)) == 4
    code, text = _run(["geodesics", theta_file, "--max-length", "0.7", "--oriented"])
    assert len(_rows(text)) == 7


def test_cells():
    code, text = _run(["cells", "0", "4", "--lengths", "1,1.3,1.7,2"])
    assert code == 0 and len(_rows(text)) > 6


def test_sample_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert _run(["sample", "1", "1", "1", "200", "--seed", "5", "--mode", "paper-11", "-o", str(path)])[0] == 0
    # the config header records the output path; the data must match exactly
    assert _rows(a.read_text()) == _rows(b.read_text())
    deltas = read_sample_column(a)
    assert len(deltas) == 200 and min(deltas) >= 3 * math.log(2) - 1e-9
    code, text = _run(["wasserstein", str(a), str(b)])
    assert code == 0 and float(_rows(text)[1][0]) == 0.0


def test_dist_and_grid():
    code, text = _run(["dist", "1", "1", "1", "300", "--mode", "paper-11", "--bins", "10"])
    assert code == 0
    masses = [float(r[2]) for r in _rows(text)[1:]]
    assert len(masses) == 10 and sum(masses) == pytest.approx(1)
    code, text = _run(["grid", "--resolution", "8"])
    assert code == 0 and len(_rows(text)) == 1 + 21


@pytest.mark.parametrize(
    "argv",
    [
        ["validate", "/nonexistent/file"],
        ["sample", "1", "1", "x,y", "10"],
        ["grid", "--resolution", "4"],
        ["cells", "0", "2"],
        ["dist", "1", "1", "1", "10", "--bins", "1"],
    ],
)
def test_errors_exit_one(argv, capsys):
    code, _ = _run(argv)
    assert code == 1
    assert capsys.readouterr().err.startswith("error: ")


def test_error_code_names_the_failure(capsys):
    _run(["validate", "/nonexistent/file"])
    assert "GraphFormatError" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["delta"], ["sample", "1", "1", "1", "10", "--seed", "-1"], ["bogus"]])
def test_usage_errors_exit_two(argv):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2


def test_console_script(theta_file):
    res = subprocess.run([sys.executable, "-m", "ribbonzeta.cli", "delta", theta_file],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "delta,method,residual" in res.stdout
