import csv
import io
import json

import numpy as np
import pytest

from wmhash.cli import main
from wmhash.redgreen import load_layout
from wmhash.sketchio import read_sketches
from wmhash.vectors import Dataset, write_dataset
from wmhash.synthetic import pair_with_jaccard

ROWS = [
    "a 0:3 2:1 5:4",
    "b 0:2 2:2 4:1",
    "c 1:5 3:2",
    "d 0:3 2:1 5:4",
]


@pytest.fixture
def data(tmp_path):
    p = tmp_path / "data.txt"
    p.write_text("\n".join(ROWS) + "\n")
    return p


@pytest.fixture
def real_data(tmp_path):
    rng = np.random.default_rng(3)
    x, y = pair_with_jaccard(0.5, rng, shared=20)
    p = tmp_path / "real.txt"
    write_dataset(Dataset.from_vectors([x, y]), p)
    return p


def run(*argv):
    return main([str(a) for a in argv])


def test_layout_integer_data(data, tmp_path, capsys):
    out = tmp_path / "l.wmhl"
    assert run("layout", data, "-o", out, "--alpha", "1") == 0
    L = load_layout(out)
    assert L.M == 3 + 5 + 2 + 2 + 1 + 4
    assert L.dim == 6
    text = capsys.readouterr().out
    assert "M=17" in text and "D=6" in text and "alpha=1" in text and "mean_s=" in text


def test_layout_auto_alpha(data, tmp_path, capsys):
    assert run("layout", data, "-o", tmp_path / "l", "--alpha", "auto") == 0
    assert "alpha=1 " in capsys.readouterr().out


def test_unreadable_path_exit_2(tmp_path, capsys):
    assert run("layout", tmp_path / "missing.txt", "-o", tmp_path / "l") == 2
    assert "error" in capsys.readouterr().err


def test_bad_flags_exit_2(data, tmp_path):
    with pytest.raises(SystemExit) as e:
        run("sketch", data, "-o", tmp_path / "s", "--alpha", "-1")
    assert e.value.code == 2
    assert run("sketch", data, "-o", tmp_path / "s", "--k", "0") == 2


def test_all_zero_dataset_exit_1(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("a 0:0\n")
    assert run("layout", p, "-o", tmp_path / "l") == 1


@pytest.mark.parametrize("scheme", ["redgreen", "ioffe", "reduction"])
def test_sketch_byte_identical(data, tmp_path, scheme):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("sketch", data, "-o", out, "--scheme", scheme, "--seed", "42") == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes()[:4] == b"WMHS"


@pytest.mark.parametrize("scheme", ["redgreen", "ioffe", "reduction"])
def test_sketch_shape_and_order(data, tmp_path, scheme):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out, "--scheme", scheme) == 0
    sk = read_sketches(out)
    assert len(sk) == 4
    assert all(s.k == 500 for s in sk)
    if scheme == "ioffe":
        assert sk[0].values.shape == (500, 2)
    assert np.array_equal(sk[0].values, sk[3].values)


def test_sketch_ioffe_pairs_use_real_coordinates(data, tmp_path):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out, "--scheme", "ioffe", "--k", "50") == 0
    sk = read_sketches(out)
    assert set(sk[2].values[:, 0].tolist()) <= {1, 3}


def test_sketch_threads_match_serial(real_data, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("sketch", real_data, "-o", a, "--k", "64") == 0
    assert run("sketch", real_data, "-o", b, "--k", "64", "--threads", "3") == 0
    assert a.read_bytes() == b.read_bytes()


def test_sketch_with_layout_and_low_mem(data, tmp_path):
    lay, a, b = tmp_path / "l", tmp_path / "a", tmp_path / "b"
    assert run("layout", data, "-o", lay) == 0
    assert run("sketch", data, "-o", a, "--layout", lay) == 0
    assert run("sketch", data, "-o", b, "--layout", lay, "--low-mem") == 0
    assert a.read_bytes() == b.read_bytes()
    assert read_sketches(a)[0].layout_id == load_layout(lay).layout_id


def test_sketch_layout_mismatch_names_line_and_coordinate(data, tmp_path, capsys):
    lay = tmp_path / "l"
    assert run("layout", data, "-o", lay) == 0
    other = tmp_path / "other.txt"
    other.write_text("a 0:1\nb 2:9\n")
    assert run("sketch", other, "-o", tmp_path / "s", "--layout", lay, "--dim", "6") == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "2" in err


def test_sketch_json_format(data, tmp_path):
    out = tmp_path / "s.json"
    assert run("sketch", data, "-o", out, "--format", "json", "--k", "8") == 0
    doc = json.loads(out.read_text())
    assert doc["format"] == "WMHS-json"
    assert [r["label"] for r in doc["sketches"]] == ["a", "b", "c", "d"]
    sk = read_sketches(out)
    assert len(sk[0].values) == 8


def test_estimate_csv_and_exact(data, tmp_path, capsys):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out) == 0
    capsys.readouterr()
    assert run("estimate", out, "--pairs", "0,3", "0,2", "1,1", "--exact", data) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 3
    assert float(rows[0]["j_hat"]) == 1.0
    assert float(rows[1]["j_hat"]) == 0.0
    assert float(rows[1]["j_exact"]) == 0.0
    assert float(rows[2]["j_hat"]) == 1.0


def test_estimate_json_and_pairs_file(data, tmp_path, capsys):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out) == 0
    pf = tmp_path / "pairs"
    pf.write_text("# pairs\n0 1\n2,3\n")
    capsys.readouterr()
    assert run("estimate", out, "--pairs-file", pf, "--json") == 0
    rows = json.loads(capsys.readouterr().out)
    assert [(r["i"], r["j"]) for r in rows] == [(0, 1), (2, 3)]


def test_estimate_errors(data, tmp_path):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out) == 0
    assert run("estimate", out, "--pairs", "0,9") == 2
    assert run("estimate", out) == 2
    junk = tmp_path / "junk"
    junk.write_text("nope")
    assert run("estimate", junk, "--pairs", "0,1") == 2


def test_bench_table_and_json(real_data, tmp_path, capsys):
    js = tmp_path / "b.json"
    assert run("bench", real_data, "--k", "50", "--reps", "1", "--json", js) == 0
    assert "ms/vector" in capsys.readouterr().out
    doc = json.loads(js.read_text())
    assert [r["scheme"] for r in doc] == ["redgreen", "ioffe", "reduction"]
    assert doc[0]["bits_needed"] >= 1


def test_bench_reps_zero_exit_2(data):
    assert run("bench", data, "--reps", "0") == 2


def test_bench_curve_csv(real_data, tmp_path):
    out = tmp_path / "curve.csv"
    assert run("bench", real_data, "--curve", "0,1", "--k-max", "10", "--reps", "5", "--curve-out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["k", "mae_redgreen", "mae_ioffe", "mae_reduction"]
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 11))


def test_stats(data, tmp_path, capsys):
    out = tmp_path / "s"
    assert run("sketch", data, "-o", out) == 0
    capsys.readouterr()
    assert run("stats", out, "--json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scheme"] == "redgreen" and doc["sketches"] == 4 and doc["k"] == 500
    assert doc["bits_needed"] == doc["max"].bit_length()
    assert 1 <= doc["mean"] <= doc["max"]


def test_module_entry_point(data, tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "wmhash", "stats", str(tmp_path / "none")],
                         capture_output=True, text=True)
    assert res.returncode == 2
