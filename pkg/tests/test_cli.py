import csv
import io
import json
import math

import numpy as np
import pytest

from aligned_clocks import cli
from aligned_clocks.errors import GraphValidationFailed
from aligned_clocks.render import PALETTE, read_ppm


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestIterate:
    def test_fixed_point_rows(self, capsys):
        code, out, _ = run(capsys, "iterate", "--a", "0.1", "--x0", "3.14159265", "--y0", "3.14159265", "--n", "5")
        assert code == 0
        assert out.splitlines()[0] == "step,x,y"
        data = rows(out)
        assert len(data) == 6
        xy = np.array([[float(r["x"]), float(r["y"])] for r in data[1:]])
        # The start is 3.6e-9 off the sink; successive rows close in by 0.7.
        assert np.abs(np.diff(xy, axis=0)).max() < 1e-9
        assert np.abs(xy - math.pi).max() < 1e-8

    def test_exact_fixed_point(self, capsys):
        code, out, _ = run(capsys, "iterate", "--x0", repr(math.pi), "--y0", repr(math.pi), "--n", "5")
        assert len({line.split(",", 1)[1] for line in out.splitlines()[1:]}) == 1

    def test_converges_from_s2(self, capsys):
        code, out, _ = run(capsys, "iterate", "--a", "0.1", "--x0", "3.14159265", "--y0", "1.5707963", "--n", "400")
        last = rows(out)[-1]
        assert math.hypot(float(last["x"]) - math.pi, float(last["y"]) - math.pi) < 1e-6

    def test_rejects_strong_coupling(self, capsys):
        code, _, err = run(capsys, "iterate", "--a", "0.2", "--x0", "1", "--y0", "1")
        assert code == 2
        assert "1/6" in err

    def test_seventeen_digits_and_lf(self, capsys, tmp_path):
        out = tmp_path / "orbit.csv"
        assert cli.main(["iterate", "--n", "3", "-o", str(out)]) == 0
        raw = out.read_bytes()
        assert b"\r" not in raw
        x = raw.decode().splitlines()[2].split(",")[1]
        assert float(x) == float(format(float(x), ".17g"))
        assert len(x.replace(".", "").lstrip("0")) >= 15

    def test_degrees(self, capsys):
        code, out, _ = run(capsys, "iterate", "--degrees", "--x0", "180", "--y0", "90", "--n", "0")
        r = rows(out)[0]
        assert (float(r["x"]), float(r["y"])) == pytest.approx((math.pi, math.pi / 2))


class TestJsonMeta:
    def test_written_next_to_output(self, tmp_path):
        out = tmp_path / "orbit.csv"
        assert cli.main(["iterate", "--a", "0.05", "--n", "2", "-o", str(out), "--json-meta"]) == 0
        meta = json.loads((tmp_path / "orbit.csv.meta.json").read_text())
        assert meta["a"] == 0.05
        assert meta["command"] == "iterate"
        assert list(meta) == sorted(meta)

    def test_stderr_for_stdout(self, capsys):
        code, _, err = run(capsys, "fixed-points", "--json-meta")
        assert code == 0
        assert json.loads(err)["l_range"] == [0, 0]

    def test_physical_coupling_resolved(self, capsys):
        code, _, err = run(capsys, "iterate", "--alpha", "0.8", "--mu", "0.5", "--h", "1.0", "--n", "1", "--json-meta")
        assert code == 0
        assert json.loads(err)["a"] == pytest.approx(0.05)

    def test_incomplete_physical_coupling(self, capsys):
        assert run(capsys, "iterate", "--alpha", "0.8")[0] == 2


class TestConfig:
    def test_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"a": 0.05, "n": 7}))
        code, out, err = run(capsys, "iterate", "--config", str(cfg), "--n", "2", "--json-meta")
        meta = json.loads(err)
        assert meta["a"] == 0.05 and meta["n"] == 2
        assert len(rows(out)) == 3

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text("{not json")
        assert run(capsys, "iterate", "--config", str(cfg))[0] == 2

    def test_missing_config_is_io_error(self, tmp_path, capsys):
        assert run(capsys, "iterate", "--config", str(tmp_path / "nope.json"))[0] == 1

    def test_unwritable_output(self, tmp_path, capsys):
        assert run(capsys, "iterate", "-o", str(tmp_path / "no" / "such" / "dir.csv"))[0] == 1

    def test_wrong_format(self, capsys):
        assert run(capsys, "fixed-points", "--format", "csv")[0] == 2

    def test_degenerate_window(self, capsys):
        assert run(capsys, "nullclines", "--window", "0", "0", "0", "1")[0] == 2


class TestFixedPoints:
    def test_single_cell(self, capsys):
        code, out, _ = run(capsys, "fixed-points", "--a", "0.1")
        cat = json.loads(out)
        assert [e["family"] for e in cat] == ["P0", "P1", "P2", "P3"]
        assert [e["class"] for e in cat] == ["source", "saddle", "saddle", "sink"]
        assert cat[3]["eigenvalues"] == pytest.approx([0.7, 0.9], abs=1e-15)
        assert list(cat[0]) == ["family", "l", "k", "x", "y", "eigenvalues", "class"]

    def test_lattice(self, capsys):
        code, out, _ = run(capsys, "fixed-points", "--l-range", "-1", "1", "--k-range", "-1", "1")
        assert len(json.loads(out)) == 36


class TestNullclines:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "nullclines", "--resolution", "64")
        data = rows(out)
        assert {r["tag"] for r in data} == {"nullcline-vertical", "nullcline-horizontal"}

    def test_svg_and_json(self, capsys):
        code, out, _ = run(capsys, "nullclines", "--resolution", "64", "--format", "svg")
        assert out.startswith("<?xml") and out.count("<path") == 6
        code, out, _ = run(capsys, "nullclines", "--resolution", "64", "--format", "json")
        assert len(json.loads(out)) == 6


class TestSeparatrix:
    def test_csv_and_svg(self, tmp_path, capsys):
        csv_path, svg_path = tmp_path / "eta.csv", tmp_path / "eta.svg"
        assert cli.main(["separatrix", "-o", str(csv_path), "--svg", str(svg_path)]) == 0
        data = np.array([[float(r["x"]), float(r["y"])] for r in rows(csv_path.read_text())])
        assert np.all(np.diff(data[:, 0]) > 0)
        for anchor in [(0, 0), (math.pi, 0), (2 * math.pi, 0)]:
            assert np.min(np.hypot(*(data - anchor).T)) < 1e-6
        svg = svg_path.read_text()
        assert svg.count("<path") == 2
        assert svg.count("<circle") >= 3

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["separatrix", "-o", str(a)]) == 0
        assert cli.main(["separatrix", "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_numerical_failure(self, monkeypatch, capsys):
        def broken(*args, **kw):
            raise GraphValidationFailed("not a graph")

        monkeypatch.setattr(cli, "build_separatrix", broken)
        code, _, err = run(capsys, "separatrix")
        assert code == 3
        assert "not a graph" in err


class TestBasin:
    def test_ppm_and_csv(self, tmp_path):
        out = tmp_path / "basin.ppm"
        assert cli.main(["basin", "--resolution", "48", "-o", str(out)]) == 0
        img = read_ppm(out.read_bytes())
        assert img.shape == (48, 48, 3)
        colours = {tuple(c) for c in img.reshape(-1, 3)}
        assert colours <= set(PALETTE.values())
        data = rows((tmp_path / "basin.csv").read_text())
        assert len(data) == 48 * 48
        assert list(data[0]) == ["i", "j", "x", "y", "label", "iterations"]
        labels = [r["label"] for r in data]
        assert labels.count("0:0") / len(labels) > 0.5
        assert "undecided" not in labels

    def test_shifted_window_same_pixels(self, tmp_path):
        a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
        tp = 2 * math.pi
        assert cli.main(["basin", "--resolution", "40", "-o", str(a)]) == 0
        assert cli.main(["basin", "--resolution", "40", "-o", str(b),
                         "--window", str(tp), str(2 * tp), "0", str(tp)]) == 0
        assert np.array_equal(read_ppm(a.read_bytes()), read_ppm(b.read_bytes()))

    def test_undecided_black(self, tmp_path):
        out = tmp_path / "basin.ppm"
        assert cli.main(["basin", "--resolution", "16", "--n-max", "1", "-o", str(out)]) == 0
        img = read_ppm(out.read_bytes())
        assert (img == 0).all(axis=-1).any()
        assert "undecided" in (tmp_path / "basin.csv").read_text()


class TestSimulate:
    def test_deviation_column(self, capsys):
        code, out, _ = run(capsys, "simulate", "--a", "0.005", "--seed", "4", "--cycles", "50")
        dev = [float(r["deviation_from_map"]) for r in rows(out)]
        assert len(dev) == 51
        assert max(dev) <= 10 * 0.005 ** 2

    def test_deterministic_seed(self, capsys):
        _, out1, _ = run(capsys, "simulate", "--seed", "9", "--cycles", "20")
        _, out2, _ = run(capsys, "simulate", "--seed", "9", "--cycles", "20")
        assert out1 == out2

    def test_phase_opposition(self, capsys):
        code, out, _ = run(capsys, "simulate", "--x0", str(math.pi), "--y0", str(math.pi), "--cycles", "10")
        for r in rows(out):
            assert (float(r["x"]), float(r["y"])) == pytest.approx((math.pi, math.pi), abs=1e-9)

    def test_no_kick(self, capsys):
        code, out, _ = run(capsys, "simulate", "--kick-rule", "none", "--x0", "1", "--y0", "2", "--cycles", "10")
        for r in rows(out):
            assert (float(r["x"]), float(r["y"])) == pytest.approx((1.0, 2.0), abs=1e-12)

    def test_half_start(self, capsys):
        assert run(capsys, "simulate", "--x0", "1")[0] == 2


class TestCheckSymmetry:
    def test_report(self, capsys):
        code, out, _ = run(capsys, "check-symmetry", "--samples", "500", "--max-shift", "1")
        report = json.loads(out)
        assert code == 0
        assert all(r["ok"] for r in report)
        assert {"transform", "deviation", "ok"} == set(report[0])

    def test_failure_exit(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "check_equivariance", lambda *a, **k: 1.0)
        assert run(capsys, "check-symmetry", "--samples", "10")[0] == 3
