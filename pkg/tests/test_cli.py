"""Command-line interface: exit codes, file formats, determinism."""

import json

import numpy as np
import pytest

import moebiusgeo as mg
from moebiusgeo.cli import main


@pytest.fixture()
def sphere_file(tmp_path):
    sp = mg.sample_space("sphere", n=2, count=8, seed=3)
    path = tmp_path / "sphere.json"
    path.write_text(json.dumps(mg.space_to_json_dict(sp)))
    return str(path)


@pytest.fixture()
def l1_file(tmp_path):
    sp = mg.sample_space("l1", n=2, count=6, seed=3)
    path = tmp_path / "l1.json"
    path.write_text(json.dumps(mg.space_to_json_dict(sp)))
    return str(path)


@pytest.fixture()
def line_file(tmp_path):
    sp = mg.space_from_points(np.array([0.0, 1.0, 2.0])[:, None], add_omega=True)
    path = tmp_path / "line.json"
    path.write_text(json.dumps(mg.space_to_json_dict(sp)))
    return str(path)


class TestCheck:
    def test_ptolemy_space_exit_zero(self, sphere_file, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["check", sphere_file, "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["ptolemy"] is True
        assert report["line_embedding"]["embeddable"] is False

    def test_violation_exit_two_with_witness(self, l1_file, tmp_path):
        out = tmp_path / "report.json"
        assert main(["check", l1_file, "--output", str(out)]) == 2
        report = json.loads(out.read_text())
        assert report["ptolemy"] is False
        assert len(report["worst_quadruple"]) == 4

    def test_malformed_exit_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"truncated": ')
        assert main(["check", str(bad)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_line_embedding_reported(self, tmp_path):
        sp = mg.space_from_points(np.array([0.0, 1.0, 3.0])[:, None])
        src = tmp_path / "line3.json"
        src.write_text(json.dumps(mg.space_to_json_dict(sp)))
        out = tmp_path / "report.json"
        assert main(["check", str(src), "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["line_embedding"]["embeddable"] is True
        coords = report["line_embedding"]["coordinates"]
        assert len(coords) == 3


class TestInvert:
    def test_line_inversion_values(self, line_file, tmp_path):
        out = tmp_path / "inv.json"
        assert main(["invert", line_file, "--at", "p0", "--output", str(out)]) == 0
        sp = mg.space_from_json_dict(json.loads(out.read_text()))
        assert sp.omega_label() == "p0"
        i1, i2 = sp.index("p1"), sp.index("p2")
        assert np.isclose(sp.dist[i1, i2], 0.5)

    def test_roundtrip_restores(self, line_file, tmp_path):
        mid = tmp_path / "mid.json"
        back = tmp_path / "back.json"
        assert main(["invert", line_file, "--at", "p0", "--output", str(mid)]) == 0
        assert main(["invert", str(mid), "--at", "omega", "--output", str(back)]) == 0
        orig = mg.space_from_json_dict(json.loads(open(line_file).read()))
        restored = mg.space_from_json_dict(json.loads(back.read_text()))
        finite = np.isfinite(orig.dist)
        assert np.abs(restored.dist[finite] - orig.dist[finite]).max() <= 1e-12

    def test_bound_at_max_entry(self, line_file, tmp_path):
        out = tmp_path / "bounded.json"
        assert main(["invert", line_file, "--bound-at", "p0", "--output", str(out)]) == 0
        sp = mg.space_from_json_dict(json.loads(out.read_text()))
        assert sp.omega is None
        assert sp.dist.max() <= 1.0 + 1e-12

    def test_unknown_label(self, line_file, capsys):
        assert main(["invert", line_file, "--at", "nope"]) == 1

    def test_requires_a_point(self, line_file):
        assert main(["invert", line_file]) == 1


class TestSegmentCircleCommands:
    def test_segment_synth_and_classify(self, tmp_path):
        t = np.linspace(0, 1, 9)
        curve = mg.QuadrantCurve(1.0, np.column_stack([1 - t, t]))
        cf = tmp_path / "curve.json"
        from moebiusgeo.segments import curve_to_json_dict
        cf.write_text(json.dumps(curve_to_json_dict(curve)))
        mf = tmp_path / "matrix.json"
        assert main(["segment", "synth", str(cf), "--output", str(mf)]) == 0
        sp = mg.space_from_json_dict(json.loads(mf.read_text()))
        assert np.isclose(sp.dist[0, -1], 1.0)

        out = tmp_path / "curve2.json"
        csv = tmp_path / "curve.csv"
        assert main(["segment", "classify", str(mf), "--output", str(out),
                     "--csv", str(csv)]) == 0
        data = json.loads(out.read_text())
        assert np.abs(np.asarray(data["samples"]) - curve.samples).max() <= 1e-12
        header = csv.read_text().splitlines()[0]
        assert header == "t,a,b,alpha"

    def test_circle_synth_and_classify(self, tmp_path):
        curve = mg.chordal_circle_curve(2.0, 12)
        from moebiusgeo.circles import curve_to_json_dict
        cf = tmp_path / "circle.json"
        cf.write_text(json.dumps(curve_to_json_dict(curve)))
        mf = tmp_path / "matrix.json"
        assert main(["circle", "synth", str(cf), "--output", str(mf)]) == 0
        out = tmp_path / "curve2.json"
        csv = tmp_path / "circle.csv"
        assert main(["circle", "classify", str(mf), "--output", str(out),
                     "--csv", str(csv), "--minus-one", "t6"]) == 0
        data = json.loads(out.read_text())
        assert data["kind"] == "circle"
        assert np.abs(np.asarray(data["samples"]) - curve.samples).max() <= 1e-12
        assert csv.read_text().splitlines()[0] == "t,a,b"

    def test_segment_synth_rejects_circle_curve(self, tmp_path):
        from moebiusgeo.circles import curve_to_json_dict
        cf = tmp_path / "circle.json"
        cf.write_text(json.dumps(curve_to_json_dict(mg.chordal_circle_curve(1.0, 8))))
        assert main(["segment", "synth", str(cf)]) == 1

    def test_classify_rejects_non_segment(self, tmp_path, capsys):
        # equality failure carries a witness, so it is a property failure
        D = np.ones((4, 4)) - np.eye(4)
        sp = mg.ExtendedMetricSpace(("a", "b", "c", "d"), D)
        mf = tmp_path / "tetra.json"
        mf.write_text(json.dumps(mg.space_to_json_dict(sp)))
        assert main(["segment", "classify", str(mf)]) == 2
        assert "property failed" in capsys.readouterr().err


class TestMap:
    def test_segment_map_straight_to_halfcircle(self, tmp_path):
        t = np.linspace(0, 1, 9)
        src = mg.segment_from_curve(mg.QuadrantCurve(1.0, np.column_stack([1 - t, t])))
        td = np.linspace(0, 1, 257)
        dst = mg.segment_from_curve(
            mg.QuadrantCurve(1.0, np.column_stack([np.cos(np.pi * td / 2),
                                                   np.sin(np.pi * td / 2)])))
        fs, fd = tmp_path / "src.json", tmp_path / "dst.json"
        fs.write_text(json.dumps(mg.space_to_json_dict(src)))
        fd.write_text(json.dumps(mg.space_to_json_dict(dst)))
        out = tmp_path / "map.json"
        assert main(["map", "segment", "--src", str(fs), "--dst", str(fd),
                     "--src-anchors", "t0,t4,t8", "--dst-anchors", "t0,t128,t256",
                     "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["max_crt_deviation"] <= 1e-4
        assert len(data["pairs"]) == 9

    def test_circle_map_between_radii(self, tmp_path):
        s1 = mg.circle_from_curve(mg.chordal_circle_curve(2.0, 12))
        s5 = mg.circle_from_curve(mg.chordal_circle_curve(10.0, 12))
        f1, f5 = tmp_path / "c1.json", tmp_path / "c5.json"
        f1.write_text(json.dumps(mg.space_to_json_dict(s1)))
        f5.write_text(json.dumps(mg.space_to_json_dict(s5)))
        out = tmp_path / "map.json"
        assert main(["map", "circle", "--src", str(f1), "--dst", str(f5),
                     "--src-anchors", "t0,t4,t8", "--dst-anchors", "t0,t4,t8",
                     "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["max_crt_deviation"] <= 1e-9
        positions = [p["position"] for p in data["pairs"]]
        assert np.abs(np.asarray(positions) - np.linspace(0, 2, 13)[:-1]).max() <= 1e-9


class TestSphereExotic:
    def test_sphere_report_and_determinism(self, tmp_path, capsys):
        args = ["sphere", "--kind", "hemisphere", "--n", "2", "--count", "12",
                "--seed", "5"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        second = capsys.readouterr().out
        assert first == second
        report = json.loads(first)
        assert report["ptolemy"] is True

    def test_sphere_matrix_out(self, tmp_path):
        mf = tmp_path / "matrix.json"
        assert main(["sphere", "--kind", "sphere", "--count", "6", "--seed", "1",
                     "--matrix-out", str(mf), "--output", str(tmp_path / "r.json")]) == 0
        sp = mg.space_from_json_dict(json.loads(mf.read_text()))
        assert sp.n == 6

    def test_l1_sphere_command_exit_two(self, tmp_path):
        assert main(["sphere", "--kind", "l1", "--count", "6", "--seed", "1",
                     "--output", str(tmp_path / "r.json")]) == 2

    def test_exotic_values(self, tmp_path):
        out = tmp_path / "exotic.json"
        assert main(["exotic", "--l", "1.0", "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert abs(data["homothety"]["NS_ratio"] - 0.6480542736638855) <= 1e-6
        assert abs(data["homothety"]["equator_ratio"] - 0.36787944117144233) <= 1e-9
        assert data["homothety"]["homothetic"] is False

    def test_exotic_rejects_zero_separation(self, capsys):
        assert main(["exotic", "--l", "0.0"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_out_of_range_sphere_args(self):
        assert main(["sphere", "--kind", "sphere", "--n", "9"]) == 1
