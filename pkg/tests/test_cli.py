import csv
import io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from curv4 import __version__, cli, pinch


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out), err


def write_manifest(tmp_path, doc, name="m.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


CONFORMAL_FLAT = {
    "name": "bump",
    "coordinates": ["x", "y", "z", "w"],
    "domain": [[-1, 1]] * 4,
    "metric": {f"g{i}{i}": "exp(2*c*x*y)" for i in range(4)},
    "params": {"c": 0.3},
}


# -- analyze ----------------------------------------------------------------------------


def test_analyze_round_sphere(capsys):
    doc, _ = run_json(capsys, "analyze", "s4", "--point", "0,0,0,0")
    res = doc["result"]
    assert res["scalar_curvature"] == pytest.approx(12)
    assert res["k1perp"]["closed"] == pytest.approx(1)
    assert res["k1perp"]["bruteforce"] == pytest.approx(1, abs=1e-6)
    assert doc["schema"] == 1 and doc["version"] == __version__ and doc["tool"] == "curv4"
    assert "tolerances" in doc and doc["provenance"]["catalog"] == "s4"


def test_analyze_cp2(capsys):
    doc, _ = run_json(capsys, "analyze", "cp2", "--point", "0.1,0.2,0,0")
    w = doc["result"]["weyl"]
    assert np.allclose(w["wplus"], [-2, -2, 4], atol=1e-5)
    assert w["norm_plus_sq"] == pytest.approx(24) and w["tensor_norm_plus_sq"] == pytest.approx(96)
    assert "convention" in w


def test_analyze_csv(capsys):
    code, out, _ = run(capsys, "analyze", "s4", "--point", "0.5,0,0,0", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["s"]) == pytest.approx(12)


@pytest.mark.parametrize(
    "argv, message",
    [
        (["analyze", "missing-name", "--point", "0,0,0,0"], "unknown catalog entry"),
        (["analyze", "s4", "--point", "0,0,0"], "four"),
        (["analyze", "s4", "--point", "a,b,c,d"], "four"),
        (["analyze", "s4"], "--point"),
        (["analyze", "s4", "--point", "9,0,0,0"], "outside"),
        (["analyze", "s4", "--point", "0,0,0,0", "--mass", "2"], "no parameter"),
        (["analyze", "s4", "--point", "0,0,0,0", "--param", "r"], "name=value"),
        (["scan", "t4", "--grid", "1"], "[2, 64]"),
        (["scan", "t4", "--grid", "65"], "[2, 64]"),
        (["scan", "t4", "--slice", "1,1", "--format", "svg"], "distinct"),
        (["verify", "bogus"], "unknown verification suite"),
        (["pinch", "s4", "--lambda1", "-1"], "positive"),
        (["pinch", "s4", "--rho", "abc"], "number"),
    ],
)
def test_input_errors_exit_2(capsys, argv, message):
    code, out, err = run(capsys, *argv)
    assert code == cli.EXIT_INPUT
    assert message in err and out == ""


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["analyze"])
    assert info.value.code == 2


# -- scan -----------------------------------------------------------------------------------


@pytest.mark.slow
def test_scan_product_with_circle(capsys):
    doc, _ = run_json(capsys, "scan", "s1xs3", "--grid", "8")
    assert len(doc["rows"]) == 8**4
    for row in doc["rows"]:
        assert row["k1perp"] == pytest.approx(0.5, abs=1e-4)
        assert row["sectional_min"] == pytest.approx(0, abs=1e-6)


def test_scan_unequal_product(capsys):
    doc, _ = run_json(capsys, "scan", "s2xs2", "--a", "1", "--b", "2", "--grid", "8", "--no-sectional")
    assert all(row["einstein_residual"] > 0.1 for row in doc["rows"])
    assert doc["params"] == {"a": 1.0, "b": 2.0}


def test_scan_flat_torus(capsys):
    doc, _ = run_json(capsys, "scan", "t4", "--grid", "4")
    assert all(row["s"] == 0 for row in doc["rows"])


def test_scan_row_order_and_extrema(capsys):
    doc, _ = run_json(capsys, "scan", "s4-perturbed", "--grid", "3", "--no-sectional")
    pts = [tuple(r["point"].values()) for r in doc["rows"]]
    assert pts == sorted(pts)
    for col in doc["columns"]:
        vals = [r[col] for r in doc["rows"] if r[col] is not None]
        if vals:
            assert doc["extrema"][col] == {"min": min(vals), "max": max(vals)}
        else:
            assert doc["extrema"][col] == {"min": None, "max": None}


def test_scan_csv_dialect(capsys):
    code, out, _ = run(capsys, "scan", "cp2", "--grid", "2", "--format", "csv", "--no-sectional")
    assert code == 0
    lines = out.split("\n")
    assert lines[0].split(",")[:6] == ["index", "x0", "x1", "x2", "x3", "status"]
    assert "\r" not in out and ";" not in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 16
    assert all(float(r["k1perp"]) == pytest.approx(1, abs=1e-6) for r in rows)
    assert all(r["sectional_min"] == "" for r in rows)


def test_scan_svg(capsys, tmp_path):
    out = tmp_path / "k.svg"
    code, _, _ = run(capsys, "scan", "s4-perturbed", "--grid", "4", "--format", "svg", "--slice", "0,2", "--out", str(out))
    assert code == 0
    root = ET.fromstring(out.read_text())
    assert root.tag.endswith("svg")
    text = " ".join(t.text or "" for t in root.iter() if t.tag.endswith("text"))
    assert "x0" in text and "x2" in text and "K1perp" in text
    cells = [r for r in root.iter() if r.tag.endswith("rect") and r.find("{http://www.w3.org/2000/svg}title") is not None]
    assert len(cells) == 16
    assert "http" not in out.read_text().replace("http://www.w3.org/2000/svg", "")


def test_scan_records_failing_points(capsys, tmp_path):
    doc = dict(CONFORMAL_FLAT, name="degenerate", metric={"g00": "1", "g11": "1", "g22": "1", "g33": "x + 0.85"})
    path = write_manifest(tmp_path, doc)
    # cell centres of the first column sit at x = -0.875
    doc, _ = run_json(capsys, "scan", path, "--grid", "8", "--no-sectional")
    statuses = [r["status"] for r in doc["rows"]]
    assert "non-spd" in statuses and "ok" in statuses
    assert doc["failed_rows"] == statuses.count("non-spd")


# -- verify -----------------------------------------------------------------------------------


def test_verify_algebraic(capsys):
    doc, _ = run_json(capsys, "verify", "algebraic")
    assert doc["passed"] and doc["violations"] == 0
    assert doc["checks"]["det_bound"]["samples"] == 10**6


def test_verify_field_cp2(capsys):
    doc, err = run_json(capsys, "verify", "field", "--target", "cp2")
    checks = doc["checks"]
    assert doc["passed"]
    assert checks["weitzenbock"]["max_residual"] <= 1e-3
    assert checks["refined_kato"]["worst_margin"] >= -1e-6


def test_verify_field_non_harmonic(capsys):
    doc, err = run_json(capsys, "verify", "field", "s4-perturbed")
    assert "refined_kato" not in doc["checks"] and "plain_kato" in doc["checks"]
    assert "refined Kato skipped" in err
    assert doc["checks"]["harmonic_weyl"]["measured"] is False


def test_verify_violation_exit_code(capsys, monkeypatch):
    real = pinch.algebraic_suite

    def broken(*a, **k):
        s = real(1000)
        return pinch.AlgebraicSuite(**{**s.__dict__, "det_violations": 3})

    monkeypatch.setattr(pinch, "algebraic_suite", broken)
    code, out, _ = run(capsys, "verify", "algebraic")
    assert code == cli.EXIT_VIOLATION
    assert json.loads(out)["passed"] is False


# -- pinch ------------------------------------------------------------------------------------


def test_pinch_unit_ricci_sphere(capsys):
    doc, _ = run_json(capsys, "pinch", "s4", "--radius", "1.7320508", "--lambda1", "auto")
    assert doc["thresholds"]["new_threshold"] == pytest.approx(1 / 12, abs=1e-7)
    assert doc["manifold"]["inf_k1perp"] == pytest.approx(1 / 3, abs=1e-7)
    assert doc["verdicts"]["theorem"] == "hypotheses satisfied"
    assert doc["lambda1"]["source"] == "catalog-exact"
    assert doc["thresholds"]["yang_constant"] == pytest.approx(0.102843, abs=5e-7)
    assert doc["thresholds"]["costa_constant"] == pytest.approx(0.09763, abs=5e-6)


def test_pinch_flat_torus(capsys):
    code, out, _ = run(capsys, "pinch", "t4")
    assert code == 0
    assert json.loads(out)["verdicts"]["theorem"] == "hypotheses violated"


def test_pinch_cp2(capsys):
    doc, _ = run_json(capsys, "pinch", "cp2", "--lambda1", "auto")
    assert doc["lambda1"]["source"] == "catalog-bracket"
    assert doc["margins"]["k1perp_minus_new_threshold"] > 0
    assert doc["verdicts"]["theorem"] == "hypotheses satisfied"


def test_pinch_user_values(capsys):
    doc, _ = run_json(capsys, "pinch", "s4", "--lambda1", "2", "--rho", "1")
    assert doc["lambda1"] == {"value": 2.0, "source": "user", "bracket": None}
    assert doc["rho"] == {"value": 1.0, "source": "user"}
    assert doc["thresholds"]["new_threshold"] == pytest.approx(144 / (24 * 18))


# -- manifests --------------------------------------------------------------------------------


def test_manifest_round_trip(capsys, tmp_path):
    path = write_manifest(tmp_path, CONFORMAL_FLAT)
    doc, _ = run_json(capsys, "analyze", path, "--point", "0.2,0.3,0,0", "--param", "c=0.5")
    assert doc["params"] == {"c": 0.5}
    assert doc["coordinates"] == ["x", "y", "z", "w"]
    # conformally flat: Weyl vanishes
    assert np.allclose(doc["result"]["weyl"]["wplus"], 0, atol=1e-9)
    assert doc["provenance"]["manifest"] == path


def test_manifest_sphere_matches_catalog(capsys, tmp_path):
    q = "4*r^4/(r^2 + x0^2 + x1^2 + x2^2 + x3^2)^2"
    m = {
        "name": "sphere",
        "coordinates": ["x0", "x1", "x2", "x3"],
        "domain": [[-4, 4]] * 4,
        "metric": {f"g{i}{i}": q for i in range(4)},
        "params": {"r": 2.0},
        "known": {"scalar": 3.0, "einstein": True},
    }
    doc, _ = run_json(capsys, "analyze", write_manifest(tmp_path, m), "--point", "0.3,0.1,0,1")
    assert doc["result"]["scalar_curvature"] == pytest.approx(3)


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"domain": None}, "domain"),
        ({"metric": {"g44": "1"}}, "metric"),
        ({"extra": 1}, "extra"),
        ({"coordinates": ["x", "x", "z", "w"]}, "coordinates"),
        ({"metric": {"g00": "1 +", "g11": "1", "g22": "1", "g33": "1"}}, "offset"),
        ({"metric": {"g00": "q", "g11": "1", "g22": "1", "g33": "1"}}, "unknown identifier"),
        ({"metric": {"g00": "-1", "g11": "1", "g22": "1", "g33": "1"}}, "positive definite"),
        ({"domain": [[1, -1]] * 4}, "domain"),
    ],
)
def test_bad_manifests_exit_2(capsys, tmp_path, patch, message):
    doc = {**CONFORMAL_FLAT, **patch}
    doc = {k: v for k, v in doc.items() if v is not None}
    code, _, err = run(capsys, "analyze", write_manifest(tmp_path, doc), "--point", "0,0,0,0")
    assert code == cli.EXIT_INPUT
    assert message in err


def test_unreadable_manifest(capsys, tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "analyze", str(bad), "--point", "0,0,0,0")
    assert code == cli.EXIT_INPUT and "not valid JSON" in err
    code, _, err = run(capsys, "analyze", str(tmp_path / "absent.json"), "--point", "0,0,0,0")
    assert code == cli.EXIT_INPUT and "cannot read" in err


def test_numeric_failure_exit_3(capsys, tmp_path):
    # SPD on the load-time spot checks but degenerate at the requested point
    doc = dict(CONFORMAL_FLAT, metric={"g00": "1", "g11": "1", "g22": "1", "g33": "x + 0.85"})
    code, _, err = run(capsys, "analyze", write_manifest(tmp_path, doc), "--point=-0.95,0,0,0")
    assert code == cli.EXIT_NUMERIC and "positive definite" in err


# -- determinism ------------------------------------------------------------------------------


def test_reports_are_byte_identical(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("CURV4_THREADS", threads)
        path = tmp_path / f"scan-{threads}.json"
        assert cli.main(["scan", "cp2", "--grid", "3", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_json_has_no_nan(capsys):
    code, out, _ = run(capsys, "scan", "t4", "--grid", "2", "--no-sectional")
    assert "NaN" not in out and "Infinity" not in out
    doc = json.loads(out)
    assert doc["rows"][0]["sectional_min"] is None
    assert all(math.isfinite(r["s"]) for r in doc["rows"])
