import json
import os

import numpy as np
import pytest

from hesscone.cli import main, format_json

FIX = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def run(verb, fixture=None, out=None, extra=()):
    argv = [verb]
    if fixture:
        argv += ["--input", os.path.join(FIX, fixture)]
    if out:
        argv += ["--out", str(out)]
    argv += list(extra)
    return main(argv)


def read_report(out, name):
    with open(os.path.join(str(out), name)) as fh:
        return json.load(fh)


def test_freedim_g2r4(tmp_path):
    assert run("cone-freedim", "freedim-g2r4.json", tmp_path) == 0
    rep = read_report(tmp_path, "cone-freedim.json")
    assert rep["lower_ok"] and rep["upper_ok"]
    assert rep["claimed"] == 1
    assert rep["refutations"] >= 200
    assert rep["schema_version"] == 1


def test_solve_dirichlet_harmonic(tmp_path):
    assert run("solve-dirichlet", "dirichlet-harmonic.json", tmp_path) == 0
    rep = read_report(tmp_path, "solve-report.json")
    assert rep["converged"] and rep["residual"] < 1e-6
    from hesscone.fields import GridField
    u = GridField.read_csv(os.path.join(str(tmp_path), "solution.csv"))
    mesh = np.meshgrid(*u.axes(), indexing="ij")
    assert np.abs(u.values - (mesh[0] ** 2 - mesh[1] ** 2)).max() < 1e-6


def test_solve_ma2d(tmp_path):
    assert run("solve-ma2d", "ma2d-c4.json", tmp_path) == 0
    rep = read_report(tmp_path, "solve-report.json")
    assert rep["converged"]


def test_domain_check_annulus_fails_with_witness(tmp_path):
    assert run("domain-check", "domain-annulus-lines.json", tmp_path) == 2
    rep = read_report(tmp_path, "domain-check.json")
    assert rep["strict"] is False
    assert rep["worst"]["witness"] is not None
    assert rep["worst"]["min_pairing"] < 0


def test_domain_check_ball_passes(tmp_path):
    assert run("domain-check", "domain-ball-lines.json", tmp_path) == 0
    rep = read_report(tmp_path, "domain-check.json")
    assert rep["strict"] is True
    assert rep["defining_function"]["strict_margin"] > 0
    assert rep["exhaustion"]["passes"] is True


def test_garding_sigma2(tmp_path):
    assert run("garding-test", "garding-sigma2.json", tmp_path) == 0
    rep = read_report(tmp_path, "garding-test.json")
    assert rep["hyperbolicity"]["hyperbolic"]
    assert rep["ellipticity"]["elliptic"]
    assert rep["interior_linearization"]["elliptic_at_interior"]


def test_cone_check_memberships(tmp_path):
    assert run("cone-check", "cone-check-lines2.json", tmp_path) == 0
    rep = read_report(tmp_path, "cone-check.json")
    classes = [m["class"] for m in rep["memberships"]]
    assert classes == ["Interior", "Outside", "Boundary"]


def test_field_classify_saddle(tmp_path):
    assert run("field-classify", "field-saddle-trace.json", tmp_path) == 0
    rep = read_report(tmp_path, "field-classify.json")
    assert rep["summary"] == "PartiallyPluriharmonic"


def test_subaffine_verb(tmp_path):
    assert run("subaffine-check", "subaffine-saddle.json", tmp_path) == 0


def test_hull_and_tube_verbs(tmp_path):
    assert run("hull-estimate", "hull-segment.json", tmp_path) == 0
    assert os.path.exists(os.path.join(str(tmp_path), "hull-mask.csv"))
    assert run("tube-check", "tube-point.json", tmp_path) == 0


def test_missing_input_is_exit_3(tmp_path):
    assert run("cone-check", out=tmp_path) == 3


def test_corrupt_input_is_exit_3(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ this is not json")
    assert main(["cone-check", "--input", str(bad), "--out", str(tmp_path)]) == 3


def test_invalid_document_is_exit_3(tmp_path):
    doc = tmp_path / "doc.json"
    doc.write_text('{"cone": {"n": 2, "kind": "generated", "generators": []}}')
    assert main(["cone-check", "--input", str(doc), "--out", str(tmp_path)]) == 3


def test_unknown_verb_rejected_before_io(tmp_path):
    with pytest.raises(SystemExit):
        main(["frobnicate", "--out", str(tmp_path / "nothing")])
    assert not (tmp_path / "nothing").exists()


def test_overtight_tolerance_is_exit_4(tmp_path):
    rc = run("solve-dirichlet", "dirichlet-envelope.json", tmp_path,
             extra=["--tol", "1e-15", "--max-iters", "2000"])
    assert rc == 4


def test_reports_byte_identical(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        assert run("cone-freedim", "freedim-g2r4.json", out,
                   extra=["--seed", "77"]) == 0
    b1 = (out1 / "cone-freedim.json").read_bytes()
    b2 = (out2 / "cone-freedim.json").read_bytes()
    assert b1 == b2
    for out in (out1, out2):
        assert run("solve-dirichlet", "dirichlet-harmonic.json", out) == 0
    assert (out1 / "solve-report.json").read_bytes() == \
        (out2 / "solve-report.json").read_bytes()
    assert (out1 / "solution.csv").read_bytes() == \
        (out2 / "solution.csv").read_bytes()


def test_selftest_subset(tmp_path):
    doc = tmp_path / "sel.json"
    doc.write_text(json.dumps({"criteria": ["2-dirichlet-harmonic",
                                            "9-distance-squared-hessian"]}))
    assert main(["selftest", "--input", str(doc), "--out", str(tmp_path)]) == 0
    rep = read_report(tmp_path, "selftest.json")
    assert len(rep["criteria"]) == 2
    assert all(c["passed"] for c in rep["criteria"])


def test_format_json_deterministic_floats():
    s = format_json({"x": 0.1 + 0.2, "arr": [1.0, float("inf")]})
    assert "0.30000000000000004" in s
    assert '"inf"' in s


def test_selftest_overtight_tol_is_exit_4(tmp_path):
    doc = tmp_path / "sel.json"
    doc.write_text(json.dumps({"criteria": ["2-dirichlet-harmonic"]}))
    rc = main(["selftest", "--input", str(doc), "--out", str(tmp_path),
               "--tol", "1e-15"])
    assert rc == 4
