import json

import numpy as np
import pytest

from legapprox.demo import annulus_demo, cos2_loop, loop_isotropy
from legapprox.errors import ConfigError, NotContact, NotLegendrianInput, StageError, ToleranceBudgetExceeded, ValidationError
from legapprox.pipeline import PipelineConfig, mergelyan_pipeline, write_outputs

STANDARD = {"n": 1, "coeffs": {"dw": "1", "dz": "-y"}}
PERTURBED = {"n": 1, "coeffs": {"dw": "1", "dz": "-y", "dy": "0.05*w"}}


@pytest.fixture(scope="module")
def perturbed_annulus():
    return mergelyan_pipeline(PipelineConfig("fixture:annulus", PERTURBED, defect=1e-4))


def test_disc_standard_is_axis():
    r = mergelyan_pipeline(PipelineConfig("fixture:disc", STANDARD))
    assert r.l == 0 and r.closeness == 0.0 and r.isotropy_beta == 0.0


def test_disc_defect_matches_closed_form():
    # dw = -c z dz from the base point p0: w = -c (z^2 - p0^2) / 2
    c = 1e-4
    r = mergelyan_pipeline(PipelineConfig("fixture:disc", STANDARD, defect=c, defect_function="z"))
    p0 = complex(*r.extra["base_point"])
    z, w = r.samples["points"], r.samples["w"]
    assert np.max(np.abs(w + c * (z ** 2 - p0 ** 2) / 2)) <= 1e-9
    # the injected term is the only non-isotropy against the axis form
    assert r.isotropy_beta == pytest.approx(c * 1.0, rel=1e-3)


def test_annulus_standard_needs_no_correction():
    r = mergelyan_pipeline(PipelineConfig("fixture:annulus", STANDARD))
    assert r.l == 1 and np.max(np.abs(r.t0)) <= 1e-14
    assert r.closeness <= 1e-12


def test_perturbed_annulus_end_to_end(perturbed_annulus):
    r = perturbed_annulus
    assert r.solve.certified and r.solve.residual <= 1e-10
    assert r.isotropy_gamma <= 1e-6
    assert r.closeness <= 1e-3
    assert max(r.output_periods) <= 1e-8
    # the spray's unit periods turn the injected defect into t0 = -defect per cycle, up to sign convention
    assert abs(abs(r.t0[0]) - 1e-4) <= 1e-8
    assert r.min_pairwise_distance > 0


def test_report_json_round_trip(perturbed_annulus, tmp_path):
    paths = write_outputs(perturbed_annulus, str(tmp_path), emit_csv=True)
    data = json.loads(open(paths["report"]).read())
    assert data["l"] == 1 and all(c["ok"] for c in data["checks"].values())
    assert (tmp_path / "set.png").stat().st_size > 0
    assert (tmp_path / "solve.png").exists()
    head = open(paths["curve_00"]).readline()
    assert head.startswith("# t=")


def test_budget_exceeded_carries_report():
    cfg = PipelineConfig("fixture:disc", STANDARD, tolerances={"closeness": 1e-6}, defect=1e-4)
    with pytest.raises(ToleranceBudgetExceeded) as info:
        mergelyan_pipeline(cfg)
    assert info.value.report.closeness > 1e-6
    assert info.value.exit_code == 4


def test_not_contact_form():
    with pytest.raises(StageError) as info:
        mergelyan_pipeline(PipelineConfig("fixture:disc", {"n": 1, "coeffs": {"dw": "1"}}))
    assert isinstance(info.value.cause, NotContact)
    assert info.value.stage == "contact_check" and info.value.exit_code == 2


def test_config_errors(tmp_path):
    with pytest.raises(ValidationError):
        PipelineConfig("fixture:disc", STANDARD, tolerances={"bogus": 1.0})
    with pytest.raises(ValidationError):
        PipelineConfig("fixture:disc", STANDARD, tolerances={"closeness": -1.0})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        PipelineConfig.from_json(str(bad))
    with pytest.raises(ConfigError):
        PipelineConfig.from_json({"set": "fixture:disc", "form": STANDARD, "colour": 1})
    with pytest.raises(ConfigError):
        PipelineConfig("fixture:nope", STANDARD).load_set()
    with pytest.raises(ConfigError):
        PipelineConfig(str(tmp_path / "missing.json"), STANDARD).load_set()


def test_config_file_resolves_relative_paths(tmp_path):
    (tmp_path / "form.json").write_text(json.dumps(STANDARD))
    (tmp_path / "cfg.json").write_text(json.dumps({"set": "fixture:disc", "form": "form.json", "seed": 3}))
    cfg = PipelineConfig.from_json(str(tmp_path / "cfg.json"))
    assert cfg.load_form().n == 1 and cfg.seed == 3


def test_deterministic_dumps():
    cfg = lambda: PipelineConfig("fixture:disc", PERTURBED, defect=1e-5, defect_function="z", seed=7)  # noqa: E731
    assert mergelyan_pipeline(cfg()).dumps() == mergelyan_pipeline(cfg()).dumps()


def test_tighter_ode_tolerance_does_not_hurt():
    run = lambda tol: mergelyan_pipeline(PipelineConfig(  # noqa: E731
        "fixture:disc", PERTURBED, tolerances={"ode": tol}, defect=1e-5, defect_function="z"))
    a, b = run(1e-10), run(5e-11)
    assert b.closeness <= a.closeness * (1 + 1e-6)


def test_interpolation_at_points():
    A = [0.3 + 0.2j, -0.4j]
    r = mergelyan_pipeline(PipelineConfig("fixture:disc", PERTURBED, A=A, defect=5e-7))
    assert r.l >= 1 and r.solve.residual <= 1e-10
    assert [complex(*d["point"]) for d in r.interpolation_defects] == A
    assert max(d["defect"] for d in r.interpolation_defects) <= 1e-8


# annulus scenario


def test_cos2_loop_is_legendrian():
    th = 2 * np.pi * np.arange(128) / 128
    arr = np.column_stack(cos2_loop(0.2)(th))
    assert loop_isotropy(arr) <= 1e-13


def test_annulus_demo_thickens_loop():
    r = annulus_demo(cos2_loop(0.1))
    a = r.extra["annulus"]
    assert a["rho"] == 1.3
    assert max(a["isotropy_inner"], a["isotropy_unit"], a["isotropy_outer"]) <= 1e-10
    assert a["closeness_c0"] <= 1e-12 and a["closeness_c1"] <= 1e-10


def test_annulus_demo_shrinks_past_critical_point():
    # z = p + a/p has dz/dp = 0 at |p| = sqrt(a), inside 1/1.3 < |p| < 1.3 for a = 0.7
    a, eps = 0.7, 0.1
    th = 2 * np.pi * np.arange(256) / 256
    p = np.exp(1j * th)
    arr = np.column_stack([p + a / p, eps / 2 * (p ** 3 / 3 - 1 / p - a * p + a * p ** -3 / 3), eps * np.cos(2 * th)])
    r = annulus_demo(arr)
    rho = r.extra["annulus"]["rho"]
    assert 1 < rho < 1 / np.sqrt(a)
    assert r.extra["annulus"]["isotropy_inner"] <= 1e-10


def test_annulus_demo_rejects_non_legendrian():
    th = 2 * np.pi * np.arange(64) / 64
    arr = np.column_stack([np.exp(1j * th), 0 * th, np.ones_like(th)])
    with pytest.raises(NotLegendrianInput):
        annulus_demo(arr)
