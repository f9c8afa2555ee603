import math

import numpy as np
import pytest

from transonic_lab.conjugation import EST_BASIC_FLOOR, EST_BASIC_MU_POINTS, est_basic_check
from transonic_lab.gasdyn import Regime
from transonic_lab.microlocal import Datum1D
from transonic_lab.pipeline import DEFAULT_PIPELINE, PipelineRefusal, frame_from_config, run_pipeline


@pytest.fixture(scope="module")
def default_run():
    return run_pipeline()


def test_default_run_passes(default_run):
    s = default_run.report["summary"]
    assert default_run.passed
    assert s["max_residual"] <= 1e-8
    assert all(e > EST_BASIC_FLOOR and e >= 1e-3 for e in s["eps_hat"])
    checks = default_run.report["checks"]
    assert checks["ck_residual"] <= 1e-10
    assert checks["zeta_initial_defect"] == 0.0
    assert default_run.report["regime"] == Regime.ELLIPTIC.value
    for ident in default_run.report["identities"]:
        assert ident["boundary"]["defect"] <= 1e-8
        assert ident["u_recovery"]["defect"] <= 1e-8


def test_sweep_rows(default_run):
    rows = default_run.sweep_rows
    assert len(rows) == 2 * EST_BASIC_MU_POINTS
    assert {r[1] for r in rows} == {1, 2}
    assert all(math.isfinite(r[2]) and math.isfinite(r[3]) for r in rows)


def test_constant_state_run():
    res = run_pipeline({"u1": [0.0], "u2": [0.3]})
    assert res.report["summary"]["max_residual"] <= 1e-14
    # (B S u)_i = const * chi: the decay rate is the cut-off's own
    frame = frame_from_config({**DEFAULT_PIPELINE, "u1": [0.0], "u2": [0.3]})
    chi = frame.cutoff
    d = Datum1D(chi, (frame.x0 - frame.R, frame.x0 + frame.R), chi.breakpoints)
    centers = [complex(*c["center"]) for c in res.report["est_basic"]["components"]]
    ref = est_basic_check([d, d], centers).eps_hat
    assert np.allclose(res.report["summary"]["eps_hat"], ref, rtol=1e-6)


def test_hyperbolic_refusal():
    with pytest.raises(PipelineRefusal, match="hyperbolic"):
        run_pipeline({"u1": [0.0], "u2": [1.5]})


def test_bad_degree():
    with pytest.raises(ValueError):
        run_pipeline({"N": 1})
