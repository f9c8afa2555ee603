import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def wf_oracle_table():
    """Brute-force extended-precision decay table for the wavefront corpus (slow, computed once)."""
    from oracles import WF_CORPUS, oracle_decay
    from transonic_lab.microlocal import default_mu_grid

    mu = default_mu_grid()
    return {(name, x0): (analytic, *oracle_decay(name, x0, 1.0, mu)[:2]) for name, x0, analytic in WF_CORPUS}


@pytest.fixture(scope="session")
def manufactured_runs():
    """Fields of the default pipeline run at N = 6, 9, 12."""
    from transonic_lab.conjugation import build_fields
    from transonic_lab.pipeline import DEFAULT_PIPELINE, frame_from_config
    from transonic_lab.series import ck_solve

    frame = frame_from_config(DEFAULT_PIPELINE)
    out = {}
    for N in (6, 9, 12):
        sol = ck_solve((DEFAULT_PIPELINE["u1"], DEFAULT_PIPELINE["u2"]), frame.model, N)
        out[N] = build_fields(sol, frame)
    return frame, out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
