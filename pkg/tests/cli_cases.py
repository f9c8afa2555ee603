"""Argument lists covering every CLI subcommand, shared by the CLI and acceptance tests."""
import json

import numpy as np


def write_ramp_field(path, nx=15, nT=3):
    x = np.linspace(0.0, 1.0, nx)
    T = np.linspace(0.0, 1.0, nT)
    with open(path, "w") as fh:
        fh.write("x,T,u1,u2\n")
        for t in T:
            for xv in x:
                fh.write(f"{float(xv)!r},{float(t)!r},0.0,{float(0.5 + 0.7 * xv)!r}\n")
    return path


def all_commands(work):
    """(name, argv-without---out) for each subcommand; inputs are written under `work`."""
    work.mkdir(parents=True, exist_ok=True)
    field = write_ramp_field(work / "ramp.csv")
    series = work / "series_in.json"
    from transonic_lab.gasdyn import GasModel
    from transonic_lab.series import ck_solve
    series.write_text(json.dumps(ck_solve(([0.0], [0.3, 0.1]), GasModel(), 8).to_dict()))
    growth_cfg = work / "growth.json"
    growth_cfg.write_text(json.dumps({"k_list": [8, 16, 32, 64], "sigma": 0.4}))
    return [
        ("classify", ["classify", "--field", str(field)]),
        ("fbi", ["fbi", "--datum", "abs", "--x0", "0"]),
        ("pipeline", ["pipeline"]),
        ("growth", ["growth", "--config", str(growth_cfg)]),
        ("ck-solve", ["ck-solve", "--N", "9"]),
        ("gevrey-norm", ["gevrey-norm", "--series", str(series), "--component", "u2"]),
        ("gevrey-norm-wave", ["gevrey-norm", "--wave-k", "16"]),
    ]


def snapshot(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}
