"""transonic-lab: batch front end.

Every subcommand takes an optional JSON ``--config`` whose keys mirror the
flags (dashes become underscores); flags win over the file, unknown keys are
rejected.  Outputs go to ``--out`` and a short JSON summary is printed.

Exit codes: 0 success, 1 error (JSON diagnostic on stderr), 2 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import io
from .errors import TransonicError
from .gasdyn import GasModel, FlowState, read_field_csv, sonic_line, iter_classification_rows, FieldFormatError
from .illposedness import (GrowthVerdict, NormKind, NormSpec, gevrey_norm, gevrey_terms, growth_experiment,
                           r_rule_from_name)
from .microlocal import AnalyticityVerdict, analyticity_test, default_mu_grid, load_datum
from .pipeline import DEFAULT_PIPELINE, run_pipeline
from .series import BivariateSeries, ck_solve, residual

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _json_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"not valid JSON: {text!r}") from None


def _number_list(text):
    val = _json_value(text) if text.strip().startswith("[") else [float(v) for v in text.split(",") if v]
    if not isinstance(val, list):
        raise argparse.ArgumentTypeError("expected a list")
    return val


# key -> (flag parser, default); a default of None means "module default"
SCHEMAS = {
    "classify": {
        "field": (str, None),
        "gamma": (float, 1.4),
        "c0": (float, 1.0),
        "tol": (float, None),
    },
    "fbi": {
        "datum": (str, "gaussian"),
        "x0": (float, 0.0),
        "xi_list": (_number_list, [-1.0, 1.0]),
        "Lambda": (float, 0.5),
        "mu_max": (float, 256.0),
        "n_mu": (int, 16),
        "disc_radius": (float, 0.05),
    },
    "pipeline": {
        "gamma": (float, DEFAULT_PIPELINE["gamma"]),
        "c0": (float, DEFAULT_PIPELINE["c0"]),
        "u1": (_number_list, DEFAULT_PIPELINE["u1"]),
        "u2": (_number_list, DEFAULT_PIPELINE["u2"]),
        "T0": (float, DEFAULT_PIPELINE["T0"]),
        "x0": (float, DEFAULT_PIPELINE["x0"]),
        "T1": (float, DEFAULT_PIPELINE["T1"]),
        "r0": (float, DEFAULT_PIPELINE["r0"]),
        "R": (float, DEFAULT_PIPELINE["R"]),
        "c_bar_prime": (float, DEFAULT_PIPELINE["c_bar_prime"]),
        "N": (int, DEFAULT_PIPELINE["N"]),
        "identity_mu": (_number_list, DEFAULT_PIPELINE["identity_mu"]),
        "z_grid": (_json_value, DEFAULT_PIPELINE["z_grid"]),
        "mu_grid": (_number_list, DEFAULT_PIPELINE["mu_grid"]),
        "t0": (float, DEFAULT_PIPELINE["t0"]),
        "disc_radius": (float, DEFAULT_PIPELINE["disc_radius"]),
        "eps_floor": (float, DEFAULT_PIPELINE["eps_floor"]),
        "quad_tol": (float, DEFAULT_PIPELINE["quad_tol"]),
        "residual_tol": (float, 1e-8),
    },
    "growth": {
        "base_state": (_number_list, [0.0, 0.0]),
        "gamma": (float, 1.4),
        "c0": (float, 1.0),
        "k_list": (_number_list, [4, 8, 16, 32]),
        "s": (float, 2.0),
        "alpha": (float, 0.5),
        "sigma": (float, 0.4),
        "c": (float, 1.0),
        "delta": (float, 1.0),
        "r_rule": (str, "k^-0.25"),
        "horizon": (float, 0.25),
        "norm": (str, "both"),
        "amplitude": (float, 1.0),
        "x0": (float, 0.0),
        "r_lower": (float, 0.5),
    },
    "ck-solve": {
        "u1": (_number_list, [0.0]),
        "u2": (_number_list, [0.3, 0.1]),
        "gamma": (float, 1.4),
        "c0": (float, 1.0),
        "N": (int, 12),
        "T0": (float, 0.0),
        "x0": (float, 0.0),
    },
    "gevrey-norm": {
        "series": (str, None),
        "component": (str, "u1"),
        "wave_k": (float, None),
        "amplitude": (float, 1.0),
        "sigma": (float, 0.4),
        "c": (float, 1.0),
        "radius": (float, 0.5),
        "beta_max": (int, 200),
    },
}


class _Parser(argparse.ArgumentParser):
    """Usage errors follow the JSON-diagnostic / exit-1 contract instead of argparse's exit 2."""

    def error(self, message):
        diag = {"status": "error", "command": self.prog.split()[-1], "error": "UsageError",
                "module": __name__, "message": message}
        sys.stderr.write(json.dumps(diag, sort_keys=True) + "\n")
        sys.exit(EXIT_ERROR)


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="transonic-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with parameter overrides")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, default=0, help="recorded in every report")
        for key, (parse, _) in schema.items():
            sp.add_argument(_flag(key), dest=key, type=parse, default=argparse.SUPPRESS)
    return p


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    schema = SCHEMAS[command]
    cfg = {k: d for k, (_, d) in schema.items()}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        unknown = sorted(set(raw) - set(schema))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {unknown}; allowed: {sorted(schema)}")
        cfg.update(raw)
    for key in schema:
        if key in vars(args):
            cfg[key] = getattr(args, key)
    return cfg


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg, out: Path):
    if not cfg["field"]:
        raise ConfigError("classify needs --field <x,T,u1,u2 csv>")
    model = GasModel(cfg["gamma"], cfg["c0"])
    field = read_field_csv(cfg["field"], model)
    cls = field.classify(model, cfg["tol"])
    edges = sonic_line(field, model, cfg["tol"])
    io.write_csv(out / "classification.csv", ["x", "T", "class"], iter_classification_rows(field, cls))
    io.write_csv(out / "sonic_line.csv", ["T", "x", "q_a", "q_b"],
                 ((e.T, e.x, e.q_a, e.q_b) for e in edges))
    counts = {k: int(np.sum(cls == k)) for k in ("E", "H", "S")}
    return {"counts": counts, "sonic_edges": len(edges), "nodes": int(cls.size)}, EXIT_OK


def cmd_fbi(cfg, out: Path):
    f = load_datum(cfg["datum"])
    mu = default_mu_grid(int(cfg["n_mu"]), float(cfg["mu_max"]))
    rep = analyticity_test(f, float(cfg["x0"]), float(cfg["Lambda"]), cfg["xi_list"], mu, float(cfg["disc_radius"]))
    for i, prof in enumerate(rep.profiles):
        io.write_csv(out / f"decay_profile_{i}.csv", ["xi0", "mu", "weighted_log_abs", "clamped", "in_fit"],
                     ((prof.xi0, m, v, int(c), int(k)) for m, v, c, k in
                      zip(prof.mu, prof.weighted_log_abs, prof.clamped, prof.fit_mask)))
    summary = rep.to_dict()
    summary["datum"] = cfg["datum"]
    code = EXIT_INCONCLUSIVE if rep.verdict == AnalyticityVerdict.INCONCLUSIVE else EXIT_OK
    return summary, code


def cmd_pipeline(cfg, out: Path):
    pcfg = {k: v for k, v in cfg.items() if k != "residual_tol"}
    res = run_pipeline(pcfg, tol=float(cfg["residual_tol"]))
    io.write_json(out / "pipeline_report.json", res.report)
    io.write_csv(out / "est_basic_sweep.csv", ["mu", "component", "log_abs", "weighted_log_abs"], res.sweep_rows)
    s = res.report["summary"]
    if not s["residuals_pass"]:
        raise TransonicError(f"identity residual {s['max_residual']:.3e} exceeds {s['residual_tol']:.1e}")
    return s, (EXIT_OK if s["eps_pass"] else EXIT_INCONCLUSIVE)


def cmd_growth(cfg, out: Path):
    u = cfg["base_state"]
    if len(u) != 2:
        raise ConfigError("base_state must be [u1, u2]")
    model = GasModel(cfg["gamma"], cfg["c0"])
    base = FlowState(float(u[0]), float(u[1]))
    kinds = {"both": [NormKind.SOBOLEV, NormKind.GEVREY], "sobolev": [NormKind.SOBOLEV],
             "gevrey": [NormKind.GEVREY]}.get(cfg["norm"])
    if kinds is None:
        raise ConfigError("norm must be sobolev, gevrey or both")
    rule = r_rule_from_name(cfg["r_rule"])
    reports = []
    for kind in kinds:
        spec = NormSpec(kind, s=float(cfg["s"]), sigma=float(cfg["sigma"]), c=float(cfg["c"]),
                        radius=float(cfg["r_lower"]))
        rep = growth_experiment(base, model, cfg["k_list"], alpha=float(cfg["alpha"]), delta=float(cfg["delta"]),
                                r_rule=rule, horizon=float(cfg["horizon"]), norm=spec, a=float(cfg["amplitude"]),
                                x0=float(cfg["x0"]), r_lower=float(cfg["r_lower"]))
        io.write_csv(out / f"growth_{kind.value}.csv", ["k", "numerator", "denominator", "ratio"], rep.rows())
        reports.append(rep)
    summary = {"r_rule": cfg["r_rule"], "reports": [r.to_dict() for r in reports]}
    io.write_json(out / "growth_report.json", summary)
    code = EXIT_INCONCLUSIVE if any(r.verdict == GrowthVerdict.INCONCLUSIVE for r in reports) else EXIT_OK
    return {"verdicts": {r.norm.kind.value: r.verdict.value for r in reports}}, code


def cmd_ck_solve(cfg, out: Path):
    model = GasModel(cfg["gamma"], cfg["c0"])
    sol = ck_solve((cfg["u1"], cfg["u2"]), model, int(cfg["N"]), float(cfg["T0"]), float(cfg["x0"]))
    N = sol.N
    res = max(r.max_abs(max(N - 1, 0)) for r in residual(sol))
    io.write_json(out / "series.json", sol.to_dict())
    rows = []
    for name, s in (("u1", sol.u1), ("u2", sol.u2)):
        for m in range(N + 1):
            for n in range(N + 1 - m):
                c = s.coeffs[m, n]
                rows.append((name, m, n, float(c.real), float(c.imag)))
    io.write_csv(out / "coefficients.csv", ["field", "m", "n", "re", "im"], rows)
    return {"N": N, "residual_max": res}, EXIT_OK


def cmd_gevrey_norm(cfg, out: Path):
    sigma, c = float(cfg["sigma"]), float(cfg["c"])
    spec = NormSpec(NormKind.GEVREY, sigma=sigma, c=c, radius=float(cfg["radius"]))
    beta_max = int(cfg["beta_max"])
    if (cfg["series"] is None) == (cfg["wave_k"] is None):
        raise ConfigError("give exactly one of --series <series.json> or --wave-k <k>")
    if cfg["series"] is not None:
        d = json.loads(Path(cfg["series"]).read_text())
        if cfg["component"] not in ("u1", "u2"):
            raise ConfigError("component must be u1 or u2")
        f = BivariateSeries.from_dict(d[cfg["component"]])
        row = f.at_T0()
        poly = np.polynomial.Polynomial(row)
        xs = np.linspace(-spec.radius, spec.radius, 257)
        sups = []
        for _ in range(min(beta_max, row.size - 1) + 1):
            sups.append(float(np.max(np.abs(poly(xs)))))
            poly = poly.deriv() if poly.degree() > 0 else np.polynomial.Polynomial([0.0])
        source = {"series": cfg["series"], "component": cfg["component"]}
    else:
        k, a = float(cfg["wave_k"]), float(cfg["amplitude"])
        sups = list(a * k ** np.arange(beta_max + 1, dtype=float))
        source = {"wave_k": k, "amplitude": a}
    g = gevrey_norm(sups, sigma, c, spec.radius, beta_max)
    terms = gevrey_terms(sups, sigma, c)
    io.write_csv(out / "gevrey_terms.csv", ["beta", "sup_derivative", "weighted_term"],
                 ((b, float(s), float(t)) for b, (s, t) in enumerate(zip(sups, terms))))
    summary = {"source": source, "norm": spec.to_dict(), "value": g.value, "beta_star": g.beta_star,
               "at_truncation": g.at_truncation}
    io.write_json(out / "gevrey_norm.json", summary)
    return summary, EXIT_OK


COMMANDS = {"classify": cmd_classify, "fbi": cmd_fbi, "pipeline": cmd_pipeline, "growth": cmd_growth,
            "ck-solve": cmd_ck_solve, "gevrey-norm": cmd_gevrey_norm}


def _diagnostic(command, exc) -> dict:
    tb = traceback.extract_tb(exc.__traceback__)
    origin = tb[-1].filename if tb else None
    diag = {"status": "error", "command": command, "error": type(exc).__name__,
            "module": type(exc).__module__, "message": str(exc)}
    if origin:
        diag["raised_in"] = Path(origin).stem
    if isinstance(exc, FieldFormatError):
        diag["problems"] = [{"row": r, "message": m} for r, m in exc.problems]
    return diag


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        summary, code = COMMANDS[args.command](cfg, out)
    except Exception as exc:  # every failure leaves a JSON diagnostic
        sys.stderr.write(json.dumps(_diagnostic(args.command, exc), sort_keys=True) + "\n")
        return EXIT_ERROR
    record = {"command": args.command, "seed": args.seed, "config": cfg, "exit_code": code, "summary": summary}
    io.write_json(out / "run.json", record)
    sys.stdout.write(io.dumps(record))
    return code


if __name__ == "__main__":
    sys.exit(main())
