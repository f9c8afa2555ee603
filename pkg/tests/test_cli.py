import json
import subprocess
import sys

import pytest

from cli_cases import all_commands, snapshot, write_ramp_field
from transonic_lab.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_uniform_grid(tmp_path, capsys):
    f = tmp_path / "f.csv"
    f.write_text("x,T,u1,u2\n0,0,0.1,0.2\n1,0,0.1,0.2\n0,1,0.1,0.2\n1,1,0.1,0.2\n")
    code, out, _ = run(["classify", "--field", str(f), "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert json.loads(out)["summary"]["counts"] == {"E": 4, "H": 0, "S": 0}
    assert (tmp_path / "o" / "classification.csv").read_text().startswith("x,T,class\n")


def test_classify_ramp_single_band(tmp_path, capsys):
    f = write_ramp_field(tmp_path / "ramp.csv")
    code, out, _ = run(["classify", "--field", str(f), "--out", str(tmp_path / "o")], capsys)
    s = json.loads(out)["summary"]
    assert code == 0 and s["sonic_edges"] == 3
    lines = (tmp_path / "o" / "sonic_line.csv").read_text().splitlines()
    assert lines[0] == "T,x,q_a,q_b" and len({ln.split(",")[1] for ln in lines[1:]}) == 1


def test_classify_malformed(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    f.write_text("x,T,u1,u2\n0,0,0.1,0.2\n1,0,abc,0.2\n0,1,0.1\n")
    code, out, err = run(["classify", "--field", str(f), "--out", str(tmp_path / "o")], capsys)
    assert code == 1 and out == ""
    diag = json.loads(err)
    assert diag["status"] == "error" and diag["command"] == "classify"
    assert [p["row"] for p in diag["problems"]] == [3, 4]


@pytest.mark.parametrize("datum,x0,verdict", [("abs", 0, "NotAnalytic"), ("gaussian", 0, "Analytic"),
                                              ("abs", 1, "Analytic")])
def test_fbi_verdicts(tmp_path, capsys, datum, x0, verdict):
    code, out, _ = run(["fbi", "--datum", datum, "--x0", str(x0), "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["summary"]["verdict"] == verdict
    assert (tmp_path / "decay_profile_0.csv").exists() and (tmp_path / "decay_profile_1.csv").exists()


def test_pipeline_refusal(tmp_path, capsys):
    code, _, err = run(["pipeline", "--u2", "[1.5]", "--out", str(tmp_path)], capsys)
    diag = json.loads(err)
    assert code == 1 and diag["error"] == "PipelineRefusal" and "hyperbolic" in diag["message"]
    assert diag["raised_in"] == "pipeline"


def test_growth_single_k_inconclusive(tmp_path, capsys):
    code, out, _ = run(["growth", "--k-list", "8", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(out)["summary"]["verdicts"] == {"sobolev": "Inconclusive", "gevrey": "Inconclusive"}


def test_growth_default(tmp_path, capsys):
    code, out, _ = run(["growth", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out)["summary"]["verdicts"]["sobolev"] == "Increasing"
    assert (tmp_path / "growth_sobolev.csv").read_text().startswith("k,numerator,denominator,ratio\n")


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 4, "u2": [0.2]}))
    code, out, _ = run(["ck-solve", "--config", str(cfg), "--N", "6", "--out", str(tmp_path)], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["config"]["N"] == 6 and rec["config"]["u2"] == [0.2]
    assert json.loads((tmp_path / "series.json").read_text())["u1"]["N"] == 6


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 4, "bogus": 1}))
    code, _, err = run(["ck-solve", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 1 and json.loads(err)["error"] == "ConfigError"


def test_usage_error_is_json(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fbi", "--no-such-flag"])
    assert exc.value.code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "UsageError"


def test_gevrey_norm_requires_one_source(tmp_path, capsys):
    code, _, err = run(["gevrey-norm", "--out", str(tmp_path)], capsys)
    assert code == 1 and "exactly one" in json.loads(err)["message"]


def test_gevrey_norm_wave(tmp_path, capsys):
    code, out, _ = run(["gevrey-norm", "--wave-k", "16", "--sigma", "0.5", "--c", "2", "--out", str(tmp_path)],
                       capsys)
    s = json.loads(out)["summary"]
    # k^b 2^-b (b!)^-2 peaks at b = 2: 64 / 4 = 16
    assert code == 0 and s["beta_star"] == 2 and s["value"] == pytest.approx(16.0, rel=1e-13)


def test_determinism_all_commands(tmp_path, capsys):
    for name, argv in all_commands(tmp_path / "in"):
        snaps = []
        for rep in range(2):
            out = tmp_path / f"{name}-{rep}"
            code = main(argv + ["--out", str(out), "--seed", "3"])
            assert code in (0, 2), (name, capsys.readouterr().err)
            capsys.readouterr()
            snaps.append(snapshot(out))
        assert snaps[0] == snaps[1], name
        assert snaps[0], name


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "transonic_lab.cli", "ck-solve", "--N", "3", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["command"] == "ck-solve"
