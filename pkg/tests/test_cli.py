import json
import subprocess
import sys
from fractions import Fraction as F
from importlib import resources

import pytest

from conftest import CONFIGS
from mechfront.cli import main
from mechfront.serialize import read_frontier_csv, read_mechanism_json


def write_cfg(tmp_path, **cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_shipped_schema_is_the_documented_one():
    shipped = resources.files("mechfront").joinpath("data/config.schema.json").read_text()
    assert json.loads(shipped) == json.loads((CONFIGS.parent / "config.schema.json").read_text())


def test_frontier_plurality(tmp_path, capsys):
    code, out, _ = run(capsys, "frontier", "--config", str(CONFIGS / "plurality_n3.json"),
                       "--output-dir", str(tmp_path), "--validate")
    assert code == 0
    assert read_frontier_csv(tmp_path / "frontier.csv") == [(0, F(1, 9)), (F(1, 3), 0)]
    assert "lp_calls:" in out and "FAIL" not in out
    assert len(read_frontier_csv(tmp_path / "frontier_samples.csv")) == 7


def test_frontier_veto(tmp_path, capsys):
    code, out, _ = run(capsys, "frontier", "--config", str(CONFIGS / "veto_n3.json"),
                       "--output-dir", str(tmp_path), "--sample-grid", "4", "--jobs", "2", "--validate")
    assert code == 0
    assert read_frontier_csv(tmp_path / "frontier.csv") == [
        (0, F(2, 9)), (F(1, 21), F(10, 63)), (F(1, 12), F(5, 36)), (F(1, 2), 0)]
    assert out.count("ok   midpoint equality") == 3
    assert len(read_frontier_csv(tmp_path / "frontier_samples.csv")) == 5


def test_frontier_constant(tmp_path, capsys):
    cfg = write_cfg(tmp_path, setting={"n": 2, "m": 3}, desideratum={"name": "constant", "value": "1/2"})
    code, out, _ = run(capsys, "frontier", "--config", cfg, "--output-dir", str(tmp_path / "o"))
    assert code == 0 and "warning" in out
    assert read_frontier_csv(tmp_path / "o" / "frontier.csv") == [(0, 0)]


@pytest.mark.parametrize("name,eps,axioms,value", [
    ("veto", "1/12", None, "5/36"), ("plurality", "1", None, "0"), ("veto", "0", "unan", "4/9")])
def test_optimize(tmp_path, capsys, name, eps, axioms, value):
    cfg = write_cfg(tmp_path, setting={"n": 3, "m": 3}, desideratum={"name": name})
    argv = ["optimize", "--config", cfg, "--eps", eps, "--output-dir", str(tmp_path)]
    if axioms:
        argv += ["--axioms", axioms]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and f"deficit: {value}\n" in out
    assert len(read_mechanism_json(tmp_path / "mech_opt.json").table) == 216


@pytest.mark.parametrize("cfg,line", [
    ({"desideratum": {"name": "veto"}, "mechanism": {"builtin": "random_duple"}}, "signature: (0, 2/9)"),
    ({"desideratum": {"name": "plurality"}, "mechanism": {"builtin": "uniform_plurality"}},
     "signature: (1/3, 0)"),
])
def test_analyze_builtins(tmp_path, capsys, cfg, line):
    path = write_cfg(tmp_path, setting={"n": 3, "m": 3}, **cfg)
    code, out, _ = run(capsys, "analyze", "--config", path)
    assert code == 0 and line in out and "worst profile" in out


def test_analyze_file_mechanism(tmp_path, capsys):
    cfg = write_cfg(tmp_path, setting={"n": 1, "m": 3}, desideratum={"name": "plurality"},
                    mechanism={"path": str(CONFIGS / "example_phi.json")})
    code, out, _ = run(capsys, "analyze", "--config", cfg)
    assert code == 0 and "signature: (1/3, 1)" in out and "top-1 gain 1/3" in out


def test_hybrid_example(tmp_path, capsys):
    code, out, _ = run(capsys, "hybrid", "--config", str(CONFIGS / "hybrid_example.json"),
                       "--output-dir", str(tmp_path))
    assert code == 0
    assert "hybrid beta=3/7: (0, 16/21)" in out and "convex bound: (8/21, 20/21)" in out
    code, out, _ = run(capsys, "hybrid", "--config", str(CONFIGS / "hybrid_example.json"),
                       "--output-dir", str(tmp_path), "--beta", "0")
    assert "hybrid beta=0: (1/3, 1)" in out


def test_hybrid_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path, setting={"n": 3, "m": 3}, desideratum={"name": "veto"},
                    mechanisms=[{"builtin": "uniform_veto"}, {"builtin": "uniform_veto"}], beta="1/2")
    code, out, _ = run(capsys, "hybrid", "--config", cfg, "--output-dir", str(tmp_path))
    lines = dict(l.split(": ", 1) for l in out.splitlines() if ": " in l)
    assert code == 0 and lines["phi"] == lines["hybrid beta=1/2"]


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "frontier", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad = write_cfg(tmp_path, setting={"n": 3}, desideratum={"name": "veto"})
    assert run(capsys, "frontier", "--config", bad)[0] == 2
    decimal = write_cfg(tmp_path, setting={"n": 2, "m": 3}, desideratum={"name": "veto"}, eps="0.5")
    assert run(capsys, "optimize", "--config", decimal)[0] == 2
    no_eps = write_cfg(tmp_path, setting={"n": 2, "m": 3}, desideratum={"name": "veto"})
    assert run(capsys, "optimize", "--config", no_eps)[0] == 2
    huge = write_cfg(tmp_path, setting={"n": 9, "m": 3}, desideratum={"name": "veto"})
    code, _, err = run(capsys, "frontier", "--config", huge)
    assert code == 4 and "exceeds" in err


def test_exante_uniform(tmp_path, capsys):
    cfg = write_cfg(tmp_path, setting={"n": 2, "m": 3}, desideratum={"name": "plurality"},
                    deficit="exante", eps="0")
    code, out, _ = run(capsys, "optimize", "--config", cfg, "--output-dir", str(tmp_path))
    assert code == 0 and "deficit:" in out


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "mechfront.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "frontier" in res.stdout


def test_consistency_failure_exit_code(tmp_path, capsys, monkeypatch):
    import mechfront.cli as cli
    from mechfront.errors import ConsistencyError

    def broken(problem):
        raise ConsistencyError("forced", {"eps": F(1, 2)})

    monkeypatch.setattr(cli, "compute_frontier", broken)
    code, _, err = run(capsys, "frontier", "--config", str(CONFIGS / "plurality_n3.json"),
                       "--output-dir", str(tmp_path))
    assert code == 3 and "eps: 1/2" in err
