import math

import pytest

from blowup.cli import TOL_ENV_VAR, _default_tolerance, main
from blowup.config import RunConfig, parse_config
from blowup.errors import ConfigError

CLASSIFY_CFG = """
# linear boundary weight
[weight]
family = power
c0 = 1
gamma = 2
"""

PREDICT_CFG = CLASSIFY_CFG + """
[nonlinearity]
C = 1
rho = 2
B = 1
"""

VERIFY_CFG = """
[weight]
family = constant
c = 1

[nonlinearity]
C = 1
rho = 2
B = 1

[problem]
geometry = interval
L = 1
a = 0
closure = asymptotic
eps_b = 1e-4
mesh_level = 1

[verify]
order = 1
"""


def test_parse_minimal_classify():
    cfg = parse_config(CLASSIFY_CFG, require=("weight",))
    assert cfg.weight is not None
    assert abs(cfg.weight(0.5) - 0.5) < 1e-12


def test_parse_builds_domain_objects():
    cfg = parse_config(VERIFY_CFG)
    assert cfg.nonlinearity(2.0) == 8.0
    assert cfg.geometry.kind == "interval"
    assert cfg.solver["eps_b"] == 1e-4
    assert cfg.bexp.form == "first_order"


def test_parse_expression_values():
    cfg = parse_config('[weight]\nfamily = expr\nexpr = "t^2 * exp(-t)"\n')
    assert abs(cfg.weight(0.5) - 0.25 * math.exp(-0.5)) < 1e-12


def test_errors_are_aggregated_with_line_numbers():
    bad = "\n".join(
        [
            "[weight]",
            "family = power",
            "gamma = 2",
            "gamma = 3",  # duplicate
            "bogus_key = 1",  # unknown key
            "[nonsense]",  # unknown section
            "[nonlinearity]",
            'eps = "t^"',  # bad expression
            "rho = abc",  # bad number
            "orphan line",  # not key = value
        ]
    )
    with pytest.raises(ConfigError) as exc:
        parse_config(bad, require=("problem",))
    text = "\n".join(exc.value.problems)
    assert "line 4: duplicate key 'gamma'" in text and "line 3" in text
    assert "bogus_key" in text
    assert "unknown section [nonsense]" in text
    assert "bad expression for 'eps'" in text and "position" in text
    assert "bad value for 'rho'" in text
    assert "expected 'key = value'" in text
    assert "missing required section [problem]" in text


def test_range_validation():
    with pytest.raises(ConfigError) as exc:
        parse_config(VERIFY_CFG.replace("eps_b = 1e-4", "eps_b = -1"))
    assert any("eps_b" in p for p in exc.value.problems)
    with pytest.raises(ConfigError):
        parse_config(VERIFY_CFG + "tolerance = 7\n")


def test_default_tolerance_env(monkeypatch):
    cfg = RunConfig(sections={})
    monkeypatch.delenv(TOL_ENV_VAR, raising=False)
    assert _default_tolerance(cfg) == 0.02
    monkeypatch.setenv(TOL_ENV_VAR, "0.5")
    assert _default_tolerance(cfg) == 0.5
    monkeypatch.setenv(TOL_ENV_VAR, "abc")
    with pytest.raises(ConfigError):
        _default_tolerance(cfg)
    monkeypatch.setenv(TOL_ENV_VAR, "2.0")
    with pytest.raises(ConfigError):
        _default_tolerance(cfg)
    cfg.verify["tolerance"] = 0.1
    assert _default_tolerance(cfg) == 0.1


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_cli_classify(tmp_path):
    cfgp = _write(tmp_path, "c.cfg", CLASSIFY_CFG)
    out = tmp_path / "out"
    assert main(["classify", "--config", cfgp, "--out", str(out)]) == 0
    txt = (out / "classify.txt").read_text()
    assert "K01_tau" in txt
    csv = (out / "classify.csv").read_text().splitlines()
    assert csv[0].startswith("subclass,ell0,ell1")
    fields = csv[1].split(",")
    assert abs(float(fields[2]) - 0.5) < 1e-4  # ell1
    assert abs(float(fields[3]) - 1.0) < 1e-4  # alpha


def test_cli_predict_and_determinism(tmp_path):
    cfgp = _write(tmp_path, "p.cfg", PREDICT_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["predict", "--config", cfgp, "--out", str(out1)]) == 0
    assert main(["predict", "--config", cfgp, "--out", str(out2)]) == 0
    b1 = (out1 / "predict.csv").read_bytes()
    assert b1 == (out2 / "predict.csv").read_bytes()
    txt = (out1 / "predict.txt").read_text()
    assert "first_order" in txt and "xi0 = ((2 + ell1*rho)/(2 + rho))^(1/rho)" in txt
    row = (out1 / "predict.csv").read_text().splitlines()[1].split(",")
    assert abs(float(row[2]) - 0.8660254) < 1e-4


def test_cli_config_error_exit(tmp_path, capsys):
    cfgp = _write(tmp_path, "bad.cfg", "[weight]\nfamily = nosuch\n")
    code = main(["classify", "--config", cfgp, "--out", str(tmp_path / "o")])
    assert code == 1
    assert "config error" in capsys.readouterr().err
    assert main(["classify", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o")]) == 1


def test_cli_sweep(tmp_path):
    cfgp = _write(tmp_path, "p.cfg", PREDICT_CFG)
    out = tmp_path / "sweep"
    assert main(["predict", "--config", cfgp, "--out", str(out), "--sweep", "nonlinearity.rho=2,3"]) == 0
    lead = {}
    for v in ("2", "3"):
        row = (out / f"nonlinearity_rho_{v}" / "predict.csv").read_text().splitlines()[1]
        lead[v] = float(row.split(",")[2])
    assert abs(lead["2"] - 0.8660254037844386) < 1e-4
    assert abs(lead["3"] - 0.7 ** (1.0 / 3.0)) < 1e-4


def test_cli_solve_and_verify(tmp_path):
    cfgp = _write(tmp_path, "v.cfg", VERIFY_CFG)
    outs = tmp_path / "solve"
    assert main(["solve", "--config", cfgp, "--out", str(outs)]) == 0
    assert (outs / "solution.csv").exists()
    diag = (outs / "diagnostics.txt").read_text()
    assert "admissibility" in diag and "eigenvalue" in diag

    outv = tmp_path / "verify"
    assert main(["verify", "--config", cfgp, "--out", str(outv)]) == 0
    vtxt = (outv / "verify.txt").read_text()
    assert "PASS" in vtxt and "first_order" in vtxt
    assert (outv / "ratio_vs_d.dat").exists()
    svg = (outv / "ratio_vs_d.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_cli_verify_failure_exit(tmp_path):
    strict = VERIFY_CFG + "tolerance = 1e-8\n"
    cfgp = _write(tmp_path, "strict.cfg", strict)
    out = tmp_path / "strict_out"
    assert main(["verify", "--config", cfgp, "--out", str(out)]) == 4
    assert "FAIL" in (out / "verify.txt").read_text()
