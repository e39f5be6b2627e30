import csv
import io

import pytest

from uavcov import cli
from uavcov.config import ConfigError, parse_config
from uavcov.coverage import total_coverage
from uavcov.model import SystemParams


def test_empty_document_gives_reference_defaults():
    spec = parse_config("", mode="coverage")
    assert spec.params == SystemParams()
    assert spec.sweep is None and spec.mh is None
    assert spec.normalization == "conditioned" and spec.center_ccdf == "exact"


def test_units_and_aliases():
    spec = parse_config("""
[params]
sigma_c2 = 100
p_tx_dbm = [30, 30, 40]
noise_dbm = -100
bias_db = 10
""")
    assert spec.params.sigma_c == pytest.approx(10.0)
    assert spec.params.p_tx == pytest.approx((1.0, 1.0, 10.0))
    assert spec.params.noise == pytest.approx((1e-13,) * 3)
    assert spec.params.bias == pytest.approx((10.0,) * 3)


@pytest.mark.parametrize("text,key,line", [
    ("[params]\nalpha_los = 2.0\n", "params.alpha_los", 2),
    ("mode = 'coverage'\n[params]\nheigth = 10\n", "params.heigth", 3),
    ("[simulation]\nseed = 1\n", "simulation", 1),
    ("[params]\nsigma_c = 5\nsigma_c2 = 25\n", "params.sigma_c2", 3),
    ("[sweep]\nvariable = 'height'\nvalues = [30, 10]\n", "sweep.values", 3),
    ("[sweep]\nvariable = 'colour'\nvalues = [1]\n", "sweep.variable", 2),
    ("[params]\np_tx_dbm = [1, 2]\n", "params.p_tx_dbm", 2),
])
def test_diagnostics_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    diag = {d.key: d for d in exc.value.diagnostics}
    assert key in diag
    assert diag[key].line == line
    assert f"line {line}" in str(exc.value)


def test_ase_rejects_per_tier_thresholds():
    with pytest.raises(ConfigError, match="common threshold"):
        parse_config("[params]\nsinr_threshold_db = [0, 3, 0]\n", mode="ase")
    parse_config("gamma_db = 0\n", mode="ase")


def test_sweep_plan():
    spec = parse_config("[sweep]\nvariable = 'height'\nvalues = [10, 20, 30]\n", mode="sweep")
    pts = spec.points()
    assert [v for v, _, _ in pts] == [10, 20, 30]
    assert [p.height for _, p, _ in pts] == [10, 20, 30]


def test_alpha_sweep_sets_all_exponents():
    spec = parse_config("[sweep]\nvariable = 'alpha'\nvalues = [2.5, 4]\n")
    p = spec.points()[1][1]
    assert (p.alpha_los, p.alpha_nlos, p.alpha_b) == (4.0, 4.0, 4.0)


def test_sweep_values_are_validated():
    with pytest.raises(ConfigError, match="alpha_los must exceed 2"):
        parse_config("[sweep]\nvariable = 'alpha'\nvalues = [1.5, 4]\n")


def test_multiheight_section():
    spec = parse_config("[multiheight]\nheights = [10, 20]\nanchor_tier = 2\n")
    assert spec.mh.lambda_m == (5e-5, 5e-5)
    assert spec.mh.anchor_tier == 2
    with pytest.raises(ConfigError, match="lambda_m"):
        parse_config("[multiheight]\nheights = [10, 20]\nlambda_m = [1e-4, 1e-4]\n")


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, list(csv.reader(io.StringIO(out.out))), out.err


def test_coverage_csv(capsys):
    code, rows, _ = run(["coverage"], capsys)
    assert code == 0
    assert rows[0] == ["point", "gamma_db", "a0_los", "a0_nlos", "a1_los", "a1_nlos", "a2",
                       "p_c0", "p_c1", "p_c2", "p_c_total", "ase"]
    assert float(rows[1][10]) == pytest.approx(total_coverage(SystemParams()).total, rel=1e-8)
    assert all(v == f"{float(v):.9g}" for v in rows[1][2:])


def test_sweep_rows_in_order(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("gamma_db = [-5, 0]\n[sweep]\nvariable = 'height'\nvalues = [10, 30]\n")
    out = tmp_path / "o.csv"
    code, _, _ = run(["sweep", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "height"
    assert [(r[0], r[1]) for r in rows[1:]] == [("10", "-5"), ("10", "0"), ("30", "-5"), ("30", "0")]


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[params]\nalpha_los = 2\n")
    code, _, err = run(["coverage", "--config", str(cfg)], capsys)
    assert code == 1 and "alpha_los" in err
    assert cli.main(["coverage", "--config", str(tmp_path / "missing.toml")]) == 1


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from uavcov.quadrature import BudgetExhausted, IntegrationResult

    def broken(*args, **kwargs):
        raise BudgetExhausted(IntegrationResult(0.0, 1.0, 10, False), "coverage term P1_los")

    monkeypatch.setattr(cli, "evaluate_network", broken)
    code, _, err = run(["coverage"], capsys)
    assert code == 3
    assert "P1_los" in err


def test_validate_is_reproducible(capsys):
    args = ["validate", "--realizations", "300", "--seed", "4"]
    code1, rows1, _ = run(args, capsys)
    code2, rows2, _ = run(args, capsys)
    assert rows1 == rows2
    assert rows1[0][-4:] == ["mc_mean", "mc_stderr", "abs_diff", "pass"]
    assert code1 == (0 if rows1[1][-1] == "true" else 2)


def test_association_preset(capsys):
    code, rows, _ = run(["preset", "fig2"], capsys)
    assert code == 0
    assert rows[0][:2] == ["curve", "sigma_c"]
    for label in ("H=10", "H=30"):
        a0 = [float(r[2]) + float(r[3]) for r in rows[1:] if r[0] == label]
        assert len(a0) == 20
        assert all(x > y for x, y in zip(a0, a0[1:]))


def test_unknown_preset(capsys):
    assert cli.main(["preset", "fig9"]) == 1
