import csv
import json
import warnings

import pytest

from tadicnp import cli, dwork
from tadicnp.catalog import catalog_configs, catalog_entries, primes_above
from tadicnp.config import ConfigError, config_from_dict, parse_fq_element
from tadicnp.ledger import BudgetError, compute_ledger
from tadicnp.polygons import AtLeast, NewtonPointSet
from tadicnp.sums import SPolynomial
from tadicnp.tseries import TruncatedSeries
from tadicnp.verify import (
    CONSISTENT,
    EXIT_INSUFFICIENT,
    EXIT_OK,
    EXIT_VIOLATION,
    INSUFFICIENT,
    VIOLATION,
    assess,
    check_points_against,
    compute,
    exit_code,
    run_verify,
)

X3X = {
    "name": "x3-plus-x",
    "n": 1,
    "vertices": [["0"], ["3"]],
    "p": "11",
    "b": "1",
    "coefficients": [{"u": [3], "a": "1"}, {"u": [1], "a": "1"}],
    "precision": {"M_target": "2", "N": "12", "K": "6"},
    "flags": {"direct": True, "dwork": True, "specialize": [1], "polygon_only": False},
}

TRIANGLE = {"name": "triangle", "vertices": [[0, 0], [2, 0], [0, 3]], "p": 37, "flags": {"polygon_only": True}}


def test_ledger_examples():
    led = compute_ledger(11, 1, 1, 3, 2, 12, 6)
    assert led.M_c == 3 and led.Mw == 2
    assert compute_ledger(5, 1, 1, 1, 2, 4, 1).Mw == 2
    led2 = compute_ledger(2, 1, 1, 1, 2, 8, 1)
    assert led2.M_c - led2.Mw == 4
    assert led.rho_length == 36


def test_ledger_budget():
    with pytest.raises(BudgetError, match="binding"):
        compute_ledger(7, 1, 3, 1, 2, 4, 5)
    with pytest.raises(ValueError):
        compute_ledger(3, 1, 1, 1, 0, 4, 2)


def test_config_parsing():
    cfg = config_from_dict(X3X)
    assert (cfg.p, cfg.b, cfg.N, cfg.K) == (11, 1, 12, 6)
    assert cfg.coefficients == (((1,), (1,)), ((3,), (1,)))
    assert config_from_dict(cfg.to_dict()) == cfg


def test_fq_element_parsing():
    assert parse_fq_element("g", 3, 2) == (0, 1)
    assert parse_fq_element("g^2 + 2*g + 1", 3, 2) == (0, 2)  # g^2 = -1 in F_9
    assert parse_fq_element([1, 2], 3, 2) == (1, 2)
    assert parse_fq_element(7, 5, 1) == (2,)
    with pytest.raises(ConfigError):
        parse_fq_element("h + 1", 3, 2)


def test_config_errors():
    bad = dict(X3X, p="12")
    with pytest.raises(ConfigError, match="not prime"):
        config_from_dict(bad)
    bad = dict(X3X, coefficients=[{"u": [3], "a": "1"}, {"u": [4], "a": "1"}])
    with pytest.raises(ConfigError, match="outside"):
        config_from_dict(bad)
    bad = dict(X3X, coefficients=[{"u": [1], "a": "1"}, {"u": [3], "a": "11"}])
    with pytest.raises(ConfigError, match="vertices"):
        config_from_dict(bad)
    with pytest.raises(ConfigError, match="degenerate"):
        config_from_dict({"vertices": [[0, 0], [1, 1]], "p": 5, "flags": {"polygon_only": True}})


def test_small_prime_warns():
    with pytest.warns(UserWarning, match="3D"):
        config_from_dict(dict(X3X, p="7", coefficients=[{"u": [3], "a": 1}]))


def test_catalog():
    names = [e.name for e in catalog_entries()]
    assert len(names) == 11
    assert primes_above(9) == [11, 13]
    configs = catalog_configs()
    assert len(configs) == 22
    assert {c.name for c in configs} >= {"interval-3-p11", "interval-3-p13", "triangle-2-3-p19"}


def test_verify_x3_plus_x():
    report = run_verify(config_from_dict(X3X))
    assert report["status"] == CONSISTENT
    assert all(v["status"] == CONSISTENT for v in report["verdicts"].values())
    assert report["polygons"]["arithmetic_values"][:6] == ["0/1", "0/1", "4/1", "10/1", "20/1", "34/1"]
    assert exit_code(report) == EXIT_OK


def test_polygon_only_triangle():
    report = run_verify(config_from_dict(TRIANGLE))
    v = report["verdicts"]["polygon_comparison"]
    assert v["status"] == CONSISTENT
    assert v["equality_at_volume"] is True and v["normalized_volume"] == 6
    assert 6 in v["equality_abscissae"]


def test_fault_injection_yields_violation_with_reproducer():
    data = compute(config_from_dict(X3X))
    coeffs = list(data.direct.C.coeffs)
    c = coeffs[3]
    coeffs[3] = TruncatedSeries(c.p, c.M, (1,) + c.coeffs[1:])
    data.direct.C = SPolynomial(tuple(coeffs))
    report = assess(data)
    assert report["status"] == VIOLATION
    assert exit_code(report) == EXIT_VIOLATION
    v = report["verdicts"]["arithmetic_bound"]
    assert v["status"] == VIOLATION and v["violations"][0]["m"] == 3
    assert v["reproducer"]["instance"]["p"] == "11"
    assert report["verdicts"]["cross_engine"]["status"] == VIOLATION


def test_insufficient_precision_exit_code(monkeypatch):
    monkeypatch.setattr(dwork, "MAX_BASIS", 2)
    report = run_verify(config_from_dict(X3X))
    assert report["verdicts"]["coefficient_bound"]["status"] == INSUFFICIENT
    assert "exceeds cap" in report["verdicts"]["coefficient_bound"]["reason"]
    assert report["status"] == INSUFFICIENT
    assert exit_code(report) == EXIT_INSUFFICIENT


def test_marker_semantics():
    pts = NewtonPointSet([(0, 0), (1, AtLeast(2)), (2, 7)])
    rep = check_points_against(pts, lambda m: 3 * m)
    assert rep["status"] == INSUFFICIENT and rep["undecided"] == [1]
    assert rep["certified_range"] == [0, 0]
    rep = check_points_against(pts, lambda m: 2 * m)
    assert rep["status"] == CONSISTENT and rep["certified_range"] == [0, 2]
    rep = check_points_against(pts, lambda m: m * m + 2)
    assert rep["status"] == VIOLATION and rep["violations"][0]["m"] == 0


def test_deterministic_reports():
    cfg = config_from_dict(X3X)
    a = json.dumps(run_verify(cfg), indent=2)
    b = json.dumps(run_verify(cfg), indent=2)
    assert a == b


def test_small_prime_checks_are_skipped():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = config_from_dict(
            {"vertices": [[0], [1]], "p": 3, "coefficients": [{"u": [1], "a": 1}], "precision": {"M_target": 2, "N": 6, "K": 4}}
        )
    report = run_verify(cfg)
    assert report["verdicts"]["arithmetic_bound"]["status"] == "skipped"
    assert report["verdicts"]["cross_engine"]["status"] == CONSISTENT


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps(X3X))
    return path


def test_cli_verify_writes_outputs(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["verify", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["np.csv", "polygon_arithmetic.csv", "polygon_hodge.csv", "polygon_hodge_scaled.csv", "verify_report.json"]
    report = json.loads((out / "verify_report.json").read_text())
    assert report["status"] == CONSISTENT
    rows = list(csv.reader((out / "np.csv").open()))
    assert rows[0] == ["i", "ord_or_marker"] and rows[4] == ["3", "10"]
    assert "certified-consistent" in capsys.readouterr().out


def test_cli_cfunction_and_dwork(config_file, tmp_path):
    out = tmp_path / "cf"
    assert cli.main(["cfunction", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "cfunction.json").read_text())
    assert payload["C"][0]["residues"][0] == "1"
    assert (out / "np.csv").exists()
    assert cli.main(["dwork", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "dwork_report.json").read_text())
    assert report["comparison_vs_direct"] == "agree"
    assert report["entry_bounds"]["ok"] is True


def test_cli_sum_and_polygons(config_file, tmp_path, capsys):
    assert cli.main(["sum", "--config", str(config_file), "--k", "1"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["sums"]["1"]["residues"][0] == "10"
    assert cli.main(["polygons", "--config", str(config_file), "--emit", "json"]) == EXIT_OK
    poly = json.loads(capsys.readouterr().out)
    assert poly["arithmetic_slopes"][:5] == ["0/1", "4/1", "6/1", "10/1", "14/1"]


def test_cli_catalog(tmp_path, capsys):
    code = cli.main(["catalog"])
    rows = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and len(rows) == 22
    cli.main(["catalog", "--out", str(tmp_path)])
    assert (tmp_path / "interval-1-p5.json").exists()


def test_cli_error_reporting(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(dict(X3X, p="12")))
    assert cli.main(["verify", "--config", str(path)]) == cli.EXIT_ERROR
    assert "not prime" in capsys.readouterr().err
