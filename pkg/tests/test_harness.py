"""Tests for config parsing, experiment runners, CSV output, and the CLI."""

import math

import numpy as np
import pytest

from riskshift.errors import ConfigError
from riskshift.harness.cli import main
from riskshift.harness.config import (
    ALL_KINDS,
    KIND_CLASSIFICATION,
    KIND_COUNTEREXAMPLE,
    KIND_CS,
    KIND_DENOISE,
    KIND_REGRESSION,
    KIND_RELATION,
    KIND_SUBSPACE,
    config_from_mapping,
    describe_keys,
    load_config,
    parse_config_text,
)
from riskshift.harness.runners import (
    run_and_write,
    run_counterexample,
    run_cs_validation,
    run_denoising,
    run_regression_sweep,
    run_relation_curves,
    run_subspace_analyze,
    write_csv,
)
from riskshift.subspace import haar_basis

_SMALL_REGRESSION = {
    "d": "60",
    "n": "120",
    "d_p": "40",
    "d_q": "30",
    "d_pq": "20",
    "trials": "1",
    "lambda_grid": "0.01, 1.0, 100.0",
}


def test_parse_config_text_accepts_comments_and_blanks():
    raw = parse_config_text(
        """
        # a comment line
        kind = denoise   # trailing comment
        d = 100

        master_seed = 7
        """
    )
    assert raw == {"kind": "denoise", "d": "100", "master_seed": "7"}


def test_parse_config_text_rejects_malformed_lines():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("d = 100\nnot a pair\n")
    with pytest.raises(ConfigError, match="duplicate key 'd'"):
        parse_config_text("d = 100\nd = 200\n")
    with pytest.raises(ConfigError, match="empty key"):
        parse_config_text("= 3\n")


def test_config_rejects_unknown_keys_and_kind_mismatch():
    with pytest.raises(ConfigError, match="unknown config key"):
        config_from_mapping(KIND_DENOISE, {"dd": "100"})
    with pytest.raises(ConfigError, match="does not match"):
        config_from_mapping(KIND_DENOISE, {"kind": KIND_RELATION})
    with pytest.raises(ConfigError, match="missing required"):
        config_from_mapping(KIND_SUBSPACE, {"input_p": "x.txt"})
    with pytest.raises(ConfigError, match="expects an integer"):
        config_from_mapping(KIND_DENOISE, {"d": "ten"})
    with pytest.raises(ConfigError, match="invalid subspace dimensions"):
        config_from_mapping(KIND_REGRESSION, {"d_pq": "700"})


def test_config_lambda_grid_exclusive_with_trio():
    cfg = config_from_mapping(KIND_DENOISE, {"lambda_grid": "0.1, 1.0"})
    assert cfg["lambda_grid"] == [0.1, 1.0]
    trio = config_from_mapping(
        KIND_DENOISE, {"lambda_min": "0.1", "lambda_max": "10", "lambda_points": "3"}
    )
    np.testing.assert_allclose(trio["lambda_grid"], [0.1, 1.0, 10.0], rtol=1e-12)
    with pytest.raises(ConfigError, match="not both"):
        config_from_mapping(KIND_DENOISE, {"lambda_grid": "0.1", "lambda_points": "5"})
    with pytest.raises(ConfigError, match="strictly increasing"):
        config_from_mapping(KIND_DENOISE, {"lambda_grid": "1.0, 0.1"})
    with pytest.raises(ConfigError, match="positive"):
        config_from_mapping(KIND_DENOISE, {"lambda_grid": "-1.0, 0.1"})


def test_config_overrides_and_defaults(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("kind = cs-validate\nmaster_seed = 3\n", encoding="utf-8")
    cfg = load_config(path, KIND_CS, seed_override=11, out_override="other.csv")
    assert cfg["master_seed"] == 11
    assert cfg["output_path"] == "other.csv"
    assert cfg["snr"] == 100.0
    with pytest.raises(ConfigError):
        load_config(path, KIND_CS, seed_override=-1)


def test_describe_keys_covers_every_kind():
    for kind in ALL_KINDS:
        rows = describe_keys(kind)
        keys = [k for k, _, _ in rows]
        assert "kind" in keys and "master_seed" in keys and "output_path" in keys
        assert all(help_text for _, _, help_text in rows)


def test_write_csv_17_digits_lf(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["name", "x", "n"], [{"name": "row", "x": 0.1, "n": 3}])
    data = path.read_bytes()
    assert b"\r" not in data
    assert data == b"name,x,n\nrow,0.10000000000000001,3\n"


def test_run_and_write_byte_deterministic(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        cfg = config_from_mapping(
            KIND_REGRESSION, dict(_SMALL_REGRESSION, output_path=str(out))
        )
        path, n_rows = run_and_write(cfg)
        assert str(path) == str(out)
        assert n_rows == 3
    assert out1.read_bytes() == out2.read_bytes()
    # and a different master seed changes the measurements
    cfg = config_from_mapping(
        KIND_REGRESSION, dict(_SMALL_REGRESSION, output_path=str(out2)), seed_override=1
    )
    run_and_write(cfg)
    assert out1.read_bytes() != out2.read_bytes()


def test_regression_sweep_without_shift_keeps_risk():
    cfg = config_from_mapping(
        KIND_REGRESSION,
        dict(_SMALL_REGRESSION, d_p="30", d_q="30", d_pq="30", tau="1.0"),
    )
    header, rows = run_regression_sweep(cfg)
    assert header[:6] == ["trial", "model", "lambda", "risk_p", "risk_q", "risk_q_pred"]
    assert len(rows) == 3
    for row in rows:
        assert row["risk_q"] == pytest.approx(row["risk_p"], abs=1e-10)
        assert row["risk_q_pred"] == pytest.approx(row["risk_p"], abs=1e-10)
        assert row["gamma"] == pytest.approx(1.0, abs=1e-12)
        assert row["mu"] == pytest.approx(1.0, abs=1e-12)


def test_relation_curves_identity_and_ordering():
    cfg = config_from_mapping(
        KIND_RELATION,
        {"mu_grid": "1.0, 1.2", "ratio_grid": "1.0, 2.0", "risk_p_points": "21"},
    )
    header, rows = run_relation_curves(cfg)
    assert header == ["curve", "mu", "kappa_over_gamma", "risk_p", "risk_q"]
    assert len(rows) == 4 * 21
    ident_mu = [r for r in rows if r["curve"] == "mu" and r["mu"] == 1.0]
    ident_ratio = [r for r in rows if r["curve"] == "ratio" and r["kappa_over_gamma"] == 1.0]
    for r in ident_mu + ident_ratio:
        assert r["risk_q"] == pytest.approx(r["risk_p"], abs=1e-12)
    # a harder shift lifts the whole curve
    harder = [r for r in rows if r["curve"] == "ratio" and r["kappa_over_gamma"] == 2.0]
    for hard, base in zip(harder, ident_ratio):
        assert hard["risk_p"] == base["risk_p"]
        assert hard["risk_q"] > base["risk_q"]
    # widening the test spectrum leaves a risk floor at vanishing train risk
    lifted = sorted(
        (r for r in rows if r["curve"] == "mu" and r["mu"] == 1.2), key=lambda r: r["risk_p"]
    )
    floor = math.acos(1.0 / math.sqrt(1.2)) / math.pi
    assert lifted[0]["risk_q"] == pytest.approx(floor, abs=0.005)
    assert lifted[0]["risk_q"] >= floor


def test_denoise_runner_identity_and_high_snr_linearity():
    cfg = config_from_mapping(KIND_DENOISE, {"d": "60", "d_p": "12", "d_q": "12"})
    header, rows = run_denoising(cfg)
    assert header[-1] == "residual"
    assert all(r["residual"] <= 1e-12 for r in rows)
    assert all(r["risk_p"] >= 0 and r["risk_q"] >= 0 for r in rows)
    # full overlap with equal noise and dimensions removes the shift entirely
    for r in rows:
        if r["a_target"] == 1.0:
            assert r["risk_q"] == pytest.approx(r["risk_p"], abs=1e-10)
    # high signal-to-noise curves are near-affine with slope a
    for a in (0.0, 0.5, 1.0):
        pts = np.array(
            [
                (r["risk_p"], r["risk_q"])
                for r in rows
                if r["a_target"] == a and r["snr"] == 100.0
            ]
        )
        (slope, _), res, *_ = np.polyfit(pts[:, 0], pts[:, 1], 1, full=True)
        assert slope == pytest.approx(a, abs=0.02)
        assert (float(res[0]) if res.size else 0.0) <= 1e-3


def test_counterexample_runner_schema_and_identity():
    overrides = {"a_min": "0.5", "a_max": "2.0", "a_points": "5", "mc_draws": "2000"}
    cfg = config_from_mapping(KIND_COUNTEREXAMPLE, overrides)
    header, rows = run_counterexample(cfg)
    assert header == ["metric", "a", "risk_p", "se_p", "risk_q", "se_q"]
    assert len(rows) == 3 * 5
    keys = [(r["metric"], r["a"]) for r in rows]
    assert keys == sorted(keys)
    slope = cfg["kappa"] * cfg["mu"] / cfg["gamma"]
    for r in rows:
        if r["metric"] == "misclassification":
            assert r["se_p"] == 0.0 and r["se_q"] == 0.0
            sec_p = 1.0 / math.cos(math.pi * r["risk_p"]) ** 2
            sec_q = 1.0 / math.cos(math.pi * r["risk_q"]) ** 2
            assert sec_q == pytest.approx(slope * (sec_p - 1.0) + cfg["mu"], abs=1e-9)
        else:
            assert r["se_p"] > 0.0 and r["se_q"] > 0.0
    _, again = run_counterexample(config_from_mapping(KIND_COUNTEREXAMPLE, overrides))
    assert again == rows


def test_cs_validation_runner_identity_control():
    cfg = config_from_mapping(
        KIND_CS,
        {"d": "60", "d_p": "12", "d_q": "12", "d_pq": "6", "n_grid": "60, 240", "trials": "2"},
    )
    header, rows = run_cs_validation(cfg)
    assert header == ["matrix", "n", "trial", "residual", "ipp_max_dev"]
    assert len(rows) == 2 * (2 + 1)
    for r in rows:
        assert r["residual"] >= 0.0 and math.isfinite(r["ipp_max_dev"])
        if r["matrix"] == "identity":
            assert r["residual"] <= 1e-12
            assert r["ipp_max_dev"] <= 1e-12


def _write_subspace_inputs(tmp_path, same=False):
    rng = np.random.default_rng(5)
    d, rank, n = 60, 5, 2000
    rot = haar_basis(d, 2 * rank, seed=6).columns
    files = []
    for j in range(2):
        u = rot[:, :rank] if (same or j == 0) else rot[:, rank:]
        m = rng.standard_normal((n, rank)) @ u.T + 0.01 * rng.standard_normal((n, d))
        path = tmp_path / f"matrix_{j}.txt"
        np.savetxt(path, m)
        files.append(str(path))
    return files


def test_subspace_analyze_identical_and_orthogonal(tmp_path):
    path_p, path_q = _write_subspace_inputs(tmp_path, same=True)
    cfg = config_from_mapping(
        KIND_SUBSPACE, {"input_p": path_p, "input_q": path_p, "k_max": "8"}
    )
    header, rows = run_subspace_analyze(cfg)
    assert header == ["k", "sv_1", "sv_2", "similarity"]
    assert [r["k"] for r in rows] == list(range(1, 9))
    assert all(r["similarity"] == pytest.approx(1.0, abs=1e-9) for r in rows)
    # a clean rank-5 signal shows a sharp spectral gap
    by_k = {r["k"]: r for r in rows}
    assert by_k[6]["sv_1"] / by_k[5]["sv_1"] <= 0.1
    # disjoint signal subspaces barely overlap
    path_p, path_q = _write_subspace_inputs(tmp_path)
    cfg = config_from_mapping(
        KIND_SUBSPACE, {"input_p": path_p, "input_q": path_q, "k_max": "5"}
    )
    _, rows = run_subspace_analyze(cfg)
    assert all(r["similarity"] <= 0.2 for r in rows)


def _cli_config(tmp_path, body):
    path = tmp_path / "run.cfg"
    path.write_text(body, encoding="utf-8")
    return str(path)


def test_cli_success_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "curves.csv"
    cfg = _cli_config(
        tmp_path, f"kind = relation-curves\nrisk_p_points = 5\noutput_path = {out}\n"
    )
    assert main(["relation-curves", "--config", cfg]) == 0
    assert out.exists()
    assert "wrote" in capsys.readouterr().out
    # config errors: unknown key, then kind mismatch
    bad = _cli_config(tmp_path, "kind = relation-curves\nbogus = 1\n")
    assert main(["relation-curves", "--config", bad]) == 2
    assert main(["denoise", "--config", cfg]) == 2
    # missing config file is an IO failure
    assert main(["relation-curves", "--config", str(tmp_path / "absent.cfg")]) == 4
    captured = capsys.readouterr()
    assert "error:" in captured.err


def test_cli_numeric_failure_exit_code(tmp_path, capsys):
    rng = np.random.default_rng(9)
    path_p = tmp_path / "p.txt"
    path_q = tmp_path / "q.txt"
    np.savetxt(path_p, rng.standard_normal((30, 8)))
    np.savetxt(path_q, rng.standard_normal((30, 9)))
    cfg = _cli_config(
        tmp_path,
        f"kind = subspace-analyze\ninput_p = {path_p}\ninput_q = {path_q}\n"
        f"output_path = {tmp_path / 'out.csv'}\n",
    )
    assert main(["subspace-analyze", "--config", cfg]) == 3
    assert "error:" in capsys.readouterr().err


def test_cli_seed_and_out_overrides(tmp_path, capsys):
    out_default = tmp_path / "default.csv"
    cfg = _cli_config(
        tmp_path,
        "kind = regression-sweep\n"
        + "".join(f"{k} = {v}\n" for k, v in _SMALL_REGRESSION.items())
        + f"output_path = {out_default}\n",
    )
    out_other = tmp_path / "other.csv"
    assert main(["regression-sweep", "--config", cfg, "--seed", "5", "--out", str(out_other)]) == 0
    capsys.readouterr()
    assert out_other.exists() and not out_default.exists()
