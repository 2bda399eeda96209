"""Experiment runners: seeded sweeps that return (header, rows) tables.

RNG stream derivation (stable across versions): trial t of an experiment with
master seed m draws from seed sequences with entropy [m, t, slot], where slot
0 seeds the shift model / subspace pair, slot 1 the ground truth, slot 2 the
covariates, slot 3 the labels, and slot 16 + j the j-th grid point (Monte
Carlo sub-draws at a grid point use children of that sequence in documented
order).  Rows are accumulated per task and sorted on a documented key before
writing, so output bytes are identical for any execution schedule.

CSV columns per kind:
  regression-sweep:     trial,model,lambda,risk_p,risk_q,risk_q_pred,gamma,mu,kappa
  classification-sweep: trial,model,lambda,risk_p,risk_q,risk_q_pred,converged
  relation-curves:      curve,mu,kappa_over_gamma,risk_p,risk_q
  denoise:              a_target,a_realized,snr,lambda,risk_p,risk_q,alpha,residual
  counterexample:       metric,a,risk_p,se_p,risk_q,se_q
  cs-validate:          matrix,n,trial,residual,ipp_max_dev
  subspace-analyze:     k,sv_1,sv_2,similarity
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from riskshift._rng import child_sequence
from riskshift.datagen import (
    Dataset,
    LinearGaussian,
    NoiselessLinear,
    NoisySign,
    label,
    sample_beta,
    sample_covariates,
)
from riskshift.errors import NumericInputError
from riskshift.estimators import ERMConfig, Loss, erm_fit, ridge_fit
from riskshift.harness.config import (
    KIND_CLASSIFICATION,
    KIND_COUNTEREXAMPLE,
    KIND_CS,
    KIND_DENOISE,
    KIND_REGRESSION,
    KIND_RELATION,
    KIND_SUBSPACE,
)
from riskshift.inverse import (
    InverseProblem,
    cs_operator,
    cs_relation_residual,
    denoise_relation_residual,
    denoise_risks,
    gaussian_measurement,
    inner_product_preservation_stats,
)
from riskshift.risk import (
    MetricKind,
    decision_cov,
    mc_metric_risk,
    misclassification_risk,
    squared_risk,
)
from riskshift.shiftmodel import (
    ShiftParameters,
    shift_parameters,
    subspace_shift_model,
    task_dependent_model,
)
from riskshift.subspace import (
    OrthonormalBasis,
    SubspacePairSpec,
    overlap_coefficient,
    overlapping_pair,
    principal_angles,
    subspace_similarity,
)
from riskshift.theory import (
    AsymParams,
    asymptotic_decision_cov,
    classification_relation,
    regression_relation,
)

_GRID_SLOT_BASE = 16


def stream(master_seed, trial, slot):
    """Seed sequence for (trial, slot); see the module docstring for the slot table."""
    return np.random.SeedSequence([int(master_seed), int(trial), int(slot)])


def grid_stream(master_seed, trial, grid_index):
    return stream(master_seed, trial, _GRID_SLOT_BASE + int(grid_index))


@dataclass(frozen=True)
class SweepRow:
    """One measured point of a risk sweep."""

    trial: int
    model: str
    lam: float
    risk_p: float
    risk_q: float
    risk_q_pred: float
    extra: tuple = ()

    def __post_init__(self):
        numbers = (self.lam, self.risk_p, self.risk_q, self.risk_q_pred)
        if not all(math.isfinite(t) for t in numbers):
            raise NumericInputError(f"sweep row contains non-finite numbers: {numbers}")
        if self.risk_p < 0 or self.risk_q < 0:
            raise NumericInputError("risks must be nonnegative")


def _format_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if not math.isfinite(x):
        raise NumericInputError(f"refusing to serialize non-finite value {x}")
    return f"{x:.17g}"


def write_csv(path, header, rows):
    """CSV with LF newlines and 17 significant digits for floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row[name]) for name in header) + "\n")


def _sweep_row_dicts(rows, extra_names):
    out = []
    for r in rows:
        record = {
            "trial": r.trial,
            "model": r.model,
            "lambda": r.lam,
            "risk_p": r.risk_p,
            "risk_q": r.risk_q,
            "risk_q_pred": r.risk_q_pred,
        }
        record.update(dict(r.extra))
        for name in extra_names:
            if name not in record:
                raise NumericInputError(f"sweep row missing extra column '{name}'")
        out.append(record)
    return out


def run_regression_sweep(config):
    """Ridge sweeps under additive-noise labels, squared risks on both laws."""
    ms = config["master_seed"]
    spec = SubspacePairSpec(config["d"], config["d_p"], config["d_q"], config["d_pq"])
    noise_sigma = math.sqrt(config["noise_var"])
    rows = []
    for t in range(config["trials"]):
        pair = subspace_shift_model(spec, config["tau"], stream(ms, t, 0))
        gt = sample_beta(config["d"], config["sigma_beta_sq"], stream(ms, t, 1))
        # scale the plug-ins by the realized support energy rather than the
        # nominal per-coordinate variance: gamma then matches the realized
        # bias amplification and the intercept equals the realized
        # off-support energy under Sigma_Q, so the prediction is free of the
        # O(d^-1/2) ground-truth-norm fluctuation
        support_ms = pair.quad_form("P", gt.beta_star) / pair.d_p
        shift = shift_parameters(pair, gt.beta_star, support_ms)
        # the affine squared-risk map needs gamma = kappa exactly; for this
        # model class they differ only by finite-d fluctuation, so the
        # prediction uses the gamma plug-in for both
        shift_pred = dataclasses.replace(shift, kappa=shift.gamma)
        x = sample_covariates(pair, "P", config["n"], stream(ms, t, 2))
        y = label(x, gt, LinearGaussian(noise_sigma), stream(ms, t, 3))
        data = Dataset(x, y)
        for lam in config["lambda_grid"]:
            fit = ridge_fit(data, lam)
            cov_p = decision_cov(gt.beta_star, fit.beta_hat, pair, "P")
            cov_q = decision_cov(gt.beta_star, fit.beta_hat, pair, "Q")
            risk_p = squared_risk(cov_p)
            risk_q = squared_risk(cov_q)
            rows.append(
                SweepRow(
                    trial=t,
                    model="ridge",
                    lam=lam,
                    risk_p=risk_p,
                    risk_q=risk_q,
                    risk_q_pred=regression_relation(risk_p, shift_pred),
                    extra=(
                        ("gamma", shift.gamma),
                        ("mu", shift.mu),
                        ("kappa", shift.kappa),
                    ),
                )
            )
    rows.sort(key=lambda r: (r.trial, r.model, r.lam))
    header = ["trial", "model", "lambda", "risk_p", "risk_q", "risk_q_pred", "gamma", "mu", "kappa"]
    return header, _sweep_row_dicts(rows, ("gamma", "mu", "kappa"))


def run_classification_sweep(config):
    """Three model families on sign labels, misclassification risks on both laws.

    Families: ridge on noisy signs, logistic ERM on the same labels (warm-started
    up the lambda grid), and ridge on noiseless linear scores.  Per trial, extra
    rows tagged model="theory" tabulate the predicted test risk over a fixed
    train-risk grid using that trial's realized shift parameters.
    """
    ms = config["master_seed"]
    spec = SubspacePairSpec(config["d"], config["d_p"], config["d_q"], config["d_pq"])
    rows = []
    for t in range(config["trials"]):
        pair = subspace_shift_model(spec, config["tau"], stream(ms, t, 0))
        gt = sample_beta(config["d"], config["sigma_beta_sq"], stream(ms, t, 1))
        if config["task_dependent"]:
            base = shift_parameters(pair, gt.beta_star, gt.sigma_beta_sq)
            pair = task_dependent_model(
                pair,
                gt.beta_star,
                target_ratio=config["kappa_over_gamma"],
                target_gamma=base.gamma,
                sigma_beta_sq=gt.sigma_beta_sq,
            )
        shift = shift_parameters(pair, gt.beta_star, gt.sigma_beta_sq)
        x = sample_covariates(pair, "P", config["n"], stream(ms, t, 2))
        y_sign = label(x, gt, NoisySign(config["sign_correct_prob"]), stream(ms, t, 3))
        y_clean = label(x, gt, NoiselessLinear(), stream(ms, t, 3))
        data_sign = Dataset(x, y_sign)
        data_clean = Dataset(x, y_clean)

        def emit(model, lam, beta_hat, converged):
            cov_p = decision_cov(gt.beta_star, beta_hat, pair, "P")
            cov_q = decision_cov(gt.beta_star, beta_hat, pair, "Q")
            risk_p = misclassification_risk(cov_p)
            rows.append(
                SweepRow(
                    trial=t,
                    model=model,
                    lam=lam,
                    risk_p=risk_p,
                    risk_q=misclassification_risk(cov_q),
                    risk_q_pred=classification_relation(risk_p, shift),
                    extra=(("converged", converged),),
                )
            )

        warm = None
        for lam in config["lambda_grid"]:
            emit("ridge-sign", lam, ridge_fit(data_sign, lam).beta_hat, True)
            emit("ridge-noiseless", lam, ridge_fit(data_clean, lam).beta_hat, True)
            fit = erm_fit(data_sign, ERMConfig(loss=Loss.LOGISTIC, lam=lam), beta0=warm)
            warm = fit.beta_hat
            emit("logistic-sign", lam, fit.beta_hat, fit.converged)
        for risk_p in np.linspace(0.01, 0.49, config["theory_points"]):
            pred = classification_relation(float(risk_p), shift)
            rows.append(
                SweepRow(
                    trial=t,
                    model="theory",
                    lam=0.0,
                    risk_p=float(risk_p),
                    risk_q=pred,
                    risk_q_pred=pred,
                    extra=(("converged", True),),
                )
            )
    rows.sort(key=lambda r: (r.trial, r.model, r.lam, r.risk_p))
    header = ["trial", "model", "lambda", "risk_p", "risk_q", "risk_q_pred", "converged"]
    return header, _sweep_row_dicts(rows, ("converged",))


def run_relation_curves(config):
    """Tabulated theory curves: risk_q versus risk_p for mu and kappa/gamma grids."""
    grid = np.linspace(config["risk_p_min"], config["risk_p_max"], config["risk_p_points"])
    rows = []
    for mu in config["mu_grid"]:
        shift = ShiftParameters(
            gamma=1.0, mu=mu, kappa=1.0, r_p=config["r_p"], sigma_beta_sq=config["sigma_beta_sq"]
        )
        for risk_p in grid:
            rows.append(
                {
                    "curve": "mu",
                    "mu": mu,
                    "kappa_over_gamma": 1.0,
                    "risk_p": float(risk_p),
                    "risk_q": classification_relation(float(risk_p), shift),
                }
            )
    for ratio in config["ratio_grid"]:
        shift = ShiftParameters(
            gamma=1.0,
            mu=config["mu_fixed"],
            kappa=ratio,
            r_p=config["r_p"],
            sigma_beta_sq=config["sigma_beta_sq"],
        )
        for risk_p in grid:
            rows.append(
                {
                    "curve": "ratio",
                    "mu": config["mu_fixed"],
                    "kappa_over_gamma": ratio,
                    "risk_p": float(risk_p),
                    "risk_q": classification_relation(float(risk_p), shift),
                }
            )
    rows.sort(key=lambda r: (r["curve"], r["mu"], r["kappa_over_gamma"], r["risk_p"]))
    header = ["curve", "mu", "kappa_over_gamma", "risk_p", "risk_q"]
    return header, rows


def run_denoising(config):
    """Closed-form denoising risk trajectories over lambda, with identity residuals."""
    ms = config["master_seed"]
    d, d_p, d_q = config["d"], config["d_p"], config["d_q"]
    rows = []
    for i, a_target in enumerate(config["a_grid"]):
        d_pq = int(round(a_target * d_q))
        u_p, u_q = overlapping_pair(SubspacePairSpec(d, d_p, d_q, d_pq), stream(ms, 0, _GRID_SLOT_BASE + i))
        a_realized = overlap_coefficient(principal_angles(u_p, u_q), d_q)
        for snr in config["snr_grid"]:
            noise = 1.0 / snr
            for lam in config["lambda_grid"]:
                problem = InverseProblem(
                    u_p=u_p, u_q=u_q, sigma_p_sq=noise, sigma_q_sq=noise, lam=lam
                )
                risk_p, risk_q, alpha = denoise_risks(problem)
                rows.append(
                    {
                        "a_target": a_target,
                        "a_realized": a_realized,
                        "snr": snr,
                        "lambda": lam,
                        "risk_p": risk_p,
                        "risk_q": risk_q,
                        "alpha": alpha,
                        "residual": denoise_relation_residual(problem),
                    }
                )
    rows.sort(key=lambda r: (r["a_target"], r["snr"], r["lambda"]))
    header = ["a_target", "a_realized", "snr", "lambda", "risk_p", "risk_q", "alpha", "residual"]
    return header, rows


_COUNTEREXAMPLE_METRICS = (
    ("misclassification", None),
    ("logistic", MetricKind.LOGISTIC),
    ("hinge", MetricKind.HINGE),
)


def run_counterexample(config):
    """Parametric (risk_p, risk_q) curves of the estimator family along alignment a.

    Misclassification rows are closed form (zero standard errors); logistic and
    hinge rows are Monte Carlo.  At grid point j, the four MC runs use children
    0-3 of the grid stream: (logistic, P), (logistic, Q), (hinge, P), (hinge, Q).
    """
    ms = config["master_seed"]
    shift = ShiftParameters(
        gamma=config["gamma"],
        mu=config["mu"],
        kappa=config["kappa"],
        r_p=config["r_p"],
        sigma_beta_sq=config["sigma_beta_sq"],
    )
    a_grid = np.geomspace(config["a_min"], config["a_max"], config["a_points"])
    draws = config["mc_draws"]
    rows = []
    for j, a in enumerate(a_grid):
        cov_p, cov_q = asymptotic_decision_cov(
            AsymParams(a=float(a), b=config["b"], c=config["c"]), shift
        )
        rows.append(
            {
                "metric": "misclassification",
                "a": float(a),
                "risk_p": misclassification_risk(cov_p),
                "se_p": 0.0,
                "risk_q": misclassification_risk(cov_q),
                "se_q": 0.0,
            }
        )
        point = grid_stream(ms, 0, j)
        for m_index, (name, metric) in enumerate(_COUNTEREXAMPLE_METRICS[1:]):
            est_p, se_p = mc_metric_risk(cov_p, metric, draws, child_sequence(point, 2 * m_index))
            est_q, se_q = mc_metric_risk(cov_q, metric, draws, child_sequence(point, 2 * m_index + 1))
            rows.append(
                {
                    "metric": name,
                    "a": float(a),
                    "risk_p": est_p,
                    "se_p": se_p,
                    "risk_q": est_q,
                    "se_q": se_q,
                }
            )
    rows.sort(key=lambda r: (r["metric"], r["a"]))
    header = ["metric", "a", "risk_p", "se_p", "risk_q", "se_q"]
    return header, rows


def run_cs_validation(config):
    """Relation residual and inner-product preservation across measurement counts."""
    ms = config["master_seed"]
    spec = SubspacePairSpec(config["d"], config["d_p"], config["d_q"], config["d_pq"])
    noise = 1.0 / config["snr"]
    rows = []
    for t in range(config["trials"]):
        u_p, u_q = overlapping_pair(spec, stream(ms, t, 0))
        problem = InverseProblem(
            u_p=u_p, u_q=u_q, sigma_p_sq=noise, sigma_q_sq=noise, lam=config["lambda"]
        )
        vectors = np.hstack([u_p.columns, u_q.columns])
        for i, n in enumerate(config["n_grid"]):
            a_matrix = gaussian_measurement(n, config["d"], stream(ms, t, _GRID_SLOT_BASE + i))
            op = cs_operator(a_matrix, problem)
            rows.append(
                {
                    "matrix": "gaussian",
                    "n": int(n),
                    "trial": t,
                    "residual": cs_relation_residual(op, problem),
                    "ipp_max_dev": inner_product_preservation_stats(a_matrix, vectors),
                }
            )
        if config["include_identity"]:
            identity = np.eye(config["d"])
            op = cs_operator(identity, problem)
            rows.append(
                {
                    "matrix": "identity",
                    "n": config["d"],
                    "trial": t,
                    "residual": cs_relation_residual(op, problem),
                    "ipp_max_dev": inner_product_preservation_stats(identity, vectors),
                }
            )
    rows.sort(key=lambda r: (r["matrix"], r["n"], r["trial"]))
    header = ["matrix", "n", "trial", "residual", "ipp_max_dev"]
    return header, rows


def _load_matrix(path):
    for kwargs in ({}, {"delimiter": ","}):
        try:
            matrix = np.loadtxt(path, ndmin=2, **kwargs)
        except OSError:
            raise
        except ValueError:
            continue
        if matrix.size == 0:
            raise OSError(f"input file {path} contains no numeric data")
        return matrix
    raise OSError(f"cannot parse a numeric matrix from {path} (whitespace or comma delimited)")


def run_subspace_analyze(config):
    """Spectra and top-k principal-subspace similarity of two sample matrices."""
    m_p = _load_matrix(config["input_p"])
    m_q = _load_matrix(config["input_q"])
    if m_p.shape[1] != m_q.shape[1]:
        raise NumericInputError(
            f"inputs have different feature dimensions: {m_p.shape[1]} vs {m_q.shape[1]}"
        )
    centered_p = m_p - np.mean(m_p, axis=0)
    centered_q = m_q - np.mean(m_q, axis=0)
    sv_p, vt_p = np.linalg.svd(centered_p, full_matrices=False)[1:]
    sv_q, vt_q = np.linalg.svd(centered_q, full_matrices=False)[1:]
    available = min(len(sv_p), len(sv_q))
    k_max = available if config["k_max"] == 0 else min(config["k_max"], available)
    rows = []
    for k in range(1, k_max + 1):
        basis_p = OrthonormalBasis(vt_p[:k].T)
        basis_q = OrthonormalBasis(vt_q[:k].T)
        sim = subspace_similarity(principal_angles(basis_p, basis_q), k)
        rows.append(
            {
                "k": k,
                "sv_1": float(sv_p[k - 1]),
                "sv_2": float(sv_q[k - 1]),
                "similarity": sim,
            }
        )
    header = ["k", "sv_1", "sv_2", "similarity"]
    return header, rows


RUNNERS = {
    KIND_REGRESSION: run_regression_sweep,
    KIND_CLASSIFICATION: run_classification_sweep,
    KIND_RELATION: run_relation_curves,
    KIND_DENOISE: run_denoising,
    KIND_COUNTEREXAMPLE: run_counterexample,
    KIND_CS: run_cs_validation,
    KIND_SUBSPACE: run_subspace_analyze,
}


def run_and_write(config):
    """Execute the configured runner and write its CSV; returns (path, row count)."""
    header, rows = RUNNERS[config.kind](config)
    path = config["output_path"]
    write_csv(path, header, rows)
    return path, len(rows)
