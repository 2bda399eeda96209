"""Numerical laboratory for risk relationships of linear predictors under covariate shift.

The package is organised around a pipeline: build a covariance pair describing
the train/test shift (`subspace`, `shiftmodel`), draw data and ground truth
(`datagen`), fit ridge or empirical-risk-minimisation estimators
(`estimators`), reduce any estimate to a 2x2 decision covariance and evaluate
risks on it (`risk`), compare against the closed-form risk relations and
monotonicity conditions (`theory`), study the linear inverse-problem
counterparts (`inverse`), and drive reproducible experiment sweeps
(`harness`).
"""

from riskshift._kernels import kernel_backend
from riskshift.datagen import (
    Dataset,
    GroundTruth,
    LinearGaussian,
    NoiselessLinear,
    NoisySign,
    label,
    sample_beta,
    sample_covariates,
)
from riskshift.errors import (
    ConfigError,
    CovarianceError,
    DegenerateDecisionError,
    DegenerateShiftError,
    InvalidDimensionError,
    NumericInputError,
    RelationInapplicableError,
    RiskDomainError,
    RiskshiftError,
    UnreachableRatioError,
)
from riskshift.estimators import ERMConfig, FittedModel, Loss, erm_fit, population_ridge, ridge_fit
from riskshift.inverse import (
    CSOperator,
    DenoiseOperator,
    InverseProblem,
    cs_operator,
    cs_relation_residual,
    cs_risks,
    denoise_operator,
    denoise_relation_residual,
    denoise_risks,
    gaussian_measurement,
    inner_product_preservation_stats,
)
from riskshift.risk import (
    DecisionCov,
    MetricKind,
    decision_cov,
    mc_metric_risk,
    misclassification_risk,
    population_mc_risk,
    squared_risk,
)
from riskshift.shiftmodel import (
    CovariancePair,
    ShiftParameters,
    shift_parameters,
    subspace_shift_model,
    task_dependent_model,
)
from riskshift.subspace import (
    OrthonormalBasis,
    PrincipalAngles,
    SubspacePairSpec,
    haar_basis,
    overlap_coefficient,
    overlapping_pair,
    principal_angles,
    subspace_similarity,
)
from riskshift.theory import (
    AsymParams,
    FunctionalTuple,
    MonotonicityVerdict,
    asymptotic_decision_cov,
    classification_relation,
    classification_relation_inverse,
    covariance_functionals,
    finite_dim_linearity,
    monotonicity_check_classification,
    monotonicity_check_regression,
    population_ridge_risks,
    probit_arctan_gap,
    regression_relation,
)

__version__ = "0.1.0"

__all__ = [
    "AsymParams",
    "CSOperator",
    "ConfigError",
    "CovarianceError",
    "CovariancePair",
    "Dataset",
    "DecisionCov",
    "DegenerateDecisionError",
    "DegenerateShiftError",
    "DenoiseOperator",
    "ERMConfig",
    "FittedModel",
    "FunctionalTuple",
    "GroundTruth",
    "InvalidDimensionError",
    "InverseProblem",
    "LinearGaussian",
    "Loss",
    "MetricKind",
    "MonotonicityVerdict",
    "NoiselessLinear",
    "NoisySign",
    "NumericInputError",
    "OrthonormalBasis",
    "PrincipalAngles",
    "RelationInapplicableError",
    "RiskDomainError",
    "RiskshiftError",
    "ShiftParameters",
    "SubspacePairSpec",
    "UnreachableRatioError",
    "asymptotic_decision_cov",
    "classification_relation",
    "classification_relation_inverse",
    "covariance_functionals",
    "cs_operator",
    "cs_relation_residual",
    "cs_risks",
    "decision_cov",
    "denoise_operator",
    "denoise_relation_residual",
    "denoise_risks",
    "erm_fit",
    "finite_dim_linearity",
    "gaussian_measurement",
    "haar_basis",
    "inner_product_preservation_stats",
    "kernel_backend",
    "label",
    "mc_metric_risk",
    "misclassification_risk",
    "monotonicity_check_classification",
    "monotonicity_check_regression",
    "overlap_coefficient",
    "overlapping_pair",
    "population_mc_risk",
    "population_ridge",
    "population_ridge_risks",
    "principal_angles",
    "probit_arctan_gap",
    "regression_relation",
    "ridge_fit",
    "sample_beta",
    "sample_covariates",
    "shift_parameters",
    "squared_risk",
    "subspace_shift_model",
    "subspace_similarity",
    "task_dependent_model",
]
