"""Semi-supervised estimation of population means and average treatment
effects from labeled plus unlabeled covariate samples.

The adjusted least-squares estimators shift the sample mean of the response
by a regression correction toward either the known covariate mean (ideal
setting) or the mean pooled over all covariate rows (ordinary semi-supervised
setting), together with variance estimates, confidence intervals, covariate
basis augmentation, a treatment-effect estimator and a seeded Monte Carlo
harness.
"""

from .ate import AteDataset, AteEstimate, estimate_ate
from .basis import (
    BasisFamily,
    BasisSpec,
    augment,
    default_basis_spec,
    default_q,
    estimate_ls_augmented,
    estimate_ssls_augmented,
    parse_basis_spec,
)
from .errors import (
    ColumnMismatch,
    CsvError,
    DimensionMismatch,
    DimensionOverflow,
    EmptyFile,
    EstimationError,
    InsufficientData,
    InvalidArgs,
    InvalidSpec,
    MissingColumn,
    MissingMu,
    ParseError,
    RankDeficient,
)
from .estimators import (
    Dataset,
    EstimatorKind,
    MeanEstimate,
    RegressionFit,
    TruncationBand,
    estimate_ls,
    estimate_oracle,
    estimate_oracle_ss,
    estimate_sample_mean,
    estimate_ssls,
    fit_regression,
    gaussian_exact_risk,
    truncate_to_band,
    z_quantile,
)
from .linalg import OlsSolution, build_design, ols_solve, sample_cov

__version__ = "0.1.0"

__all__ = [
    "AteDataset",
    "AteEstimate",
    "estimate_ate",
    "BasisFamily",
    "BasisSpec",
    "augment",
    "default_basis_spec",
    "default_q",
    "estimate_ls_augmented",
    "estimate_ssls_augmented",
    "parse_basis_spec",
    "ColumnMismatch",
    "CsvError",
    "DimensionMismatch",
    "DimensionOverflow",
    "EmptyFile",
    "EstimationError",
    "InsufficientData",
    "InvalidArgs",
    "InvalidSpec",
    "MissingColumn",
    "MissingMu",
    "ParseError",
    "RankDeficient",
    "Dataset",
    "EstimatorKind",
    "MeanEstimate",
    "RegressionFit",
    "TruncationBand",
    "estimate_ls",
    "estimate_oracle",
    "estimate_oracle_ss",
    "estimate_sample_mean",
    "estimate_ssls",
    "fit_regression",
    "gaussian_exact_risk",
    "truncate_to_band",
    "z_quantile",
    "OlsSolution",
    "build_design",
    "ols_solve",
    "sample_cov",
    "__version__",
]
