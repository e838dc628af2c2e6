"""Seventeen interval estimates for the correlation of a bivariate normal."""

__version__ = "0.1.0"

from .analytic import (
    fisher_z_ci,
    haddad_provost_ci,
    hotelling_ci,
    jeyaratnam_ci,
    muddapur_t_ci,
    ruben_ci,
    withers_nadarajah_ci,
)
from .core import (
    ALL_METHODS,
    ConfidenceInterval,
    DegenerateDataError,
    DomainError,
    MethodFailure,
    MethodId,
    NotApplicableError,
    NumericError,
)
from .distributions import RngStream
from .exact import exact_cdf, exact_ci, exact_density
from .harness import SimConfig, SimResult, lognormal_rho_star, run_cell, run_grid, to_csv
from .likelihood import lr_ci, modified_signed_lr, signed_lr
from .methods import compute_all, compute_interval
from .montecarlo import MCConfig, kx_ci, new_gci, pb_ci, pb_sample_r
from .summary import SuffStats, stats_from_r, suff_stats

__all__ = [
    "ALL_METHODS", "ConfidenceInterval", "DegenerateDataError", "DomainError", "MCConfig",
    "MethodFailure", "MethodId", "NotApplicableError", "NumericError", "RngStream", "SimConfig",
    "SimResult", "SuffStats", "compute_all", "compute_interval", "exact_cdf", "exact_ci",
    "exact_density", "fisher_z_ci", "haddad_provost_ci", "hotelling_ci", "jeyaratnam_ci",
    "kx_ci", "lognormal_rho_star", "lr_ci", "modified_signed_lr", "muddapur_t_ci", "new_gci",
    "pb_ci", "pb_sample_r", "ruben_ci", "run_cell", "run_grid", "signed_lr", "stats_from_r",
    "suff_stats", "to_csv", "withers_nadarajah_ci",
]
