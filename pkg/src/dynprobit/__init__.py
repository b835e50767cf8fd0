"""Smoothing in dynamic probit state-space models."""

from .errors import (
    CapacityError,
    DegenerateModelError,
    DegenerateWeightsError,
    DomainError,
    DynProbitError,
    InvalidInputError,
    InvalidSpecError,
    NumericalError,
)
from .mf import MfSolution, mf_fit, mf_moments
from .model import (
    DesignMatrices,
    ModelSpec,
    PriorCovariance,
    Simulation,
    as_binary_series,
    build_design,
    build_prior_covariance,
    simulate_data,
    simulate_paths,
)
from .oracle import OracleResult, is_moments
from .pfm import CaviConfig, PfmSolution, cavi_fit, compute_V, pfm_covariance, pfm_moments, sample_pfm
from .sun import MomentSummary, SmoothingDraws, SunParams, compute_sun_params, estimate_moments, sample_smoothing_iid
from .truncnorm import (
    OrthantSample,
    OrthantSamplerConfig,
    log_normal_cdf,
    mills_inverse,
    normal_cdf,
    sample_orthant_tmvn,
    sample_trunc_norm,
    trunc_norm_mean,
)

__version__ = "0.1.0"
