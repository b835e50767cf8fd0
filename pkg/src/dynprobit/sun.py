"""Unified skew-normal form of the smoothing distribution and its exact sampler.

Given y_{1:n}, the stacked states follow SUN(0, Omega, Delta, 0, Gamma) with

    s     = diag(D Omega D' + I)^{1/2}
    Gamma = s^{-1} (D Omega D' + I) s^{-1}
    Delta = Omega_bar omega D' s^{-1}

and the additive representation theta = omega (U0 + Delta Gamma^{-1} U1),
U0 ~ N(0, Omega_bar - Delta Gamma^{-1} Delta'), U1 ~ N(0, Gamma) truncated
to the positive orthant.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._linalg import jittered_cholesky, symmetrize
from .errors import DegenerateModelError, InvalidInputError
from .model import DesignMatrices, PriorCovariance
from .truncnorm import OrthantSamplerConfig, sample_orthant_tmvn

METHODS = ("iid", "pfm", "mf", "oracle")
_SAMPLING = ("iid", "oracle")


@dataclass(frozen=True)
class MomentSummary:
    """Posterior means and marginal sds of theta_{1:n}, with provenance."""

    mean: np.ndarray
    sd: np.ndarray
    method: str
    mc_se_mean: np.ndarray | None = None
    mc_se_sd: np.ndarray | None = None
    draws: int | None = None
    wall_time_seconds: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if np.any(self.sd < 0):
            raise ValueError("standard deviations must be nonnegative")
        if (self.mc_se_mean is not None) != (self.method in _SAMPLING):
            raise ValueError("mc_se_mean is required exactly for sampling-based methods")
        if self.wall_time_seconds < 0:
            raise ValueError("wall time must be nonnegative")

    def by_time(self, p):
        """(mean, sd) reshaped to (n, p)."""
        return self.mean.reshape(-1, p), self.sd.reshape(-1, p)


@dataclass(frozen=True)
class SunParams:
    """SUN parameters of the joint smoothing distribution.

    ``omega`` and ``s`` hold the diagonals of the scale matrices; the
    location ``xi`` and truncation shift ``gamma_vec`` are zero.
    """

    Omega: np.ndarray
    OmegaBar: np.ndarray
    omega: np.ndarray
    Delta: np.ndarray
    Gamma: np.ndarray
    s: np.ndarray

    @property
    def xi(self):
        return np.zeros(self.Omega.shape[0])

    @property
    def gamma_vec(self):
        return np.zeros(self.Gamma.shape[0])


def compute_sun_params(prior: PriorCovariance, design: DesignMatrices) -> SunParams:
    Omega = prior.Omega
    D = design.D
    if D.shape[1] != Omega.shape[0]:
        raise InvalidInputError(f"design has {D.shape[1]} columns, prior has dimension {Omega.shape[0]}")
    dvar = np.diag(Omega)
    if np.any(dvar <= 0):
        bad = int(np.argmin(dvar))
        raise DegenerateModelError(
            f"state coordinate {bad % prior.p + 1} at t={bad // prior.p + 1} has zero prior variance"
        )
    omega = np.sqrt(dvar)
    omega_bar = symmetrize(Omega / np.outer(omega, omega))
    np.fill_diagonal(omega_bar, 1.0)
    od = Omega @ D.T
    S = symmetrize(D @ od) + np.eye(D.shape[0])
    s = np.sqrt(np.diag(S))
    gamma = symmetrize(S / np.outer(s, s))
    np.fill_diagonal(gamma, 1.0)
    # Omega_bar omega = omega^{-1} Omega
    delta = od / omega[:, None] / s[None, :]
    return SunParams(Omega=Omega, OmegaBar=omega_bar, omega=omega, Delta=delta, Gamma=gamma, s=s)


@dataclass(frozen=True)
class SmoothingDraws:
    draws: np.ndarray
    diagnostics: dict
    wall_time_seconds: float


def sample_smoothing_iid(params: SunParams, R: int, config: OrthantSamplerConfig | None = None) -> SmoothingDraws:
    """R draws of theta_{1:n} | y_{1:n} through the additive representation.

    The Gaussian part and the truncated part use independent streams spawned
    from ``config.seed``. Draws are exactly i.i.d. when the orthant sampler
    runs in rejection mode.
    """
    if R < 1:
        raise InvalidInputError("R must be positive")
    config = config or OrthantSamplerConfig()
    start = time.perf_counter()
    gauss_ss, orth_ss = np.random.SeedSequence(config.seed).spawn(2)
    gamma_chol, gamma_jitter = jittered_cholesky(params.Gamma)
    # Delta Gamma^{-1}, via a Cholesky solve
    a = linalg.cho_solve((gamma_chol, True), params.Delta.T).T
    cond_cov = symmetrize(params.OmegaBar - a @ params.Delta.T)
    cond_chol, cond_jitter = jittered_cholesky(cond_cov)

    orth_cfg = OrthantSamplerConfig(
        strategy=config.strategy,
        burn_in=config.burn_in,
        thinning=config.thinning,
        max_rejection_attempts=config.max_rejection_attempts,
        seed=int(orth_ss.generate_state(1)[0]),
    )
    orth = sample_orthant_tmvn(params.Gamma, R, orth_cfg)
    u0 = np.random.default_rng(gauss_ss).standard_normal((R, params.Omega.shape[0])) @ cond_chol.T
    theta = (u0 + orth.draws @ a.T) * params.omega
    diag = dict(orth.diagnostics())
    diag["gamma_jitter"] = gamma_jitter
    diag["conditional_jitter"] = cond_jitter
    return SmoothingDraws(draws=theta, diagnostics=diag, wall_time_seconds=time.perf_counter() - start)


def _sd_se(centered, sd):
    """Delta-method standard error of a sample standard deviation."""
    r = centered.shape[0]
    var = sd * sd
    m4 = np.mean(centered**4, axis=0)
    se_var = np.sqrt(np.maximum(m4 - var * var, 0.0) / r)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sd > 0, se_var / (2.0 * sd), 0.0)


def estimate_moments(draws, method="iid", wall_time_seconds=0.0, diagnostics=None) -> MomentSummary:
    """Sample mean, unbiased sd, and Monte Carlo standard errors of draws (R, d)."""
    if isinstance(draws, SmoothingDraws):
        diagnostics = diagnostics or draws.diagnostics
        wall_time_seconds = wall_time_seconds or draws.wall_time_seconds
        draws = draws.draws
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.ndim != 2 or draws.shape[0] < 2:
        raise InvalidInputError("need at least two draws")
    r = draws.shape[0]
    mean = draws.mean(axis=0)
    centered = draws - mean
    sd = np.sqrt(np.sum(centered**2, axis=0) / (r - 1))
    return MomentSummary(
        mean=mean,
        sd=sd,
        method=method,
        mc_se_mean=sd / np.sqrt(r) if method in _SAMPLING else None,
        mc_se_sd=_sd_se(centered, sd),
        draws=r,
        wall_time_seconds=wall_time_seconds,
        diagnostics=dict(diagnostics or {}),
    )
