"""Brute-force importance-sampling reference for small models.

Proposes from the prior N(0, Omega) and weights by the probit likelihood
prod_t Phi((D theta)_t). Only meant for validation at n of a handful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from ._linalg import jittered_cholesky
from .errors import DegenerateWeightsError, InvalidInputError
from .model import DesignMatrices, PriorCovariance
from .sun import MomentSummary
from .truncnorm import _log_ndtr

MIN_ESS = 50.0


@dataclass(frozen=True)
class OracleResult:
    mean: np.ndarray
    sd: np.ndarray
    mc_se_mean: np.ndarray
    mc_se_sd: np.ndarray
    log_marginal_likelihood: float
    log_marginal_likelihood_se: float
    effective_sample_size: float
    draws: int

    def summary(self) -> MomentSummary:
        return MomentSummary(
            mean=self.mean,
            sd=self.sd,
            method="oracle",
            mc_se_mean=self.mc_se_mean,
            mc_se_sd=self.mc_se_sd,
            draws=self.draws,
            diagnostics={"effective_sample_size": self.effective_sample_size},
        )


def is_moments(prior: PriorCovariance, design: DesignMatrices, S: int, seed: int) -> OracleResult:
    """Self-normalized importance-sampling moments and log marginal likelihood.

    Standard errors use the delta method for ratio estimators. Raises
    :class:`DegenerateWeightsError` when the effective sample size drops
    below 50.
    """
    if S < 2:
        raise InvalidInputError("S must be at least 2")
    omega = prior.Omega
    D = design.D
    if D.shape[1] != omega.shape[0]:
        raise InvalidInputError("design and prior dimensions differ")
    chol, _ = jittered_cholesky(omega)
    theta = np.random.default_rng(seed).standard_normal((S, omega.shape[0])) @ chol.T
    logw = _log_ndtr(theta @ D.T).sum(axis=1)
    top = np.max(logw)
    if not np.isfinite(top):
        raise DegenerateWeightsError("all importance weights underflowed; increase S")
    w = np.exp(logw - top)
    total = w.sum()
    wn = w / total
    ess = 1.0 / np.sum(wn**2)
    if ess < MIN_ESS:
        raise DegenerateWeightsError(f"effective sample size {ess:.1f} < {MIN_ESS:.0f}; increase S")

    mean = wn @ theta
    centered = theta - mean
    sq = centered**2
    var = wn @ sq
    sd = np.sqrt(var)
    se_mean = np.sqrt(wn**2 @ sq)
    se_var = np.sqrt(wn**2 @ (sq - var) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        se_sd = np.where(sd > 0, se_var / (2.0 * sd), 0.0)

    log_ml = float(top + np.log(total) - np.log(S))
    wbar = total / S
    log_ml_se = float(np.std(w, ddof=1) / (np.sqrt(S) * wbar))
    return OracleResult(
        mean=mean,
        sd=sd,
        mc_se_mean=se_mean,
        mc_se_sd=se_sd,
        log_marginal_likelihood=log_ml,
        log_marginal_likelihood_se=log_ml_se,
        effective_sample_size=float(ess),
        draws=S,
    )
