"""Partially factorized mean-field variational Bayes for the smoothing distribution.

The approximating family keeps q(theta | z) = N(V X' z, V) exact and
factorizes only the latent utilities, q(z) = prod_i q(z_i). Each optimal
q(z_i) is a univariate normal with scale sigma_i* truncated to the side
given by y_i; the locations mu_i* solve a coupled fixed-point system that
:func:`cavi_fit` resolves by Gauss-Seidel sweeps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import linalg

from ._linalg import check_psd, jittered_cholesky, symmetrize
from .errors import InvalidInputError, NumericalError
from .model import DesignMatrices, PriorCovariance
from .sun import MomentSummary
from .truncnorm import _mills_scalar, sample_trunc_norm


@dataclass(frozen=True)
class CaviConfig:
    tolerance: float = 1e-6
    max_sweeps: int = 10_000
    init_z_bar: np.ndarray | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")


@dataclass(frozen=True)
class PfmSolution:
    """Converged (or last) CAVI state.

    ``deltas`` records max |change in z_bar| for every sweep; ``residual`` is
    the largest violation of the fixed-point equations at the returned state.
    """

    V: np.ndarray
    sigma_star_sq: np.ndarray
    mu_star: np.ndarray
    z_bar: np.ndarray
    iterations: int
    converged: bool
    residual: float
    elapsed_seconds: float
    deltas: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)

    @property
    def trunc_variance(self):
        """Variances of the optimal truncated normals q*(z_i)."""
        return self.sigma_star_sq - (self.z_bar - self.mu_star) * self.z_bar

    def diagnostics(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
        }


def _omega_matrix(prior):
    return prior.Omega if isinstance(prior, PriorCovariance) else np.asarray(prior, dtype=float)


def compute_V(prior, X) -> np.ndarray:
    """(Omega^{-1} + X'X)^{-1} = Omega - Omega X' (I + X Omega X')^{-1} X Omega.

    Omega is never inverted, so singular (PSD) priors are fine.
    """
    omega = _omega_matrix(prior)
    check_psd(omega, "Omega")
    X = np.asarray(X, dtype=float)
    if X.shape[1] != omega.shape[0]:
        raise InvalidInputError(f"X has {X.shape[1]} columns, Omega has dimension {omega.shape[0]}")
    ox = omega @ X.T
    inner = symmetrize(X @ ox) + np.eye(X.shape[0])
    chol = linalg.cho_factor(inner, lower=True)
    return symmetrize(omega - ox @ linalg.cho_solve(chol, ox.T))


def _coupling(V, X):
    K = symmetrize(X @ V @ X.T)
    kdiag = np.diag(K).copy()
    if np.any(kdiag < 0) or np.any(kdiag >= 1):
        raise NumericalError("x_i' V x_i left [0, 1); the prior covariance is ill-conditioned")
    return K, kdiag


@numba.njit(cache=True)
def _sweeps(K, kdiag, sig2, sig, signs, z_bar, mu, deltas, tolerance):
    # Gauss-Seidel sweeps updating z_bar, mu and deltas in place
    n = z_bar.shape[0]
    for sweep in range(deltas.shape[0]):
        biggest = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += K[i, j] * z_bar[j]
            m = sig2[i] * (acc - kdiag[i] * z_bar[i])
            sg = signs[i]
            new = m + sg * sig[i] * _mills_scalar(sg * m / sig[i])
            change = abs(new - z_bar[i])
            if change > biggest:
                biggest = change
            mu[i] = m
            z_bar[i] = new
        deltas[sweep] = biggest
        if biggest < tolerance:
            return sweep + 1, True
    return deltas.shape[0], False


def cavi_fit(prior, design: DesignMatrices, config: CaviConfig | None = None) -> PfmSolution:
    """Optimal PFM-VB factors by coordinate ascent.

    Each sweep visits i = 1..n in order, setting
    mu_i = sigma_i*^2 sum_{j != i} (X V X')_{ij} z_bar_j with the freshest z_bar,
    then z_bar_i to the mean of the truncated normal q*(z_i). Stops when no
    z_bar_i moved by ``tolerance`` or more during a sweep.
    """
    config = config or CaviConfig()
    start = time.perf_counter()
    X = design.X
    n = X.shape[0]
    signs = design.signs
    V = compute_V(prior, X)
    # X V X' holds every coupling X_[i,] V X_[j,]'; O(n) per coordinate update
    K, kdiag = _coupling(V, X)
    sig2 = 1.0 / (1.0 - kdiag)
    sig = np.sqrt(sig2)

    if config.init_z_bar is None:
        z_bar = signs * math.sqrt(2.0 / math.pi)
    else:
        z_bar = np.array(config.init_z_bar, dtype=float)
        if z_bar.shape != (n,):
            raise InvalidInputError(f"init_z_bar must have length {n}")
    mu = np.zeros(n)
    deltas = np.zeros(config.max_sweeps)
    sweeps, converged = _sweeps(K, kdiag, sig2, sig, signs, z_bar, mu, deltas, config.tolerance)
    deltas = deltas[:sweeps]
    residual = float(np.max(np.abs(mu - sig2 * (K @ z_bar - kdiag * z_bar)), initial=0.0))
    return PfmSolution(
        V=V,
        sigma_star_sq=sig2,
        mu_star=mu,
        z_bar=z_bar,
        iterations=sweeps,
        converged=converged,
        residual=residual,
        elapsed_seconds=time.perf_counter() - start,
        deltas=deltas,
        signs=signs,
    )


def pfm_covariance(sol: PfmSolution, design: DesignMatrices) -> np.ndarray:
    """V + V X' diag(var q*(z_i)) X V."""
    vx = sol.V @ design.X.T
    return symmetrize(sol.V + (vx * sol.trunc_variance) @ vx.T)


def pfm_moments(sol: PfmSolution, design: DesignMatrices) -> MomentSummary:
    """Closed-form mean and marginal sds of the approximate posterior of theta_{1:n}."""
    start = time.perf_counter()
    vx = sol.V @ design.X.T
    mean = vx @ sol.z_bar
    var = np.diag(sol.V) + np.einsum("ij,j,ij->i", vx, sol.trunc_variance, vx)
    return MomentSummary(
        mean=mean,
        sd=np.sqrt(np.maximum(var, 0.0)),
        method="pfm",
        wall_time_seconds=sol.elapsed_seconds + time.perf_counter() - start,
        diagnostics=sol.diagnostics(),
    )


def sample_pfm(sol: PfmSolution, design: DesignMatrices, R: int, seed: int) -> np.ndarray:
    """R i.i.d. draws of theta_{1:n} from the PFM-VB approximation.

    Latent utilities come from the independent truncated normals q*(z_i);
    theta is then drawn from N(V X' z, V).
    """
    if R < 1:
        raise InvalidInputError("R must be positive")
    z_ss, theta_ss = np.random.SeedSequence(seed).spawn(2)
    n = sol.z_bar.shape[0]
    z = sample_trunc_norm(
        sol.mu_star, np.sqrt(sol.sigma_star_sq), sol.signs, np.random.default_rng(z_ss), size=(R, n)
    )
    chol, _ = jittered_cholesky(sol.V)
    eps = np.random.default_rng(theta_ss).standard_normal((R, sol.V.shape[0]))
    return z @ (sol.V @ design.X.T).T + eps @ chol.T

