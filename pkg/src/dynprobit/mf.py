"""Mean-field variational Bayes baseline, q(theta) prod_i q(z_i).

Under the augmented model the CAVI updates are

    q(theta) = N(V X' z_bar, V)
    q(z_i)   = N(m_i, 1) truncated to (2 y_i - 1) z_i > 0,  m = X V X' z_bar

so the covariance of q(theta) never sees the truncation, which is where
the variance underestimation comes from.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .model import DesignMatrices
from .pfm import _coupling, compute_V
from .sun import MomentSummary
from .truncnorm import _tn_mean


@dataclass(frozen=True)
class MfSolution:
    z_bar: np.ndarray
    mean: np.ndarray
    V: np.ndarray
    iterations: int
    converged: bool
    residual: float
    elapsed_seconds: float
    deltas: np.ndarray = field(repr=False)

    def diagnostics(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
        }


def mf_fit(prior, design: DesignMatrices, tolerance=1e-6, max_sweeps=10_000, init_z_bar=None) -> MfSolution:
    """Alternate the q(theta) and q(z) updates until max |change in z_bar| < tolerance.

    Starts from the same z_bar as :func:`dynprobit.pfm.cavi_fit` so run times
    are comparable.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be positive")
    start = time.perf_counter()
    X = design.X
    n = X.shape[0]
    signs = design.signs
    V = compute_V(prior, X)
    K, _ = _coupling(V, X)
    ones = np.ones(n)
    if init_z_bar is None:
        z_bar = signs * math.sqrt(2.0 / math.pi)
    else:
        z_bar = np.array(init_z_bar, dtype=float)
        if z_bar.shape != (n,):
            raise InvalidInputError(f"init_z_bar must have length {n}")
    deltas = []
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        new = _tn_mean(K @ z_bar, ones, signs)
        change = float(np.max(np.abs(new - z_bar), initial=0.0))
        z_bar = new
        deltas.append(change)
        if change < tolerance:
            converged = True
            break
    residual = float(np.max(np.abs(z_bar - _tn_mean(K @ z_bar, ones, signs)), initial=0.0))
    return MfSolution(
        z_bar=z_bar,
        mean=V @ (X.T @ z_bar),
        V=V,
        iterations=sweeps,
        converged=converged,
        residual=residual,
        elapsed_seconds=time.perf_counter() - start,
        deltas=np.array(deltas),
    )


def mf_moments(sol: MfSolution) -> MomentSummary:
    return MomentSummary(
        mean=sol.mean,
        sd=np.sqrt(np.maximum(np.diag(sol.V), 0.0)),
        method="mf",
        wall_time_seconds=sol.elapsed_seconds,
        diagnostics=sol.diagnostics(),
    )
