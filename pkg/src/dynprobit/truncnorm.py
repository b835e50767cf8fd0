"""Normal / truncated-normal utilities and positive-orthant truncated MVN sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import linalg, special

from ._linalg import check_psd, jittered_cholesky
from .errors import CapacityError, DomainError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_HALF = math.sqrt(0.5)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
# standardized truncation point beyond which inverse-CDF sampling is replaced
_TAIL_SWITCH = 5.0
_AUTO_MIN_ORTHANT_PROB = 1e-3
_PILOT_DRAWS = 10_000


def _finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def normal_cdf(x):
    """Standard normal CDF."""
    return _out(special.ndtr(_finite(x)))


def _log_ndtr(x):
    x = np.asarray(x, dtype=float)
    # Phi(x) = erfcx(-x / sqrt 2) exp(-x^2 / 2) / 2 for x < 0: no tail truncation error
    with np.errstate(divide="ignore"):
        left = np.log(0.5 * special.erfcx(-x * _SQRT_HALF)) - 0.5 * x * x
        right = np.log1p(-special.ndtr(-x))
    return np.where(x < 0, left, right)


def log_normal_cdf(x):
    """log Phi(x), full precision in the far left tail (no underflow above x ~ -1e150)."""
    return _out(_log_ndtr(_finite(x)))


def _mills(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        left = _SQRT_2_OVER_PI / special.erfcx(-x * _SQRT_HALF)
        right = np.exp(-0.5 * x * x - _LOG_SQRT_2PI) / special.ndtr(x)
    return np.where(x < 0, left, right)


# below this point the kernel hands zeta to erfcx; above it exp / erfc keep ~1e-13 relative accuracy
_KERNEL_ERFC_SWITCH = -25.0


@numba.njit(cache=True)
def _mills_scalar(x):
    """zeta(x) for compiled loops; agrees with ``_mills`` to about 1e-13 relative."""
    if x >= 0.0:
        return math.exp(-0.5 * x * x - _LOG_SQRT_2PI) / (1.0 - 0.5 * math.erfc(x * _SQRT_HALF))
    if x > _KERNEL_ERFC_SWITCH:
        return _SQRT_2_OVER_PI * math.exp(-0.5 * x * x) / math.erfc(-x * _SQRT_HALF)
    with numba.objmode(r="float64"):
        r = _SQRT_2_OVER_PI / float(special.erfcx(-x * _SQRT_HALF))
    return r


def mills_inverse(x):
    """phi(x) / Phi(x); uses the scaled complementary error function for x < 0 so it stays accurate far into the tail."""
    return _out(_mills(_finite(x)))


def _tn_mean(mu, sigma, sign):
    return mu + sign * sigma * _mills(sign * mu / sigma)


def trunc_norm_mean(mu, sigma, sign):
    """Mean of N(mu, sigma^2) restricted to ``sign * value > 0``."""
    mu = _finite(mu, "mu")
    sigma = _finite(sigma, "sigma")
    if np.any(sigma <= 0):
        raise DomainError("sigma must be positive")
    sign = _check_sign(sign)
    return _out(_tn_mean(mu, sigma, sign))


def _check_sign(sign):
    s = np.asarray(sign, dtype=float)
    if not np.all((s == 1.0) | (s == -1.0)):
        raise DomainError("sign must be +1 or -1")
    return s


def _std_tail_draws(a, rng):
    """Standard normal draws conditioned on exceeding ``a`` (array, elementwise)."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    near = a <= _TAIL_SWITCH
    if np.any(near):
        an = a[near]
        u = rng.random(an.shape)
        # -Phi^{-1}(u Phi(-a)) avoids cancellation in 1 - Phi(a)
        out[near] = -special.ndtri(u * special.ndtr(-an))
    far = np.flatnonzero(~near)
    if far.size:
        af = a.reshape(-1)[far]
        lam = 0.5 * (af + np.sqrt(af * af + 4.0))
        res = np.empty_like(af)
        todo = np.arange(af.size)
        while todo.size:
            e = af[todo] + rng.standard_exponential(todo.size) / lam[todo]
            ok = rng.random(todo.size) <= np.exp(-0.5 * (e - lam[todo]) ** 2)
            res[todo[ok]] = e[ok]
            todo = todo[~ok]
        out.reshape(-1)[far] = res
    return out


def sample_trunc_norm(mu, sigma, sign, rng, size=None):
    """Draw from N(mu, sigma^2) restricted to ``sign * value > 0``.

    ``mu``, ``sigma`` and ``sign`` broadcast against each other and ``size``.
    Inverse-CDF sampling is used when the standardized truncation point lies
    within 5 sd of the mean, exponential-proposal rejection beyond that.
    """
    mu = _finite(mu, "mu")
    sigma = _finite(sigma, "sigma")
    if np.any(sigma <= 0):
        raise DomainError("sigma must be positive")
    sign = _check_sign(sign)
    rng = np.random.default_rng(rng)
    shape = np.broadcast_shapes(mu.shape, sigma.shape, sign.shape, () if size is None else tuple(np.atleast_1d(size)))
    mu, sigma, sign = (np.broadcast_to(v, shape) for v in (mu, sigma, sign))
    a = -sign * mu / sigma
    value = mu + sign * sigma * _std_tail_draws(a, rng)
    bad = np.flatnonzero(~(sign * value > 0))
    # rounding can land exactly on the boundary; redraw those entries
    while bad.size:
        flat = value.reshape(-1)
        m, s, g = mu.reshape(-1)[bad], sigma.reshape(-1)[bad], sign.reshape(-1)[bad]
        flat[bad] = m + g * s * _std_tail_draws(-g * m / s, rng)
        bad = bad[~(g * flat[bad] > 0)]
    return _out(value)


@dataclass(frozen=True)
class OrthantSamplerConfig:
    """Knobs for :func:`sample_orthant_tmvn`.

    ``strategy="auto"`` uses exact rejection when a pilot estimate of the
    orthant probability is at least 1e-3 and the expected number of proposals
    fits in ``max_rejection_attempts``; otherwise Gibbs. ``burn_in=None``
    means 50 sweeps per dimension.
    """

    strategy: str = "auto"
    burn_in: int | None = None
    thinning: int = 5
    max_rejection_attempts: int = 50_000_000
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ("rejection", "gibbs", "auto"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.thinning < 1:
            raise ValueError("thinning must be at least 1")
        if self.max_rejection_attempts < 1:
            raise ValueError("max_rejection_attempts must be positive")

    def burn_in_for(self, k):
        return 50 * k if self.burn_in is None else self.burn_in


@dataclass(frozen=True)
class OrthantSample:
    """Draws from a zero-mean normal truncated to the positive orthant, with diagnostics."""

    draws: np.ndarray
    strategy: str
    exact: bool
    jitter: float
    proposals: int | None = None
    acceptance_rate: float | None = None
    pilot_orthant_prob: float | None = None
    burn_in: int | None = None
    thinning: int | None = None

    def diagnostics(self):
        return {
            "strategy": self.strategy,
            "exact": self.exact,
            "jitter": self.jitter,
            "proposals": self.proposals,
            "acceptance_rate": self.acceptance_rate,
            "pilot_orthant_prob": self.pilot_orthant_prob,
            "burn_in": self.burn_in,
            "thinning": self.thinning,
        }


def _check_correlation(gamma):
    gamma = np.asarray(gamma, dtype=float)
    check_psd(gamma, "Gamma")
    if not np.allclose(np.diag(gamma), 1.0, rtol=0.0, atol=1e-8):
        raise DomainError("Gamma must have unit diagonal")
    return gamma


def sample_orthant_tmvn(gamma, count: int, config: OrthantSamplerConfig | None = None) -> OrthantSample:
    """Sample N_k(0, gamma) conditioned on every coordinate being positive.

    Rejection draws are exact and i.i.d.; Gibbs draws come from a single
    systematic-scan chain after ``burn_in`` sweeps, keeping every
    ``thinning``-th sweep.
    """
    config = config or OrthantSamplerConfig()
    gamma = _check_correlation(gamma)
    if count < 1:
        raise ValueError("count must be positive")
    k = gamma.shape[0]
    chol, jitter = jittered_cholesky(gamma)
    pilot_ss, main_ss = np.random.SeedSequence(config.seed).spawn(2)
    rng = np.random.default_rng(main_ss)

    strategy = config.strategy
    pilot = None
    if strategy == "auto":
        prop = np.random.default_rng(pilot_ss).standard_normal((_PILOT_DRAWS, k)) @ chol.T
        pilot = float(np.mean(np.all(prop > 0, axis=1)))
        fits = pilot > 0 and 1.2 * count / pilot <= config.max_rejection_attempts
        strategy = "rejection" if pilot >= _AUTO_MIN_ORTHANT_PROB and fits else "gibbs"

    if strategy == "rejection":
        draws, proposals = _rejection(chol, count, rng, config.max_rejection_attempts)
        return OrthantSample(
            draws=draws,
            strategy="rejection",
            exact=True,
            jitter=jitter,
            proposals=proposals,
            acceptance_rate=count / proposals,
            pilot_orthant_prob=pilot,
        )

    precision = linalg.cho_solve((chol, True), np.eye(k))
    precision = 0.5 * (precision + precision.T)
    burn_in = config.burn_in_for(k)
    start = np.full(k, math.sqrt(2.0 / math.pi))
    draws = _gibbs_chain(rng, precision, start, burn_in, config.thinning, count)
    return OrthantSample(
        draws=draws,
        strategy="gibbs",
        exact=False,
        jitter=jitter,
        pilot_orthant_prob=pilot,
        burn_in=burn_in,
        thinning=config.thinning,
    )


def _rejection(chol, count, rng, max_attempts):
    k = chol.shape[0]
    kept = []
    have = 0
    proposals = 0
    accepted = 0
    max_rows = max(1, (1 << 22) // k)
    while have < count:
        if proposals >= max_attempts:
            raise CapacityError(
                f"rejection sampler used {proposals} proposals for {have}/{count} draws; "
                "use strategy='gibbs' or raise max_rejection_attempts"
            )
        rate = (accepted + 1) / (proposals + 2)
        batch = int(min(max(1.2 * (count - have) / rate, 1024), max_rows, max_attempts - proposals))
        prop = rng.standard_normal((batch, k)) @ chol.T
        ok = prop[np.all(prop > 0, axis=1)]
        proposals += batch
        accepted += ok.shape[0]
        kept.append(ok[: count - have])
        have += kept[-1].shape[0]
    return np.concatenate(kept, axis=0), proposals


@numba.njit(cache=True)
def _std_lower_tail(rng, a):
    # exact draw of N(0, 1) given > a: plain rejection for a <= 0, exponential proposal otherwise
    if a <= 0.0:
        while True:
            x = rng.standard_normal()
            if x > a:
                return x
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        x = a + rng.standard_exponential() / lam
        if rng.random() <= math.exp(-0.5 * (x - lam) ** 2):
            return x


@numba.njit(cache=True)
def _gibbs_chain(rng, precision, start, burn_in, thinning, count):
    k = start.shape[0]
    u = start.copy()
    out = np.empty((count, k))
    qu = precision @ u
    kept = 0
    sweep = 0
    while kept < count:
        for j in range(k):
            qjj = precision[j, j]
            sd = 1.0 / math.sqrt(qjj)
            m = u[j] - qu[j] / qjj
            new = m + sd * _std_lower_tail(rng, -m / sd)
            if new <= 0.0:
                new = u[j]
            d = new - u[j]
            if d != 0.0:
                for i in range(k):
                    qu[i] += precision[i, j] * d
                u[j] = new
        sweep += 1
        if sweep % 64 == 0:
            qu = precision @ u
        if sweep > burn_in and (sweep - burn_in) % thinning == 0:
            out[kept] = u
            kept += 1
    return out
