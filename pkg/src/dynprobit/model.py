"""Dynamic probit model: specification, joint state prior and design matrices.

The model is

    y_t = 1(z_t > 0),  z_t = x_t' theta_t + eta_t,  eta_t ~ N(0, 1)
    theta_t = G_t theta_{t-1} + eps_t,  eps_t ~ N(0, W_t),  theta_0 ~ N(0, P0)

for t = 1..n with p-dimensional states. Stacked states theta_{1:n} are
ordered time-major: entry ``(t - 1) * p + j`` holds coordinate ``j`` of
``theta_t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._linalg import check_psd, psd_factor, symmetrize
from .errors import InvalidInputError, InvalidSpecError


@dataclass(frozen=True)
class ModelSpec:
    """Dynamic probit model with time-varying covariates, transitions and noise.

    Arrays are stored as float copies: ``x`` is (n, p), ``G`` and ``W`` are
    (n, p, p), ``P0`` is (p, p). ``a0`` must be the zero vector.
    """

    x: np.ndarray
    G: np.ndarray
    W: np.ndarray
    P0: np.ndarray
    a0: np.ndarray | None = None
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
            raise InvalidSpecError(f"x must be an (n, p) array, got shape {x.shape}")
        n, p = x.shape
        if not np.all(np.isfinite(x)):
            raise InvalidSpecError("covariates contain non-finite values")
        G = _as_stack(self.G, n, p, "G")
        W = _as_stack(self.W, n, p, "W")
        P0 = np.array(self.P0, dtype=float)
        if P0.ndim == 0 and p == 1:
            P0 = P0.reshape(1, 1)
        if P0.shape != (p, p):
            raise InvalidSpecError(f"P0 must be ({p}, {p}), got {P0.shape}")
        check_psd(P0, "P0", strict=True, exc=InvalidSpecError)
        for t in range(n):
            check_psd(W[t], f"W[{t + 1}]", exc=InvalidSpecError)
        if not np.all(np.isfinite(G)):
            raise InvalidSpecError("G contains non-finite values")
        a0 = np.zeros(p) if self.a0 is None else np.array(self.a0, dtype=float).reshape(-1)
        if a0.shape != (p,):
            raise InvalidSpecError(f"a0 must have length {p}")
        if np.any(a0 != 0.0):
            raise InvalidSpecError("only a0 = 0 is supported")
        for name, value in (("x", x), ("G", G), ("W", symmetrize_stack(W)), ("P0", symmetrize(P0)), ("a0", a0)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)

    @classmethod
    def time_invariant(cls, x, G=None, W=None, P0=None):
        """Build a spec with the same G, W for every t.

        Defaults are G = I, W = 0.01 I and P0 = 3 I.
        """
        x = np.asarray(x, dtype=float)
        p = 1 if x.ndim == 1 else x.shape[1]
        G = np.eye(p) if G is None else G
        W = 0.01 * np.eye(p) if W is None else W
        P0 = 3.0 * np.eye(p) if P0 is None else P0
        return cls(x=x, G=G, W=W, P0=P0)


def symmetrize_stack(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _as_stack(value, n, p, name):
    a = np.array(value, dtype=float)
    if a.ndim == 0 and p == 1:
        a = a.reshape(1, 1)
    if a.ndim == 1 and p == 1 and a.shape[0] == n:
        a = a.reshape(n, 1, 1)
    if a.ndim == 2:
        if a.shape != (p, p):
            raise InvalidSpecError(f"{name} must be ({p}, {p}) or ({n}, {p}, {p}), got {a.shape}")
        a = np.broadcast_to(a, (n, p, p)).copy()
    if a.shape != (n, p, p):
        raise InvalidSpecError(f"{name} must be ({p}, {p}) or ({n}, {p}, {p}), got {a.shape}")
    return a


def as_binary_series(y, n=None):
    """Validate binary observations and return them as an int array."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise InvalidInputError("y must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"y has length {arr.shape[0]}, expected {n}")
    if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise InvalidInputError("y contains non-finite values")
    if not np.all((arr == 0) | (arr == 1)):
        raise InvalidInputError("y must contain only 0 and 1")
    return arr.astype(np.int64)


@dataclass(frozen=True)
class PriorCovariance:
    """Dense covariance of the stacked states theta_{1:n} under the prior."""

    Omega: np.ndarray
    p: int

    @property
    def n(self):
        return self.Omega.shape[0] // self.p

    def block(self, t, l):
        """The (p, p) block cov(theta_t, theta_l), 1-based time indices."""
        p = self.p
        return self.Omega[(t - 1) * p : t * p, (l - 1) * p : l * p]


@dataclass(frozen=True)
class DesignMatrices:
    """Block-diagonal design X (row t is x_t' in block t) and its signed version D."""

    X: np.ndarray
    D: np.ndarray
    y: np.ndarray

    @property
    def signs(self):
        return 2.0 * self.y - 1.0


def build_prior_covariance(spec: ModelSpec) -> PriorCovariance:
    """Joint prior covariance of theta_{1:n}.

    Diagonal blocks follow var(theta_t) = G_t var(theta_{t-1}) G_t' + W_t with
    var(theta_0) = P0; below the diagonal cov(theta_t, theta_l) = G_t cov(theta_{t-1}, theta_l),
    i.e. the transition product G_t ... G_{l+1} applied to var(theta_l).
    """
    n, p = spec.n, spec.p
    omega = np.zeros((n * p, n * p))
    var = spec.P0
    for t in range(n):
        var = spec.G[t] @ var @ spec.G[t].T + spec.W[t]
        var = symmetrize(var)
        col = slice(t * p, (t + 1) * p)
        omega[col, col] = var
        block = var
        for s in range(t + 1, n):
            block = spec.G[s] @ block
            omega[s * p : (s + 1) * p, col] = block
            omega[col, s * p : (s + 1) * p] = block.T
    return PriorCovariance(Omega=omega, p=p)


def build_design(spec: ModelSpec, y) -> DesignMatrices:
    """Block-diagonal X and D = diag(2y - 1) X."""
    y = as_binary_series(y, spec.n)
    n, p = spec.n, spec.p
    X = np.zeros((n, n * p))
    rows = np.repeat(np.arange(n), p)
    X[rows, np.arange(n * p)] = spec.x.reshape(-1)
    D = (2.0 * y - 1.0)[:, None] * X
    return DesignMatrices(X=X, D=D, y=y)


class Simulation(NamedTuple):
    theta: np.ndarray  # (n, p)
    z: np.ndarray
    y: np.ndarray


def simulate_paths(spec: ModelSpec, count: int, seed: int) -> Simulation:
    """Draw ``count`` independent realizations of (theta_{1:n}, z, y).

    Returns arrays with a leading replicate axis: theta (count, n, p),
    z and y (count, n).
    """
    if count < 1:
        raise InvalidInputError("count must be positive")
    rng = np.random.default_rng(seed)
    n, p = spec.n, spec.p
    theta = np.empty((count, n, p))
    state = rng.standard_normal((count, p)) @ psd_factor(spec.P0).T
    for t in range(n):
        noise = rng.standard_normal((count, p)) @ psd_factor(spec.W[t]).T
        state = state @ spec.G[t].T + noise
        theta[:, t] = state
    z = np.einsum("rtj,tj->rt", theta, spec.x) + rng.standard_normal((count, n))
    y = (z > 0).astype(np.int64)
    return Simulation(theta=theta, z=z, y=y)


def simulate_data(spec: ModelSpec, seed: int) -> Simulation:
    """One seeded draw of the state path, latent utilities and binary series."""
    sim = simulate_paths(spec, 1, seed)
    return Simulation(theta=sim.theta[0], z=sim.z[0], y=sim.y[0])
