"""Small dense linear-algebra helpers."""

import numpy as np
from scipy import linalg

from .errors import DomainError

JITTER = 1e-10
_MAX_JITTER = 1e-6


def symmetrize(a):
    return 0.5 * (a + a.T)


def check_psd(a, name, rtol=1e-8, strict=False, exc=DomainError):
    """Raise ``exc`` unless ``a`` is symmetric PSD (PD if ``strict``) up to ``rtol``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise exc(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise exc(f"{name} has non-finite entries")
    scale = max(np.max(np.abs(a)), 1.0)
    if not np.allclose(a, a.T, rtol=0.0, atol=rtol * scale):
        raise exc(f"{name} is not symmetric")
    if a.size == 0:
        return
    eig = np.linalg.eigvalsh(symmetrize(a))
    top = max(eig[-1], 0.0)
    if strict:
        if eig[0] <= rtol * top or eig[0] <= 0.0:
            raise exc(f"{name} is not positive definite (min eigenvalue {eig[0]:.3g})")
    elif eig[0] < -rtol * max(top, np.finfo(float).tiny):
        raise exc(f"{name} is not positive semidefinite (min eigenvalue {eig[0]:.3g})")


def jittered_cholesky(a):
    """Lower Cholesky factor of a PSD matrix plus the diagonal jitter that was needed.

    Tries the bare matrix first, then adds ``1e-10`` to the diagonal and grows it
    tenfold until the factorization succeeds (capped at ``1e-6``).
    """
    a = symmetrize(np.asarray(a, dtype=float))
    jitter = 0.0
    eye = np.eye(a.shape[0])
    while True:
        try:
            return linalg.cholesky(a + jitter * eye, lower=True), jitter
        except linalg.LinAlgError:
            jitter = JITTER if jitter == 0.0 else jitter * 10.0
            if jitter > _MAX_JITTER:
                raise DomainError("matrix is not positive semidefinite; Cholesky failed") from None


def psd_factor(a):
    """Return F with F @ F.T == a for a PSD matrix (eigen-decomposition, zero-safe)."""
    w, u = np.linalg.eigh(symmetrize(np.asarray(a, dtype=float)))
    return u * np.sqrt(np.clip(w, 0.0, None))
