import numpy as np
import pytest

from dynprobit import ModelSpec, build_design, build_prior_covariance, simulate_data

ACCEPTANCE_RESULTS = {}


def random_spec(rng, n, p, shared=False, full_rank=False):
    """A random but well-behaved model: stable transitions, PSD noise, PD P0.

    ``full_rank`` makes every W_t positive definite so Omega is invertible.
    """
    x = rng.normal(size=(n, p))
    x[:, 0] = 1.0 if p > 1 else x[:, 0]

    def transition():
        a = rng.normal(size=(p, p))
        return 0.95 * a / max(np.linalg.norm(a, 2), 1.0)

    def noise():
        b = rng.normal(size=(p, rng.integers(1, p + 1)))
        return 0.3 * b @ b.T + (0.1 * np.eye(p) if full_rank else 0.0)

    c = rng.normal(size=(p, p))
    P0 = c @ c.T + 0.5 * np.eye(p)
    if shared:
        return ModelSpec(x=x, G=transition(), W=noise(), P0=P0)
    return ModelSpec(
        x=x,
        G=np.stack([transition() for _ in range(n)]),
        W=np.stack([noise() for _ in range(n)]),
        P0=P0,
    )


def random_model(seed, n_max=6, p_max=2, n_min=1, full_rank=False):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    spec = random_spec(rng, n, p, full_rank=full_rank)
    y = simulate_data(spec, seed + 1000).y
    return spec, build_prior_covariance(spec), build_design(spec, y)


def scalar_model(y=1):
    """Omega = [1], x = 1: the analytically tractable single-observation case."""
    spec = ModelSpec(x=[1.0], G=1.0, W=0.0, P0=1.0)
    return spec, build_prior_covariance(spec), build_design(spec, [y])


@pytest.fixture
def acceptance():
    """Record a criterion outcome, print it in the terminal summary, then assert."""

    def report(number, title, ok, detail=""):
        ACCEPTANCE_RESULTS[number] = (title, bool(ok), detail)
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
