import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_orthonormal(rng, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def sample_bounded_hessian(rng, n: int, r_f: float, lam: float, rho: float) -> np.ndarray:
    """Symmetric H with lambda_min >= -2/r_f and trace <= the drift cap."""
    cap = (n - 1) * lam / ((n - 1) + lam * rho)
    shifted_budget = cap + 2.0 * n / r_f
    s = rng.uniform(0.0, 1.0, n)
    s = s * (rng.uniform(0.0, 1.0) * shifted_budget / s.sum())
    eigs = s - 2.0 / r_f
    Q = random_orthonormal(rng, n)
    H = Q @ np.diag(eigs) @ Q.T
    return 0.5 * (H + H.T)
