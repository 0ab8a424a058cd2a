from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def random_sym(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, n))
    return 0.5 * (X + X.T)


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    """psd matrix of the given rank with eigenvalues in [0.5, 2]."""
    rank = n if rank is None else rank
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.zeros(n)
    lam[:rank] = rng.uniform(0.5, 2.0, size=rank)
    return (Q * lam) @ Q.T


def random_conic_program(rng: np.random.Generator):
    """Strictly feasible program over 1-2 psd blocks, nonnegatives and free scalars.

    ``b = A x0`` and ``c = A' y0 + z0`` for interior ``x0`` and ``z0``;
    ``b`` and ``c`` are then normalized to unit length, which keeps both
    interior points (scaled) and puts the optimal value near unit size.
    """
    from ramanadual.solver import ConicProgram, tri_coeffs, tri_values

    orders = tuple(int(k) for k in rng.integers(1, 7, size=rng.integers(1, 3)))
    nl, nf = int(rng.integers(0, 4)), int(rng.integers(0, 3))
    xs, zs = [], []
    for k in orders:
        L = rng.standard_normal((k, k))
        xs.append(tri_values(L @ L.T + np.eye(k)))
        L = rng.standard_normal((k, k))
        zs.append(tri_coeffs(L @ L.T + np.eye(k)))
    x0 = np.concatenate(xs + [rng.uniform(1, 2, nl), rng.standard_normal(nf)])
    z0 = np.concatenate(zs + [rng.uniform(1, 2, nl), np.zeros(nf)])
    N = x0.size
    p = int(rng.integers(max(1, nf), min(12, N) + 1))
    A = rng.standard_normal((p, N))
    c = A.T @ rng.standard_normal(p) + z0
    b = A @ x0
    return ConicProgram(c=c / np.linalg.norm(c), A=A, b=b / np.linalg.norm(b), psd_orders=orders,
                        n_nonneg=nl, n_free=nf, name="random")


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
