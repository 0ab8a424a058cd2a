"""Reference instances: the two worked examples, a Slater instance and a
generator of instances with a planted face."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RescalingTransform, SdpInstance, rescale


def _E(n: int, i: int, j: int) -> np.ndarray:
    """Symmetric unit matrix with ones at ``(i, j)`` and ``(j, i)`` (0-based)."""
    M = np.zeros((n, n))
    M[i, j] = M[j, i] = 1.0
    return M


def example_1_1() -> SdpInstance:
    """``sup 2 x  s.t.  x [[0, 1], [1, 0]] <= diag(1, 0)``: value 0, dual infimum 0 not attained."""
    return SdpInstance((np.array([[0.0, 1.0], [1.0, 0.0]]),), np.diag([1.0, 0.0]),
                       np.array([2.0]), name="example-1.1")


def example_4_1() -> SdpInstance:
    """Order-4 instance with primal value 0 and classical dual value 1."""
    n = 4
    A1 = _E(n, 0, 0)
    A2 = _E(n, 0, 2) + _E(n, 1, 1)
    A3 = _E(n, 1, 3) + _E(n, 2, 2)
    return SdpInstance((A1, A2, A3), np.diag([1.0, 1.0, 0.0, 0.0]), np.array([0.0, 1.0, 1.0]),
                       name="example-4.1")


def slater_instance(n: int = 3, m: int = 2) -> SdpInstance:
    """``B = I``, ``A_i = 0``, ``c = 0``: Slater holds, every value is 0."""
    return SdpInstance(tuple(np.zeros((n, n)) for _ in range(m)), np.eye(n), np.zeros(m),
                       name=f"slater-{n}")


# Known points of the worked examples.

def example_1_1_strong_dual_point() -> np.ndarray:
    return np.array([[0.0, 1.0], [1.0, 0.0]])


def example_1_1_certificates() -> list[np.ndarray]:
    return [np.diag([0.0, 1.0])]


def example_1_1_ramana_levels() -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """``(U, V, W)`` for levels ``0..3``; ``W[i]`` generates ``V[i] = W + W'``."""
    Z = np.zeros((2, 2))
    U = [Z, Z, np.diag([0.0, 1.0]), Z]
    V = [Z, Z, Z, np.array([[0.0, 1.0], [1.0, 0.0]])]
    W = [Z, Z, Z, np.array([[0.0, 0.0], [1.0, 0.0]])]
    return U, V, W


def example_4_1_dual_optimal() -> np.ndarray:
    """Optimal point of the classical dual, objective 1."""
    return np.diag([0.0, 1.0, 1.0, 0.0])


def example_4_1_strong_dual_point() -> np.ndarray:
    Y = np.zeros((4, 4))
    Y[0, 2] = Y[2, 0] = 0.5
    Y[2, 2] = 1.0
    return Y


def example_4_1_displayed_certificates() -> list[np.ndarray]:
    """Certificates as displayed; the second carries a 2 in its identity block."""
    Y1 = np.diag([0.0, 0.0, 0.0, 1.0])
    Y2 = np.zeros((4, 4))
    Y2[1, 3] = Y2[3, 1] = -1.0
    Y2[2, 2] = 2.0
    return [Y1, Y2]


def example_4_1_ramana_levels() -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """The displayed value-0 solution, levels ``0..5``."""
    n = 4
    Z = np.zeros((n, n))
    U3 = np.diag([0.0, 0.0, 0.0, 1.0])
    U4 = np.diag([0.0, 0.0, 2.0, 0.0])
    V4 = -_E(n, 1, 3)
    W4 = np.zeros((n, n))
    W4[3, 1] = -1.0
    U5 = np.diag([0.0, 0.0, 1.0, 0.0])
    V5 = 0.5 * _E(n, 0, 2)
    W5 = np.zeros((n, n))
    W5[2, 0] = 0.5
    U = [Z, Z, Z, U3, U4, U5]
    V = [Z, Z, Z, Z, V4, V5]
    W = [Z, Z, Z, Z, W4, W5]
    return U, V, W


# Planted-face generator.

def certificate_pattern(n: int, block_sizes, i: int) -> tuple[int, int]:
    """``(a, b)`` for certificate ``i`` (1-based): ``Y[:a, :b] = 0``, ``Y[a:b, a:b] = I``."""
    a = n - int(sum(block_sizes[:i]))
    return a, a + int(block_sizes[i - 1])


@dataclass(frozen=True)
class PlantedFace:
    """Instance with known face rank ``r``, certificate chain and strong-dual point.

    ``base`` has the chain in canonical position and ``B = I_r (+) 0``;
    ``instance = rescale(base, T)``, so mapping ``instance`` by ``T^{-1}``
    recovers ``base``.
    """

    instance: SdpInstance
    base: SdpInstance
    r: int
    block_sizes: tuple[int, ...]
    certificates: tuple[np.ndarray, ...]
    strong_dual_point: np.ndarray
    T: RescalingTransform


def _random_cond_bounded(rng: np.random.Generator, n: int, max_cond: float) -> np.ndarray:
    Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    sv = np.exp(rng.uniform(0.0, np.log(max_cond), size=n))
    sv[0], sv[-1] = 1.0, max(sv[-1], 1.0)
    return (Q1 * sv) @ Q2


def random_invertible(rng: np.random.Generator, n: int, max_cond: float = 1e3) -> np.ndarray:
    """Random matrix with condition number at most ``max_cond``."""
    T = _random_cond_bounded(rng, n, max_cond)
    while np.linalg.cond(T) > max_cond:
        T = _random_cond_bounded(rng, n, max_cond)
    return T


def planted_face(rng: np.random.Generator, n: int, r: int, block_sizes=None, m: int = 3,
                 *, transform: bool = True, max_cond: float = 20.0) -> PlantedFace:
    """Random instance whose slacks all lie in ``psd_r (+) 0``.

    Certificates ``Y_i`` get the chain pattern with random free entries; the
    ``A_j`` are random symmetric matrices projected onto the orthogonal
    complement of the certificates, and ``c = A* Y*`` for a random ``Y*``
    whose leading ``r`` block is psd.
    """
    if not (0 <= r <= n):
        raise ValueError("need 0 <= r <= n")
    if block_sizes is None:
        rest = n - r
        sizes = []
        while rest > 0:
            k = int(rng.integers(1, rest + 1))
            sizes.append(k)
            rest -= k
        block_sizes = tuple(sizes)
    block_sizes = tuple(int(b) for b in block_sizes)
    if sum(block_sizes) != n - r:
        raise ValueError("block sizes must sum to n - r")
    Ys = []
    for i in range(1, len(block_sizes) + 1):
        a, b = certificate_pattern(n, block_sizes, i)
        Y = rng.standard_normal((n, n))
        Y = 0.5 * (Y + Y.T)
        Y[:a, :b] = 0.0
        Y[:b, :a] = 0.0
        Y[a:b, a:b] = np.eye(b - a)
        Ys.append(Y)
    G = np.array([Y.ravel() for Y in Ys]).reshape(len(Ys), -1) if Ys else np.zeros((0, n * n))
    As = []
    for _ in range(m):
        A = rng.standard_normal((n, n))
        A = 0.5 * (A + A.T)
        if G.shape[0]:
            coef = np.linalg.lstsq(G.T, A.ravel(), rcond=None)[0]
            A = A - (coef @ G).reshape(n, n)
            A = 0.5 * (A + A.T)
        As.append(A)
    B = np.zeros((n, n))
    B[:r, :r] = np.eye(r)
    Ystar = rng.standard_normal((n, n))
    Ystar = 0.5 * (Ystar + Ystar.T)
    if r:
        L = rng.standard_normal((r, r))
        Ystar[:r, :r] = L @ L.T
    c = np.array([float(np.sum(A * Ystar)) for A in As])
    base = SdpInstance(tuple(As), B, c, name=f"planted-n{n}-r{r}")
    T = RescalingTransform(random_invertible(rng, n, max_cond) if transform else np.eye(n),
                           ("planted",))
    inst = rescale(base, T)
    return PlantedFace(inst, base, r, block_sizes, tuple(Ys), Ystar, T)
