"""Tangent space of the psd cone at ``U``:

    tan(U) = { W + W' : range(W) contained in range(U) }

and its block-matrix witness ``M(W, beta) = [[U, W], [W', beta I]] >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import get_tolerances
from .model import RescalingTransform, _as_transform
from .symmat import (NotPSDError, as_symmat, pinv_psd, psd_check, range_contained,
                     range_projector, spectral)

__all__ = [
    "TangentWitness",
    "Member",
    "NotMember",
    "NotInTangentError",
    "tan_membership_algebraic",
    "tan_block_pattern",
    "compute_beta",
    "witness_matrix",
    "verify_witness",
    "tan_transform",
]

BETA_MARGIN = 0.1


class NotInTangentError(ValueError):
    """The tangent-space precondition of an operation does not hold."""


@dataclass(frozen=True)
class TangentWitness:
    W: np.ndarray
    beta: float


@dataclass(frozen=True)
class Member:
    W: np.ndarray
    residual: float

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotMember:
    reason: str
    residual: float

    def __bool__(self) -> bool:
        return False


def _check_psd(U, tol: float) -> np.ndarray:
    U = as_symmat(U, name="U")
    chk = psd_check(U, tol)
    if not chk:
        raise NotPSDError(f"U is not psd (lambda_min={chk.min_eigenvalue:.3g})")
    return U


def tan_membership_algebraic(V, U, tol: float | None = None,
                             *, eps_rank: float | None = None) -> Member | NotMember:
    """Decide ``V in tan(U)`` and recover a ``W`` when it is.

    With ``P`` the projector onto ``range(U)``, ``W = P V - P V P / 2`` has its
    range inside ``range(U)``, and ``W + W' = V`` exactly when the
    ``(I - P) V (I - P)`` part of ``V`` vanishes.
    """
    tols = get_tolerances()
    tol = tols.tol_eq if tol is None else tol
    V = as_symmat(V, name="V")
    U = _check_psd(U, tols.tol_cone)
    if V.shape != U.shape:
        raise ValueError(f"V has order {V.shape[0]}, U has order {U.shape[0]}")
    P = range_projector(U, eps_rank)
    PV = P @ V
    W = PV - 0.5 * PV @ P
    resid = float(np.linalg.norm(V - (W + W.T), 2))
    if resid <= tol * (1.0 + np.linalg.norm(V, 2)):
        return Member(W, resid)
    return NotMember("V has a component on the null space of U", resid)


def tan_block_pattern(n: int, s: int) -> np.ndarray:
    """Boolean mask of forced-zero entries for ``tan(0 (+) I_s)``.

    The leading ``(n - s) x (n - s)`` block is forced to zero, all other
    entries are free.
    """
    if not (0 <= s <= n):
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    mask = np.zeros((n, n), dtype=bool)
    mask[: n - s, : n - s] = True
    return mask


def compute_beta(U, W, *, margin: float = BETA_MARGIN, tol: float | None = None,
                 eps_rank: float | None = None) -> TangentWitness:
    """Explicit ``beta`` with ``M(W, beta)`` psd.

    Writes ``W = U H`` with ``H = U^+ W``; then ``beta I - H' U H`` is the
    Schur complement of ``M(W, beta)``, so ``beta = (1 + margin)
    lambda_max(H' U H)`` suffices.

    Raises:
        NotInTangentError: if ``range(W)`` is not inside ``range(U)`` (no finite
            ``beta`` exists).
    """
    tols = get_tolerances()
    U = _check_psd(U, tols.tol_cone)
    W = np.asarray(W, dtype=float)
    if W.shape != U.shape:
        raise ValueError(f"W has shape {W.shape}, U has order {U.shape[0]}")
    if not range_contained(W, U, tol, eps_rank=eps_rank):
        raise NotInTangentError("range(W) is not contained in range(U)")
    H = pinv_psd(U, eps_rank) @ W
    G = H.T @ U @ H
    lam_max = float(spectral(0.5 * (G + G.T)).eigenvalues[-1])
    return TangentWitness(W.copy(), (1.0 + margin) * max(lam_max, 0.0))


def witness_matrix(U, wit: TangentWitness) -> np.ndarray:
    """``M(W, beta) = [[U, W], [W', beta I]]``."""
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    M = np.empty((2 * n, 2 * n))
    M[:n, :n] = U
    M[:n, n:] = wit.W
    M[n:, :n] = wit.W.T
    M[n:, n:] = wit.beta * np.eye(n)
    return M


def verify_witness(U, V, wit: TangentWitness, tol: float | None = None) -> bool:
    """``W + W' = V`` and ``M(W, beta)`` psd, both within ``tol``."""
    tol = get_tolerances().tol_eq if tol is None else tol
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != V.shape or wit.W.shape != U.shape:
        raise ValueError("dimension mismatch between U, V and the witness")
    if np.linalg.norm(wit.W + wit.W.T - V, 2) > tol * (1.0 + np.linalg.norm(V, 2)):
        return False
    return psd_check(witness_matrix(U, wit), tol).is_psd


def tan_transform(U, V, T: RescalingTransform | np.ndarray, tol: float | None = None) -> np.ndarray:
    """Map ``V in tan(U)`` to ``T' V T in tan(T' U T)``.

    Raises:
        NotInTangentError: if ``V`` is not in ``tan(U)``.
    """
    T = _as_transform(T)
    if not tan_membership_algebraic(V, U, tol):
        raise NotInTangentError("V is not in tan(U)")
    return T.map_primal(V)
