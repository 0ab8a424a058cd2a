"""Dense symmetric-matrix arithmetic and the block conventions used throughout.

Symmetric matrices are plain ``numpy`` arrays; :func:`as_symmat` is the single
gatekeeper that enforces symmetry on the way in.  Indices follow numpy
(0-based); :func:`principal_submatrix` alone takes the 1-based inclusive range
``Y(r:s)`` because that is how block positions are written in certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import get_tolerances

__all__ = [
    "NotPSDError",
    "SpectralConvergenceError",
    "SpectralDecomposition",
    "PsdCheck",
    "as_symmat",
    "inner_product",
    "psd_check",
    "numerical_rank",
    "principal_submatrix",
    "diag_concat",
    "spectral",
    "range_projector",
    "range_contained",
    "scaled_eigenbasis",
    "pinv_psd",
]

SYMMETRY_TOL = 1e-8


class NotPSDError(ValueError):
    """A matrix required to be psd has a significantly negative eigenvalue."""


class SpectralConvergenceError(ArithmeticError):
    """Jacobi sweeps did not drive the off-diagonal mass to zero."""


def as_symmat(X, *, name: str = "matrix") -> np.ndarray:
    """Validate ``X`` as a square symmetric matrix and return a float copy.

    Asymmetry up to ``1e-8 * ||X||`` is averaged away; anything larger is an
    error.  Order-0 matrices are rejected.
    """
    A = np.array(X, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ValueError(f"{name} must have order >= 1")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    dev = np.max(np.abs(A - A.T))
    if dev > SYMMETRY_TOL * max(1.0, np.linalg.norm(A)):
        raise ValueError(f"{name} is not symmetric (max deviation {dev:.3g})")
    return 0.5 * (A + A.T)


def inner_product(X, Y) -> float:
    """Trace inner product ``trace(X Y)``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"order mismatch: {X.shape} vs {Y.shape}")
    return float(np.sum(X * Y.T))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def _jacobi_pair(app: float, aqq: float, apq: float) -> tuple[float, float]:
    tau = (aqq - app) / (2.0 * apq)
    if tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def _off_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def spectral(X, *, max_sweeps: int = 60) -> SpectralDecomposition:
    """Eigendecomposition by cyclic Jacobi rotations.

    Eigenvalues are returned in ascending order (stable for ties, so a
    diagonal input keeps its coordinate order).  Each eigenvector is signed so
    that its largest-magnitude entry is positive.

    Raises:
        SpectralConvergenceError: if ``max_sweeps`` sweeps leave off-diagonal
            mass above roundoff level.
    """
    A = as_symmat(X)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return SpectralDecomposition(np.zeros(n), V)
    target = 1e-15 * scale
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * scale:
                    continue
                c, s = _jacobi_pair(A[p, p], A[q, q], apq)
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = _off_norm(A)
        if off > 1e-12 * scale:
            raise SpectralConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3g})"
            )
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    V = V[:, order]
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(n)])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(lam, V * signs)


@dataclass(frozen=True)
class PsdCheck:
    """Outcome of :func:`psd_check`; truthy iff the matrix is psd."""

    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.is_psd


def psd_check(X, tol: float | None = None) -> PsdCheck:
    """Test ``lambda_min(X) >= -tol * (1 + |lambda|_max)``.

    On failure the witness ``z`` satisfies ``z' X z < 0``.
    """
    if tol is None:
        tol = get_tolerances().tol_cone
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    dec = spectral(X)
    lam = dec.eigenvalues
    lo = float(lam[0])
    if lo >= -tol * (1.0 + float(np.max(np.abs(lam)))):
        return PsdCheck(True, lo)
    return PsdCheck(False, lo, dec.eigenvectors[:, 0].copy())


def _rank_from_eigs(lam: np.ndarray, eps_rank: float) -> int:
    return int(np.sum(lam > eps_rank * max(1.0, float(lam[-1]))))


def numerical_rank(X, eps_rank: float | None = None, *, psd_tol: float | None = None) -> int:
    """Number of eigenvalues above ``eps_rank * max(1, lambda_max)``.

    Raises:
        NotPSDError: if ``X`` is not psd within ``psd_tol``.
    """
    tols = get_tolerances()
    eps_rank = tols.eps_rank if eps_rank is None else eps_rank
    psd_tol = tols.tol_cone if psd_tol is None else psd_tol
    lam = spectral(X).eigenvalues
    if lam[0] < -psd_tol * (1.0 + float(np.max(np.abs(lam)))):
        raise NotPSDError(f"matrix is not psd (lambda_min={lam[0]:.3g})")
    return _rank_from_eigs(lam, eps_rank)


def principal_submatrix(Y, r: int, s: int) -> np.ndarray:
    """``Y(r:s)``: rows and columns ``r..s`` (1-based, inclusive)."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if not (1 <= r <= s <= n):
        raise IndexError(f"need 1 <= r <= s <= {n}, got r={r}, s={s}")
    return Y[r - 1:s, r - 1:s].copy()


def diag_concat(*blocks) -> np.ndarray:
    """Block-diagonal concatenation ``A (+) B (+) ...``; works for rectangular blocks too."""
    mats = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    out = np.zeros((rows, cols))
    i = j = 0
    for M in mats:
        out[i:i + M.shape[0], j:j + M.shape[1]] = M
        i += M.shape[0]
        j += M.shape[1]
    return out


def range_projector(U, eps_rank: float | None = None, *, psd_tol: float | None = None) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors of a psd ``U``
    whose eigenvalues exceed ``eps_rank * lambda_max``."""
    tols = get_tolerances()
    eps_rank = tols.eps_rank if eps_rank is None else eps_rank
    psd_tol = tols.tol_cone if psd_tol is None else psd_tol
    dec = spectral(U)
    lam = dec.eigenvalues
    if lam[0] < -psd_tol * (1.0 + float(np.max(np.abs(lam)))):
        raise NotPSDError(f"matrix is not psd (lambda_min={lam[0]:.3g})")
    lmax = float(lam[-1])
    if lmax <= 0.0:
        return np.zeros_like(dec.eigenvectors)
    B = dec.eigenvectors[:, lam > eps_rank * lmax]
    return B @ B.T


def range_contained(W, U, tol: float | None = None, *, eps_rank: float | None = None) -> bool:
    """Whether ``R(W)`` lies in ``R(U)``: ``||(I - P_U) W||_2 <= tol (1 + ||W||_2)``."""
    if tol is None:
        tol = get_tolerances().tol_eq
    W = np.asarray(W, dtype=float)
    P = range_projector(U, eps_rank)
    if W.shape[0] != P.shape[0]:
        raise ValueError(f"dimension mismatch: W has {W.shape[0]} rows, U has order {P.shape[0]}")
    resid = W - P @ W
    return bool(np.linalg.norm(resid, 2) <= tol * (1.0 + np.linalg.norm(W, 2)))


def scaled_eigenbasis(X, eps_rank: float) -> tuple[np.ndarray, int]:
    """Invertible ``Q`` with ``Q' X Q = 0 (+) I_k`` for psd ``X``.

    Null-space eigenvectors come first (orthonormal), range eigenvectors last,
    each scaled by ``1/sqrt(lambda)``.  Returns ``(Q, k)``.
    """
    dec = spectral(X)
    lam = dec.eigenvalues
    k = int(np.sum(lam > eps_rank * lam[-1])) if lam[-1] > 0 else 0
    n = lam.size
    Q = dec.eigenvectors.copy()
    pos = slice(n - k, n)
    Q[:, pos] = Q[:, pos] / np.sqrt(lam[pos])
    return Q, k


def pinv_psd(U, eps_rank: float | None = None) -> np.ndarray:
    """Pseudoinverse of a psd matrix, truncating at the shared rank threshold."""
    eps_rank = get_tolerances().eps_rank if eps_rank is None else eps_rank
    dec = spectral(U)
    lam = dec.eigenvalues
    lmax = float(lam[-1])
    if lmax <= 0.0:
        return np.zeros((lam.size, lam.size))
    keep = lam > eps_rank * lmax
    Q = dec.eigenvectors[:, keep]
    return (Q / lam[keep]) @ Q.T
