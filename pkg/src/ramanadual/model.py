"""The primal-dual pair

    (P)  sup  c'x       s.t.  sum_i x_i A_i <= B          (Loewner order)
    (D)  inf  <B, Y>    s.t.  <A_i, Y> = c_i,  Y psd

together with slacks, feasibility checks and congruence rescaling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from .symmat import as_symmat, inner_product, psd_check

log = logging.getLogger(__name__)

__all__ = [
    "SdpInstance",
    "Slack",
    "NotFeasible",
    "DualFeasibility",
    "RescalingTransform",
    "SingularTransformError",
    "apply_operator",
    "adjoint",
    "slack_of",
    "check_dual_feasible",
    "rescale",
    "primal_objective",
    "dual_objective",
]


@dataclass(frozen=True, eq=False)
class SdpInstance:
    """Data ``(A_1..A_m, B, c)`` of (P)/(D); all matrices of order ``n``."""

    A: tuple[np.ndarray, ...]
    B: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = tuple(as_symmat(Ai, name=f"A_{i + 1}") for i, Ai in enumerate(self.A))
        B = as_symmat(self.B, name="B")
        c = np.atleast_1d(np.asarray(self.c, dtype=float)).ravel()
        if len(A) == 0:
            raise ValueError("need at least one constraint matrix")
        if len(A) != c.size:
            raise ValueError(f"{len(A)} constraint matrices but c has {c.size} entries")
        for i, Ai in enumerate(A):
            if Ai.shape != B.shape:
                raise ValueError(f"A_{i + 1} has order {Ai.shape[0]}, B has order {B.shape[0]}")
        for M in (*A, B, c):
            M.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return len(self.A)

    def stacked(self) -> np.ndarray:
        """Constraint matrices as an ``(m, n, n)`` array."""
        return np.stack(self.A)

    def allclose(self, other: "SdpInstance", atol: float = 0.0, rtol: float = 0.0) -> bool:
        if (self.n, self.m) != (other.n, other.m):
            return False
        return (
            np.allclose(self.stacked(), other.stacked(), atol=atol, rtol=rtol)
            and np.allclose(self.B, other.B, atol=atol, rtol=rtol)
            and np.allclose(self.c, other.c, atol=atol, rtol=rtol)
        )


def apply_operator(inst: SdpInstance, x) -> np.ndarray:
    """``A x = sum_i x_i A_i``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != inst.m:
        raise ValueError(f"x has {x.size} entries, instance has m={inst.m}")
    return np.tensordot(x, inst.stacked(), axes=1)


def adjoint(inst: SdpInstance, Y) -> np.ndarray:
    """``A* Y = (<A_1, Y>, ..., <A_m, Y>)``."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape != inst.B.shape:
        raise ValueError(f"Y has shape {Y.shape}, instance has order {inst.n}")
    return np.array([inner_product(Ai, Y) for Ai in inst.A])


def primal_objective(inst: SdpInstance, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != inst.m:
        raise ValueError(f"x has {x.size} entries, instance has m={inst.m}")
    return float(inst.c @ x)


def dual_objective(inst: SdpInstance, Y) -> float:
    Y = np.asarray(Y, dtype=float)
    if Y.shape != inst.B.shape:
        raise ValueError(f"Y has shape {Y.shape}, instance has order {inst.n}")
    return inner_product(inst.B, Y)


@dataclass(frozen=True)
class Slack:
    """A psd slack ``S = B - A x`` and the point generating it."""

    S: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class NotFeasible:
    """``B - A x`` is not psd; ``witness' (B - A x) witness < 0``."""

    x: np.ndarray
    witness: np.ndarray
    min_eigenvalue: float

    def __bool__(self) -> bool:
        return False


def slack_of(inst: SdpInstance, x, tol: float | None = None) -> Slack | NotFeasible:
    """Slack of ``x`` in (P), or the negative-curvature witness if infeasible."""
    tol = get_tolerances().tol_cone if tol is None else tol
    x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    S = inst.B - apply_operator(inst, x)
    S = 0.5 * (S + S.T)
    chk = psd_check(S, tol)
    if chk:
        return Slack(S, x)
    return NotFeasible(x, chk.witness, chk.min_eigenvalue)


@dataclass(frozen=True)
class DualFeasibility:
    """Residual report of :func:`check_dual_feasible`; truthy iff feasible."""

    feasible: bool
    eq_residual: float
    cone_residual: float
    objective: float

    def __bool__(self) -> bool:
        return self.feasible


def check_dual_feasible(inst: SdpInstance, Y, tol: float | None = None,
                        *, tol_cone: float | None = None) -> DualFeasibility:
    """Check ``||A*Y - c||_inf <= tol`` and ``Y`` psd within ``tol_cone``.

    ``cone_residual`` is ``max(0, -lambda_min(Y))``.
    """
    tols = get_tolerances()
    tol = tols.tol_eq if tol is None else tol
    tol_cone = tol if tol_cone is None else tol_cone
    Y = as_symmat(Y, name="Y")
    eq = float(np.max(np.abs(adjoint(inst, Y) - inst.c)))
    chk = psd_check(Y, tol_cone)
    cone = max(0.0, -chk.min_eigenvalue)
    return DualFeasibility(eq <= tol and chk.is_psd, eq, cone, dual_objective(inst, Y))


class SingularTransformError(ValueError):
    """A rescaling matrix is (numerically) singular."""


@dataclass(frozen=True, eq=False)
class RescalingTransform:
    """Invertible ``T`` used as ``A_i -> T' A_i T``, ``B -> T' B T``.

    ``factors`` records, in order, a short label for every factor composed into
    ``T`` so the provenance of an accumulated transform can be inspected.
    """

    T: np.ndarray
    factors: tuple[str, ...] = field(default=())

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError(f"T must be square, got {T.shape}")
        eps_det = get_tolerances().eps_det
        det = abs(np.linalg.det(T))
        if not np.isfinite(det) or det <= eps_det or np.linalg.cond(T) > 1e15:
            raise SingularTransformError(f"T is singular (|det|={det:.3g})")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def identity(cls, n: int) -> "RescalingTransform":
        return cls(np.eye(n), ("identity",))

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def inverse_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.T)

    def inverse(self) -> "RescalingTransform":
        return RescalingTransform(self.inverse_matrix, ("inverse",) + self.factors)

    def then(self, other: "RescalingTransform | np.ndarray", label: str = "step") -> "RescalingTransform":
        """Rescaling by ``self`` followed by ``other`` (matrix ``T_self @ T_other``)."""
        if isinstance(other, RescalingTransform):
            return RescalingTransform(self.T @ other.T, self.factors + other.factors)
        return RescalingTransform(self.T @ np.asarray(other, dtype=float), self.factors + (label,))

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.T))

    def map_primal(self, X) -> np.ndarray:
        """``T' X T``: how ``A_i``, ``B`` and slacks transform."""
        X = np.asarray(X, dtype=float)
        out = self.T.T @ X @ self.T
        return 0.5 * (out + out.T)

    def map_dual(self, Y) -> np.ndarray:
        """``T^{-1} Y T^{-T}``: how dual points and Ramana variables transform."""
        Ti = self.inverse_matrix
        out = Ti @ np.asarray(Y, dtype=float) @ Ti.T
        return 0.5 * (out + out.T)


def _as_transform(T) -> RescalingTransform:
    return T if isinstance(T, RescalingTransform) else RescalingTransform(T)


def rescale(inst: SdpInstance, T) -> SdpInstance:
    """Congruence ``A_i -> T' A_i T``, ``B -> T' B T``; ``c`` and the set of
    feasible ``x`` are unchanged."""
    T = _as_transform(T)
    if T.n != inst.n:
        raise ValueError(f"transform has order {T.n}, instance has order {inst.n}")
    cond = T.condition_number()
    if cond > get_tolerances().cond_warn:
        log.warning("rescaling with ill-conditioned transform (cond=%.3g)", cond)
    return SdpInstance(tuple(T.map_primal(Ai) for Ai in inst.A), T.map_primal(inst.B),
                       inst.c.copy(), inst.name)
