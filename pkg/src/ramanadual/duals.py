"""The classical, strong and Ramana duals as conic programs, and the maps
between their solutions.

For ``(P): sup c'x s.t. sum_j x_j A_j <= B``:

* classical dual ``(D)``: ``inf <B, Y>  s.t.  A* Y = c,  Y psd``;
* strong dual of a reduced instance whose maximum-rank slack is
  ``I_r (+) 0``: the same, with only ``Y[:r, :r]`` required to be psd;
* Ramana dual: ``inf <B, U_{n+1} + V_{n+1}>`` over ``U_0 = V_0 = 0`` and,
  for ``i = 1..n+1``, ``U_i`` psd, ``V_i`` in ``tan(U_{i-1})``, with
  ``A*(U_i + V_i) = 0``, ``<B, U_i + V_i> = 0`` for ``i <= n`` and
  ``A*(U_{n+1} + V_{n+1}) = c``.

In the rendered Ramana program ``V_i = W_i + W_i'`` and tangency is the psd
block ``M_i = [[U_{i-1}, W_i], [W_i', beta_i I]]``. ``V_1 = 0`` always, so
level 1 carries no ``W``, ``beta`` or ``M``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from ._programs import PartialPsdLayout
from .facial import (FacialCertificate, FacialReductionError, chain_pattern,
                     check_certificate_reduced, facial_reduction)
from .model import RescalingTransform, SdpInstance, _as_transform, adjoint
from .solver import (ConicProgram, SolveResult, SolverOptions, Status, solve, tri_coeffs,
                     tri_to_mat)
from .symmat import NotPSDError, as_symmat, diag_concat, psd_check, scaled_eigenbasis
from .tangent import (NotInTangentError, TangentWitness, compute_beta, tan_membership_algebraic,
                      verify_witness)

log = logging.getLogger(__name__)

__all__ = [
    "RamanaSolution",
    "StrongDualPoint",
    "RamanaReport",
    "GapReport",
    "build_classical_dual",
    "build_strong_dual",
    "build_ramana_dual",
    "ramana_num_vars",
    "ramana_num_constraints",
    "ramana_solution_from_x",
    "ramana_solution_to_x",
    "verify_ramana",
    "lift_to_ramana",
    "extract_strong_dual_point",
    "rescale_ramana_solution",
    "embed_classical_dual_point",
    "classical_dual_value",
    "face_consistent_instance",
    "gap_analysis",
]


# Solution types

@dataclass(frozen=True)
class RamanaSolution:
    """Levels ``0..n+1`` of a Ramana-dual point; ``witnesses[i-1]`` certifies ``V_i``."""

    U: tuple[np.ndarray, ...]
    V: tuple[np.ndarray, ...]
    witnesses: tuple[TangentWitness, ...]

    def __post_init__(self):
        object.__setattr__(self, "U", tuple(np.asarray(u, dtype=float) for u in self.U))
        object.__setattr__(self, "V", tuple(np.asarray(v, dtype=float) for v in self.V))
        object.__setattr__(self, "witnesses", tuple(self.witnesses))
        if len(self.U) != len(self.V) or len(self.U) < 2:
            raise ValueError("U and V need the same number (n + 2) of levels")
        if len(self.witnesses) != len(self.U) - 1:
            raise ValueError("one witness per level 1..n+1 expected")

    @property
    def n(self) -> int:
        return self.U[0].shape[0]

    @property
    def final(self) -> np.ndarray:
        """``U_{n+1} + V_{n+1}``, the point whose objective is the Ramana value."""
        return self.U[-1] + self.V[-1]

    def objective(self, inst: SdpInstance) -> float:
        return float(np.sum(inst.B * self.final))


@dataclass(frozen=True)
class StrongDualPoint:
    """``Y`` with ``Y[:r, :r]`` psd, for a reduced instance with face rank ``r``."""

    Y: np.ndarray
    r: int

    def __post_init__(self):
        Y = as_symmat(self.Y, name="Y")
        if not (0 <= self.r <= Y.shape[0]):
            raise ValueError(f"face rank {self.r} out of range for order {Y.shape[0]}")
        object.__setattr__(self, "Y", Y)

    def objective(self, inst: SdpInstance) -> float:
        return float(np.sum(inst.B * self.Y))

    def is_feasible(self, inst: SdpInstance, tol: float | None = None) -> bool:
        tols = get_tolerances()
        tol = tols.tol_eq if tol is None else tol
        scale = 1.0 + np.linalg.norm(self.Y) * max(1.0, max(np.linalg.norm(A) for A in inst.A))
        eq = np.max(np.abs(adjoint(inst, self.Y) - inst.c), initial=0.0) / scale
        if eq > tol:
            return False
        return self.r == 0 or psd_check(self.Y[: self.r, : self.r], tols.tol_cone).is_psd


# Program builders

def build_classical_dual(inst: SdpInstance) -> ConicProgram:
    """``inf <B, Y>  s.t.  <A_j, Y> = c_j,  Y psd``.

    The solver's dual multipliers are the ``x`` of (P).
    """
    A = np.array([tri_coeffs(Aj) for Aj in inst.A]).reshape(inst.m, -1)
    return ConicProgram(c=tri_coeffs(inst.B), A=A, b=inst.c.copy(), psd_orders=(inst.n,),
                        block_labels=("Y",), name=f"classical-dual:{inst.name}")


def _strong_layout(inst: SdpInstance, r: int) -> PartialPsdLayout:
    if not (0 <= r <= inst.n):
        raise ValueError(f"face rank r={r} out of range 0..{inst.n}")
    return PartialPsdLayout(inst.n, r)


def build_strong_dual(inst: SdpInstance, r: int) -> ConicProgram:
    """Classical dual with only ``Y[:r, :r]`` psd; every other entry is a free scalar.

    Columns follow :class:`PartialPsdLayout`. For ``r = n`` this is the
    classical dual.
    """
    lay = _strong_layout(inst, r)
    rows = [lay.coeffs(Aj) for Aj in inst.A]
    return lay.program(rows, inst.c.copy(), lay.coeffs(inst.B), name=f"strong-dual:{inst.name}")


def ramana_num_vars(n: int, m: int) -> int:
    """Scalar variables of :func:`build_ramana_dual` (independent of ``m``)."""
    return (n + 1) * n * (n + 1) // 2 + n * n * (2 * n + 1) + n * (n * n + 1)


def ramana_num_constraints(n: int, m: int) -> int:
    """Equality rows of :func:`build_ramana_dual`."""
    return m * (n + 1) + n + n * n * (2 * n + 1)


class _RamanaLayout:
    """Column offsets: ``U_1..U_{n+1}``, ``M_2..M_{n+1}`` (psd), then ``W_2..W_{n+1}``, ``beta_2..beta_{n+1}``."""

    def __init__(self, n: int):
        self.n = n
        self.tU = n * (n + 1) // 2
        self.tM = n * (2 * n + 1)
        self.base_M = (n + 1) * self.tU
        self.base_W = self.base_M + n * self.tM
        self.base_beta = self.base_W + n * n * n
        self.num_vars = self.base_beta + n

    def U(self, i: int) -> slice:
        return slice((i - 1) * self.tU, i * self.tU)

    def M(self, i: int) -> slice:
        o = self.base_M + (i - 2) * self.tM
        return slice(o, o + self.tM)

    def W(self, i: int) -> slice:
        o = self.base_W + (i - 2) * self.n * self.n
        return slice(o, o + self.n * self.n)

    def beta(self, i: int) -> int:
        return self.base_beta + i - 2


def build_ramana_dual(inst: SdpInstance) -> ConicProgram:
    """Render the Ramana dual as a conic program.

    Needs no knowledge of the maximum-rank slack. Counts match
    :func:`ramana_num_vars` and :func:`ramana_num_constraints`.
    """
    n, m = inst.n, inst.m
    L = _RamanaLayout(n)
    rows, rhs = [], []

    def level_row(F, i):
        row = np.zeros(L.num_vars)
        row[L.U(i)] = tri_coeffs(F)
        if i >= 2:
            row[L.W(i)] = 2.0 * np.asarray(F, dtype=float).ravel()
        return row

    for i in range(1, n + 2):
        for j, Aj in enumerate(inst.A):
            rows.append(level_row(Aj, i))
            rhs.append(inst.c[j] if i == n + 1 else 0.0)
    for i in range(1, n + 1):
        rows.append(level_row(inst.B, i))
        rhs.append(0.0)
    iu, ju = np.triu_indices(2 * n)
    iu_n = {(p, q): k for k, (p, q) in enumerate(zip(*np.triu_indices(n)))}
    for i in range(2, n + 2):
        m_off = L.M(i).start
        for k, (p, q) in enumerate(zip(iu, ju)):
            row = np.zeros(L.num_vars)
            row[m_off + k] = 1.0
            if q < n:
                row[L.U(i - 1).start + iu_n[(p, q)]] = -1.0
            elif p < n:
                row[L.W(i).start + p * n + (q - n)] = -1.0
            elif p == q:
                row[L.beta(i)] = -1.0
            rows.append(row)
            rhs.append(0.0)
    A = np.array(rows)
    c = level_row(inst.B, n + 1)
    labels = tuple(f"U{i}" for i in range(1, n + 2)) + tuple(f"M{i}" for i in range(2, n + 2))
    prog = ConicProgram(c=c, A=A, b=np.array(rhs), psd_orders=(n,) * (n + 1) + (2 * n,) * n,
                        n_free=n * n * n + n, block_labels=labels, name=f"ramana-dual:{inst.name}")
    assert prog.num_vars == ramana_num_vars(n, m)
    assert prog.num_constraints == ramana_num_constraints(n, m)
    return prog


def ramana_solution_from_x(inst: SdpInstance, x) -> RamanaSolution:
    """Read ``(U, V, witnesses)`` off a column vector of :func:`build_ramana_dual`."""
    n = inst.n
    L = _RamanaLayout(n)
    x = np.asarray(x, dtype=float)
    if x.size != L.num_vars:
        raise ValueError(f"expected {L.num_vars} entries, got {x.size}")
    Z = np.zeros((n, n))
    U, V, wits = [Z], [Z], [TangentWitness(Z.copy(), 0.0)]
    for i in range(1, n + 2):
        U.append(tri_to_mat(x[L.U(i)], n))
        if i == 1:
            V.append(Z.copy())
            continue
        W = x[L.W(i)].reshape(n, n).copy()
        V.append(W + W.T)
        wits.append(TangentWitness(W, float(x[L.beta(i)])))
    return RamanaSolution(tuple(U), tuple(V), tuple(wits))


def ramana_solution_to_x(sol: RamanaSolution) -> np.ndarray:
    """Inverse of :func:`ramana_solution_from_x`; ``M_i`` is filled from the witnesses."""
    n = sol.n
    L = _RamanaLayout(n)
    x = np.zeros(L.num_vars)
    iu, ju = np.triu_indices(n)
    iM, jM = np.triu_indices(2 * n)
    for i in range(1, n + 2):
        x[L.U(i)] = sol.U[i][iu, ju]
        if i == 1:
            continue
        wit = sol.witnesses[i - 1]
        x[L.W(i)] = wit.W.ravel()
        x[L.beta(i)] = wit.beta
        M = np.block([[sol.U[i - 1], wit.W], [wit.W.T, wit.beta * np.eye(n)]])
        x[L.M(i)] = M[iM, jM]
    return x


# Verification

@dataclass
class RamanaReport:
    """Residuals of :func:`verify_ramana`; truthy iff valid."""

    valid: bool
    objective: float
    equation_residual: float
    psd_violation: float
    tangent_failures: list[int] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid

    @property
    def max_residual(self) -> float:
        return max(self.equation_residual, self.psd_violation)


def verify_ramana(inst: SdpInstance, sol: RamanaSolution, tol: float | None = None) -> RamanaReport:
    """Check every constraint of the Ramana dual within ``tol``.

    Equation residuals are relative: ``|<F, X> - rhs| / (1 + ||F|| ||X||)``.
    Tangency of ``V_i`` is checked through its witness (``W + W' = V_i`` and
    ``M(W, beta)`` psd), which also certifies ``range(W)`` inside
    ``range(U_{i-1})``.
    """
    tol = get_tolerances().tol_eq if tol is None else tol
    n = inst.n
    msgs: list[str] = []
    if sol.n != n or len(sol.U) != n + 2:
        return RamanaReport(False, float("nan"), float("inf"), float("inf"), [],
                            [f"expected {n + 2} levels of order {n}"])
    if np.any(sol.U[0]) or np.any(sol.V[0]):
        msgs.append("U_0 and V_0 must vanish")
    eq = 0.0
    for i in range(1, n + 2):
        X = sol.U[i] + sol.V[i]
        nx = float(np.linalg.norm(X))
        for j, Aj in enumerate(inst.A):
            target = inst.c[j] if i == n + 1 else 0.0
            eq = max(eq, abs(float(np.sum(Aj * X)) - target) / (1.0 + np.linalg.norm(Aj) * nx))
        if i <= n:
            eq = max(eq, abs(float(np.sum(inst.B * X))) / (1.0 + np.linalg.norm(inst.B) * nx))
    if eq > tol:
        msgs.append(f"equation residual {eq:.3g} exceeds {tol:.3g}")
    psd_viol = 0.0
    for i in range(1, n + 2):
        chk = psd_check(sol.U[i], tol)
        if not chk:
            msgs.append(f"U_{i} is not psd (lambda_min={chk.min_eigenvalue:.3g})")
        scale = 1.0 + float(np.max(np.abs(np.linalg.eigvalsh(sol.U[i]))))
        psd_viol = max(psd_viol, max(0.0, -chk.min_eigenvalue) / scale)
    bad = [i for i in range(1, n + 2)
           if not verify_witness(sol.U[i - 1], sol.V[i], sol.witnesses[i - 1], tol)]
    if bad:
        msgs.append(f"tangent witness fails at levels {bad}")
    return RamanaReport(not msgs, sol.objective(inst), eq, psd_viol, bad, msgs)


# Constructions

def _witness(U_prev: np.ndarray, V: np.ndarray) -> TangentWitness:
    if not np.any(V):
        return TangentWitness(np.zeros_like(V), 0.0)
    mem = tan_membership_algebraic(V, U_prev)
    if not mem:
        raise NotInTangentError(mem.reason)
    return compute_beta(U_prev, mem.W)


def embed_classical_dual_point(Y) -> RamanaSolution:
    """``U_{n+1} = Y``, every other level zero: feasible whenever ``Y`` is for (D)."""
    Y = as_symmat(Y, name="Y")
    n = Y.shape[0]
    Z = np.zeros((n, n))
    U = [Z] * (n + 1) + [Y]
    V = [Z] * (n + 2)
    return RamanaSolution(tuple(U), tuple(V), tuple(TangentWitness(Z, 0.0) for _ in range(n + 1)))


def lift_to_ramana(ystar: StrongDualPoint, cert: FacialCertificate,
                   inst: SdpInstance | None = None, tol: float | None = None) -> RamanaSolution:
    """Ramana point with objective ``<B, Y*>`` from a strong-dual point and a certificate chain.

    Works in the reduced coordinates of ``cert``. Levels ``1..n-k`` are zero;
    level ``n-k+i`` uses ``U = 0 (+) I_{r_1+...+r_i}`` and ``V = Y_i - U``;
    the last level splits ``Y*`` as ``Y*[:r, :r] (+) 0`` plus the rest.

    Args:
        inst: the reduced instance; when given, the certificate and the
            feasibility of ``Y*`` are checked against it.

    Raises:
        ValueError: if the certificate or ``Y*`` fails its checks.
    """
    tols = get_tolerances()
    tol = tols.tol_eq if tol is None else tol
    n, k, r = cert.n, cert.k, cert.face_rank
    if ystar.r != r or ystar.Y.shape != (n, n):
        raise ValueError(f"strong-dual point (order {ystar.Y.shape[0]}, r={ystar.r}) does not match"
                         f" the certificate (order {n}, r={r})")
    if r and not psd_check(ystar.Y[:r, :r], tols.tol_cone):
        raise NotPSDError("Y*[:r, :r] is not psd")
    if inst is not None:
        rep = check_certificate_reduced(inst, cert, max(tol, 1e-6))
        if not rep:
            raise ValueError("certificate is invalid: " + "; ".join(rep.messages))
        if not ystar.is_feasible(inst, max(tol, 1e-6)):
            raise ValueError("Y* is not feasible for the strong dual")
    Z = np.zeros((n, n))
    U, V = [Z] * (n - k + 1), [Z] * (n - k + 1)
    for i in range(1, k + 1):
        a, _ = chain_pattern(n, cert.block_sizes, i)
        Ui = diag_concat(np.zeros((a, a)), np.eye(n - a))
        U.append(Ui)
        V.append(cert.Ys[i - 1] - Ui)
    Un1 = diag_concat(ystar.Y[:r, :r], np.zeros((n - r, n - r)))
    U.append(Un1)
    V.append(ystar.Y - Un1)
    V[-1] = 0.5 * (V[-1] + V[-1].T)
    wits = [_witness(U[i - 1], V[i]) for i in range(1, n + 2)]
    return RamanaSolution(tuple(U), tuple(V), tuple(wits))


def extract_strong_dual_point(inst: SdpInstance, sol: RamanaSolution, r: int | None = None,
                              tol: float | None = None) -> tuple[StrongDualPoint, RescalingTransform]:
    """Strong-dual point from a Ramana point of a reduced instance.

    ``inst`` must have ``I_r (+) 0`` as a maximum-rank slack. For
    ``i = 1..n`` the lower-right block of ``U_i`` is brought to ``0 (+) I``
    by ``T_i = I_r (+) Q_i``; every ``U_j``, ``V_j`` and the instance are
    rescaled by ``T_i^{-T}``. Earlier levels are not renormalized after
    later sweeps. Since every ``T_i`` fixes the leading ``r`` coordinates,
    ``Y[:r, :r]`` is the same in the swept and the input coordinates.

    Returns:
        ``(point, trail)``: the point is feasible for ``rescale(inst, trail)``;
        ``trail.inverse().map_dual(point.Y)`` is the point for ``inst``.

    Raises:
        ValueError: if some ``<Z, U_i>`` is significantly nonzero.
    """
    tols = get_tolerances()
    tol = tols.tol_eq if tol is None else tol
    n = inst.n
    if r is None:
        r = facial_reduction(inst).certificate.face_rank
    if not (0 <= r <= n):
        raise ValueError(f"face rank r={r} out of range")
    U = [u.copy() for u in sol.U]
    V = [v.copy() for v in sol.V]
    trail = RescalingTransform.identity(n)
    for i in range(1, n + 1):
        zu = float(np.trace(U[i][:r, :r]))
        if zu > np.sqrt(tol) * (1.0 + float(np.linalg.norm(U[i]))):
            raise ValueError(f"<Z, U_{i}> = {zu:.3g} is not zero: solution and slack are inconsistent")
        if r == n:
            continue
        Q, _ = scaled_eigenbasis(U[i][r:, r:], tols.eps_rank)
        Ti = diag_concat(np.eye(r), Q)
        step = RescalingTransform(np.linalg.inv(Ti).T, (f"sweep-{i}",))
        U = [step.map_dual(u) for u in U]
        V = [step.map_dual(v) for v in V]
        trail = trail.then(step)
    Y = U[n + 1] + V[n + 1]
    return StrongDualPoint(0.5 * (Y + Y.T), r), trail


def rescale_ramana_solution(sol: RamanaSolution, T) -> RamanaSolution:
    """Map a Ramana point of ``inst`` to one of ``rescale(inst, T)``.

    ``U, V, W -> T^{-1} (.) T^{-T}``. With ``D = T^{-1} (+) T^{-1}``,
    ``M(W', beta') = D [[U, W], [W', beta' T T']] D'``, so
    ``beta' = beta / sigma_min(T)^2`` keeps the witness psd.

    Raises:
        SingularTransformError: if ``T`` is singular.
    """
    T = _as_transform(T)
    Ti = T.inverse_matrix
    smin = float(np.linalg.svd(T.T, compute_uv=False)[-1])
    U = tuple(T.map_dual(u) for u in sol.U)
    V = tuple(T.map_dual(v) for v in sol.V)
    wits = tuple(TangentWitness(Ti @ w.W @ Ti.T, w.beta / smin ** 2) for w in sol.witnesses)
    return RamanaSolution(U, V, wits)


# Gap analysis

@dataclass
class ClassicalDualValue:
    """Value of (D) computed through facial reduction of its primal form."""

    value: float
    attained: bool | None
    evidence: dict = field(default_factory=dict)


def _symmetric_basis(n: int) -> np.ndarray:
    """Rows: orthonormal basis of symmetric matrices (``E_ii``, ``(E_ij + E_ji)/sqrt 2``), flattened."""
    iu, ju = np.triu_indices(n)
    Bs = np.zeros((iu.size, n * n))
    for k, (i, j) in enumerate(zip(iu, ju)):
        v = 1.0 if i == j else 1.0 / np.sqrt(2.0)
        Bs[k, i * n + j] = v
        Bs[k, j * n + i] = v
    return Bs


def face_consistent_instance(fr) -> tuple[SdpInstance, float]:
    """Reduced instance with ``B`` shifted so the slack lies exactly in ``psd_r (+) 0``.

    Inexact certificates leave the reduced slack ``Z = B - A x`` with small
    entries outside the leading block; the strong dual of such an instance
    has free columns whose costs are slightly inconsistent. Subtracting the
    off-face part ``E`` of ``Z`` from ``B`` gives the nearest instance where
    ``Z`` is exact. Returns it with ``max |E|``, the backward error.
    """
    r = fr.certificate.face_rank
    E = np.array(fr.slack.Z, dtype=float)
    E[:r, :r] = 0.0
    red = fr.reduced
    return SdpInstance(red.A, red.B - E, red.c, name=red.name), float(np.max(np.abs(E), initial=0.0))


def _usable(res: SolveResult) -> bool:
    """Converged, or stalled with small residuals and a small relative gap.

    Unattained optima stall the interior-point method close to the value;
    such results still carry the value to a few digits.
    """
    if res.status in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        return True
    if not (np.isfinite(res.primal_value) and np.isfinite(res.dual_value)):
        return False
    rel = abs(res.primal_value - res.dual_value) / (1.0 + abs(res.primal_value) + abs(res.dual_value))
    return max(res.primal_residual, res.dual_residual) <= _USABLE_RESIDUAL and rel <= _USABLE_GAP


def _solve_retry(prog: ConicProgram, opts: SolverOptions | None) -> SolveResult:
    """Solve; if the result is not usable, retry with the other step rule and keep the better."""
    first = opts or SolverOptions()
    res = solve(prog, first)
    if res.status in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        return res
    alt = solve(prog, dataclasses.replace(first, predictor_corrector=not first.predictor_corrector))
    if alt.status in (Status.OPTIMAL, Status.NEAR_OPTIMAL) or (_usable(alt) and not _usable(res)):
        return alt
    return res


_USABLE_RESIDUAL = 1e-6
_USABLE_GAP = 1e-4
_ATTAIN_TOL = 1e-6


def _box_value(reduced: SdpInstance, r: int, radius: float,
               opts: SolverOptions | None) -> SolveResult:
    """Value of the reduced (P) with ``|x_j| <= radius``.

    Solved through its strong dual with penalised slack columns:
    ``inf <B, Y> + radius * sum(u + v)  s.t.  A* Y + u - v = c``.
    """
    lay = _strong_layout(reduced, r)
    m = reduced.m
    rows = [lay.coeffs(Aj) for Aj in reduced.A]
    N = np.hstack([np.eye(m), -np.eye(m)])
    prog = lay.program(rows, reduced.c.copy(), lay.coeffs(reduced.B), name=f"box:{reduced.name}",
                       nonneg_cols=N, nonneg_cost=np.full(2 * m, radius))
    return _solve_retry(prog, opts)


def _attainment(reduced: SdpInstance, r: int, value: float,
                opts: SolverOptions | None) -> tuple[bool | None, dict]:
    """Whether the sup of the reduced (P) is attained, judged by a box-bounded solve.

    Attained optima within the box keep the value; unattained ones lose a
    deficit that shrinks only as the box grows.
    """
    radius = get_tolerances().norm_blowup
    if reduced.m == 0:
        return True, {"box_radius": radius, "box_deficit": 0.0}
    try:
        res = _box_value(reduced, r, radius, opts)
    except Exception as exc:  # the probe is advisory
        return None, {"box_error": str(exc)}
    if not _usable(res):
        return None, {"box_status": res.status.value}
    deficit = float(value - res.value)
    ev = {"box_radius": radius, "box_value": res.value, "box_deficit": deficit,
          "box_status": res.status.value}
    return bool(deficit <= _ATTAIN_TOL * (1.0 + abs(value))), ev


def classical_dual_value(inst: SdpInstance, opts: SolverOptions | None = None,
                         rcond: float = 1e-10) -> ClassicalDualValue:
    """``val(D)`` without assuming any constraint qualification.

    Writes the feasible set of (D) as ``Y = Y0 - sum_j w_j G_j`` with ``G_j``
    an orthonormal basis of ``ker A*`` and ``Y0`` the least-norm solution of
    ``A* Y = c``. Then ``val(D) = <B, Y0> - val(P')`` for the primal-form
    instance ``P' = (G, Y0, (<B, G_j>))``, whose value is computed exactly by
    facial reduction and its strong dual. (D) attains its value iff ``P'``
    does; the evidence is the largest ``|w|`` among the solver iterates.
    """
    tols = get_tolerances()
    n = inst.n
    Bs = _symmetric_basis(n)
    M = np.array([Bs @ A.ravel() for A in inst.A]).reshape(inst.m, -1)
    _, sv, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(sv > rcond * (sv[0] if sv.size else 0.0)))
    y0 = np.linalg.lstsq(M, inst.c, rcond=rcond)[0]
    Y0 = (Bs.T @ y0).reshape(n, n)
    Y0 = 0.5 * (Y0 + Y0.T)
    resid = float(np.linalg.norm(M @ y0 - inst.c))
    if resid > 1e-8 * (1.0 + float(np.linalg.norm(inst.c))):
        return ClassicalDualValue(float("inf"), None, {"reason": "A* Y = c has no solution",
                                                        "residual": resid})
    base = float(np.sum(inst.B * Y0))
    G = [0.5 * ((Bs.T @ g).reshape(n, n) + (Bs.T @ g).reshape(n, n).T) for g in Vt[rank:]]
    if not G:
        chk = psd_check(Y0, tols.tol_cone)
        if chk:
            return ClassicalDualValue(base, True, {"reason": "unique dual point"})
        return ClassicalDualValue(float("inf"), None, {"reason": "unique solution of A* Y = c is not psd",
                                                        "min_eigenvalue": chk.min_eigenvalue})
    pp = SdpInstance(tuple(G), Y0, np.array([float(np.sum(inst.B * g)) for g in G]),
                     name=f"dual-form:{inst.name}")
    try:
        fr = facial_reduction(pp, opts=opts)
    except FacialReductionError as exc:
        return ClassicalDualValue(float("nan"), None, {"reason": f"facial reduction failed: {exc}"})
    if fr.infeasibility_evidence:
        return ClassicalDualValue(float("inf"), None, {"reason": "(D) appears infeasible"})
    r = fr.certificate.face_rank
    red, berr = face_consistent_instance(fr)
    res = _solve_retry(build_strong_dual(red, r), opts)
    ev = {"status": res.status.value, "face_rank": r, "max_iterate_norm": res.max_dual_norm,
          "singularity_steps": fr.certificate.k, "face_backward_error": berr}
    if not _usable(res):
        return ClassicalDualValue(float("nan"), None, dict(ev, reason=res.reason))
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        ev["inaccurate"] = True
    # the inf side of the strong dual is attained, so its objective is the reliable one
    vp = float(res.primal_value)
    attained, box = _attainment(red, r, vp, opts)
    ev.update(box)
    return ClassicalDualValue(base - vp, attained, ev)


@dataclass
class GapReport:
    """Values of (P), (D) and the Ramana dual, with attainment evidence.

    ``ramana_value`` is the objective of a verified Ramana point when one
    was built, else the interior-point value of the rendered program.
    ``gap = classical_dual_value - ramana_value``.
    """

    name: str
    primal_value: float
    classical_dual_value: float
    ramana_value: float
    gap: float
    strong_dual_value: float = float("nan")
    ramana_solver_value: float = float("nan")
    classical_solver_value: float = float("nan")
    face_rank: int | None = None
    singularity_steps: int | None = None
    primal_attained: bool | None = None
    classical_dual_attained: bool | None = None
    ramana_attained: bool | None = None
    ramana_verified: bool = False
    statuses: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    ramana_solution: RamanaSolution | None = None
    certificate: FacialCertificate | None = None

    @property
    def sandwich_ok(self) -> bool:
        """``ramana_value <= classical_dual_value + 1e-6`` (vacuous when a value is missing)."""
        if not (np.isfinite(self.ramana_value) and not np.isnan(self.classical_dual_value)):
            return True
        return self.ramana_value <= self.classical_dual_value + 1e-6


def _solve_recorded(report: GapReport, key: str, prog: ConicProgram,
                    opts: SolverOptions | None) -> SolveResult | None:
    try:
        res = _solve_retry(prog, opts)
    except Exception as exc:  # solver failures are recorded, the report goes on
        report.errors.append(f"{key}: {exc}")
        report.statuses[key] = "Error"
        return None
    report.statuses[key] = res.status.value
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        report.errors.append(f"{key}: {res.status.value} ({res.reason})")
    return res


def gap_analysis(inst: SdpInstance, opts: SolverOptions | None = None, *,
                 solve_ramana: bool = True) -> GapReport:
    """Facial reduction, the three duals, and their cross-checks in one report.

    Sub-problem failures are recorded in ``errors`` and ``statuses``; the
    report is returned in every case.
    """
    tols = get_tolerances()
    nan = float("nan")
    rep = GapReport(inst.name, nan, nan, nan, nan)
    ok = (Status.OPTIMAL, Status.NEAR_OPTIMAL)

    fr = None
    try:
        fr = facial_reduction(inst, opts=opts)
        rep.statuses["facial_reduction"] = "Optimal"
        rep.face_rank = fr.certificate.face_rank
        rep.singularity_steps = fr.certificate.k
        rep.certificate = fr.certificate
        if fr.infeasibility_evidence:
            rep.errors.append("facial reduction: evidence that (P) is infeasible")
    except FacialReductionError as exc:
        rep.statuses["facial_reduction"] = "Error"
        rep.errors.append(f"facial_reduction: {exc}")

    if fr is not None:
        r = fr.certificate.face_rank
        lay = PartialPsdLayout(inst.n, r)
        red, berr = face_consistent_instance(fr)
        rep.evidence["face_backward_error"] = berr
        res = _solve_recorded(rep, "strong_dual", build_strong_dual(red, r), opts)
        if res is not None and _usable(res):
            rep.strong_dual_value = res.primal_value
            rep.primal_value = res.primal_value
            rep.evidence["primal_max_iterate_norm"] = res.max_dual_norm
            rep.primal_attained, box = _attainment(red, r, res.primal_value, opts)
            rep.evidence["primal_box"] = box
            ystar = StrongDualPoint(lay.to_matrix(res.x), r)
            try:
                sol_red = lift_to_ramana(ystar, fr.certificate)
                sol = rescale_ramana_solution(sol_red, fr.certificate.accumulated_T.inverse())
                check = verify_ramana(inst, sol, max(tols.tol_eq, 1e-6))
                rep.evidence["ramana_lift_residual"] = check.max_residual
                if check:
                    rep.ramana_verified = True
                    rep.ramana_solution = sol
                    rep.ramana_value = check.objective
                    rep.ramana_attained = True
                else:
                    rep.errors.append("lifted Ramana point failed verification: "
                                      + "; ".join(check.messages))
            except (ValueError, NotInTangentError) as exc:
                rep.errors.append(f"lift: {exc}")

    cd = classical_dual_value(inst, opts)
    rep.classical_dual_value = cd.value
    rep.classical_dual_attained = cd.attained
    rep.evidence["classical_dual"] = cd.evidence
    rep.statuses["classical_dual_value"] = cd.evidence.get("status", "Direct")

    res = _solve_recorded(rep, "classical_dual", build_classical_dual(inst), opts)
    if res is not None:
        rep.classical_solver_value = res.primal_value
        rep.evidence["classical_solver_max_iterate_norm"] = res.max_primal_norm

    if solve_ramana:
        res = _solve_recorded(rep, "ramana_dual", build_ramana_dual(inst), opts)
        if res is not None:
            rep.evidence["ramana_solver_last_iterate"] = {
                "primal_objective": res.primal_value, "dual_objective": res.dual_value,
                "primal_residual": res.primal_residual, "dual_residual": res.dual_residual,
                "iterations": res.iterations}
            if res.status in ok:
                rep.ramana_solver_value = res.primal_value
    if not rep.ramana_verified and np.isfinite(rep.ramana_solver_value):
        rep.ramana_value = rep.ramana_solver_value
    if np.isfinite(rep.ramana_value) and not np.isnan(rep.classical_dual_value):
        rep.gap = rep.classical_dual_value - rep.ramana_value
    return rep
