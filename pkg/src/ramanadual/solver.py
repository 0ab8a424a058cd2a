"""Dense primal-dual interior-point solver for small block-structured conic programs.

Standard form::

    minimize    c'x                 maximize   b'y
    subject to  A x = b             subject to c - A'y = z,  z in K*
                x in K

where ``K`` is a product of psd blocks, a nonnegative orthant and a free part
(whose dual cone is ``{0}``).  A psd block of order ``k`` occupies
``k(k+1)/2`` coordinates holding the upper-triangle entries ``X[i, j]``,
``i <= j``, in ``numpy.triu_indices`` order.  Rows of ``A`` (and ``c``) are
linear forms in those entries, so ``<F, X>`` becomes the coefficient vector
:func:`tri_coeffs` ``(F)`` with off-diagonal weights ``2 F[i, j]``.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

__all__ = [
    "ConicProgram",
    "SolverOptions",
    "SolveResult",
    "Status",
    "CertifyReport",
    "solve",
    "certify",
    "tri_coeffs",
    "tri_values",
    "tri_to_mat",
    "coeffs_to_mat",
]

_SQRT2 = np.sqrt(2.0)
_FREE_RANK_TOL = 1e-10


def tri_coeffs(F) -> np.ndarray:
    """Coefficients of ``X -> <F, X>`` over the upper-triangle entries of ``X``."""
    F = np.asarray(F, dtype=float)
    i, j = np.triu_indices(F.shape[0])
    return np.where(i == j, 1.0, 2.0) * F[i, j]


def tri_values(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[np.triu_indices(X.shape[0])]


def tri_to_mat(v, k: int) -> np.ndarray:
    i, j = np.triu_indices(k)
    M = np.zeros(np.shape(v)[:-1] + (k, k))
    M[..., i, j] = v
    M[..., j, i] = v
    return M


def coeffs_to_mat(v, k: int) -> np.ndarray:
    """Inverse of :func:`tri_coeffs`: the matrix ``F`` with ``tri_coeffs(F) = v``."""
    i, j = np.triu_indices(k)
    return tri_to_mat(np.where(i == j, 1.0, 0.5) * np.asarray(v, dtype=float), k)


@dataclass(eq=False)
class ConicProgram:
    """Linear objective and equalities over psd blocks, nonnegatives and free scalars.

    Columns are laid out as ``[psd blocks..., nonnegatives, free]``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    psd_orders: tuple[int, ...] = ()
    n_nonneg: int = 0
    n_free: int = 0
    block_labels: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.psd_orders = tuple(int(k) for k in self.psd_orders)
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0:
            self.A = self.A.reshape(self.b.size, self.num_vars)
        else:
            self.A = self.A.reshape(self.b.size, -1)
        if any(k < 1 for k in self.psd_orders):
            raise ValueError("psd block orders must be positive")
        if self.num_vars != self.c.size:
            raise ValueError(f"partition has {self.num_vars} coordinates, c has {self.c.size}")
        if self.A.shape[1] != self.num_vars:
            raise ValueError(f"A has {self.A.shape[1]} columns, expected {self.num_vars}")
        if self.block_labels and len(self.block_labels) != len(self.psd_orders):
            raise ValueError("one label per psd block expected")

    @property
    def psd_dims(self) -> tuple[int, ...]:
        return tuple(k * (k + 1) // 2 for k in self.psd_orders)

    @property
    def num_vars(self) -> int:
        return sum(self.psd_dims) + self.n_nonneg + self.n_free

    @property
    def num_constraints(self) -> int:
        return self.b.size

    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for d in self.psd_dims:
            out.append(slice(start, start + d))
            start += d
        return out

    @property
    def nonneg_slice(self) -> slice:
        s = sum(self.psd_dims)
        return slice(s, s + self.n_nonneg)

    @property
    def free_slice(self) -> slice:
        s = sum(self.psd_dims) + self.n_nonneg
        return slice(s, s + self.n_free)

    def unpack(self, x) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
        """Split a primal coordinate vector into psd block matrices, nonnegatives and free part."""
        x = np.asarray(x, dtype=float)
        mats = [tri_to_mat(x[sl], k) for sl, k in zip(self.block_slices(), self.psd_orders)]
        return mats, x[self.nonneg_slice].copy(), x[self.free_slice].copy()

    def permuted_rows(self, perm) -> "ConicProgram":
        perm = np.asarray(perm)
        return ConicProgram(self.c.copy(), self.A[perm].copy(), self.b[perm].copy(),
                            self.psd_orders, self.n_nonneg, self.n_free, self.block_labels,
                            self.name)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    NEAR_OPTIMAL = "NearOptimal"
    NUMERICAL_TROUBLE = "NumericalTrouble"
    DIVERGING = "Diverging"


@dataclass
class SolverOptions:
    gap_tol: float = 1e-9
    feas_tol: float = 1e-9
    near_tol: float = 1e-6
    max_iters: int = 200
    step_fraction: float = 0.98
    sigma: float = 0.2
    predictor_corrector: bool = False
    diverge_norm: float = 1e12
    regularization: float = 1e-13
    refinement_steps: int = 2
    stall_iters: int = 8


@dataclass
class SolveResult:
    """Outcome of :func:`solve`.

    ``history`` holds one record per iteration with the objectives, residuals,
    ``mu``, the step length and the iterate norms ``|x|``, ``|y|``, ``|z|``.
    """

    status: Status
    primal_value: float
    dual_value: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    history: list[dict] = field(default_factory=list)
    reason: str = ""

    @property
    def value(self) -> float:
        """Midpoint of the two objective values."""
        return 0.5 * (self.primal_value + self.dual_value)

    @property
    def max_primal_norm(self) -> float:
        return max((h["norm_x"] for h in self.history), default=float(np.linalg.norm(self.x)))

    @property
    def max_dual_norm(self) -> float:
        return max((h["norm_y"] for h in self.history), default=float(np.linalg.norm(self.y)))


class _FactorizationError(RuntimeError):
    pass


class _Blocks:
    """Solver-internal view in svec coordinates (off-diagonals scaled by sqrt 2)."""

    def __init__(self, prog: ConicProgram, free_keep: np.ndarray):
        self.orders = prog.psd_orders
        self.slices = prog.block_slices()
        self.lp = prog.nonneg_slice
        n_cone = sum(prog.psd_dims) + prog.n_nonneg
        self.n_cone = n_cone
        self.free_idx = np.arange(n_cone, prog.num_vars)[free_keep]
        self.tri = []
        scale = np.ones(prog.num_vars)
        for sl, k in zip(self.slices, self.orders):
            i, j = np.triu_indices(k)
            w = np.where(i == j, 1.0, _SQRT2)
            scale[sl] = w
            self.tri.append((i, j, w))
        self.scale = scale
        self.nu = sum(self.orders) + prog.n_nonneg

    def smat(self, v, b: int) -> np.ndarray:
        k = self.orders[b]
        i, j, w = self.tri[b]
        M = np.zeros(np.shape(v)[:-1] + (k, k))
        vv = v / w
        M[..., i, j] = vv
        M[..., j, i] = vv
        return M

    def svec(self, M, b: int) -> np.ndarray:
        i, j, w = self.tri[b]
        return M[..., i, j] * w


def _max_step_psd(L: np.ndarray, dX: np.ndarray) -> float:
    """Largest ``a`` with ``L L' + a dX`` psd, given the Cholesky factor ``L``."""
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    E = Li @ dX @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (E + E.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _preprocess(prog: ConicProgram):
    """Drop empty free columns and linearly dependent rows."""
    A, b = prog.A, prog.b
    fs = prog.free_slice
    free_cols = A[:, fs]
    empty = ~np.any(free_cols != 0.0, axis=0)
    if np.any(empty & (prog.c[fs] != 0.0)):
        return None, "free variable with nonzero cost appears in no constraint (unbounded)"
    free_keep = ~empty
    keep_cols = np.ones(prog.num_vars, dtype=bool)
    keep_cols[np.arange(fs.start, fs.stop)[empty]] = False
    Ak = A[:, keep_cols]
    p = A.shape[0]
    if p == 0:
        return (np.arange(0), keep_cols, free_keep), ""
    _, R, piv = sla.qr(Ak.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(Ak.shape) * np.finfo(float).eps * (d[0] if d.size else 0.0) * 10
    rank = int(np.sum(d > tol))
    rows = np.sort(piv[:rank])
    if rank < p:
        sol, *_ = np.linalg.lstsq(Ak[rows], b[rows], rcond=None)
        drop = np.setdiff1d(np.arange(p), rows)
        resid = np.abs(Ak[drop] @ sol - b[drop])
        if np.max(resid) > 1e-9 * (1.0 + np.max(np.abs(b))):
            return None, "inconsistent equality constraints"
    return (rows, keep_cols, free_keep), ""


@dataclass
class _FreeElimination:
    """Exact elimination of free variables from ``AK xK + AF xF = b``.

    With ``AF = [Q1 Q2] diag(s, 0) V'``, the equations along ``Q1`` fix
    ``xF`` (taken least norm) and the rest read ``Q2' AK xK = Q2' b``. The
    cost ``cF' xF`` equals ``w' (b - AK xK)`` for the least-norm ``w`` with
    ``AF' w = cF``, and the dual is ``y = w + Q2 y'``.
    """

    AK: np.ndarray
    b: np.ndarray
    cK: np.ndarray
    offset: float
    Q2: np.ndarray
    w: np.ndarray
    pinv_AF: np.ndarray
    AK_full: np.ndarray
    b_full: np.ndarray
    dual_residual: float = 0.0

    def free_part(self, xK: np.ndarray) -> np.ndarray:
        return self.pinv_AF @ (self.b_full - self.AK_full @ xK)

    def full_y(self, y: np.ndarray) -> np.ndarray:
        return self.w + self.Q2 @ y


def _eliminate_free(AK: np.ndarray, AF: np.ndarray, b: np.ndarray, cK: np.ndarray,
                    cF: np.ndarray, tol: float) -> _FreeElimination | None:
    """``None`` when ``AF' w = cF`` has no solution (the inf side is unbounded or infeasible).

    Inconsistencies up to ``tol`` (relative) are kept as a fixed dual residual.
    """
    pm, nF = AF.shape
    if nF == 0 or pm == 0:
        if nF and np.any(cF != 0.0):
            return None
        return _FreeElimination(AK, b, cK, 0.0, np.eye(pm), np.zeros(pm), np.zeros((nF, pm)), AK, b)
    U, sv, Vt = np.linalg.svd(AF, full_matrices=True)
    # columns below this relative size are roundoff; eliminating them would blow up x_F
    q = int(np.sum(sv > _FREE_RANK_TOL * sv[0]))
    Q1, Q2 = U[:, :q], U[:, q:]
    w = Q1 @ ((Vt[:q] @ cF) / sv[:q])
    resid = float(np.linalg.norm(AF.T @ w - cF))
    if resid > tol * (1.0 + np.linalg.norm(cK) + np.linalg.norm(cF)):
        return None
    pinv_AF = (Vt[:q].T / sv[:q]) @ Q1.T
    return _FreeElimination(Q2.T @ AK, Q2.T @ b, cK - AK.T @ w, float(w @ b), Q2, w, pinv_AF, AK, b,
                            resid)


def solve(prog: ConicProgram, opts: SolverOptions | None = None, **overrides) -> SolveResult:
    """Infeasible-start primal-dual path following with Nesterov-Todd scaling.

    Free variables are eliminated exactly before the iteration (see
    :class:`_FreeElimination`), so the Newton systems involve only cone
    variables.  Each step is backtracked until every block of the new
    iterate has a Cholesky factor.  The iterate with
    the smallest combined residual/gap measure is returned, so a run stopped
    by the iteration cap or a stall still reports its best point.
    """
    opts = opts or SolverOptions()
    for k in overrides:
        if not hasattr(opts, k):
            raise TypeError(f"unknown solver option {k!r}")
    if overrides:
        opts = dataclasses.replace(opts, **overrides)

    N, p = prog.num_vars, prog.num_constraints
    pre, why = _preprocess(prog)
    if pre is None:
        zx = np.zeros(N)
        return SolveResult(Status.DIVERGING, np.nan, np.nan, zx, np.zeros(p), zx.copy(),
                           np.inf, np.inf, np.inf, 0, [], why)
    rows, keep_cols, free_keep = pre
    blk = _Blocks(prog, free_keep)
    sc = blk.scale
    A_full = prog.A / sc
    A = A_full[rows][:, keep_cols]
    b = prog.b[rows]
    c_s = (prog.c / sc)[keep_cols]
    cols = np.flatnonzero(keep_cols)
    nK = blk.n_cone
    AK, AFo = A[:, :nK], A[:, nK:]
    cK, cFo = c_s[:nK], c_s[nK:]
    el = _eliminate_free(AK, AFo, b, cK, cFo, opts.near_tol)
    if el is None:
        zx = np.zeros(N)
        return SolveResult(Status.DIVERGING, np.nan, np.nan, zx, np.zeros(p), zx.copy(),
                           np.inf, np.inf, np.inf, 0, [], "free-variable costs admit no dual point (unbounded)")
    b_orig = b
    AK, b, cK, offset = el.AK, el.b, el.cK, el.offset
    AF = np.zeros((AK.shape[0], 0))
    pm = AK.shape[0]

    # starting point
    normA = np.linalg.norm(AK, axis=1) if pm else np.zeros(0)
    xi = max(10.0, float(np.max((1.0 + np.abs(b)) / (1.0 + normA)))) if pm else 10.0
    zeta = max(10.0, float(np.linalg.norm(cK, np.inf)) if nK else 10.0,
               float(np.max(normA)) if pm else 10.0)
    xK = np.zeros(nK)
    zK = np.zeros(nK)
    for bi, sl in enumerate(blk.slices):
        I = np.eye(blk.orders[bi])
        xK[sl] = blk.svec(xi * I, bi)
        zK[sl] = blk.svec(zeta * I, bi)
    xK[blk.lp] = xi
    zK[blk.lp] = zeta
    xF = np.zeros(0)
    y = np.zeros(pm)

    nb_ = 1.0 + np.linalg.norm(b_orig)
    nc_ = 1.0 + np.linalg.norm(c_s)
    history: list[dict] = []
    best = None
    best_score = np.inf
    status = None
    reason = ""
    stall = 0
    it = 0

    def pack(xK_, y_):
        x_s = np.zeros(N)
        x_s[cols] = np.concatenate([xK_, el.free_part(xK_)])
        x = x_s / sc
        yf = np.zeros(p)
        yf[rows] = el.full_y(y_)
        z = prog.c - prog.A.T @ yf
        return x, yf, z

    for it in range(opts.max_iters + 1):
        rp = b - AK @ xK - AF @ xF
        rdK = cK - AK.T @ y - zK
        rdF = np.zeros(0)
        pobj = float(cK @ xK) + offset
        dobj = float(b @ y) + offset
        comp = float(xK @ zK)
        mu = comp / blk.nu if blk.nu else 0.0
        relp = float(np.linalg.norm(rp) / nb_)
        reld = float(np.sqrt(rdK @ rdK + el.dual_residual ** 2) / nc_)
        gap = abs(pobj - dobj)
        relgap = gap / (1.0 + min(abs(pobj), abs(dobj)))
        rec = dict(iter=it, pobj=pobj, dobj=dobj, mu=mu, gap=gap, relgap=relgap,
                   primal_residual=relp, dual_residual=reld,
                   norm_x=float(np.sqrt(xK @ xK + np.sum(el.free_part(xK) ** 2))),
                   norm_y=float(np.linalg.norm(el.full_y(y))),
                   norm_z=float(np.linalg.norm(zK)), step=np.nan)
        history.append(rec)
        score = max(relp, reld, relgap)
        if score < best_score:
            best_score = score
            best = (xK.copy(), xF.copy(), y.copy(), zK.copy(), pobj, dobj, relp, reld, gap, it)
        if relp <= opts.feas_tol and reld <= opts.feas_tol and relgap <= opts.gap_tol:
            status = Status.OPTIMAL
            break
        if it == opts.max_iters:
            reason = "iteration limit"
            break
        if max(rec["norm_x"], rec["norm_y"], rec["norm_z"]) > opts.diverge_norm:
            status, reason = Status.DIVERGING, "iterate norm exceeded divergence threshold"
            break
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                step = _newton_step(blk, AK, AF, xK, zK, rp, rdK, rdF, mu, opts)
            if not all(np.all(np.isfinite(d)) for d in step[:4]) or not np.isfinite(step[4]):
                raise _FactorizationError("non-finite search direction")
        except (_FactorizationError, np.linalg.LinAlgError, ValueError) as exc:
            reason = f"factorization failure at iteration {it}: {exc}"
            status = Status.NUMERICAL_TROUBLE
            break
        dxK, dxF, dy, dzK, alpha = step
        # roundoff can push a boundary-fraction step just outside the cone
        for _ in range(20):
            if _interior(blk, xK + alpha * dxK) and _interior(blk, zK + alpha * dzK):
                break
            alpha *= 0.8
        rec["step"] = alpha
        xK = xK + alpha * dxK
        xF = xF + alpha * dxF
        y = y + alpha * dy
        zK = zK + alpha * dzK
        stall = stall + 1 if alpha < 1e-6 else 0
        if stall >= opts.stall_iters:
            reason = "step length stalled"
            break

    bxK, bxF, by, bzK, pobj, dobj, relp, reld, gap, bit = best
    x, yf, z = pack(bxK, by)
    relgap = gap / (1.0 + min(abs(pobj), abs(dobj)))
    if status is Status.OPTIMAL:
        pass
    elif relp <= opts.feas_tol and reld <= opts.feas_tol and relgap <= opts.gap_tol:
        status = Status.OPTIMAL
    elif max(relp, reld, relgap) <= opts.near_tol:
        status = Status.NEAR_OPTIMAL
    elif status is None:
        norms = [max(h["norm_x"], h["norm_y"]) for h in history]
        last = history[-1]
        # an improving ray: the iterates run off while the other side stays infeasible
        ray = (norms[-1] > 1e3 * max(norms[0], 1.0)
               and max(last["primal_residual"], last["dual_residual"]) > opts.near_tol)
        grew = ray or norms[-1] > 1e6 * max(norms[0], 1.0)
        status = Status.DIVERGING if grew else Status.NUMERICAL_TROUBLE
    if status is not Status.OPTIMAL:
        log.debug("solve %s stopped: %s (%s)", prog.name, status.value, reason)
    return SolveResult(status, pobj, dobj, x, yf, z, gap, relp, reld, it, history, reason)


def _interior(blk: _Blocks, v: np.ndarray) -> bool:
    """Whether every psd block of ``v`` admits a Cholesky factor and the nonnegatives are positive."""
    for bi, sl in enumerate(blk.slices):
        try:
            np.linalg.cholesky(blk.smat(v[sl], bi))
        except np.linalg.LinAlgError:
            return False
    return bool(np.all(v[blk.lp] > 0))


def _newton_step(blk: _Blocks, AK, AF, xK, zK, rp, rdK, rdF, mu, opts: SolverOptions):
    pm = AK.shape[0]
    nF = AF.shape[1]
    scal = []
    S = np.zeros((pm, pm))
    for bi, sl in enumerate(blk.slices):
        X = blk.smat(xK[sl], bi)
        Z = blk.smat(zK[sl], bi)
        try:
            Lx = np.linalg.cholesky(X)
            Lz = np.linalg.cholesky(Z)
        except np.linalg.LinAlgError as exc:
            raise _FactorizationError("iterate block not positive definite") from exc
        # NT scaling via the SVD of Lz' Lx: G' Z G = G^{-1} X G^{-T} = diag(sv)
        U, sv, Vt = np.linalg.svd(Lz.T @ Lx)
        if sv[-1] <= 0:
            raise _FactorizationError("scaling matrix lost definiteness")
        rs = np.sqrt(sv)
        G = (Lx @ Vt.T) / rs
        Gi = (U.T @ Lz.T) / rs[:, None]
        W = G @ G.T
        scal.append((W, G, Gi, sv, Lx, Lz))
        if pm:
            F = blk.smat(AK[:, sl], bi)
            GFG = G.T @ F @ G
            At = blk.svec(0.5 * (GFG + np.swapaxes(GFG, -1, -2)), bi)
            S += At @ At.T
    xl, zl = xK[blk.lp], zK[blk.lp]
    dlp = xl / zl
    if pm and dlp.size:
        Al = AK[:, blk.lp]
        S += (Al * dlp) @ Al.T

    def apply_D(v):
        out = np.empty_like(v)
        for bi, sl in enumerate(blk.slices):
            W = scal[bi][0]
            out[sl] = blk.svec(W @ blk.smat(v[sl], bi) @ W, bi)
        out[blk.lp] = dlp * v[blk.lp]
        return out

    delta_s = opts.regularization * max(1.0, float(np.max(np.abs(np.diag(S))))) if pm else 0.0
    K = np.zeros((pm + nF, pm + nF))
    K[:pm, :pm] = S + delta_s * np.eye(pm)
    K[:pm, pm:] = AF
    K[pm:, :pm] = AF.T
    K[pm:, pm:] = -opts.regularization * np.eye(nF)
    if pm + nF == 0:
        lu = None
    else:
        lu = sla.lu_factor(K, check_finite=True)
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) == 0.0:
            raise _FactorizationError("singular KKT system")

    def kkt_apply(sol):
        dy, dxF = sol[:pm], sol[pm:]
        return np.concatenate([AK @ apply_D(AK.T @ dy) + AF @ dxF, AF.T @ dy])

    def kkt_solve(rhs):
        # refine against the unassembled operator so the computed step satisfies
        # the linearized equalities to working accuracy
        if lu is None:
            return np.zeros(0)
        sol = sla.lu_solve(lu, rhs)
        for _ in range(opts.refinement_steps):
            sol = sol + sla.lu_solve(lu, rhs - kkt_apply(sol))
        return sol

    def direction(Rc):
        rhs = np.concatenate([rp - AK @ (Rc - apply_D(rdK)), rdF])
        sol = kkt_solve(rhs)
        dy, dxF = sol[:pm], sol[pm:]
        dzK = rdK - AK.T @ dy
        dxK = Rc - apply_D(dzK)
        # one correction on the assembled direction; Rc and D dz can cancel heavily
        e = rp - AK @ dxK - AF @ dxF
        if pm and np.linalg.norm(e) > 0:
            cor = sla.lu_solve(lu, np.concatenate([e, np.zeros(nF)]))
            dy = dy + cor[:pm]
            dxF = dxF + cor[pm:]
            dzK = rdK - AK.T @ dy
            dxK = dxK + apply_D(AK.T @ cor[:pm])
        return dxK, dxF, dy, dzK

    def max_step(dxK, dzK):
        a = np.inf
        for bi, sl in enumerate(blk.slices):
            Lx, Lz = scal[bi][4], scal[bi][5]
            a = min(a, _max_step_psd(Lx, blk.smat(dxK[sl], bi)),
                    _max_step_psd(Lz, blk.smat(dzK[sl], bi)))
        a = min(a, _max_step_lp(xl, dxK[blk.lp]), _max_step_lp(zl, dzK[blk.lp]))
        return a

    def centering_rhs(sigma_mu, corr=None):
        Rc = np.empty_like(xK)
        for bi, sl in enumerate(blk.slices):
            W, G, Gi, sv, _, _ = scal[bi]
            R = np.diag(sigma_mu - sv * sv)
            if corr is not None:
                Dx = Gi @ blk.smat(corr[0][sl], bi) @ Gi.T
                Dz = G.T @ blk.smat(corr[1][sl], bi) @ G
                R = R - 0.5 * (Dx @ Dz + Dz @ Dx)
            H = 2.0 * R / (sv[:, None] + sv[None, :])
            Rc[sl] = blk.svec(G @ H @ G.T, bi)
        lp = sigma_mu - xl * zl
        if corr is not None:
            lp = lp - corr[0][blk.lp] * corr[1][blk.lp]
        Rc[blk.lp] = lp / zl
        return Rc

    if blk.nu == 0:
        dxK, dxF, dy, dzK = direction(np.zeros(0))
        return dxK, dxF, dy, dzK, 1.0

    if opts.predictor_corrector:
        aff = direction(centering_rhs(0.0))
        a_aff = min(1.0, max_step(aff[0], aff[3]))
        mu_aff = float((xK + a_aff * aff[0]) @ (zK + a_aff * aff[3])) / blk.nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        dxK, dxF, dy, dzK = direction(centering_rhs(sigma * mu, (aff[0], aff[3])))
    else:
        dxK, dxF, dy, dzK = direction(centering_rhs(opts.sigma * mu))
    alpha = min(1.0, opts.step_fraction * max_step(dxK, dzK))
    if not np.isfinite(alpha):
        raise _FactorizationError("non-finite step")
    return dxK, dxF, dy, dzK, alpha


@dataclass(frozen=True)
class CertifyReport:
    """Independent recheck of a solver result; truthy iff every measure is within tol."""

    ok: bool
    primal_residual: float
    dual_residual: float
    primal_cone: float
    dual_cone: float
    gap: float

    def __bool__(self) -> bool:
        return self.ok


def certify(prog: ConicProgram, result: SolveResult, tol: float = 1e-8) -> CertifyReport:
    """Recheck residuals, cone membership and the objective gap from the raw points.

    Uses only ``prog`` and ``result.x`` / ``result.y``; the dual slack is
    recomputed as ``c - A'y``.  Cone violations are reported relative to
    ``1 + |block|``; residuals relative to ``1 + |b|`` and ``1 + |c|``.
    """
    x = np.asarray(result.x, dtype=float)
    y = np.asarray(result.y, dtype=float)
    if x.size != prog.num_vars or y.size != prog.num_constraints:
        raise ValueError("result does not match program dimensions")
    z = prog.c - prog.A.T @ y
    rp = float(np.max(np.abs(prog.A @ x - prog.b), initial=0.0) / (1.0 + np.max(np.abs(prog.b), initial=0.0)))
    cn = 1.0 + np.max(np.abs(prog.c), initial=0.0)
    Xs, xl, _ = prog.unpack(x)
    _, zl, zf = prog.unpack(z)
    Zs = [coeffs_to_mat(z[sl], k) for sl, k in zip(prog.block_slices(), prog.psd_orders)]
    rd = float(np.max(np.abs(zf), initial=0.0) / cn)

    def cone_violation(mats, vec):
        v = 0.0
        for M in mats:
            lam = np.linalg.eigvalsh(M)
            v = max(v, -lam[0] / (1.0 + np.max(np.abs(lam))))
        if vec.size:
            v = max(v, float(-np.min(vec)) / (1.0 + float(np.max(np.abs(vec)))))
        return max(v, 0.0)

    pc = cone_violation(Xs, xl)
    dc = cone_violation(Zs, zl)
    pobj = float(prog.c @ x)
    dobj = float(prog.b @ y)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    ok = max(rp, rd, pc, dc, gap) <= tol
    return CertifyReport(bool(ok), rp, rd, pc, dc, gap)
