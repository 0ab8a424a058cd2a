"""Facial reduction: a maximum-rank slack and the certificate chain proving it.

Starting from ``s = n`` the loop solves the auxiliary pair

    sup  t     s.t.  B - A x - t (I_s (+) 0)  in  psd_s (+) 0
    inf <B,Y>  s.t.  A* Y = 0,  <I_s (+) 0, Y> = 1,  Y[:s, :s] psd, rest free

A positive value exhibits a slack in the relative interior of the current
face; value zero yields ``Y`` whose leading block has rank ``r_i > 0``, and a
rescaling that moves the range of that block to the trailing coordinates of
the face shrinks the face by ``r_i``.

Certificates are stored in the coordinates of the reduced instance, where
``Y_i`` has the chain pattern: with ``a_i = n - r_1 - ... - r_i`` and
``b_i = a_i + r_i``, ``Y_i[:a_i, :b_i] = 0`` and ``Y_i[a_i:b_i, a_i:b_i] = I``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from ._programs import PartialPsdLayout
from .model import RescalingTransform, SdpInstance, adjoint, apply_operator, rescale
from .solver import ConicProgram, SolveResult, SolverOptions, Status, solve
from .symmat import diag_concat, spectral

log = logging.getLogger(__name__)

__all__ = [
    "FacialCertificate",
    "MaxRankSlackReport",
    "PositiveValue",
    "ZeroValue",
    "FacialReductionError",
    "CertificateReport",
    "gordan_pair",
    "reduce_step",
    "facial_reduction",
    "verify_certificate",
    "check_certificate_reduced",
    "chain_pattern",
    "FacialReductionResult",
]


class FacialReductionError(RuntimeError):
    """The reduction loop could not produce a trustworthy decision."""


@dataclass(frozen=True)
class PositiveValue:
    """The auxiliary sup is positive: ``B - A x`` has leading block ``>= t I``."""

    t: float
    x: np.ndarray
    result: SolveResult | None = None


@dataclass(frozen=True)
class ZeroValue:
    """The auxiliary sup is zero; ``Y`` is the reducing direction."""

    Y: np.ndarray
    value: float
    result: SolveResult | None = None


@dataclass(frozen=True)
class FacialCertificate:
    """Certificates ``Y_1..Y_k`` in the reduced coordinates ``rescale(original, accumulated_T)``."""

    Ys: tuple[np.ndarray, ...]
    block_sizes: tuple[int, ...]
    face_rank: int
    accumulated_T: RescalingTransform

    @property
    def k(self) -> int:
        return len(self.Ys)

    @property
    def n(self) -> int:
        return self.accumulated_T.n


@dataclass(frozen=True)
class MaxRankSlackReport:
    """``Z = B - A x`` equals ``I_r (+) 0`` in the reduced instance."""

    Z: np.ndarray
    x: np.ndarray
    r: int
    slater_margin: float


@dataclass(frozen=True)
class FacialReductionResult:
    slack: MaxRankSlackReport
    certificate: FacialCertificate
    reduced: SdpInstance
    face_sizes: tuple[int, ...] = ()
    infeasibility_evidence: bool = False

    def __iter__(self):
        return iter((self.slack, self.certificate, self.reduced))


def _aux_options() -> SolverOptions:
    return SolverOptions()


def chain_pattern(n: int, block_sizes, i: int) -> tuple[int, int]:
    """``(a_i, b_i)`` for the ``i``-th certificate (1-based)."""
    a = n - int(sum(block_sizes[:i]))
    return a, a + int(block_sizes[i - 1])


def _gordan_program(inst: SdpInstance, s: int):
    """Auxiliary program with the cap ``t <= 1``.

    The cap appears on the inf side as a nonnegative ``w`` in
    ``<I_s (+) 0, Y> + w = 1``; it keeps that side feasible when the sup is
    unbounded (a Slater point of the face), without changing the sign of the
    value. Columns: ``[Y psd block, w, Y free entries]``.
    """
    n = inst.n
    lay = PartialPsdLayout(n, s)
    Is = diag_concat(np.eye(s), np.zeros((n - s, n - s)))

    def row(F, w):
        v = lay.coeffs(F)
        return np.concatenate([v[: lay.n_psd], [w], v[lay.n_psd:]])

    A = np.array([row(A, 0.0) for A in inst.A] + [row(Is, 1.0)])
    b = np.concatenate([np.zeros(inst.m), [1.0]])
    prog = ConicProgram(c=row(inst.B, 1.0), A=A, b=b, psd_orders=lay.psd_orders, n_nonneg=1,
                        n_free=lay.n_free, block_labels=("Y",), name=f"gordan-s{s}")
    return lay, prog


def _gordan_Y(lay: PartialPsdLayout, x: np.ndarray) -> np.ndarray:
    return lay.to_matrix(np.concatenate([x[: lay.n_psd], x[lay.n_psd + 1:]]))


def gordan_pair(inst: SdpInstance, s: int, tol_fr: float | None = None,
                opts: SolverOptions | None = None) -> PositiveValue | ZeroValue:
    """Solve the auxiliary pair for face size ``s`` (``1 <= s <= n``).

    Raises:
        FacialReductionError: if the solver returns neither an optimal nor a
            near-optimal point.
    """
    n = inst.n
    if not (1 <= s <= n):
        raise ValueError(f"need 1 <= s <= n, got s={s}")
    tol_fr = get_tolerances().tol_fr if tol_fr is None else tol_fr
    lay, prog = _gordan_program(inst, s)
    first = opts or _aux_options()
    res = solve(prog, first)
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        retry = solve(prog, first, predictor_corrector=not first.predictor_corrector)
        if retry.status in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
            res = retry
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL):
        fallback = _face_interior_point(inst, s, tol_fr, opts)
        if fallback is not None:
            log.info("auxiliary problem at s=%d: %s; interior point of the face found by the"
                     " truncated formulation", s, res.reason)
            return fallback
        raise FacialReductionError(f"auxiliary problem at s={s}: solver status {res.status.value}"
                                   f" ({res.reason})")
    value = res.dual_value
    if value > tol_fr:
        return PositiveValue(value, res.y[: inst.m].copy(), res)
    return ZeroValue(_gordan_Y(lay, res.x), res.primal_value, res)


def _face_interior_point(inst: SdpInstance, s: int, tol_fr: float,
                         opts: SolverOptions | None, rcond: float = 1e-9) -> PositiveValue | None:
    """Fallback for the sup side when the face equations are only nearly consistent.

    After inexact reduction steps, ``(B - A x)`` vanishing outside the leading
    ``s`` block may hold only up to rounding, which makes the full auxiliary
    program unbounded on its inf side. Here the off-face equations are solved
    in least squares with a truncated SVD, ``x = x0 + N z``, and
    ``sup t  s.t.  S(x)[:s, :s] - t I >= 0, t <= 1`` is solved over ``z``.
    Returns ``None`` unless the value exceeds ``tol_fr`` and the off-face
    residual is within ``sqrt(rcond)`` relative.
    """
    n = inst.n
    iu, ju = np.triu_indices(n)
    off = ju >= s
    M = np.array([A[iu[off], ju[off]] for A in inst.A]).T.reshape(int(off.sum()), inst.m)
    rhs = inst.B[iu[off], ju[off]]
    if M.size:
        U_, sv, Vt = np.linalg.svd(M, full_matrices=True)
        keep = sv > rcond * (sv[0] if sv.size else 0.0)
        k = int(keep.sum())
        x0 = Vt[:k].T @ ((U_[:, :k].T @ rhs) / sv[:k])
        N = Vt[k:].T
        resid = float(np.linalg.norm(M @ x0 - rhs))
    else:
        x0, N, resid = np.zeros(inst.m), np.eye(inst.m), 0.0
    scale = 1.0 + float(np.linalg.norm(rhs)) + float(np.linalg.norm(M)) * float(np.linalg.norm(x0))
    if resid > np.sqrt(rcond) * scale:
        return None
    S0 = (inst.B - apply_operator(inst, x0))[:s, :s]
    G = [apply_operator(inst, N[:, j])[:s, :s] for j in range(N.shape[1])]
    lay = PartialPsdLayout(s, s)
    rows = [np.concatenate([lay.coeffs(Gj), [0.0]]) for Gj in G]
    rows.append(np.concatenate([lay.coeffs(np.eye(s)), [1.0]]))
    b = np.concatenate([np.zeros(len(G)), [1.0]])
    prog = ConicProgram(c=np.concatenate([lay.coeffs(S0), [1.0]]), A=np.array(rows), b=b,
                        psd_orders=(s,), n_nonneg=1, name=f"face-interior-s{s}")
    res = solve(prog, opts or _aux_options())
    if res.status not in (Status.OPTIMAL, Status.NEAR_OPTIMAL) or res.dual_value <= tol_fr:
        return None
    return PositiveValue(res.dual_value, x0 + N @ res.y[: N.shape[1]], res)


def _snap(Y: np.ndarray, a: int, b: int, tol_clean: float) -> tuple[np.ndarray, float]:
    """Impose the chain pattern; returns the cleaned matrix and the largest change."""
    Y = 0.5 * (Y + Y.T)
    out = Y.copy()
    out[:a, :b] = 0.0
    out[:b, :a] = 0.0
    out[a:b, a:b] = np.eye(b - a)
    change = float(np.max(np.abs(out - Y), initial=0.0))
    return out, change


def _polish(inst: SdpInstance, Y: np.ndarray, b: int) -> np.ndarray:
    """Least-norm free entries so that ``A* Y = 0`` and ``<B, Y> = 0``.

    Free entries are those in rows or columns ``>= b``. They are first reset
    to the least-norm solution given the fixed part, which makes the result
    canonical; if that system does not close, the least-norm correction of
    the current values is tried instead.
    """
    n = inst.n
    iu, ju = np.triu_indices(n)
    free = ju >= b
    if not np.any(free):
        return Y
    mats = list(inst.A) + [inst.B]
    M = np.array([np.where(iu[free] == ju[free], 1.0, 2.0) * F[iu[free], ju[free]] for F in mats])
    base = Y.copy()
    base[iu[free], ju[free]] = 0.0
    base[ju[free], iu[free]] = 0.0
    for start in (base, Y):
        resid = np.array([float(np.sum(F * start)) for F in mats])
        d, *_ = np.linalg.lstsq(M, -resid, rcond=None)
        if np.linalg.norm(M @ d + resid) <= 1e-3 * np.linalg.norm(resid) + 1e-14:
            out = start.copy()
            out[iu[free], ju[free]] += d
            out[ju[free], iu[free]] = out[iu[free], ju[free]]
            return out
    return Y


def _refine_direction(inst: SdpInstance, s: int, Y: np.ndarray, rho: int, *,
                      max_iters: int = 5000, tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """Alternating projections between the affine set ``A* Y = 0, <B, Y> = 0,
    <I_s (+) 0, Y> = 1`` and ``{Y : Y[:s, :s] psd of rank <= rho}``.

    Interior-point directions carry ``O(sqrt(mu))`` noise along weakly
    certified directions; this removes it when an exact direction of rank
    ``rho`` is nearby. Returns the last point on the rank side and the
    distance between the two sets at termination.
    """
    n = inst.n
    Is = diag_concat(np.eye(s), np.zeros((n - s, n - s)))
    F = np.array([f.ravel() for f in list(inst.A) + [inst.B, Is]])
    h = np.zeros(F.shape[0])
    h[-1] = 1.0
    Gp = np.linalg.pinv(F @ F.T)
    Z = Y
    dist = np.inf
    for _ in range(max_iters):
        w, V = np.linalg.eigh(Y[:s, :s])
        wk = np.zeros_like(w)
        wk[s - rho:] = np.maximum(w[s - rho:], 0.0)
        Z = Y.copy()
        Z[:s, :s] = (V * wk) @ V.T
        Y = Z - (F.T @ (Gp @ (F @ Z.ravel() - h))).reshape(n, n)
        Y = 0.5 * (Y + Y.T)
        dist = float(np.linalg.norm(Y - Z))
        if dist < tol:
            break
    return Z, dist


def _newton_direction(inst: SdpInstance, s: int, Y: np.ndarray, rho: int, *,
                      max_iters: int = 30, tol: float = 1e-15) -> tuple[np.ndarray, float]:
    """Gauss-Newton on ``Y = [[V V', X], [X', Z]]`` with ``V`` of width ``rho``.

    Solves ``A* Y = 0``, ``<B, Y> = 0``, ``trace(V V') = 1`` by minimum-norm
    steps. Where the alternating projections stall on a tangential
    intersection this still converges quadratically, since the factored
    parametrization keeps the rank fixed. Returns ``(Y, residual norm)``.
    """
    n = inst.n
    Y = 0.5 * (Y + Y.T)
    w, Q = np.linalg.eigh(Y[:s, :s])
    V = Q[:, s - rho:] * np.sqrt(np.maximum(w[s - rho:], 0.0))
    iu, ju = np.triu_indices(n)
    free = ju >= s
    fi, fj = iu[free], ju[free]
    wf = np.where(fi == fj, 1.0, 2.0)
    Fs = list(inst.A) + [inst.B]
    L = np.array([wf * F[fi, fj] for F in Fs] + [np.zeros(fi.size)])
    Fb = [F[:s, :s] for F in Fs] + [np.eye(s)]
    h = np.zeros(len(Fb))
    h[-1] = 1.0
    f = Y[fi, fj].copy()

    def residual(V, f):
        return np.array([float(np.sum(Fk * (V @ V.T))) for Fk in Fb]) + L @ f - h

    g = residual(V, f)
    for _ in range(max_iters):
        if np.linalg.norm(g) <= tol:
            break
        J = np.hstack([np.array([(2.0 * Fk @ V).ravel() for Fk in Fb]), L])
        d = np.linalg.lstsq(J, -g, rcond=None)[0]
        V2 = V + d[: V.size].reshape(V.shape)
        f2 = f + d[V.size:]
        g2 = residual(V2, f2)
        if np.linalg.norm(g2) >= np.linalg.norm(g):
            break
        V, f, g = V2, f2, g2
    out = np.zeros((n, n))
    out[:s, :s] = V @ V.T
    out[fi, fj] = f
    out[fj, fi] = f
    return out, float(np.linalg.norm(g))


def clean_direction(inst: SdpInstance, s: int, Y, *, tol_cert_rank: float | None = None,
                    tol: float = 1e-12, min_ratio: float = 1e-4) -> tuple[np.ndarray, int]:
    """Pick the rank of a reducing direction and refine it to an exact one.

    Candidate ranks run downwards from the numerical rank of ``Y[:s, :s]``
    (relative threshold ``tol_cert_rank``). A rank is accepted when
    :func:`_refine_direction` closes the distance below ``tol`` while the
    ``rho``-th eigenvalue stays above ``min_ratio`` times the largest one.
    The ratio guard rejects fake directions whose small eigenvalue is of the
    order of the square root of the residual they leave. When no rank closes
    the distance (tangential intersections make the projections stall), the
    guarded candidate with the smallest distance is returned, and the
    remaining residual shows up in certificate verification.
    """
    tol_cert_rank = get_tolerances().tol_cert_rank if tol_cert_rank is None else tol_cert_rank
    Y = 0.5 * (np.asarray(Y, dtype=float) + np.asarray(Y, dtype=float).T)
    w = np.linalg.eigvalsh(Y[:s, :s])
    top = max(float(w[-1]), 0.0)
    rank = int(np.sum(w > tol_cert_rank * top)) if top > 0 else 0
    best = None
    for rho in range(rank, 0, -1):
        if w[s - rho] <= min_ratio * top:
            continue
        Z, dist = _refine_direction(inst, s, Y, rho)
        if dist > tol * max(1.0, top):
            Zn, dn = _newton_direction(inst, s, Z, rho)
            if dn < dist:
                Z, dist = Zn, dn
        wz = np.linalg.eigvalsh(Z[:s, :s])
        if wz[s - rho] <= min_ratio * max(wz[-1], 0.0):
            continue
        if dist <= tol * max(1.0, top):
            return Z, rho
        if best is None or dist < best[2]:
            best = (Z, rho, dist)
    if best is None:
        return Y, rank
    log.warning("reducing direction at s=%d refined only to distance %.3g", s, best[2])
    return best[0], best[1]


def reduce_step(inst: SdpInstance, s: int, Y, *, tol_cert_rank: float | None = None,
                tol_clean: float | None = None):
    """One reduction step from face size ``s`` using direction ``Y``.

    ``T_step = Q (+) I_{n-s}`` with ``Q' Y[:s,:s] Q = 0 (+) I_{r_step}``; the
    instance is rescaled by ``T_step^{-T}`` so that ``Y`` becomes ``T_step' Y
    T_step`` with an identity block in the trailing ``r_step`` coordinates of
    the face.

    Returns:
        ``(inst', T_step, r_step, Y_clean)`` where ``T_step`` is the
        :class:`RescalingTransform` applied to the instance.

    Raises:
        FacialReductionError: if the leading block of ``Y`` is numerically zero.
    """
    tols = get_tolerances()
    tol_cert_rank = tols.tol_cert_rank if tol_cert_rank is None else tol_cert_rank
    tol_clean = tols.tol_clean if tol_clean is None else tol_clean
    n = inst.n
    Y, r_step = clean_direction(inst, s, Y, tol_cert_rank=tol_cert_rank)
    if r_step == 0:
        raise FacialReductionError(f"reducing direction at s={s} has a numerically zero face block")
    dec = spectral(Y[:s, :s])
    lam = dec.eigenvalues[s - r_step:]
    # certificates are scale free: unit geometric mean keeps det(Q) = 1
    g = float(np.exp(np.mean(np.log(lam))))
    Y = Y / g
    Q = dec.eigenvectors.copy()
    Q[:, s - r_step:] /= np.sqrt(lam / g)
    T = diag_concat(Q, np.eye(n - s))
    Yt = T.T @ Y @ T
    T_inst = RescalingTransform(np.linalg.inv(T).T, (f"reduce-s{s}",))
    new = rescale(inst, T_inst)
    a, b = s - r_step, s
    Yc, change = _snap(Yt, a, b, tol_clean)
    scale = max(1.0, float(np.max(np.abs(Yt))))
    if change > tol_clean * scale * 1e2:
        log.warning("certificate cleaning at s=%d changed entries by %.3g", s, change)
    Yc = _polish(new, Yc, b)
    return new, T_inst, r_step, Yc


def facial_reduction(inst: SdpInstance, *, tol_fr: float | None = None,
                     opts: SolverOptions | None = None) -> FacialReductionResult:
    """Reduce until a relative-interior slack of the current face is found.

    Returns a :class:`FacialReductionResult`, which unpacks as
    ``(slack_report, certificate, reduced_instance)``.

    Raises:
        FacialReductionError: on solver failure or a zero reducing direction.
    """
    n = inst.n
    cur = inst
    T_acc = RescalingTransform.identity(n)
    Ys: list[np.ndarray] = []
    sizes: list[int] = []
    faces = []
    s = n
    x = np.zeros(inst.m)
    margin = 0.0
    infeasible = False
    for _ in range(n + 1):
        faces.append(s)
        if s == 0:
            break
        out = gordan_pair(cur, s, tol_fr, opts)
        if isinstance(out, PositiveValue):
            x = out.x
            break
        if out.value < -(get_tolerances().tol_fr):
            infeasible = True
            log.warning("auxiliary value %.3g < 0 at s=%d: evidence that the primal is infeasible",
                        out.value, s)
        cur, T_step, r_step, Yc = reduce_step(cur, s, out.Y)
        Ys = [T_step.map_dual(Yj) for Yj in Ys]
        Ys.append(Yc)
        sizes.append(r_step)
        T_acc = T_acc.then(T_step)
        s -= r_step
    else:
        raise FacialReductionError("facial reduction exceeded n iterations")
    r = s
    if r == 0:
        # every slack vanishes: any solution of A x = B is the slack point
        M = np.stack([A.ravel() for A in cur.A], axis=1)
        x = np.linalg.lstsq(M, cur.B.ravel(), rcond=None)[0]
    S = cur.B - apply_operator(cur, x)
    S = 0.5 * (S + S.T)
    if r > 0:
        dec = spectral(S[:r, :r])
        lam = dec.eigenvalues
        margin = float(lam[0])
        if margin <= 0:
            raise FacialReductionError("final slack is not positive definite on the face")
        L = dec.eigenvectors / np.sqrt(lam)
        T_z = RescalingTransform(diag_concat(L, np.eye(n - r)), ("normalize-slack",))
        cur = rescale(cur, T_z)
        Ys = [_renormalize(T_z.map_dual(Yj), n, sizes, i + 1) for i, Yj in enumerate(Ys)]
        T_acc = T_acc.then(T_z)
    Z = cur.B - apply_operator(cur, x)
    Z = 0.5 * (Z + Z.T)
    cert = FacialCertificate(tuple(Ys), tuple(sizes), r, T_acc)
    slack = MaxRankSlackReport(Z, x, r, margin)
    return FacialReductionResult(slack, cert, cur, tuple(faces), infeasible)


def _renormalize(Y: np.ndarray, n: int, sizes, i: int) -> np.ndarray:
    a, b = chain_pattern(n, sizes, i)
    out = Y.copy()
    out[:a, :b] = 0.0
    out[:b, :a] = 0.0
    out[a:b, a:b] = np.eye(b - a)
    return out


@dataclass
class CertificateReport:
    """Per-item outcome of :func:`verify_certificate`; truthy iff everything passed."""

    valid: bool
    pattern_errors: list[float] = field(default_factory=list)
    equation_residuals: list[float] = field(default_factory=list)
    sizes_ok: bool = True
    eliminated: list[int] = field(default_factory=list)
    elimination_ok: bool = True
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid

    @property
    def max_residual(self) -> float:
        return max(self.pattern_errors + self.equation_residuals, default=0.0)


def _normalized_inner(F: np.ndarray, Y: np.ndarray) -> float:
    return abs(float(np.sum(F * Y))) / (1.0 + np.linalg.norm(F) * np.linalg.norm(Y))


def check_certificate_reduced(reduced: SdpInstance, cert: FacialCertificate,
                              tol: float = 1e-6) -> CertificateReport:
    """Verify ``cert`` against the instance it lives in (its reduced coordinates)."""
    n = reduced.n
    rep = CertificateReport(True)
    if cert.k != len(cert.block_sizes):
        rep.messages.append("number of certificates and block sizes differ")
        rep.valid = False
        return rep
    if any(b <= 0 for b in cert.block_sizes) or sum(cert.block_sizes) != n - cert.face_rank:
        rep.sizes_ok = False
        rep.messages.append(f"block sizes {cert.block_sizes} do not sum to n - r = {n - cert.face_rank}")
    for i, Y in enumerate(cert.Ys, start=1):
        Y = np.asarray(Y, dtype=float)
        if Y.shape != (n, n):
            rep.messages.append(f"Y_{i} has shape {Y.shape}")
            rep.valid = False
            return rep
        scale = max(1.0, float(np.max(np.abs(Y))))
        if rep.sizes_ok:
            a, b = chain_pattern(n, cert.block_sizes, i)
            err = max(float(np.max(np.abs(Y[:a, :b]), initial=0.0)),
                      float(np.max(np.abs(Y[a:b, a:b] - np.eye(b - a)), initial=0.0))) / scale
            rep.pattern_errors.append(err)
            if err > tol:
                rep.messages.append(f"Y_{i} violates the chain pattern (error {err:.3g})")
        res = max([_normalized_inner(A, Y) for A in reduced.A] + [_normalized_inner(reduced.B, Y)])
        rep.equation_residuals.append(res)
        if res > tol:
            rep.messages.append(f"Y_{i}: A*Y and <B,Y> residual {res:.3g}")
    # sequential elimination on index sets
    zeroed: set[int] = set()
    for i, Y in enumerate(cert.Ys, start=1):
        C = [j for j in range(n) if j not in zeroed]
        Yc = np.asarray(Y, dtype=float)[np.ix_(C, C)]
        scale = max(1.0, float(np.max(np.abs(Yc), initial=0.0)))
        D = [C[p] for p in range(len(C)) if np.max(np.abs(Yc[p]), initial=0.0) > tol * scale]
        if not D:
            rep.elimination_ok = False
            rep.messages.append(f"Y_{i} eliminates nothing")
            break
        sub = np.asarray(Y, dtype=float)[np.ix_(D, D)]
        lam_min = float(spectral(sub).eigenvalues[0])
        if lam_min <= tol * scale:
            rep.elimination_ok = False
            rep.messages.append(f"Y_{i} restricted to surviving indices is not positive definite"
                                f" on its support (lambda_min={lam_min:.3g})")
            break
        if i <= len(cert.block_sizes) and len(D) != cert.block_sizes[i - 1]:
            rep.elimination_ok = False
            rep.messages.append(f"Y_{i} eliminates {len(D)} indices, expected {cert.block_sizes[i - 1]}")
        zeroed |= set(D)
    rep.eliminated = sorted(zeroed)
    if rep.elimination_ok and rep.eliminated != list(range(cert.face_rank, n)):
        rep.elimination_ok = False
        rep.messages.append(f"eliminated indices {rep.eliminated} differ from {cert.face_rank}..{n - 1}")
    rep.valid = (rep.sizes_ok and rep.elimination_ok
                 and all(e <= tol for e in rep.pattern_errors)
                 and all(e <= tol for e in rep.equation_residuals))
    return rep


def verify_certificate(original: SdpInstance, cert: FacialCertificate,
                       tol: float = 1e-6) -> CertificateReport:
    """Check ``cert`` against ``rescale(original, cert.accumulated_T)``.

    Verifies the chain pattern, ``A* Y_i = 0`` and ``<B, Y_i> = 0`` (as
    normalized inner products), ``sum r_i = n - r``, and simulates the
    elimination argument: each ``Y_i``, restricted to indices not yet known
    to vanish in every slack, must be positive definite on its support, which
    then joins the vanishing set.  No optimization is involved.
    """
    if cert.n != original.n:
        rep = CertificateReport(False)
        rep.messages.append("certificate order differs from instance order")
        return rep
    return check_certificate_reduced(rescale(original, cert.accumulated_T), cert, tol)


def slack_inner_products(original: SdpInstance, cert: FacialCertificate, x) -> list[float]:
    """``<S', Y_i>`` for the slack of ``x`` mapped into the reduced coordinates."""
    T = cert.accumulated_T
    S = original.B - apply_operator(original, x)
    Sr = T.map_primal(S)
    return [float(np.sum(Sr * Y)) for Y in cert.Ys]


def certificate_adjoint_residuals(reduced: SdpInstance, cert: FacialCertificate) -> list[np.ndarray]:
    return [adjoint(reduced, Y) for Y in cert.Ys]
