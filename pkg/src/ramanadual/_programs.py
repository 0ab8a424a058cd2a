"""Column layout for a symmetric matrix variable whose leading block is psd."""

from __future__ import annotations

import numpy as np

from .solver import ConicProgram


class PartialPsdLayout:
    """Symmetric ``Y`` of order ``n`` with ``Y[:s, :s]`` psd and all other entries free.

    Columns: the upper triangle of the leading block (one psd block of order
    ``s``, omitted when ``s = 0``), then every remaining upper-triangle entry
    of ``Y`` as a free scalar, in ``numpy.triu_indices`` order.
    """

    def __init__(self, n: int, s: int):
        if not (0 <= s <= n):
            raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
        self.n, self.s = n, s
        iu, ju = np.triu_indices(n)
        inner = (iu < s) & (ju < s)
        bi, bj = np.triu_indices(s)
        self.rows = np.concatenate([bi, iu[~inner]])
        self.cols = np.concatenate([bj, ju[~inner]])
        self.n_psd = s * (s + 1) // 2
        self.n_free = int(np.sum(~inner))

    @property
    def num_vars(self) -> int:
        return self.n_psd + self.n_free

    @property
    def psd_orders(self) -> tuple[int, ...]:
        return (self.s,) if self.s > 0 else ()

    def coeffs(self, F) -> np.ndarray:
        """Row vector of ``Y -> <F, Y>``."""
        F = np.asarray(F, dtype=float)
        w = np.where(self.rows == self.cols, 1.0, 2.0)
        return w * F[self.rows, self.cols]

    def to_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[: self.num_vars]
        Y = np.zeros((self.n, self.n))
        Y[self.rows, self.cols] = x
        Y[self.cols, self.rows] = x
        return Y

    def from_matrix(self, Y) -> np.ndarray:
        return np.asarray(Y, dtype=float)[self.rows, self.cols].copy()

    def program(self, A_rows, b, objective, name: str = "", *, nonneg_cols=None,
                nonneg_cost=None) -> ConicProgram:
        """Conic program over ``Y`` and, optionally, extra nonnegative scalars.

        ``nonneg_cols`` (rows x k) and ``nonneg_cost`` (k) describe the extra
        columns, which sit between the psd block and the free entries.
        """
        A = np.atleast_2d(np.asarray(A_rows, dtype=float)).reshape(-1, self.num_vars)
        c = np.asarray(objective, dtype=float)
        k = 0
        if nonneg_cols is not None:
            N = np.asarray(nonneg_cols, dtype=float).reshape(A.shape[0], -1)
            k = N.shape[1]
            A = np.hstack([A[:, : self.n_psd], N, A[:, self.n_psd:]])
            c = np.concatenate([c[: self.n_psd], np.asarray(nonneg_cost, dtype=float), c[self.n_psd:]])
        return ConicProgram(c=c, A=A, b=b, psd_orders=self.psd_orders, n_nonneg=k,
                            n_free=self.n_free, block_labels=("Y",) if self.s else (),
                            name=name)

    def split(self, x, k: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """``(Y, extra)`` from a column vector with ``k`` extra nonnegative scalars."""
        x = np.asarray(x, dtype=float)
        Y = self.to_matrix(np.concatenate([x[: self.n_psd], x[self.n_psd + k: self.num_vars + k]]))
        return Y, x[self.n_psd: self.n_psd + k].copy()
