"""Hessian models B_k used inside the Newton operator."""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.linalg as sla

CURVATURE_FLOOR = 1e-12


class ExactHessian:
    """B_k = Hessian of f at the registered point, applied through ``hvp(x, v)``."""

    mode = "exact"

    def __init__(self, hvp):
        self._hvp = hvp
        self.x = None

    def register(self, x):
        self.x = np.asarray(x, dtype=float)

    def update(self, s, y, x_new=None):
        if x_new is not None:
            self.register(x_new)
        return True

    def apply(self, v):
        if self.x is None:
            raise RuntimeError("no point registered")
        return self._hvp(self.x, v)


class LBFGS:
    """Compact limited-memory BFGS approximation of the Hessian.

    Stores up to ``memory`` pairs ``(s_j, y_j)`` and represents

        B = gamma I - [S Y] K^{-1} [S Y]^T,
        K = [[S^T S / gamma, L / gamma], [L^T / gamma, -D]],

    where ``L``/``D`` are the strictly lower / diagonal parts of ``S^T Y``
    and ``gamma = <y, y> / <s, y>`` for the newest pair. Pairs with
    ``<s, y> <= CURVATURE_FLOOR * ||s|| ||y||`` are rejected.
    """

    mode = "lbfgs"

    def __init__(self, memory=10, curvature_floor=CURVATURE_FLOOR):
        if memory < 0:
            raise ValueError("memory must be >= 0")
        self.memory = int(memory)
        self.curvature_floor = curvature_floor
        self.gamma = 1.0
        self._pairs = deque(maxlen=self.memory if self.memory > 0 else 1)
        self._S = self._Y = None
        self._lu = None
        self.singular = False
        self.rejected = 0
        self.accepted = 0

    @property
    def size(self):
        return 0 if self.memory == 0 else len(self._pairs)

    def register(self, x):
        pass

    def update(self, s, y, x_new=None):
        """Store the pair if it has positive curvature; return whether it was kept."""
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        sy = float(s @ y)
        if not (sy > self.curvature_floor * np.linalg.norm(s) * np.linalg.norm(y)):
            self.rejected += 1
            return False
        self.gamma = float(y @ y) / sy
        self.accepted += 1
        if self.memory > 0:
            self._pairs.append((s.copy(), y.copy()))
            self._refactor()
        return True

    def _refactor(self):
        S = np.column_stack([p[0] for p in self._pairs])
        Y = np.column_stack([p[1] for p in self._pairs])
        SY = S.T @ Y
        g = self.gamma
        K = np.block([
            [S.T @ S / g, np.tril(SY, -1) / g],
            [np.tril(SY, -1).T / g, -np.diag(np.diag(SY))],
        ])
        self._S, self._Y = S, Y
        self.singular = False
        try:
            lu = sla.lu_factor(K, check_finite=True)
        except (ValueError, np.linalg.LinAlgError):
            lu = None
        if lu is None or not np.all(np.abs(np.diag(lu[0])) > 0):
            self.singular = True
            lu = None
        self._lu = lu

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        out = self.gamma * v
        if self._lu is None or self.size == 0:
            return out
        w = np.concatenate((self._S.T @ v, self._Y.T @ v))
        c = sla.lu_solve(self._lu, w)
        m = self.size
        return out - (self._S @ c[:m] + self._Y @ c[m:])

    def dense(self, n):
        """Dense B; test helper."""
        eye = np.eye(n)
        return np.column_stack([self.apply(eye[:, j]) for j in range(n)])


def make_hessian(mode, memory=10, hvp=None):
    if mode == "exact":
        if hvp is None:
            raise ValueError("exact mode needs a Hessian-vector product")
        return ExactHessian(hvp)
    if mode == "lbfgs":
        return LBFGS(memory)
    raise ValueError(f"unknown Hessian mode {mode!r}")
