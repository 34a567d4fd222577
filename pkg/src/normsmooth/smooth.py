"""Smooth parts f of the test problems.

``logistic``
    f(x) = (1/N) sum_i log(1 + exp(-b_i <a_i, x>)),  labels b_i in {-1, 1}
``sigmoid_ls``
    f(x) = (1/2N) sum_i (sigmoid(<a_i, x>) - b_i)^2
``quadratic``
    f(x) = 1/2 (x - c)^T Q (x - c),  Q symmetric
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, NotAvailable

KINDS = ("logistic", "sigmoid_ls", "quadratic")

POWER_TOL = 1e-8
POWER_MAX_ITER = 1000


def _sigmoid(t):
    # branch split keeps exp() from overflowing
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def _log1pexp_neg(m):
    """log(1 + exp(-m)) without overflow."""
    return np.log1p(np.exp(-np.abs(m))) + np.maximum(-m, 0.0)


def spectral_norm(A, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """||A||_2 by power iteration on A^T A from a fixed start vector."""
    n = A.shape[1]
    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = np.sqrt(nw)
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return float(np.linalg.norm(A @ v))


@dataclass(frozen=True)
class SmoothObjective:
    """Smooth objective with value, gradient and Hessian-vector product.

    For ``quadratic``, ``A`` holds the symmetric curvature matrix ``Q`` and
    ``b`` the center ``c``.
    """

    kind: str
    A: object
    b: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown objective kind {self.kind!r}")
        A = self.A
        if not sp.issparse(A):
            A = np.asarray(A, dtype=float)
            if A.ndim != 2:
                raise InvalidArgument("A must be two-dimensional")
        else:
            A = sp.csr_matrix(A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if not np.all(np.isfinite(b)):
            raise InvalidArgument("labels must be finite")
        if self.kind == "quadratic":
            if A.shape[0] != A.shape[1] or b.size != A.shape[0]:
                raise InvalidArgument("quadratic needs square Q and center of matching size")
        elif b.size != A.shape[0]:
            raise InvalidArgument(f"{A.shape[0]} rows but {b.size} labels")
        if self.kind == "logistic" and not np.all(np.abs(b) == 1.0):
            raise InvalidArgument("logistic labels must lie in {-1, 1}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def N(self):
        return self.A.shape[0]

    def _check(self, x, name="x"):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise InvalidArgument(f"{name} has shape {x.shape}, expected ({self.n},)")
        return x

    def value(self, x):
        x = self._check(x)
        if self.kind == "quadratic":
            r = x - self.b
            return 0.5 * float(r @ (self.A @ r))
        t = self.A @ x
        if self.kind == "logistic":
            return float(np.mean(_log1pexp_neg(self.b * t)))
        res = _sigmoid(t) - self.b
        return 0.5 * float(np.mean(res * res))

    def grad(self, x):
        return self.value_grad(x)[1]

    def value_grad(self, x):
        x = self._check(x)
        if self.kind == "quadratic":
            r = x - self.b
            Qr = self.A @ r
            return 0.5 * float(r @ Qr), np.asarray(Qr, dtype=float)
        t = self.A @ x
        N = self.N
        if self.kind == "logistic":
            m = self.b * t
            val = float(np.mean(_log1pexp_neg(m)))
            # d/dm log(1+exp(-m)) = -sigmoid(-m)
            w = -self.b * _sigmoid(-m)
            return val, np.asarray(self.A.T @ w, dtype=float) / N
        s = _sigmoid(t)
        res = s - self.b
        val = 0.5 * float(np.mean(res * res))
        w = res * s * (1.0 - s)
        return val, np.asarray(self.A.T @ w, dtype=float) / N

    def bregman(self, x, y, fx, fy, gx, gy):
        """``f(y) - f(x) - <grad f(x), y - x>`` from cached values and gradients.

        Quadratics use the equivalent ``<grad f(y) - grad f(x), y - x> / 2``,
        which does not cancel two nearly equal function values.
        """
        dx = y - x
        if self.kind == "quadratic":
            return 0.5 * float((gy - gx) @ dx)
        return fy - fx - float(gx @ dx)

    def curvature_weights(self, x):
        """Per-sample weights h with Hessian (1/N) A^T diag(h) A."""
        t = self.A @ self._check(x)
        if self.kind == "logistic":
            s = _sigmoid(self.b * t)
            return s * (1.0 - s)
        if self.kind == "sigmoid_ls":
            s = _sigmoid(t)
            ds = s * (1.0 - s)
            return ds * ds + (s - self.b) * ds * (1.0 - 2.0 * s)
        raise NotAvailable("quadratic has no sample weights")

    def hess_vec(self, x, v):
        x = self._check(x)
        v = self._check(v, "v")
        if self.kind == "quadratic":
            return np.asarray(self.A @ v, dtype=float)
        h = self.curvature_weights(x)
        return np.asarray(self.A.T @ (h * (self.A @ v)), dtype=float) / self.N

    def lipschitz_bound(self):
        """Global Lipschitz constant of the gradient.

        ``||A||^2 / (4N)`` for logistic, ``||A||^2 / (12N)`` for sigmoid
        least squares, ``||Q||`` for quadratics.
        """
        norm = spectral_norm(self.A)
        if self.kind == "quadratic":
            return norm
        if self.kind == "logistic":
            return norm**2 / (4.0 * self.N)
        if self.kind == "sigmoid_ls":
            return norm**2 / (12.0 * self.N)
        raise NotAvailable(f"no Lipschitz bound for {self.kind}")


def logistic(A, b):
    return SmoothObjective("logistic", A, b)


def sigmoid_ls(A, b):
    return SmoothObjective("sigmoid_ls", A, b)


def quadratic(n=None, center=None, Q=None, curvature=1.0):
    """``curvature/2 * ||x - center||^2`` unless an explicit ``Q`` is given."""
    if Q is None:
        if n is None:
            n = np.asarray(center).size
        Q = curvature * np.eye(n)
    Q = np.asarray(Q, dtype=float)
    if center is None:
        center = np.zeros(Q.shape[0])
    return SmoothObjective("quadratic", Q, center)
