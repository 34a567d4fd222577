r"""Proximity operators and their generalized derivatives.

Four regularizers are supported:

* ``zero``:  :math:`\varphi \equiv 0`, prox is the identity.
* ``l1``:    :math:`\varphi(x) = \mu \|x\|_1`.
* ``group``: :math:`\varphi(x) = \mu \sum_j \|x_{g_j}\|_2` over disjoint groups.
* ``box_l1``: :math:`\varphi(x) = \mu \|x\|_1 + \iota_{[0,1]^n}(x)`.

Every operator exposes ``prox(z, lam)``, ``value(x)`` and
``derivative_apply(z, lam, v)``; the latter applies one fixed element ``D`` of
the Clarke generalized Jacobian of ``prox_{lam*phi}`` at ``z`` without forming
a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

KINDS = ("zero", "l1", "group", "box_l1")

# dense export of D is a test utility only
DENSE_EXPORT_MAX = 200


def _check_finite(z, name="z"):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InvalidArgument(f"{name} must be finite")
    return z


def _check_step(lam):
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidArgument(f"prox stepsize must be positive, got {lam!r}")


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


@dataclass(frozen=True)
class ProxOperator:
    """Proximity operator of one of the supported regularizers.

    Parameters
    ----------
    kind : {"zero", "l1", "group", "box_l1"}
    mu : float
        Regularization weight, ``mu >= 0``.
    groups : sequence of index arrays, optional
        Disjoint blocks partitioning ``{0, ..., n-1}``; required for ``group``.

    Group blocks are stored contiguously after a permutation so block
    reductions run through ``np.add.reduceat`` without scatter.
    """

    kind: str
    mu: float = 0.0
    groups: tuple | None = None
    _perm: np.ndarray | None = field(default=None, repr=False, compare=False)
    _starts: np.ndarray | None = field(default=None, repr=False, compare=False)
    _sizes: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown prox kind {self.kind!r}")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise InvalidArgument("mu must be finite and >= 0")
        if self.kind == "zero" and self.mu != 0:
            object.__setattr__(self, "mu", 0.0)
        if self.kind == "group":
            if not self.groups:
                raise InvalidArgument("group kind requires groups")
            groups = tuple(np.asarray(g, dtype=np.intp).ravel() for g in self.groups)
            if any(g.size == 0 for g in groups):
                raise InvalidArgument("empty group")
            perm = np.concatenate(groups)
            n = perm.size
            if not np.array_equal(np.sort(perm), np.arange(n)):
                raise InvalidArgument("groups must partition {0, ..., n-1} without overlap")
            sizes = np.array([g.size for g in groups], dtype=np.intp)
            starts = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.intp)
            object.__setattr__(self, "groups", groups)
            object.__setattr__(self, "_perm", perm)
            object.__setattr__(self, "_starts", starts)
            object.__setattr__(self, "_sizes", sizes)
        elif self.groups is not None:
            raise InvalidArgument("groups are only meaningful for kind='group'")

    # ----- group helpers -------------------------------------------------

    @property
    def n(self):
        """Dimension fixed by the group partition, or None."""
        return None if self._perm is None else self._perm.size

    def _group_norms(self, z):
        zp = z[self._perm]
        return zp, np.sqrt(np.add.reduceat(zp * zp, self._starts))

    def _unpermute(self, yp):
        y = np.empty_like(yp)
        y[self._perm] = yp
        return y

    def _check_dim(self, z):
        if self._perm is not None and z.shape != (self._perm.size,):
            raise InvalidArgument(f"expected vector of length {self._perm.size}, got shape {z.shape}")

    # ----- public operations ---------------------------------------------

    def prox(self, z, lam):
        """Return ``argmin_y phi(y) + ||z - y||^2 / (2 lam)``."""
        _check_step(lam)
        z = _check_finite(z)
        self._check_dim(z)
        t = self.mu * lam
        if self.kind == "zero":
            return z.copy()
        if self.kind == "l1":
            return soft_threshold(z, t)
        if self.kind == "box_l1":
            return np.clip(soft_threshold(z, t), 0.0, 1.0)
        zp, norms = self._group_norms(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norms > t, 1.0 - t / norms, 0.0)
        return self._unpermute(np.repeat(scale, self._sizes) * zp)

    def value(self, x):
        """Evaluate phi(x); ``inf`` outside the box for ``box_l1``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return 0.0
        if self.kind == "l1":
            return self.mu * float(np.sum(np.abs(x)))
        if self.kind == "box_l1":
            if np.any(x < 0.0) or np.any(x > 1.0):
                return np.inf
            return self.mu * float(np.sum(np.abs(x)))
        self._check_dim(x)
        _, norms = self._group_norms(x)
        return self.mu * float(np.sum(norms))

    def in_domain(self, x):
        return bool(np.isfinite(self.value(x)))

    def _diag_mask(self, z, t):
        if self.kind == "l1":
            return np.abs(z) > t
        # box_l1: d_i = 0 on the closed sets z <= t and z >= t + 1
        return (z > t) & (z < t + 1.0)

    def derivative_apply(self, z, lam, v):
        """Apply the selected generalized derivative ``D`` of the prox at ``z`` to ``v``.

        Ties (``|z_i| == mu*lam``, ``||z_g|| == mu*lam``) select the zero branch.
        """
        _check_step(lam)
        z = np.asarray(z, dtype=float)
        v = np.asarray(v, dtype=float)
        t = self.mu * lam
        if self.kind == "zero":
            return v.copy()
        if self.kind in ("l1", "box_l1"):
            return np.where(self._diag_mask(z, t), v, 0.0)
        self._check_dim(z)
        zp, norms = self._group_norms(z)
        vp = v[self._perm]
        active = norms > t
        safe = np.where(active, norms, 1.0)
        c1 = np.where(active, 1.0 - t / safe, 0.0)
        c2 = np.where(active, t / safe**3, 0.0)
        zv = np.add.reduceat(zp * vp, self._starts)
        out = np.repeat(c1, self._sizes) * vp + np.repeat(c2 * zv, self._sizes) * zp
        return self._unpermute(out)

    def derivative_rank(self, z, lam):
        """Rank of the selected ``D``; the CG iteration bound on the reduced system."""
        z = np.asarray(z, dtype=float)
        t = self.mu * lam
        if self.kind == "zero":
            return z.size
        if self.kind in ("l1", "box_l1"):
            return int(np.count_nonzero(self._diag_mask(z, t)))
        # each active block is (1 - t/r) I + (t/r^3) z z^T with eigenvalues in (0, 1]
        _, norms = self._group_norms(z)
        return int(np.sum(self._sizes[norms > t]))

    def derivative_matrix(self, z, lam):
        """Dense ``D``; for tests only (``n <= 200``)."""
        z = np.asarray(z, dtype=float)
        n = z.size
        if n > DENSE_EXPORT_MAX:
            raise InvalidArgument(f"dense export limited to n <= {DENSE_EXPORT_MAX}")
        eye = np.eye(n)
        return np.column_stack([self.derivative_apply(z, lam, eye[:, j]) for j in range(n)])

    def preimage_projection(self, x, w, lam):
        """Project ``w`` onto ``{z : prox(z, lam) == x}``.

        The preimage is a product of intervals (separable kinds) or of points
        and balls (group kind), so the projection is computed blockwise.
        Returns ``None`` for combinations without a closed form.
        """
        x = _check_finite(x, "x")
        w = np.asarray(w, dtype=float)
        if not self.in_domain(x):
            raise InvalidArgument("x is outside dom(phi)")
        t = self.mu * lam
        if self.kind == "zero":
            # preimage is {x}; callers take the gradient-step fallback instead
            return None
        if self.kind == "l1":
            return np.where(x > 0, x + t, np.where(x < 0, x - t, np.clip(w, -t, t)))
        if self.kind == "box_l1":
            z = np.where(x == 0.0, np.minimum(w, t), x + t)
            return np.where(x == 1.0, np.maximum(w, 1.0 + t), z)
        xp, xnorms = self._group_norms(x)
        wp, wnorms = self._group_norms(w)
        zero = xnorms == 0.0
        # nonzero blocks have the unique preimage x_g (1 + t/||x_g||)
        safe_x = np.where(zero, 1.0, xnorms)
        lift = np.repeat(np.where(zero, 0.0, 1.0 + t / safe_x), self._sizes) * xp
        # zero blocks: radial projection onto the closed ball of radius t;
        # the (1 - 4 eps) factor keeps the rounded norm inside the ball
        safe_w = np.where(wnorms > 0, wnorms, 1.0)
        shrink = np.where(wnorms > t, (t / safe_w) * (1.0 - 4 * np.finfo(float).eps), 1.0)
        ball = np.repeat(shrink, self._sizes) * wp
        zp = np.where(np.repeat(zero, self._sizes), ball, lift)
        return self._unpermute(zp)


def zero():
    return ProxOperator("zero")


def l1(mu):
    return ProxOperator("l1", mu)


def box_l1(mu):
    return ProxOperator("box_l1", mu)


def group_l2(mu, groups):
    return ProxOperator("group", mu, tuple(groups))


def contiguous_groups(n, size):
    """Split ``range(n)`` into consecutive blocks of ``size``."""
    if n % size:
        raise InvalidArgument(f"n={n} is not a multiple of group size {size}")
    return [np.arange(i, i + size) for i in range(0, n, size)]


def random_groups(n, size, rng):
    """Random partition of ``range(n)`` into blocks of ``size``."""
    perm = rng.permutation(n)
    if n % size:
        raise InvalidArgument(f"n={n} is not a multiple of group size {size}")
    return [np.sort(perm[i:i + size]) for i in range(0, n, size)]
