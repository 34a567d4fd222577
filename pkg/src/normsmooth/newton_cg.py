"""Truncated CG on the symmetric reduced Newton system and step recovery.

The semismooth Newton system ``M s = -Fnor`` with ``M = B D + (I - D)/lam``
is multiplied by ``D`` from the left, giving the symmetric system

    S q = -g,   S = D M,   g = D Fnor,

which CG solves inexactly. The full step is recovered as
``s = q - lam (M q + Fnor) = lam (d + e)`` with ``d = -Fnor`` and
``e = q/lam - M q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NumericalBreakdown

TOL_CONVERGED = "tol-converged"
ZERO_RESIDUAL_START = "zero-residual-start"
NEGATIVE_CURVATURE = "negative-curvature"
ITERATION_CAP = "iteration-cap"


class Flag(str, Enum):
    FO = "FO"
    SO = "SO"


class NewtonOperator:
    """Matrix-free ``M``, ``S = D M`` and ``D`` at a fixed ``z``."""

    def __init__(self, hess, prox, z, lam):
        self.hess = hess
        self.prox = prox
        self.z = np.asarray(z, dtype=float)
        self.lam = lam

    @property
    def n(self):
        return self.z.size

    def D(self, v):
        return self.prox.derivative_apply(self.z, self.lam, v)

    def M(self, v):
        Dv = self.D(v)
        return self.hess.apply(Dv) + (v - Dv) / self.lam

    def S(self, v):
        return self.D(self.M(v))

    @property
    def rank(self):
        return self.prox.derivative_rank(self.z, self.lam)


@dataclass
class CGOutcome:
    q: np.ndarray
    status: str
    iters: int
    residual: float
    residuals: list = field(default_factory=list, repr=False)
    directions: list = field(default_factory=list, repr=False)


def cg_solve(op, g, eps, cap, record=False):
    """CG for ``S q = -g`` with residual tolerance ``eps``.

    Stops on ``||r|| <= eps``, on non-positive curvature ``<p, S p> <= 0``
    (returning ``p_0 = -g`` at the first iteration and the current iterate
    otherwise), or after ``min(cap, rank D)`` iterations. CG iterates never
    leave ``range(D)``, so ``rank D`` is the dimension of the reduced system.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    g = np.asarray(g, dtype=float)
    q = np.zeros_like(g)
    r = g.copy()
    p = -g
    rr = float(r @ r)
    res = math.sqrt(rr)
    hist_r, hist_p = ([r.copy()], []) if record else ([], [])

    def outcome(q, status, i, res):
        return CGOutcome(q, status, i, res, hist_r, hist_p)

    if not math.isfinite(res):
        raise NumericalBreakdown("non-finite CG right-hand side", iteration=0)
    if res <= eps:
        return outcome(q, ZERO_RESIDUAL_START, 0, res)
    limit = min(cap, op.rank)
    i = 0
    while i < limit:
        if record:
            hist_p.append(p.copy())
        Sp = op.S(p)
        curv = float(p @ Sp)
        if not math.isfinite(curv):
            raise NumericalBreakdown("non-finite curvature in CG", iteration=i)
        if curv <= 0.0:
            return outcome(p.copy() if i == 0 else q, NEGATIVE_CURVATURE, i, res)
        alpha = rr / curv
        q = q + alpha * p
        r = r + alpha * Sp
        rr_new = float(r @ r)
        res = math.sqrt(rr_new)
        if not math.isfinite(res):
            raise NumericalBreakdown("non-finite CG residual", iteration=i)
        if record:
            hist_r.append(r.copy())
        if res <= eps:
            return outcome(q, TOL_CONVERGED, i + 1, res)
        p = -r + (rr_new / rr) * p
        rr = rr_new
        i += 1
    return outcome(q, ITERATION_CAP, i, res)


def recover_directions(op, q, Fnor):
    """Return ``d = -Fnor`` and ``e = q/lam - M q``."""
    d = -np.asarray(Fnor, dtype=float)
    e = q / op.lam - op.M(q)
    return d, e


@dataclass(frozen=True)
class GradientTestConfig:
    """Constants of the gradient-related test: ``eta``, exponent ``q``, scale ``c``."""

    eta: float = 1e-8
    q: float = 0.2
    c: float = 1e-3


def growth_factor(k, expo, c):
    """``c * k^expo * ln(k)^(2 expo)``; zero for ``k <= 1``."""
    if k <= 1:
        return 0.0
    return c * k**expo * math.log(k) ** (2 * expo)


def eta_k(chi, k, cfg):
    b = growth_factor(k, cfg.q, cfg.c)
    return min(b * chi**cfg.q, cfg.eta)


def gradient_related_test(e_norm, chi, k, cfg=GradientTestConfig()):
    """SO when ``||e|| <= chi / eta_k`` (checked as ``||e|| eta_k <= chi``), else FO.

    ``eta_k == 0`` makes the bound vacuous and always yields SO.
    """
    ek = eta_k(chi, k, cfg)
    if ek == 0.0 or e_norm * ek <= chi:
        return Flag.SO
    return Flag.FO
