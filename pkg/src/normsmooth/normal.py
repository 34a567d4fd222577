"""Normal map, natural residual, merit function and the z0 rule.

For a problem ``min f(x) + phi(x)`` and prox stepsize ``lam``:

    x       = prox_{lam phi}(z)
    Fnor(z) = grad f(x) + (z - x) / lam
    chi(z)  = ||Fnor(z)||
    H(tau, z) = f(x) + phi(x) + tau * lam / 2 * chi(z)^2
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument
from .prox import ProxOperator
from .smooth import SmoothObjective


@dataclass
class EvalCounter:
    """Exact counts of oracle calls made through a :class:`ProblemHandle`."""

    nf: int = 0
    ng: int = 0
    nprox: int = 0
    nhvp: int = 0

    def snapshot(self):
        return dict(nf=self.nf, ng=self.ng, nprox=self.nprox, nhvp=self.nhvp)


@dataclass(frozen=True)
class ProblemHandle:
    """``f``, ``phi`` and the prox stepsize ``lam`` of one composite problem."""

    smooth: SmoothObjective
    prox: ProxOperator
    lam: float
    counter: EvalCounter = field(default_factory=EvalCounter, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidArgument("lam must be positive")

    @property
    def n(self):
        return self.smooth.n

    def counted(self):
        """Same problem with a fresh evaluation counter."""
        return replace(self, counter=EvalCounter())

    def prox_of(self, z, lam=None):
        self.counter.nprox += 1
        return self.prox.prox(z, self.lam if lam is None else lam)

    def f(self, x):
        self.counter.nf += 1
        return self.smooth.value(x)

    def grad(self, x):
        self.counter.ng += 1
        return self.smooth.grad(x)

    def f_grad(self, x):
        self.counter.nf += 1
        self.counter.ng += 1
        return self.smooth.value_grad(x)

    def hvp(self, x, v):
        self.counter.nhvp += 1
        return self.smooth.hess_vec(x, v)

    def phi(self, x):
        return self.prox.value(x)


@dataclass(frozen=True)
class NormalPoint:
    z: np.ndarray
    x: np.ndarray
    g: np.ndarray
    fval: float
    phival: float
    Fnor: np.ndarray
    chi: float

    @property
    def psi(self):
        return self.fval + self.phival


def point_from(p, z, x, fval, g):
    """Assemble a NormalPoint from already evaluated prox/f/grad."""
    Fnor = g + (z - x) / p.lam
    return NormalPoint(z=z, x=x, g=g, fval=float(fval), phival=p.phi(x),
                       Fnor=Fnor, chi=float(np.linalg.norm(Fnor)))


def eval_point(p, z):
    """One prox and one value/gradient evaluation at ``z``."""
    z = np.asarray(z, dtype=float)
    x = p.prox_of(z)
    fval, g = p.f_grad(x)
    return point_from(p, z, x, fval, g)


def natural_residual(p, x, lam_nat=1.0, g=None):
    """``||x - prox_{lam_nat phi}(x - lam_nat grad f(x))||``.

    Pass ``g`` to reuse a cached gradient at ``x``.
    """
    x = np.asarray(x, dtype=float)
    if g is None:
        g = p.grad(x)
    return float(np.linalg.norm(x - p.prox_of(x - lam_nat * g, lam_nat)))


def merit(p, tau, pt):
    """H(tau, z) from the cached fields of ``pt``; no new evaluations."""
    return pt.fval + pt.phival + 0.5 * tau * p.lam * pt.chi**2


def init_z0(p, x0, return_info=False):
    """Initial ``z0`` with ``prox(z0) = x0`` and smallest normal map norm.

    Minimizing ``||grad f(x0) + (z - x0)/lam||`` over the prox preimage of
    ``x0`` is the projection of ``x0 - lam grad f(x0)`` onto that preimage.
    Falls back to ``x0 - lam grad f(x0)`` when the preimage has no closed form.
    """
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise InvalidArgument("x0 must be finite")
    if not p.prox.in_domain(x0):
        raise InvalidArgument("x0 is outside dom(phi)")
    w = x0 - p.lam * p.grad(x0)
    z0 = p.prox.preimage_projection(x0, w, p.lam)
    fallback = z0 is None
    if fallback:
        z0 = w
    return (z0, fallback) if return_info else z0
