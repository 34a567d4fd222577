"""First-order reference methods: proximal gradient and FISTA."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NotAvailable
from .normal import natural_residual
from .solver import CONVERGED, MAX_ITER, NUMERICAL_BREAKDOWN, TraceRecord


@dataclass(frozen=True)
class FirstOrderConfig:
    """``step='1/L'`` uses the closed-form Lipschitz bound of f; ``'fixed'`` uses ``step_size``.

    FISTA assumes convex f; this is not checked.
    """

    method: str = "fista"
    step: str = "1/L"
    step_size: float | None = None
    max_iter: int = 20000
    stop_tol: float = 1e-8
    lam_nat: float = 1.0

    def __post_init__(self):
        if self.method not in ("fista", "prox-grad"):
            raise InvalidArgument(f"unknown first-order method {self.method!r}")
        if self.step not in ("1/L", "fixed"):
            raise InvalidArgument(f"unknown step rule {self.step!r}")
        if self.step == "fixed" and not (self.step_size and self.step_size > 0):
            raise InvalidArgument("fixed step rule needs a positive step_size")


@dataclass
class FirstOrderResult:
    x: np.ndarray
    psi: float
    status: str
    trace: list
    iterations: int
    step: float


def step_length(problem, cfg):
    if cfg.step == "fixed":
        return cfg.step_size
    try:
        L = problem.smooth.lipschitz_bound()
    except NotAvailable as exc:
        raise NotAvailable(f"step rule 1/L: {exc}") from exc
    if not L > 0:
        raise NotAvailable("Lipschitz bound is zero")
    return 1.0 / L


def run_first_order(problem, cfg, x0):
    """Run proximal gradient or FISTA from ``x0``.

    Stops once the natural residual at ``x_k`` drops below ``cfg.stop_tol``.
    """
    p = problem.counted()
    counter = p.counter
    t0 = time.perf_counter()
    step = step_length(p, cfg)
    x = np.asarray(x0, dtype=float).copy()
    if not p.prox.in_domain(x):
        raise InvalidArgument("x0 is outside dom(phi)")
    y = x.copy()
    t = 1.0
    trace = []
    status = MAX_ITER
    k = 0
    while True:
        fx, gx = p.f_grad(x)
        psi = fx + p.phi(x)
        if not math.isfinite(psi):
            status = NUMERICAL_BREAKDOWN
            break
        nat = natural_residual(p, x, cfg.lam_nat, g=gx)
        trace.append(TraceRecord(k=k, chi=None, nat_res=nat, psi=psi,
                                 time=time.perf_counter() - t0, **counter.snapshot()))
        if nat < cfg.stop_tol:
            status = CONVERGED
            break
        if k >= cfg.max_iter:
            break
        if cfg.method == "prox-grad":
            x = p.prox_of(x - step * gx, step)
        else:
            gy = gx if k == 0 else p.grad(y)
            x_new = p.prox_of(y - step * gy, step)
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x, t = x_new, t_new
        k += 1
    return FirstOrderResult(x=x, psi=trace[-1].psi if trace else math.nan, status=status,
                            trace=trace, iterations=k, step=step)
