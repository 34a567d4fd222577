"""Linesearch normal-map semismooth Newton driver."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidArgument, LinesearchFailure, NumericalBreakdown
from .hessian import make_hessian
from .linesearch import LineSearchConfig, backtrack
from .newton_cg import GradientTestConfig, NewtonOperator, cg_solve, gradient_related_test, recover_directions
from .normal import eval_point, init_z0, merit, natural_residual

log = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max-iter"
LINESEARCH_FAILURE = "linesearch-failure"
NUMERICAL_BREAKDOWN = "numerical-breakdown"

# (exponent, cap) of eps_k = min(chi^a, b)
CG_TOL_LBFGS = (2.5, 0.01)
CG_TOL_EXACT = (1.4, 0.1)


@dataclass(frozen=True)
class SolverConfig:
    hessian: str = "lbfgs"
    memory: int = 10
    linesearch: LineSearchConfig = field(default_factory=LineSearchConfig)
    test: GradientTestConfig = field(default_factory=GradientTestConfig)
    cg_tol: tuple | None = None
    cg_cap: int = 10
    # exact mode raises the CG cap once chi drops below the switch
    cg_cap_late: int | None = None
    cg_cap_switch: float = 1e-4
    stop_tol: float = 1e-8
    lam_nat: float = 1.0
    max_iter: int = 1000

    def __post_init__(self):
        if self.hessian not in ("lbfgs", "exact"):
            raise InvalidArgument(f"unknown Hessian mode {self.hessian!r}")
        if self.cg_tol is None:
            object.__setattr__(self, "cg_tol", CG_TOL_EXACT if self.hessian == "exact" else CG_TOL_LBFGS)
        else:
            object.__setattr__(self, "cg_tol", tuple(self.cg_tol))
        if self.cg_cap_late is None:
            object.__setattr__(self, "cg_cap_late", 100 if self.hessian == "exact" else self.cg_cap)

    def cg_tolerance(self, chi):
        a, b = self.cg_tol
        return min(chi**a, b)

    def cg_iterations(self, chi):
        return self.cg_cap if chi > self.cg_cap_switch else self.cg_cap_late

    def to_dict(self):
        return asdict(self)


@dataclass
class TraceRecord:
    k: int
    chi: float | None
    nat_res: float
    psi: float
    merit: float | None = None
    alpha: float | None = None
    flag: str | None = None
    tau: float | None = None
    L: float | None = None
    nu: float | None = None
    step_norm: float | None = None
    cg_iters: int | None = None
    cg_status: str | None = None
    backtracks: int | None = None
    nf: int = 0
    ng: int = 0
    nprox: int = 0
    nhvp: int = 0
    time: float = 0.0


TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))


@dataclass
class SolveResult:
    x: np.ndarray
    point: object
    status: str
    trace: list
    iterations: int
    message: str = ""
    z0_fallback: bool = False

    @property
    def converged(self):
        return self.status == CONVERGED


def solve(problem, x0, cfg=SolverConfig()):
    """Minimize ``f + phi`` from ``x0``.

    Returns a :class:`SolveResult`; linesearch failures and numerical
    breakdowns end the run with the corresponding status instead of raising.
    """
    p = problem.counted()
    counter = p.counter
    t0 = time.perf_counter()
    trace = []
    hess = make_hessian(cfg.hessian, cfg.memory, hvp=p.hvp)
    z0, fallback = init_z0(p, x0, return_info=True)
    if fallback:
        log.info("z0: no closed-form prox preimage, using x0 - lam grad f(x0)")
    pt = eval_point(p, z0)
    tau_prev = cfg.linesearch.tau_init
    status, message = MAX_ITER, ""
    k = 0

    def record(k, pt, nat, tau_merit, **kw):
        trace.append(TraceRecord(
            k=k, chi=pt.chi, nat_res=nat, psi=pt.psi, merit=merit(p, tau_merit, pt),
            time=time.perf_counter() - t0, **kw, **counter.snapshot()))

    while True:
        if not (math.isfinite(pt.chi) and math.isfinite(pt.psi)):
            status, message = NUMERICAL_BREAKDOWN, f"non-finite chi or psi at iteration {k}"
            break
        nat = natural_residual(p, pt.x, cfg.lam_nat, g=pt.g)
        if nat < cfg.stop_tol or pt.chi == 0.0:
            status = CONVERGED
            record(k, pt, nat, tau_prev)
            break
        if k >= cfg.max_iter:
            record(k, pt, nat, tau_prev)
            break
        try:
            hess.register(pt.x)
            op = NewtonOperator(hess, p.prox, pt.z, p.lam)
            cg = cg_solve(op, op.D(pt.Fnor), cfg.cg_tolerance(pt.chi), cfg.cg_iterations(pt.chi))
            d, e = recover_directions(op, cg.q, pt.Fnor)
            if not np.all(np.isfinite(e)):
                raise NumericalBreakdown("non-finite Newton direction", iteration=k)
            flag = gradient_related_test(float(np.linalg.norm(e)), pt.chi, k, cfg.test)
            bt = backtrack(p, pt, flag, d, e, cfg.linesearch, tau_prev, k)
        except LinesearchFailure as exc:
            status, message = LINESEARCH_FAILURE, str(exc)
            record(k, pt, nat, tau_prev)
            break
        except NumericalBreakdown as exc:
            status, message = NUMERICAL_BREAKDOWN, f"{exc} (outer iteration {k})"
            record(k, pt, nat, tau_prev)
            break
        new = bt.trial.point
        record(k, pt, nat, bt.tau, alpha=bt.alpha, flag=flag.value, tau=bt.tau, L=bt.L,
               nu=bt.nu, step_norm=bt.trial.V, cg_iters=cg.iters, cg_status=cg.status,
               backtracks=bt.n_trials - 1)
        hess.update(new.x - pt.x, new.g - pt.g, x_new=new.x)
        pt, tau_prev = new, bt.tau
        k += 1

    if message:
        log.warning(message)
    return SolveResult(x=pt.x, point=pt, status=status, trace=trace, iterations=k,
                       message=message, z0_fallback=fallback)
