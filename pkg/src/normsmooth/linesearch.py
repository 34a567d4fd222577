"""Backtracking linesearch with adaptive Lipschitz and merit-weight estimates.

At trial ``alpha = rho**t`` with ``p_alpha = prox(z_k + s_k(alpha))``:

    U = f(p) - f(x_k) - <grad f(x_k), p - x_k>
    V = ||p - x_k||
    W = ||grad f(p) - grad f(x_k)||
    L = max(2U/V^2, W/V)            (L_bar if V == 0)
    tau = min(2 gamma (1 - nu) / (L^2 lam^2 + 2), tau_prev)

and the step is accepted when

    H(tau, z_k + s) - H(tau, z_k) <= -sigma lam tau alpha / 2 chi^2 - nu / (lam alpha) V^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LinesearchFailure
from .newton_cg import Flag, growth_factor
from .normal import merit, point_from


@dataclass(frozen=True)
class LineSearchConfig:
    sigma: float = 1e-4
    rho: float = 0.5
    gamma: float = 0.9
    nu: float = 1e-3
    p: float = 0.2
    c: float = 1e-3
    L_bar: float = 1.0
    tau_init: float = 1e-3
    max_backtracks: int = 50
    prescreen: bool = True

    def __post_init__(self):
        for name in ("sigma", "rho", "gamma", "nu"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("p", "c", "L_bar", "tau_init"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")


@dataclass
class TrialEvaluation:
    alpha: float
    s: np.ndarray
    p: np.ndarray
    fval: float
    psi: float
    point: object = None  # NormalPoint at z_k + s once the gradient is known
    U: float = math.nan
    V: float = math.nan
    W: float = math.nan
    L: float = math.nan
    tau: float = math.nan
    nu: float = math.nan
    lhs: float = math.nan
    rhs: float = math.nan
    prescreened: bool = False
    accepted: bool = False


def trial_step(flag, d, e, alpha, lam):
    """``alpha lam d`` for FO, ``alpha lam (d + alpha e)`` for SO."""
    if flag == Flag.FO:
        return alpha * lam * d
    return alpha * lam * (d + alpha * e)


def nu_trial(V, k, cfg):
    """``min(nu, a_k^2 V^(2p))`` with ``a_k = c k^p ln(k)^(2p)``."""
    a = growth_factor(k, cfg.p, cfg.c)
    return min(cfg.nu, a * a * V ** (2 * cfg.p))


def _probe(p, s, alpha, base):
    """prox + f at the trial point; no gradient."""
    zt = base.z + s
    pa = p.prox_of(zt)
    fval = p.f(pa)
    psi = fval + p.phi(pa) if math.isfinite(fval) else math.inf
    return TrialEvaluation(alpha=alpha, s=s, p=pa, fval=fval, psi=psi)


def prescreen(p, tau_prev, base, s, alpha=1.0):
    """Cheap necessary condition ``psi(prox(z_k + s)) < H(tau_prev, z_k)``."""
    return _probe(p, s, alpha, base).psi < merit(p, tau_prev, base)


def _complete(p, base, tr, k, cfg, tau_prev):
    lam = p.lam
    if not math.isfinite(tr.fval):
        tr.lhs = math.inf
        tr.rhs = -math.inf
        return tr
    g_new = p.grad(tr.p)
    if not np.all(np.isfinite(g_new)):
        tr.lhs = math.inf
        tr.rhs = -math.inf
        return tr
    dx = tr.p - base.x
    V = float(np.linalg.norm(dx))
    U = p.smooth.bregman(base.x, tr.p, base.fval, tr.fval, base.g, g_new)
    W = float(np.linalg.norm(g_new - base.g))
    if V != 0.0:
        L = max(2.0 * U / V**2, W / V)
    else:
        L = cfg.L_bar
    nu = nu_trial(V, k, cfg)
    tau = min(2.0 * cfg.gamma * (1.0 - nu) / (L * L * lam * lam + 2.0), tau_prev)
    tr.point = point_from(p, base.z + tr.s, tr.p, tr.fval, g_new)
    tr.U, tr.V, tr.W, tr.L, tr.tau, tr.nu = U, V, W, L, tau, nu
    tr.lhs = merit(p, tau, tr.point) - merit(p, tau, base)
    tr.rhs = -0.5 * cfg.sigma * lam * tau * tr.alpha * base.chi**2 - nu / (lam * tr.alpha) * V**2
    if not math.isfinite(tr.lhs):
        tr.lhs = math.inf
    tr.accepted = tr.lhs <= tr.rhs
    return tr


def evaluate_trial(p, base, s, alpha, k, cfg, tau_prev):
    """Full trial evaluation: one prox, one f and one gradient at ``z_k + s``."""
    return _complete(p, base, _probe(p, s, alpha, base), k, cfg, tau_prev)


@dataclass
class BacktrackResult:
    alpha: float
    tau: float
    L: float
    nu: float
    trial: TrialEvaluation
    n_trials: int
    trials: list


def backtrack(p, base, flag, d, e, cfg, tau_prev, k):
    """Return the first ``alpha = rho**t`` satisfying the Armijo-type condition.

    Trials are prescreened without gradient work until the first one passes;
    from then on every trial is tested in full.
    """
    if not base.chi > 0.0:
        raise ValueError("backtracking requires chi > 0")
    merit_prev = merit(p, tau_prev, base)
    screening = cfg.prescreen
    trials = []
    tr = None
    for t in range(cfg.max_backtracks):
        alpha = cfg.rho**t
        s = trial_step(flag, d, e, alpha, p.lam)
        tr = _probe(p, s, alpha, base)
        trials.append(tr)
        if screening:
            if not tr.psi < merit_prev:
                continue
            tr.prescreened = True
            screening = False
        _complete(p, base, tr, k, cfg, tau_prev)
        if tr.accepted:
            return BacktrackResult(alpha, tr.tau, tr.L, tr.nu, tr, t + 1, trials)
    raise LinesearchFailure(f"no step accepted after {cfg.max_backtracks} trials", trial=tr, iteration=k)
