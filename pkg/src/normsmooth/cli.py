"""Command-line harness: ``solve``, ``compare`` and ``ablate``.

Exit codes: 0 success, 1 usage error, 2 solver failure.
Outputs go to ``--out`` as ``<method>.<format>`` plus ``summary.csv`` and
``config.json``. ``NORMSMOOTH_THREADS`` caps parallel runs in compare/ablate.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import prox as proxlib
from . import smooth
from .baselines import FirstOrderConfig, run_first_order
from .errors import InvalidArgument, NotAvailable, ParseError
from .linesearch import LineSearchConfig
from .newton_cg import GradientTestConfig
from .normal import ProblemHandle
from .probio import load_libsvm, relative_error, synth_problem, write_trace
from .solver import CONVERGED, SolverConfig, solve

log = logging.getLogger("normsmooth")

METHODS = ("lsssn-lbfgs", "lsssn-exact", "fista", "prox-grad")
ABLATION_GRID = ((1.5, 0.1), (2.0, 0.05), (2.5, 0.01), (3.0, 0.001))
DEFAULT_MU = {"logistic": 0.002}
DEFAULT_LAMBDA = {"logistic": ("absolute", 10.0), "sigmoid-ls": ("10/L", None)}
DEFAULT_REGULARIZER = {"logistic": "l1", "sigmoid-ls": "group"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _pair(text):
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def build_parser():
    parser = _Parser(prog="normsmooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    data = common.add_argument_group("data")
    src = data.add_mutually_exclusive_group()
    src.add_argument("--synth", choices=("logistic", "sigmoid-ls"), help="generate a synthetic instance")
    src.add_argument("--libsvm", type=Path, help="load a libsvm text file")
    data.add_argument("--problem", choices=("logistic", "sigmoid-ls"),
                      help="smooth part (defaults to the --synth kind, or logistic for --libsvm)")
    data.add_argument("--dims", type=int, help="feature count override for --libsvm")
    data.add_argument("--N", type=int, default=200)
    data.add_argument("--n", type=int, default=50)
    data.add_argument("--sparsity", type=float, default=1.0)
    data.add_argument("--seed", type=int, default=0)

    reg = common.add_argument_group("regularizer")
    reg.add_argument("--regularizer", choices=("l1", "group", "box-l1", "zero"))
    reg.add_argument("--group-size", type=int, default=16)
    reg.add_argument("--mu", type=float, help="weight (default 0.002 logistic, 2/N sigmoid-ls)")
    reg.add_argument("--lambda", dest="lam", type=float, help="prox stepsize for --lambda-rule absolute")
    reg.add_argument("--lambda-rule", choices=("absolute", "10/L"))

    sol = common.add_argument_group("solver")
    d_ls, d_gt, d_cfg = LineSearchConfig(), GradientTestConfig(), SolverConfig()
    sol.add_argument("--memory", type=int, default=d_cfg.memory)
    sol.add_argument("--max-iter", type=int, default=d_cfg.max_iter)
    sol.add_argument("--fo-max-iter", type=int, default=FirstOrderConfig().max_iter)
    sol.add_argument("--tol", type=float, default=d_cfg.stop_tol)
    sol.add_argument("--cg-tol", type=_pair, metavar="A,B", help="eps_k = min(chi^A, B)")
    sol.add_argument("--cg-cap", type=int, default=d_cfg.cg_cap)
    sol.add_argument("--sigma", type=float, default=d_ls.sigma)
    sol.add_argument("--rho", type=float, default=d_ls.rho)
    sol.add_argument("--gamma", type=float, default=d_ls.gamma)
    sol.add_argument("--nu", type=float, default=d_ls.nu)
    sol.add_argument("--tau0", type=float, default=d_ls.tau_init)
    sol.add_argument("--L-bar", type=float, default=d_ls.L_bar)
    sol.add_argument("--max-backtracks", type=int, default=d_ls.max_backtracks)
    sol.add_argument("--eta", type=float, default=d_gt.eta)
    sol.add_argument("--no-prescreen", action="store_true")

    out = common.add_argument_group("output")
    out.add_argument("--out", type=Path, default=Path("runs"))
    out.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    out.add_argument("--psi-star", type=float, help="reference value for rel_err (solve only)")
    out.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    out.add_argument("-v", "--verbose", action="store_true")

    p_solve = sub.add_parser("solve", parents=[common], help="run one method")
    p_solve.add_argument("--method", choices=METHODS)
    p_solve.add_argument("--hessian", choices=("lbfgs", "exact"), default="lbfgs",
                         help="Hessian model when --method is not given")
    p_cmp = sub.add_parser("compare", parents=[common], help="run several methods on one problem")
    p_cmp.add_argument("--methods", default=",".join(METHODS))
    p_abl = sub.add_parser("ablate", parents=[common], help="sweep CG tolerance rules")
    p_abl.add_argument("--hessian", choices=("lbfgs", "exact"), default="lbfgs")
    return parser


@dataclass
class Resolved:
    problem_kind: str
    regularizer: str
    mu: float
    lambda_rule: str
    lam: float
    lipschitz: float | None
    dataset: dict
    solver: dict
    first_order: dict


def load_data(args):
    if args.synth is None and args.libsvm is None:
        raise UsageError("exactly one data source (--synth or --libsvm) is required")
    kind = args.problem or (args.synth or "logistic")
    if args.synth:
        ds = synth_problem(args.synth.replace("-", "_"), args.N, args.n, args.sparsity, args.seed)
    else:
        ds = load_libsvm(args.libsvm, dims=args.dims)
    return kind, ds


def build_problem(args):
    kind, ds = load_data(args)
    obj = smooth.logistic(ds.A, ds.b) if kind == "logistic" else smooth.sigmoid_ls(ds.A, ds.b)
    regularizer = args.regularizer or DEFAULT_REGULARIZER[kind]
    mu = args.mu if args.mu is not None else DEFAULT_MU.get(kind, 2.0 / ds.N)
    if regularizer == "l1":
        op = proxlib.l1(mu)
    elif regularizer == "box-l1":
        op = proxlib.box_l1(mu)
    elif regularizer == "zero":
        op = proxlib.zero()
    else:
        rng = np.random.Generator(np.random.PCG64(args.seed))
        op = proxlib.group_l2(mu, proxlib.random_groups(ds.n, args.group_size, rng))
    rule, default_lam = DEFAULT_LAMBDA[kind]
    if args.lambda_rule:
        rule = args.lambda_rule
    elif args.lam is not None:
        rule = "absolute"
    lipschitz = None
    if rule == "10/L":
        lipschitz = obj.lipschitz_bound()
        lam = 10.0 / lipschitz
    else:
        lam = args.lam if args.lam is not None else default_lam
        if lam is None:
            raise UsageError("--lambda is required with --lambda-rule absolute")
    return ds, ProblemHandle(obj, op, lam), Resolved(
        problem_kind=kind, regularizer=regularizer, mu=mu, lambda_rule=rule, lam=lam,
        lipschitz=lipschitz, dataset={"name": ds.name, "N": ds.N, "n": ds.n, **ds.provenance},
        solver={}, first_order={})


def solver_config(args, hessian, cg_tol=None):
    ls = LineSearchConfig(sigma=args.sigma, rho=args.rho, gamma=args.gamma, nu=args.nu,
                          tau_init=args.tau0, L_bar=args.L_bar, max_backtracks=args.max_backtracks,
                          prescreen=not args.no_prescreen)
    return SolverConfig(hessian=hessian, memory=args.memory, linesearch=ls,
                        test=GradientTestConfig(eta=args.eta), cg_tol=cg_tol or args.cg_tol,
                        cg_cap=args.cg_cap, stop_tol=args.tol, max_iter=args.max_iter)


def first_order_config(args, method):
    return FirstOrderConfig(method=method, max_iter=args.fo_max_iter, stop_tol=args.tol)


@dataclass
class RunOutcome:
    name: str
    method: str
    status: str
    iterations: int
    psi: float
    nat_res: float
    trace: list


def run_method(name, method, problem, args, cg_tol=None):
    x0 = np.zeros(problem.n)
    if method.startswith("lsssn"):
        res = solve(problem, x0, solver_config(args, method.split("-", 1)[1], cg_tol))
        psi, status, iters = res.point.psi, res.status, res.iterations
    else:
        res = run_first_order(problem, first_order_config(args, method), x0)
        psi, status, iters = res.psi, res.status, res.iterations
    nat = res.trace[-1].nat_res if res.trace else float("nan")
    log.info("%s: %s after %d iterations, psi=%.12g, nat_res=%.3e", name, status, iters, psi, nat)
    return RunOutcome(name, method, status, iters, psi, nat, res.trace)


def _workers():
    try:
        return max(1, int(os.environ.get("NORMSMOOTH_THREADS", "1")))
    except ValueError:
        return 1


def run_batch(jobs, problem, args):
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        futures = [pool.submit(run_method, name, method, problem, args, cg_tol)
                   for name, method, cg_tol in jobs]
        return [f.result() for f in futures]


SUMMARY_COLUMNS = ("method", "status", "iterations", "psi", "rel_err", "nat_res",
                   "nf", "ng", "nprox", "nhvp", "time")


def write_outputs(outcomes, args, psi_star):
    args.out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "jsonl"
    for oc in outcomes:
        write_trace(oc.trace, args.out / f"{oc.name}.{ext}", args.format, psi_star=psi_star)
    if len(outcomes) > 1 or psi_star is not None:
        with (args.out / "summary.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_COLUMNS)
            for oc in outcomes:
                last = oc.trace[-1] if oc.trace else None
                rel = "" if psi_star is None else repr(relative_error(oc.psi, psi_star))
                w.writerow([oc.name, oc.status, oc.iterations, repr(oc.psi), rel, repr(oc.nat_res),
                            last.nf if last else 0, last.ng if last else 0,
                            last.nprox if last else 0, last.nhvp if last else 0,
                            repr(last.time) if last else ""])


def print_summary(outcomes, psi_star):
    print(f"{'method':<28} {'status':<20} {'iters':>6} {'psi':>20} {'rel_err':>10} {'nat_res':>10}")
    for oc in outcomes:
        rel = relative_error(oc.psi, psi_star) if psi_star is not None else float("nan")
        print(f"{oc.name:<28} {oc.status:<20} {oc.iterations:>6d} {oc.psi:>20.14g} {rel:>10.2e} {oc.nat_res:>10.2e}")


def _jobs(args):
    if args.command == "solve":
        method = args.method or f"lsssn-{args.hessian}"
        return [(method, method, None)]
    if args.command == "compare":
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        bad = [m for m in methods if m not in METHODS]
        if bad or not methods:
            raise UsageError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
        return [(m, m, None) for m in methods]
    method = f"lsssn-{args.hessian}"
    return [(f"{method}-a{a:g}-b{b:g}", method, (a, b)) for a, b in ABLATION_GRID]


def resolve(args, jobs, meta):
    for name, method, cg_tol in jobs:
        if method.startswith("lsssn"):
            meta.solver[name] = solver_config(args, method.split("-", 1)[1], cg_tol).to_dict()
        else:
            meta.first_order[name] = asdict(first_order_config(args, method))
    return asdict(meta)


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help exits 0
        return exc.code
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        jobs = _jobs(args)
        _, problem, meta = build_problem(args)
        config = resolve(args, jobs, meta)
        if args.print_config:
            print(json.dumps(config, indent=2, default=str))
            return 0
        outcomes = run_batch(jobs, problem, args)
    except (UsageError, InvalidArgument, NotAvailable, ParseError, OSError) as exc:
        print(f"normsmooth: error: {exc}", file=sys.stderr)
        return 1
    if args.command == "solve":
        psi_star = args.psi_star
    else:
        psi_star = min(oc.psi for oc in outcomes)
    write_outputs(outcomes, args, psi_star)
    (args.out / "config.json").write_text(json.dumps(config, indent=2, default=str) + "\n")
    print_summary(outcomes, psi_star)
    return 0 if all(oc.status == CONVERGED for oc in outcomes) else 2


if __name__ == "__main__":
    sys.exit(main())
