"""Command-line entry point: ``lvqc {plan,compile,evaluate,dynamics,mc-estimate}``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .circuits import ParameterVector, build_brickwork, trotter_params
from .errors import CapacityError, LVQCError, OptimizerError, PlanInfeasibleError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PLAN_INFEASIBLE = 3
EXIT_CAPACITY = 4
EXIT_OPTIMIZER = 5


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _emit(doc, path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


# ----------------------------------------------------------------------------
# config handling
# ----------------------------------------------------------------------------
def _load_config(args):
    from .driver import CompileConfig

    doc = {}
    if args.config:
        with open(args.config) as f:
            doc = json.load(f)
    overrides = {
        "tau": args.tau, "depth": args.depth, "Ltilde": args.ltilde, "backend": args.backend,
        "chi": args.chi, "alpha": args.alpha, "protocol": args.protocol, "d_ref": args.d_ref,
        "reference": args.reference, "eval_sizes": args.eval_sizes, "workers": args.workers,
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if args.max_iter is not None:
        doc.setdefault("optimizer", {})["max_iterations"] = args.max_iter
    if args.boundary is not None:
        doc.setdefault("hamiltonian", {})["boundary"] = args.boundary
    return CompileConfig.from_dict(doc)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with CompileConfig fields")
    p.add_argument("--tau", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--ltilde", type=int, help="explicit compilation size")
    p.add_argument("--backend", choices=["auto", "dense", "mps"])
    p.add_argument("--chi", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--protocol", choices=["pbc_theorem1", "generic_theorem2"])
    p.add_argument("--reference", choices=["exact", "trotter"])
    p.add_argument("--d-ref", type=int, dest="d_ref")
    p.add_argument("--boundary", choices=["open", "periodic"])
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--eval-sizes", type=int, nargs="+", dest="eval_sizes")
    p.add_argument("--workers", type=int)


def _read_theta(path: str) -> ParameterVector:
    with open(path) as f:
        doc = json.load(f)
    if "theta_opt" in doc:  # a RunReport
        doc = doc["theta_opt"]
    return ParameterVector.from_dict(doc)


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------
def cmd_plan(args) -> int:
    from .planner import GLOBAL, LOCAL, LRBoundModel, plan_size

    target, size = LOCAL, args.system_size
    if args.target.startswith("global"):
        target = GLOBAL
        _, _, tail = args.target.partition(":")
        size = int(tail) if tail else size
    kw = dict(variant=args.variant, D=args.dim, v=args.v, xi=args.xi, C_lr=args.C)
    if args.variant == "short_range":
        kw.update(zeta=args.zeta)
    if args.variant == "long_range":
        kw.update(alpha=args.alpha, sigma=args.sigma)
    model = LRBoundModel(**kw)
    plan = plan_size(model, args.tau, args.depth, (args.g, args.k, args.d_H), args.tol, target, size)
    _log(plan.table())
    _emit(plan.to_dict(), args.output)
    return EXIT_OK


def cmd_compile(args) -> int:
    from .driver import run_lvqc

    cfg = _load_config(args)
    report = run_lvqc(cfg, log=None if args.quiet else _log)
    _emit(report.to_dict(), args.output)
    if report.trace is not None and args.history:
        report.trace.write_csv(args.history)
    if report.theta_opt is not None and args.theta_out:
        with open(args.theta_out, "w") as f:
            f.write(report.theta_opt.to_json() + "\n")
    if report.status == "optimizer_failure":
        _log(f"optimizer failure: {report.error}")
        return EXIT_OPTIMIZER
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .driver import evaluate_parameters

    cfg = _load_config(args)
    theta = _read_theta(args.theta) if args.theta else trotter_params(cfg.tau, cfg.depth)
    out = [evaluate_parameters(cfg, theta, L).to_dict() for L in cfg.eval_sizes]
    _emit(out, args.output)
    return EXIT_OK


def cmd_dynamics(args) -> int:
    from .driver import HamiltonianSpec, run_stroboscopic

    theta = _read_theta(args.theta) if args.theta else trotter_params(args.tau, args.depth)
    ham = HamiltonianSpec()
    if args.config:
        with open(args.config) as f:
            doc = json.load(f)
        if "hamiltonian" in doc:
            ham = HamiltonianSpec.from_dict(doc["hamiltonian"])
    res = run_stroboscopic(theta, args.size, args.initial, args.steps, args.backend,
                           Ltilde=args.ltilde, tau=args.tau, hamiltonian=ham, chi=args.chi,
                           d_ref=args.d_ref, reference=args.reference)
    if args.csv:
        res.write_csv(args.csv)
    _emit(res.to_dict(), args.output)
    return EXIT_OK


def cmd_mc_estimate(args) -> int:
    from .driver import HamiltonianSpec
    from .mc import EstimatorConfig, estimate_hst, estimate_lhst_j
    from .costs import cost_hst, cost_lhst_j
    from .statevector import circuit_to_unitary, exact_evolution

    H = HamiltonianSpec().build(args.size)
    U = exact_evolution(H, args.tau)
    theta = _read_theta(args.theta) if args.theta else trotter_params(args.tau, args.depth)
    V = circuit_to_unitary(build_brickwork(args.size, theta.depth, theta))
    cfg = EstimatorConfig(args.N1, args.N2, args.N3, args.seed)
    if args.cost == "lhst":
        site = args.site or args.size // 2
        est, exact = estimate_lhst_j(U, V, site, cfg), cost_lhst_j(U, V, site)
    else:
        est, exact = estimate_hst(U, V, cfg), cost_hst(U, V)
    doc = {"estimate": est.estimate, "stderr": est.stderr, **dataclasses.asdict(cfg),
           "exact": exact, "cost": args.cost}
    _emit(doc, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lvqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="choose the compilation size from a Lieb-Robinson model")
    p.add_argument("--variant", default="finite_range",
                   choices=["finite_range", "short_range", "long_range"])
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--v", type=float, default=2.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0, help="Lieb-Robinson prefactor")
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--sigma", type=float)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--g", type=float, default=3.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--d-H", type=int, default=1, dest="d_H")
    p.add_argument("--target", default="local", help="local or global:L")
    p.add_argument("--system-size", type=int, dest="system_size")
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compile", help="optimise a circuit on the compilation size and evaluate it")
    _add_config_flags(p)
    p.add_argument("--output", help="RunReport JSON path (default stdout)")
    p.add_argument("--history", help="cost-history CSV path")
    p.add_argument("--theta-out", dest="theta_out", help="optimised parameters JSON path")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("evaluate", help="cost reports of given parameters at several sizes")
    _add_config_flags(p)
    p.add_argument("--theta", help="parameter JSON (or a RunReport); default Trotter parameters")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("dynamics", help="stroboscopic <Z_{L/2}> under repeated application")
    p.add_argument("--config", help="JSON file; only its hamiltonian entry is used")
    p.add_argument("--theta")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=5, help="Trotter depth when no --theta is given")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--ltilde", type=int, required=True)
    p.add_argument("--initial", choices=["LE", "DW"], default="LE")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--backend", choices=["dense", "mps"], default="dense")
    p.add_argument("--chi", type=int, default=60)
    p.add_argument("--d-ref", type=int, default=100, dest="d_ref")
    p.add_argument("--reference", choices=["exact", "trotter"])
    p.add_argument("--csv", help="dynamics CSV path")
    p.add_argument("--output")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("mc-estimate", help="sampled LHST/HST cost of a Heisenberg compilation")
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--theta")
    p.add_argument("--cost", choices=["lhst", "hst"], default="lhst")
    p.add_argument("--site", type=int)
    p.add_argument("--N1", type=int, default=64)
    p.add_argument("--N2", type=int, default=4096)
    p.add_argument("--N3", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_mc_estimate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PlanInfeasibleError as exc:
        _log(f"planner infeasible: {exc}")
        return EXIT_PLAN_INFEASIBLE
    except CapacityError as exc:
        _log(f"capacity exceeded: {exc}")
        return EXIT_CAPACITY
    except OptimizerError as exc:
        _log(f"optimizer failure: {exc}")
        return EXIT_OPTIMIZER
    except (LVQCError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
