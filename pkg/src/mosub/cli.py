"""Command line front end: single runs, benchmark grids and basis reports."""

from __future__ import annotations

import argparse
import sys

from . import benchmark, models, serialize
from .problems import make_problem, nearest_valid_dim, registry
from .solver import SolverConfig, solve


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _cmd_solve(args) -> int:
    problem = make_problem(args.problem, args.dim)
    cfg = SolverConfig(
        delta1=args.delta1, delta_low=args.delta_low,
        gamma1=args.gamma1, gamma2=args.gamma2,
        eta=args.eta, eta0=args.eta0,
        max_fevals=args.maxfev, seed=args.seed,
    )
    result = solve(problem.objective, problem.x_start, cfg)
    print(f"problem={problem.name} n={problem.dim} seed={args.seed}")
    print(f"termination={result.termination} n_evals={result.n_evals} "
          f"best_value={result.best_value:.10g}")
    if args.json:
        doc = serialize.trace_document(result, problem.name, problem.dim, cfg)
        serialize.dump(doc, args.json, indent=1)
        print(f"trace written to {args.json}")
    return 0


def _cmd_bench(args) -> int:
    if args.suite != "classic":
        raise SystemExit(f"unknown suite {args.suite!r}; available: classic")
    dims = _parse_int_list(args.dims)
    seeds = _parse_int_list(args.seeds)
    solvers = [tok for tok in args.solvers.split(",") if tok]
    problems = []
    for name, _ in registry():
        for dim in dims:
            actual = nearest_valid_dim(name, dim)
            if actual != dim:
                print(f"note: {name} does not support n={dim}, using n={actual}")
            problems.append(make_problem(name, actual))
    result = benchmark.run_benchmark(
        problems, solvers=solvers, budget_multiplier=args.budget_mult,
        tau=args.tau, seeds=seeds, out_dir=args.out,
    )
    print(f"{len(result.records)} runs recorded; outputs in {args.out}")
    return 0


def _cmd_poisedness(args) -> int:
    layout = models.layout_case(args.case, args.delta)
    q_sub = models.Quad1D(args.q0, args.a, args.b)
    basis = models.lagrange_basis(q_sub, layout, args.delta)
    names = ("alpha", "beta")
    for i, ell in enumerate(basis.ell, start=1):
        terms = [format(ell.q0, ".12g")]
        for coeff, label in ((ell.c, "beta"), (ell.d, "beta^2"),
                             (ell.e, "alpha*beta")):
            terms.append(f"{format(coeff, '+.12g')}*{label}")
        print(f"ell_{i}({', '.join(names)}) = {' '.join(terms)}")
    lam = models.poisedness_lambda(basis, args.delta)
    print(f"Lambda = {format(lam, '.12g')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mosub",
        description="2-D subspace derivative-free trust-region solver and benchmark tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="minimize one test problem")
    p_solve.add_argument("--problem", required=True,
                         help=f"one of {[name for name, _ in registry()]}")
    p_solve.add_argument("--dim", type=int, required=True)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--maxfev", type=int, default=None)
    p_solve.add_argument("--delta1", type=float, default=1.0)
    p_solve.add_argument("--delta-low", dest="delta_low", type=float, default=1e-4)
    p_solve.add_argument("--eta", type=float, default=0.2)
    p_solve.add_argument("--eta0", type=float, default=0.1)
    p_solve.add_argument("--gamma1", type=float, default=10.0)
    p_solve.add_argument("--gamma2", type=float, default=0.1)
    p_solve.add_argument("--json", default=None, help="write the run trace here")
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser("bench", help="run a solver/problem grid and emit profiles")
    p_bench.add_argument("--suite", default="classic")
    p_bench.add_argument("--dims", default="20,50,100")
    p_bench.add_argument("--solvers", default="mosub,baseline")
    p_bench.add_argument("--tau", type=float, default=0.01)
    p_bench.add_argument("--budget-mult", dest="budget_mult", type=float, default=100.0)
    p_bench.add_argument("--seeds", default="1,2,3")
    p_bench.add_argument("--out", required=True)
    p_bench.set_defaults(func=_cmd_bench)

    p_poised = sub.add_parser("poisedness",
                              help="print the basis functions and poisedness constant")
    p_poised.add_argument("--case", type=int, choices=(1, 2), required=True)
    p_poised.add_argument("--delta", type=float, default=1.0)
    p_poised.add_argument("--q0", type=float, default=0.0)
    p_poised.add_argument("--a", type=float, default=0.0)
    p_poised.add_argument("--b", type=float, default=0.0)
    p_poised.set_defaults(func=_cmd_poisedness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
