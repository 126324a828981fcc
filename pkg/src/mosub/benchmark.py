"""Benchmark runner, accuracy metrics and performance/data profiles.

A run is summarized by its best-so-far evaluation history; the profiles
count, per solver, the fraction of problems solved to a target normalized
accuracy within an evaluation factor (performance profile) or within a
budget of simplified-gradient units ``beta * (n + 1)`` (data profile).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import serialize
from .problems import Problem
from .solver import (BudgetExhausted, CountingObjective, SolverConfig,
                     SolveResult, solve)


@dataclass(frozen=True)
class RunRecord:
    """One (solver, problem, seed) run reduced to its improvement history.

    ``eval_history`` holds ``(eval_index, best_f_so_far)`` pairs recorded
    at improvements; ``f_init`` is the value of the very first evaluation
    (the shared starting point).  ``f_best_known`` is filled once per
    problem after all runs finish.
    """

    solver: str
    problem: str
    n: int
    seed: int
    eval_history: tuple[tuple[int, float], ...]
    f_init: float
    f_best_known: float | None = None


@dataclass(frozen=True)
class ProfileCurve:
    solver: str
    kind: str  # "performance" | "data"
    abscissae: tuple[float, ...]
    fractions: tuple[float, ...]


def best_at(record: RunRecord, n_evals: int) -> float:
    """Best value seen within the first ``n_evals`` evaluations."""
    best = math.inf
    for idx, val in record.eval_history:
        if idx > n_evals:
            break
        best = val
    return best


def facc(record: RunRecord, n_evals: int) -> float:
    """Normalized accuracy in [0, 1] after ``n_evals`` evaluations.

    0 means no progress beyond the starting value, 1 means the best known
    value was matched.  Undefined (raises) when the starting value already
    equals the best known value.
    """
    if record.f_best_known is None:
        raise ValueError("record has no best-known value")
    denom = record.f_best_known - record.f_init
    if denom == 0.0:
        raise ValueError(f"degenerate problem {record.problem!r}: "
                         "starting value equals best known value")
    frac = (best_at(record, n_evals) - record.f_init) / denom
    return min(max(frac, 0.0), 1.0)


def n_to_accuracy(record: RunRecord, tau: float) -> int | None:
    """Smallest evaluation count reaching accuracy ``1 - tau``, if any."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    for idx, _ in record.eval_history:
        if facc(record, idx) >= 1.0 - tau:
            return idx
    return None


def _instance_key(record: RunRecord) -> tuple[str, int]:
    return (record.problem, record.n)


def _median_n(records: list[RunRecord], tau: float) -> float:
    counts = [n_to_accuracy(r, tau) for r in records]
    values = [math.inf if c is None else float(c) for c in counts]
    return float(np.median(values))


def _solved_counts(records: list[RunRecord], tau: float):
    """Median evaluation counts per (solver, problem instance).

    Problems solved by no solver are dropped from the problem set (they
    would shift every curve identically); a warning names them.
    """
    solvers: list[str] = []
    instances: list[tuple[str, int]] = []
    grouped: dict[tuple[str, tuple[str, int]], list[RunRecord]] = {}
    for rec in records:
        if rec.solver not in solvers:
            solvers.append(rec.solver)
        key = _instance_key(rec)
        if key not in instances:
            instances.append(key)
        grouped.setdefault((rec.solver, key), []).append(rec)

    counts = {
        (s, p): _median_n(runs, tau) for (s, p), runs in grouped.items()
    }
    kept = []
    for p in instances:
        if any(math.isfinite(counts.get((s, p), math.inf)) for s in solvers):
            kept.append(p)
        else:
            warnings.warn(f"problem {p} solved by no solver; dropped from profiles")
    return solvers, kept, counts


def performance_profile(records, tau: float) -> dict[str, ProfileCurve]:
    """Fraction of problems solved within a factor alpha of the fastest solver."""
    records = list(records)
    if not records:
        raise ValueError("no records")
    solvers, instances, counts = _solved_counts(records, tau)
    ratios: dict[tuple[str, tuple[str, int]], float] = {}
    for p in instances:
        best = min(counts.get((s, p), math.inf) for s in solvers)
        for s in solvers:
            n_sp = counts.get((s, p), math.inf)
            ratios[(s, p)] = n_sp / best if math.isfinite(n_sp) else math.inf

    breakpoints = sorted({r for r in ratios.values() if math.isfinite(r)} | {1.0})
    curves = {}
    for s in solvers:
        fractions = []
        for alpha in breakpoints:
            hit = sum(1 for p in instances if ratios[(s, p)] <= alpha)
            fractions.append(hit / len(instances) if instances else 0.0)
        curves[s] = ProfileCurve(s, "performance", tuple(breakpoints), tuple(fractions))
    return curves


def data_profile(records, tau: float,
                 budget_multiplier: float | None = None) -> dict[str, ProfileCurve]:
    """Fraction of problems solved within ``beta * (n + 1)`` evaluations."""
    records = list(records)
    if not records:
        raise ValueError("no records")
    solvers, instances, counts = _solved_counts(records, tau)
    dims = {_instance_key(r): r.n for r in records}
    if budget_multiplier is None:
        budget_multiplier = max(
            (idx / (r.n + 1) for r in records for idx, _ in r.eval_history[-1:]),
            default=1.0,
        )
        budget_multiplier = max(budget_multiplier, 0.2)
    betas = np.logspace(math.log10(0.1), math.log10(budget_multiplier), 200)
    curves = {}
    for s in solvers:
        fractions = []
        for beta in betas:
            hit = 0
            for p in instances:
                n_sp = counts.get((s, p), math.inf)
                if math.isfinite(n_sp) and n_sp <= beta * (dims[p] + 1):
                    hit += 1
            fractions.append(hit / len(instances) if instances else 0.0)
        curves[s] = ProfileCurve(s, "data", tuple(float(b) for b in betas),
                                 tuple(fractions))
    return curves


def baseline_solve(objective, x0, max_fevals: int | None = None,
                   seed: int = 0) -> SolveResult:
    """Simplex-reflection (Nelder-Mead style) minimizer.

    Fully deterministic (the seed only fixes the interface), evaluates the
    starting point first, and respects the same budget contract as the
    main solver.  Stops when the budget is exhausted or the simplex has
    collapsed.
    """
    del seed  # no randomness; kept for a uniform solver interface
    if isinstance(objective, CountingObjective):
        obj = objective
    else:
        obj = CountingObjective(objective, max_evals=max_fevals)
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    reflect, expand, contract, shrink = 1.0, 2.0, 0.5, 0.5
    termination = "budget_exhausted"
    try:
        simplex = [x0]
        fvals = [obj(x0)]
        for i in range(n):
            vertex = x0.copy()
            vertex[i] = vertex[i] * 1.05 if vertex[i] != 0.0 else 0.00025
            simplex.append(vertex)
            fvals.append(obj(vertex))
        while True:
            order = sorted(range(n + 1), key=lambda i: (fvals[i], i))
            simplex = [simplex[i] for i in order]
            fvals = [fvals[i] for i in order]
            spread = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
            if spread <= 1e-12 * (1.0 + float(np.max(np.abs(simplex[0])))):
                termination = "radius_below_low"
                break
            centroid = np.mean(simplex[:-1], axis=0)
            worst = simplex[-1]
            xr = centroid + reflect * (centroid - worst)
            fr = obj(xr)
            if fr < fvals[0]:
                xe = centroid + expand * (centroid - worst)
                fe = obj(xe)
                if fe < fr:
                    simplex[-1], fvals[-1] = xe, fe
                else:
                    simplex[-1], fvals[-1] = xr, fr
            elif fr < fvals[-2]:
                simplex[-1], fvals[-1] = xr, fr
            else:
                if fr < fvals[-1]:
                    xc = centroid + contract * (centroid - worst)
                else:
                    xc = centroid - contract * (centroid - worst)
                fc = obj(xc)
                if fc < min(fr, fvals[-1]):
                    simplex[-1], fvals[-1] = xc, fc
                else:
                    for i in range(1, n + 1):
                        simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0])
                        fvals[i] = obj(simplex[i])
    except BudgetExhausted:
        termination = "budget_exhausted"
    return SolveResult(
        best_point=None if obj.best_point is None else np.array(obj.best_point),
        best_value=obj.best_value,
        n_evals=obj.n_evals,
        termination=termination,
        trace=(),
        eval_history=tuple(obj.history),
    )


def _run_one(solver: str, problem: Problem, budget: int, seed: int) -> SolveResult:
    obj = CountingObjective(problem.objective, max_evals=budget)
    if solver == "mosub":
        cfg = SolverConfig(max_fevals=budget, seed=seed)
        return solve(obj, problem.x_start, cfg)
    if solver == "baseline":
        return baseline_solve(obj, problem.x_start, max_fevals=budget, seed=seed)
    raise ValueError(f"unknown solver {solver!r}; known: mosub, baseline")


@dataclass
class BenchmarkResult:
    records: list[RunRecord]
    performance: dict[str, ProfileCurve]
    data: dict[str, ProfileCurve]
    tau: float
    budget_multiplier: float


def run_benchmark(problems, solvers=("mosub", "baseline"),
                  budget_multiplier: float = 100.0, tau: float = 0.01,
                  seeds=(1, 2, 3), out_dir=None) -> BenchmarkResult:
    """Run a solver x problem x seed grid and compute both profiles.

    Every run gets ``budget_multiplier * (n + 1)`` evaluations and starts
    from the problem's standard point.  The best-known value per problem
    is the analytic optimum when available, improved by anything any run
    found.  Per-run failures are warned about, not fatal.  With
    ``out_dir`` set, writes ``records.json``, ``perf_profile.csv`` and
    ``data_profile.csv`` (header ``solver,abscissa,fraction``).
    """
    problems = list(problems)
    solvers = list(solvers)
    if not solvers:
        raise ValueError("at least one solver is required")
    if not problems:
        raise ValueError("at least one problem is required")

    records: list[RunRecord] = []
    for prob in problems:
        budget = int(round(budget_multiplier * (prob.dim + 1)))
        for solver in solvers:
            for seed in seeds:
                try:
                    result = _run_one(solver, prob, budget, seed)
                except Exception as exc:  # per-run failures are recorded, not fatal
                    warnings.warn(f"run ({solver}, {prob.name}, n={prob.dim}, "
                                  f"seed={seed}) failed: {exc}")
                    continue
                records.append(RunRecord(
                    solver=solver, problem=prob.name, n=prob.dim, seed=seed,
                    eval_history=result.eval_history,
                    f_init=result.eval_history[0][1],
                ))

    # Best-known value per problem instance: analytic reference improved by
    # the best value any run found.
    f_ref = {(p.name, p.dim): p.f_ref for p in problems}
    best_seen: dict[tuple[str, int], float] = {}
    for rec in records:
        key = _instance_key(rec)
        val = rec.eval_history[-1][1]
        best_seen[key] = min(best_seen.get(key, math.inf), val)
    filled = []
    for rec in records:
        key = _instance_key(rec)
        ref = f_ref.get(key)
        best = best_seen[key] if ref is None else min(ref, best_seen[key])
        if best == rec.f_init:
            warnings.warn(f"record {key} is degenerate (f_init equals best known); "
                          "excluded")
            continue
        filled.append(replace(rec, f_best_known=best))
    records = filled

    perf = performance_profile(records, tau)
    data = data_profile(records, tau, budget_multiplier)
    result = BenchmarkResult(records, perf, data, tau, budget_multiplier)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def records_document(result: BenchmarkResult) -> dict:
    return {
        "tau": result.tau,
        "budget_multiplier": result.budget_multiplier,
        "records": [
            {
                "solver": r.solver,
                "problem": r.problem,
                "n": r.n,
                "seed": r.seed,
                "f_init": r.f_init,
                "f_best_known": r.f_best_known,
                "eval_history": [[idx, val] for idx, val in r.eval_history],
            }
            for r in result.records
        ],
    }


def load_records(path) -> BenchmarkResult:
    """Reload records and recompute both profiles from disk."""
    doc = serialize.load(path)
    records = [
        RunRecord(
            solver=r["solver"], problem=r["problem"], n=r["n"], seed=r["seed"],
            eval_history=tuple((int(i), float(v)) for i, v in r["eval_history"]),
            f_init=float(r["f_init"]), f_best_known=r["f_best_known"],
        )
        for r in doc["records"]
    ]
    tau = float(doc["tau"])
    bm = float(doc["budget_multiplier"])
    return BenchmarkResult(records, performance_profile(records, tau),
                           data_profile(records, tau, bm), tau, bm)


def _write_profile_csv(path, curves: dict[str, ProfileCurve]) -> None:
    with open(path, "w") as fp:
        fp.write("solver,abscissa,fraction\n")
        for solver, curve in curves.items():
            for x, frac in zip(curve.abscissae, curve.fractions):
                fp.write(f"{solver},{format(x, '.17g')},{format(frac, '.17g')}\n")


def write_outputs(result: BenchmarkResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    serialize.dump(records_document(result), out / "records.json", indent=1)
    _write_profile_csv(out / "perf_profile.csv", result.performance)
    _write_profile_csv(out / "data_profile.csv", result.data)
