"""Main loop of the 2-D model-based subspace trust-region solver.

Each iteration draws a fresh random direction orthogonal to the current
descent axis, samples three points in the resulting plane, extends the
inherited 1-D model to a plane quadratic, takes an exact trust-region step,
and then refits a fully determined quadratic on a poised 6-point subset of
everything evaluated so far.  The axis restriction of that refit seeds the
next iteration, so curvature information survives the change of plane.

The solver never moves to a point whose objective value is worse than the
incumbent's, so the iterate values are monotonically nonincreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import models
from .geometry import (Frame, PlaneCoords, as_vector, derive_next_frame,
                       from_plane, orthonormal_complement, project_1d, to_plane)
from .models import InterpPoint, Quad1D, Quad2D
from .trustregion import solve_trs

STEP_KINDS = ("success", "interp_point_success", "modified_success",
              "stall_duplicate", "stall_reject")
TERMINATIONS = ("radius_below_low", "budget_exhausted", "target_reached")

SQRT_HALF = math.sqrt(2.0) / 2.0

# Relative floor below which the ratio denominator counts as zero.
_DENOM_TINY = 1e-14


class BudgetExhausted(RuntimeError):
    """Raised by :class:`CountingObjective` when the next evaluation would
    exceed the budget."""


class EvaluationError(RuntimeError):
    """The objective returned a non-finite value where one is required."""


class CountingObjective:
    """Black-box wrapper with an exact-coordinate cache and an eval counter.

    Re-querying a bit-identical point returns the cached value without
    counting.  NaN results are mapped to +inf so that comparisons push the
    solver away from them.  ``history`` holds ``(eval_index, best_so_far)``
    pairs recorded at the first evaluation and at every improvement.
    """

    def __init__(self, func: Callable[[np.ndarray], float], max_evals: int | None = None):
        if max_evals is not None and max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        self.func = func
        self.max_evals = max_evals
        self.cache: dict[tuple, float] = {}
        self.n_evals = 0
        self.history: list[tuple[int, float]] = []
        self.best_value = math.inf
        self.best_point: np.ndarray | None = None

    @staticmethod
    def _key(x) -> tuple:
        return tuple(np.asarray(x, dtype=float).tolist())

    def cached(self, x) -> float | None:
        """Cache lookup that never evaluates or counts."""
        return self.cache.get(self._key(x))

    def __call__(self, x) -> float:
        key = self._key(x)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.max_evals is not None and self.n_evals >= self.max_evals:
            raise BudgetExhausted(f"evaluation budget of {self.max_evals} exhausted")
        value = float(self.func(np.asarray(x, dtype=float)))
        if math.isnan(value):
            value = math.inf
        self.n_evals += 1
        self.cache[key] = value
        if self.n_evals == 1 or value < self.best_value:
            self.best_value = value
            self.best_point = np.array(x, dtype=float)
            self.history.append((self.n_evals, value))
        return value


@dataclass
class SolverConfig:
    """Trust-region parameters and run controls.

    The defaults are the standard setting: initial radius 1, radius window
    [1e-4, 1e4], growth/shrink factors 10 and 0.1, acceptance thresholds
    0.2 (plain step) and 0.1 (modified step), and the first coordinate axis
    as the initial direction.  ``target_facc`` (with ``f_ref``) stops a run
    once the normalized accuracy reaches the target.
    """

    delta1: float = 1.0
    delta_low: float = 1e-4
    delta_upper: float = 1e4
    gamma1: float = 10.0
    gamma2: float = 0.1
    eta: float = 0.2
    eta0: float = 0.1
    d_init: np.ndarray | None = None
    max_fevals: int | None = None
    seed: int = 0
    target_facc: float | None = None
    f_ref: float | None = None

    def validate(self) -> None:
        if not (0.0 < self.delta_low <= self.delta1 <= self.delta_upper):
            raise ValueError("need 0 < delta_low <= delta1 <= delta_upper")
        if not self.gamma1 > 1.0:
            raise ValueError("gamma1 must exceed 1")
        if not (0.0 < self.gamma2 < 1.0):
            raise ValueError("gamma2 must lie in (0, 1)")
        if self.eta0 > self.eta:
            raise ValueError("eta0 must not exceed eta")
        if self.max_fevals is not None and self.max_fevals < 1:
            raise ValueError("max_fevals must be at least 1")
        if self.target_facc is not None and self.f_ref is None:
            raise ValueError("target_facc requires f_ref")


@dataclass
class IterationRecord:
    k: int
    x: np.ndarray
    f: float
    delta: float
    rho: float | None
    step_kind: str
    n_evals_after: int
    degraded_update: bool = False


@dataclass
class SolveResult:
    best_point: np.ndarray | None
    best_value: float
    n_evals: int
    termination: str
    trace: tuple[IterationRecord, ...]
    eval_history: tuple[tuple[int, float], ...]


class _Sample:
    """An evaluated point together with its plane coordinates."""

    __slots__ = ("point", "coords", "fval")

    def __init__(self, point: np.ndarray, coords: PlaneCoords, fval: float):
        self.point = point
        self.coords = coords
        self.fval = fval


@dataclass
class SolverState:
    """Mutable per-run state; see the step functions for field lifecycles."""

    obj: CountingObjective
    cfg: SolverConfig
    rng: np.random.Generator
    k: int
    x: np.ndarray
    f_x: float
    delta: float
    d1: np.ndarray
    q_sub: Quad1D
    x_prev: np.ndarray | None = None
    f_prev: float = math.nan
    frame: Frame | None = None
    ypts: list = field(default_factory=list)
    q: Quad2D | None = None
    # Step-3 outputs:
    x_new: np.ndarray | None = None
    f_new: float = math.nan
    coords_new: PlaneCoords | None = None
    rho: float | None = None
    step_kind: str | None = None
    # Step-4 outputs (pre-advance):
    delta_next: float = math.nan
    frame_next: Frame | None = None
    q_plus: Quad2D | None = None
    q_sub_next: Quad1D | None = None
    degraded: bool = False
    trace: list = field(default_factory=list)


def _fit_values(values: Sequence[float]) -> list[float]:
    # Quadratic fits need finite data; non-finite samples are replaced by a
    # value safely above everything finite so the model steers away.
    finite = [v for v in values if math.isfinite(v)]
    if len(finite) == len(values):
        return list(values)
    hi, lo = max(finite), min(finite)
    surrogate = hi + 10.0 * (1.0 + (hi - lo))
    return [v if math.isfinite(v) else surrogate for v in values]


def initialize(obj: CountingObjective, x0, cfg: SolverConfig) -> SolverState:
    """Step 0: bracket along the initial direction and fit the 1-D model.

    Evaluates ``y_a = x0``, ``y_b = x0 + delta1*d``, then ``y_c`` on the
    cheaper side (``x0 + 2*delta1*d`` when ``f(y_a) <= f(y_b)``, else
    ``x0 - delta1*d``).  The best of the three becomes the first iterate,
    the descent axis points from the worst point to it, and the quadratic
    through the three values along that axis seeds the model chain.
    """
    x0 = as_vector(x0)
    if cfg.d_init is not None:
        d = as_vector(cfg.d_init)
        if d.size != x0.size:
            raise ValueError("d_init dimension does not match x0")
        if not np.linalg.norm(d) > 0.0:
            raise ValueError("d_init must be nonzero")
    else:
        d = np.zeros_like(x0)
        d[0] = 1.0

    y_a = x0
    f_a = obj(y_a)
    if not math.isfinite(f_a):
        raise EvaluationError("objective is not finite at the starting point")
    y_b = x0 + cfg.delta1 * d
    f_b = obj(y_b)
    if f_a <= f_b:
        y_c = y_a + 2.0 * cfg.delta1 * d
    else:
        y_c = y_a - cfg.delta1 * d
    f_c = obj(y_c)

    points = [y_a, y_b, y_c]
    values = [f_a, f_b, f_c]
    i_min = min(range(3), key=lambda i: (values[i], i))
    i_max = max(range(3), key=lambda i: (values[i], i))
    x1 = points[i_min]
    y_worst = points[i_max]
    d1 = x1 - y_worst
    d1 = d1 / np.linalg.norm(d1)

    ts = [project_1d(x1, d1, p) for p in points]
    q_sub = models.fit_initial_1d(ts, _fit_values(values))

    return SolverState(
        obj=obj, cfg=cfg, rng=np.random.default_rng(cfg.seed),
        k=1, x=x1, f_x=values[i_min], delta=cfg.delta1, d1=d1, q_sub=q_sub,
    )


def build_interp_set(state: SolverState, rng: np.random.Generator) -> None:
    """Step 1: fresh orthogonal direction and the three plane samples.

    ``y1`` sits one radius along the new direction; ``y2`` continues to
    ``2*delta`` when ``f(y1) <= f(x_k)`` and mirrors to ``-delta``
    otherwise; ``y3`` advances the better of the two by one radius along
    the descent axis (ties resolved toward ``y1``).
    """
    obj, x, delta = state.obj, state.x, state.delta
    d2 = orthonormal_complement(state.d1, rng)
    frame = Frame(x, state.d1, d2)

    y1 = x + delta * d2
    f1 = obj(y1)
    s1 = _Sample(y1, PlaneCoords(0.0, delta), f1)
    if f1 <= state.f_x:
        y2 = x + 2.0 * delta * d2
        c2 = PlaneCoords(0.0, 2.0 * delta)
    else:
        y2 = x - delta * d2
        c2 = PlaneCoords(0.0, -delta)
    f2 = obj(y2)
    s2 = _Sample(y2, c2, f2)

    s_min = s1 if f1 <= f2 else s2
    y3 = s_min.point + delta * state.d1
    f3 = obj(y3)
    s3 = _Sample(y3, PlaneCoords(delta, s_min.coords.beta), f3)

    state.frame = frame
    state.ypts = [s1, s2, s3]


def build_model(state: SolverState) -> None:
    """Step 2: extend the inherited 1-D model through the three samples."""
    fit_vals = _fit_values([s.fval for s in state.ypts])
    pts = [InterpPoint(s.coords, v) for s, v in zip(state.ypts, fit_vals)]
    state.q = models.build_qk(state.q_sub, pts)


def _ratio(state: SolverState, coords: PlaneCoords, f_val: float) -> float:
    """Actual-over-predicted decrease measured on the plane model.

    The model value at the origin equals ``f(x_k)`` by construction, so the
    denominator is the predicted decrease.  A vanishing denominator yields
    +inf when the objective strictly improved and -inf otherwise.
    """
    denom = models.eval2d(state.q, coords) - state.q.q0
    if abs(denom) <= _DENOM_TINY * (1.0 + abs(state.f_x)):
        return math.inf if f_val < state.f_x else -math.inf
    return (f_val - state.f_x) / denom


def _is_incumbent_or_previous(state: SolverState, point: np.ndarray) -> bool:
    if np.array_equal(point, state.x):
        return True
    return state.x_prev is not None and np.array_equal(point, state.x_prev)


def _reserve_point(state: SolverState, which: str) -> tuple[np.ndarray, PlaneCoords]:
    delta, frame = state.delta, state.frame
    if which == "y4":
        point = state.x + SQRT_HALF * delta * frame.d1 + SQRT_HALF * delta * frame.d2
        return point, PlaneCoords(SQRT_HALF * delta, SQRT_HALF * delta)
    point = state.x + delta * frame.d1
    return point, PlaneCoords(delta, 0.0)


def _modified_model(state: SolverState, plus: _Sample) -> Quad2D | None:
    """Refit a fully determined quadratic on already-evaluated points.

    The 6-point set is the two iterates, the trial point and the three
    samples; when the incumbent equals the previous iterate (also at the
    very first iteration, which has no previous iterate) the diagonal
    reserve point stands in, or the axis reserve point when the trial step
    landed exactly on the diagonal one.
    """
    obj = state.obj
    stalled = state.x_prev is None or np.array_equal(state.x, state.x_prev)
    origin = _Sample(state.x, PlaneCoords(0.0, 0.0), state.f_x)
    if not stalled:
        prev = _Sample(state.x_prev, to_plane(state.frame, state.x_prev), state.f_prev)
        samples = [prev, origin, plus, *state.ypts]
    else:
        y4_point, y4_coords = _reserve_point(state, "y4")
        if not np.array_equal(plus.point, y4_point):
            reserve = _Sample(y4_point, y4_coords, obj(y4_point))
        else:
            y5_point, y5_coords = _reserve_point(state, "y5")
            reserve = _Sample(y5_point, y5_coords, obj(y5_point))
        samples = [origin, plus, *state.ypts, reserve]
    fit_vals = _fit_values([s.fval for s in samples])
    pts = [InterpPoint(s.coords, v) for s, v in zip(samples, fit_vals)]
    try:
        return models.build_full_2d(pts)
    except models.DegenerateGeometryError:
        return None


def trial_step(state: SolverState) -> None:
    """Step 3: trust-region trial with the acceptance ladder.

    The winner is the best of the incumbent, the trust-region point and
    the three samples.  A trial point duplicating the incumbent or the
    previous iterate stalls the iteration with radius and axis frozen (no
    new information to judge the model by).  An improving winner is
    accepted when the decrease ratio reaches ``eta`` or the winner is one
    of the samples.  Otherwise the modified model's trust-region point
    competes against the trial point; the relaxed threshold ``eta0``
    (plus strict improvement) decides between acceptance and a rejected
    stall, which freezes the axis but still lets the ratio shrink the
    radius, so overshooting radii recover.
    """
    obj = state.obj
    trs = solve_trs(state.q, state.delta)
    x_pre = from_plane(state.frame, trs.point)

    def stall(kind: str) -> None:
        state.x_new = state.x
        state.f_new = state.f_x
        state.coords_new = PlaneCoords(0.0, 0.0)
        state.rho = None
        state.step_kind = kind

    if _is_incumbent_or_previous(state, x_pre):
        stall("stall_duplicate")
        return
    pre = _Sample(x_pre, trs.point, obj(x_pre))

    candidates = [_Sample(state.x, PlaneCoords(0.0, 0.0), state.f_x), pre, *state.ypts]
    i_best = min(range(len(candidates)), key=lambda i: (candidates[i].fval, i))
    plus = candidates[i_best]

    if i_best != 0:
        rho = _ratio(state, plus.coords, plus.fval)
        in_samples = any(np.array_equal(plus.point, s.point) for s in state.ypts)
        if rho >= state.cfg.eta or in_samples:
            state.x_new, state.f_new, state.coords_new = plus.point, plus.fval, plus.coords
            state.rho = rho
            state.step_kind = "success" if rho >= state.cfg.eta else "interp_point_success"
            return

    # The only unaccepted candidate with new information is the trial
    # point; it anchors the modified refit and the final ratio test.
    final = pre
    q_mod = _modified_model(state, pre)
    if q_mod is not None:
        trs_mod = solve_trs(q_mod, state.delta)
        x_mod = from_plane(state.frame, trs_mod.point)
        if _is_incumbent_or_previous(state, x_mod):
            stall("stall_duplicate")
            return
        mod = _Sample(x_mod, trs_mod.point, obj(x_mod))
        if mod.fval < final.fval:
            final = mod
    rho = _ratio(state, final.coords, final.fval)

    if rho >= state.cfg.eta0 and final.fval < state.f_x:
        state.x_new, state.f_new, state.coords_new = final.point, final.fval, final.coords
        state.rho = rho
        state.step_kind = "modified_success"
    else:
        state.rho = rho
        state.step_kind = "stall_reject"
        state.x_new = state.x
        state.f_new = state.f_x
        state.coords_new = PlaneCoords(0.0, 0.0)


def _record(state: SolverState) -> None:
    state.trace.append(IterationRecord(
        k=state.k, x=np.array(state.x), f=state.f_x, delta=state.delta,
        rho=state.rho, step_kind=state.step_kind,
        n_evals_after=state.obj.n_evals, degraded_update=state.degraded,
    ))


def update_step(state: SolverState) -> bool:
    """Step 4: radius test, radius/axis update and the 6-point refit.

    Returns False when the current radius is already below the lower
    bound, which terminates the run.  Otherwise the radius grows by
    ``gamma1`` (capped) on ratios reaching ``eta`` and shrinks by
    ``gamma2`` otherwise, except that duplicate stalls freeze it.  The
    refit interpolates a poised 6-subset of both iterates, the new point,
    the three samples and the two reserve points (evaluated only when
    chosen), expressed in the advanced frame; its axis restriction becomes
    the next 1-D model.  If no poised subset exists, the current plane
    model is re-expressed in the new frame instead and the iteration is
    flagged as a degraded update.
    """
    state.degraded = False
    if state.delta < state.cfg.delta_low:
        state.q_plus = None
        state.q_sub_next = None
        state.frame_next = state.frame
        state.delta_next = state.delta
        _record(state)
        return False

    cfg = state.cfg
    if state.step_kind == "stall_duplicate":
        delta_next = state.delta
    elif state.rho is not None and state.rho >= cfg.eta:
        delta_next = min(cfg.gamma1 * state.delta, cfg.delta_upper)
    else:
        delta_next = max(cfg.gamma2 * state.delta, 0.0)

    moved = not np.array_equal(state.x_new, state.x)
    frame_next = derive_next_frame(state.frame, state.x_new) if moved else state.frame

    # Candidates for the refit, in preference order.  Values for the
    # reserve points are pulled from the cache and only evaluated when the
    # chosen subset actually needs them.
    entries: list[tuple[np.ndarray, float | None]] = []
    if state.x_prev is not None:
        entries.append((state.x_prev, state.f_prev))
    entries.append((state.x, state.f_x))
    entries.append((state.x_new, state.f_new))
    entries.extend((s.point, s.fval) for s in state.ypts)
    for which in ("y4", "y5"):
        point, _ = _reserve_point(state, which)
        entries.append((point, state.obj.cached(point)))

    unique: list[tuple[np.ndarray, float | None]] = []
    for point, val in entries:
        if not any(np.array_equal(point, p) for p, _ in unique):
            unique.append((point, val))

    i_new = next(i for i, (p, _) in enumerate(unique) if np.array_equal(p, state.x_new))
    coords = [to_plane(frame_next, p) for p, _ in unique]
    coords[i_new] = PlaneCoords(0.0, 0.0)
    # Distinct points can collide in plane coordinates only through rounding;
    # drop such collisions, always keeping the new-origin entry.
    keep: list[int] = []
    for i, c in enumerate(coords):
        if i != i_new and (c == coords[i_new] or any(c == coords[j] for j in keep)):
            continue
        keep.append(i)
    unique = [unique[i] for i in keep]
    coords = [coords[i] for i in keep]
    i_new = keep.index(i_new)

    try:
        chosen = models.select_poised_subset(coords, protected={i_new})
        pts = []
        for i in chosen:
            point, val = unique[i]
            if val is None:
                val = state.obj(point)
            pts.append(InterpPoint(coords[i], val))
        fit_vals = _fit_values([p.fval for p in pts])
        pts = [InterpPoint(p.coords, v) for p, v in zip(pts, fit_vals)]
        q_plus = models.build_full_2d(pts)
    except models.DegenerateGeometryError:
        # Keep the current model, re-expressed in the new frame.
        shift = to_plane(state.frame, state.x_new)
        rot = np.array([
            [np.dot(state.frame.d1, frame_next.d1), np.dot(state.frame.d1, frame_next.d2)],
            [np.dot(state.frame.d2, frame_next.d1), np.dot(state.frame.d2, frame_next.d2)],
        ])
        q_plus = models.reframe_quad(state.q, shift, rot)
        state.degraded = True

    state.delta_next = delta_next
    state.frame_next = frame_next
    state.q_plus = q_plus
    state.q_sub_next = models.restrict_to_axis(q_plus)
    _record(state)
    return True


def _advance(state: SolverState) -> None:
    state.x_prev, state.f_prev = state.x, state.f_x
    state.x, state.f_x = state.x_new, state.f_new
    state.delta = state.delta_next
    state.d1 = state.frame_next.d1
    state.frame = state.frame_next
    state.q_sub = state.q_sub_next
    state.k += 1
    state.q = None
    state.q_plus = None
    state.ypts = []


def _target_reached(obj: CountingObjective, cfg: SolverConfig) -> bool:
    if cfg.target_facc is None or cfg.f_ref is None or not obj.history:
        return False
    f_init = obj.history[0][1]
    denom = cfg.f_ref - f_init
    if denom == 0.0 or not math.isfinite(denom):
        return False
    return (obj.best_value - f_init) / denom >= cfg.target_facc


def solve(objective, x0, config: SolverConfig | None = None, observer=None) -> SolveResult:
    """Minimize a black-box objective from ``x0``.

    Parameters
    ----------
    objective : callable or CountingObjective
        Maps a 1-D float array to a scalar.  A plain callable is wrapped in
        a :class:`CountingObjective` honoring ``config.max_fevals``; a
        pre-built wrapper keeps its own budget.
    x0 : array_like
        Starting point, length >= 2.
    config : SolverConfig, optional
    observer : callable, optional
        Called as ``observer(phase, state)`` with phases ``"interp_set"``,
        ``"model"``, ``"trial"`` and ``"update"``; intended for tracing and
        invariant checks.

    Returns
    -------
    SolveResult
        Best evaluated point/value, evaluation count, termination reason,
        the per-iteration trace and the best-so-far evaluation history.
    """
    cfg = config if config is not None else SolverConfig()
    cfg.validate()
    if isinstance(objective, CountingObjective):
        obj = objective
    else:
        obj = CountingObjective(objective, max_evals=cfg.max_fevals)

    termination = None
    trace: list[IterationRecord] = []
    try:
        state = initialize(obj, x0, cfg)
        trace = state.trace
        if _target_reached(obj, cfg):
            termination = "target_reached"
        while termination is None:
            build_interp_set(state, state.rng)
            if observer is not None:
                observer("interp_set", state)
            build_model(state)
            if observer is not None:
                observer("model", state)
            trial_step(state)
            if observer is not None:
                observer("trial", state)
            keep_going = update_step(state)
            if observer is not None:
                observer("update", state)
            if not keep_going:
                termination = "radius_below_low"
            elif _target_reached(obj, cfg):
                termination = "target_reached"
            else:
                _advance(state)
    except BudgetExhausted:
        termination = "budget_exhausted"

    return SolveResult(
        best_point=None if obj.best_point is None else np.array(obj.best_point),
        best_value=obj.best_value,
        n_evals=obj.n_evals,
        termination=termination,
        trace=tuple(trace),
        eval_history=tuple(obj.history),
    )
