"""Quadratic interpolation models on the line and on the plane.

The solver carries two model shapes: a 1-D quadratic along the current
descent axis and a 2-D quadratic on the active plane whose axis restriction
is inherited from the 1-D model.  This module fits both shapes from
interpolation data, selects poised 6-point subsets for the full refit, and
computes the Lagrange-style basis functions and the poisedness constant of
the partially determined 3-point fit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .geometry import PlaneCoords

# A linear system is accepted when its condition estimate is below this;
# larger values are treated as a degenerate interpolation geometry.
COND_LIMIT = 1e12


class DegenerateGeometryError(RuntimeError):
    """Interpolation points do not determine a model (singular system)."""


class Quad1D(NamedTuple):
    """``Q(t) = q0 + a*t + b*t**2``."""

    q0: float
    a: float
    b: float


class Quad2D(NamedTuple):
    """``Q(alpha, beta) = q0 + a*alpha + b*alpha**2 + c*beta + d*beta**2 + e*alpha*beta``.

    The gradient at the origin is ``(a, c)`` and the Hessian is
    ``[[2b, e], [e, 2d]]``.
    """

    q0: float
    a: float
    b: float
    c: float
    d: float
    e: float


class InterpPoint(NamedTuple):
    """A plane point together with its objective value."""

    coords: PlaneCoords
    fval: float


@dataclass(frozen=True)
class LagrangeBasis:
    """The three basis functions of the partially determined 3-point fit.

    Each ``ell[i]`` has the shape ``c0 + c*beta + d*beta**2 + e*alpha*beta``
    (zero free part along alpha); the fixed constants are kept in ``c0`` as
    well for direct access.  ``delta`` records the layout scale the basis
    was built for and is the default region radius for :func:`poisedness_lambda`.
    """

    ell: tuple[Quad2D, Quad2D, Quad2D]
    c0: tuple[float, float, float]
    delta: float


def eval1d(q: Quad1D, t):
    return q.q0 + q.a * t + q.b * t * t


def eval2d(q: Quad2D, p):
    """Evaluate a 2-D quadratic at ``p = (alpha, beta)`` (arrays broadcast)."""
    alpha, beta = p
    return (q.q0 + q.a * alpha + q.b * alpha * alpha
            + q.c * beta + q.d * beta * beta + q.e * alpha * beta)


def min1d_on_interval(q: Quad1D, lo: float, hi: float) -> float:
    """Exact minimum of a 1-D quadratic over ``[lo, hi]``."""
    best = min(eval1d(q, lo), eval1d(q, hi))
    if q.b > 0.0:
        t = -q.a / (2.0 * q.b)
        if lo < t < hi:
            best = min(best, eval1d(q, t))
    return float(best)


def _coords_of(p) -> PlaneCoords:
    if isinstance(p, InterpPoint):
        return p.coords
    alpha, beta = p
    return PlaneCoords(float(alpha), float(beta))


def _cond(matrix: np.ndarray) -> float:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def _solve_refined(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # One step of iterative refinement keeps interpolation residuals near
    # machine level even when the system is poorly scaled (extreme radii).
    x = np.linalg.solve(matrix, rhs)
    x = x + np.linalg.solve(matrix, rhs - matrix @ x)
    return x


def fit_initial_1d(t: Sequence[float], f: Sequence[float]) -> Quad1D:
    """Unique quadratic through three ``(t, f)`` pairs, one of them at t = 0.

    The value at t = 0 becomes ``q0`` exactly; the remaining two points
    determine the linear and quadratic coefficients.
    """
    t = [float(v) for v in t]
    f = [float(v) for v in f]
    if len(t) != 3 or len(f) != 3:
        raise ValueError("exactly three interpolation pairs are required")
    if len(set(t)) != 3:
        raise DegenerateGeometryError(f"duplicate abscissae in {t}")
    try:
        i0 = t.index(0.0)
    except ValueError:
        raise ValueError("one abscissa must be 0 (the current iterate)") from None
    q0 = f[i0]
    (t1, g1), (t2, g2) = [(t[i], f[i] - q0) for i in range(3) if i != i0]
    matrix = np.array([[t1, t1 * t1], [t2, t2 * t2]])
    a, b = _solve_refined(matrix, np.array([g1, g2]))
    return Quad1D(q0, float(a), float(b))


def build_qk(q_sub: Quad1D, pts: Sequence[InterpPoint]) -> Quad2D:
    """Extend a 1-D model to the plane through three interpolation points.

    ``(q0, a, b)`` are copied from ``q_sub`` unchanged; ``(c, d, e)`` solve
    the 3x3 system with rows ``(beta, beta**2, alpha*beta)`` against the
    residuals of the inherited part.
    """
    if len(pts) != 3:
        raise ValueError("exactly three interpolation points are required")
    alphas = np.array([p.coords.alpha for p in pts])
    betas = np.array([p.coords.beta for p in pts])
    fvals = np.array([p.fval for p in pts])
    w = np.column_stack([betas, betas**2, alphas * betas])
    if _cond(w) >= COND_LIMIT:
        raise DegenerateGeometryError("singular 3-point layout for the plane extension")
    rhs = fvals - (q_sub.q0 + q_sub.a * alphas + q_sub.b * alphas**2)
    c, d, e = _solve_refined(w, rhs)
    return Quad2D(q_sub.q0, q_sub.a, q_sub.b, float(c), float(d), float(e))


def _full_basis_matrix(alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    return np.column_stack([
        np.ones_like(alphas), alphas, alphas**2, betas, betas**2, alphas * betas,
    ])


def build_full_2d(pts: Sequence[InterpPoint]) -> Quad2D:
    """Fully determined quadratic through six plane points.

    When one of the points sits exactly at the origin its value is pinned
    as the constant coefficient and only the remaining five coefficients
    are solved for; this keeps the model value at the origin bit-exact.
    """
    if len(pts) != 6:
        raise ValueError("exactly six interpolation points are required")
    coords = [p.coords for p in pts]
    if len(set(coords)) != 6:
        raise DegenerateGeometryError("interpolation points are not distinct")
    alphas = np.array([c.alpha for c in coords])
    betas = np.array([c.beta for c in coords])
    fvals = np.array([p.fval for p in pts])
    matrix = _full_basis_matrix(alphas, betas)
    if _cond(matrix) >= COND_LIMIT:
        raise DegenerateGeometryError("interpolation set is not poised (6x6 system)")

    origin = [i for i, c in enumerate(coords) if c.alpha == 0.0 and c.beta == 0.0]
    if origin:
        i0 = origin[0]
        q0 = fvals[i0]
        keep = [i for i in range(6) if i != i0]
        # All non-constant basis functions vanish at the origin, so the
        # reduced system is just the other five rows minus the constant.
        sub = matrix[keep][:, 1:]
        coeffs = _solve_refined(sub, fvals[keep] - q0)
        return Quad2D(float(q0), *(float(v) for v in coeffs))
    coeffs = _solve_refined(matrix, fvals)
    return Quad2D(*(float(v) for v in coeffs))


def restrict_to_axis(q: Quad2D) -> Quad1D:
    """The model along the alpha axis: ``Q(alpha, 0)``."""
    return Quad1D(q.q0, q.a, q.b)


def select_poised_subset(coords: Sequence[PlaneCoords],
                         protected: Iterable[int] = ()) -> tuple[int, ...]:
    """Pick six point indices whose 6x6 interpolation system is well posed.

    ``coords`` must already be deduplicated and is given in preference
    order; the first six form the preferred subset.  Fallbacks swap each
    later candidate in for the earliest removable preferred point (then
    pairs of later candidates), keeping ``protected`` indices untouched.
    Raises :class:`DegenerateGeometryError` when no subset passes the
    condition test.
    """
    coords = [_coords_of(c) for c in coords]
    if len(set(coords)) != len(coords):
        raise ValueError("candidate coordinates must be deduplicated")
    n = len(coords)
    if n < 6:
        raise DegenerateGeometryError(f"only {n} distinct candidates, need 6")
    protected = frozenset(protected)
    base = list(range(6))
    removable = [i for i in base if i not in protected]
    extras = list(range(6, n))

    def subsets():
        yield tuple(base)
        for e in extras:
            for r in removable:
                yield tuple(i for i in base if i != r) + (e,)
        for e_pair in combinations(extras, 2):
            for r_pair in combinations(removable, 2):
                yield tuple(i for i in base if i not in r_pair) + e_pair

    alphas = np.array([c.alpha for c in coords])
    betas = np.array([c.beta for c in coords])
    for idx in subsets():
        sel = list(idx)
        if _cond(_full_basis_matrix(alphas[sel], betas[sel])) < COND_LIMIT:
            return tuple(sorted(idx))
    raise DegenerateGeometryError("no poised 6-point subset among the candidates")


def lagrange_basis(q_sub: Quad1D, pts, delta: float) -> LagrangeBasis:
    """Basis functions of the 3-point plane extension at the given layout.

    Accepts interpolation points or bare plane coordinates (the values do
    not influence the basis).  Basis function i is
    ``c0_i + c*beta + d*beta**2 + e*alpha*beta`` with
    ``c0_i = q0 + a*alpha_i + b*alpha_i**2`` and ``(c, d, e)`` solving the
    3x3 system against the i-th unit vector minus the constants.
    """
    coords = [_coords_of(p) for p in pts]
    if len(coords) != 3:
        raise ValueError("exactly three layout points are required")
    alphas = np.array([c.alpha for c in coords])
    betas = np.array([c.beta for c in coords])
    w = np.column_stack([betas, betas**2, alphas * betas])
    if _cond(w) >= COND_LIMIT:
        raise DegenerateGeometryError("singular layout for the basis functions")
    c0 = q_sub.q0 + q_sub.a * alphas + q_sub.b * alphas**2
    ell = []
    for i in range(3):
        rhs = -c0[i] * np.ones(3)
        rhs[i] += 1.0
        c, d, e = _solve_refined(w, rhs)
        ell.append(Quad2D(float(c0[i]), 0.0, 0.0, float(c), float(d), float(e)))
    return LagrangeBasis(tuple(ell), tuple(float(v) for v in c0), float(delta))


def _max_abs_on_box(ell: Quad2D, delta: float) -> float:
    # For fixed beta the function is affine in alpha, so the maximum of the
    # absolute value over the box sits at alpha = +-delta; each alpha slice
    # is a 1-D quadratic in beta (endpoints plus interior vertex).
    best = 0.0
    for alpha in (-delta, delta):
        const = ell.q0
        lin = ell.c + ell.e * alpha
        quad = ell.d
        values = [const + lin * b + quad * b * b for b in (-delta, delta)]
        if quad != 0.0:
            vertex = -lin / (2.0 * quad)
            if -delta < vertex < delta:
                values.append(const + lin * vertex + quad * vertex * vertex)
        best = max(best, max(abs(v) for v in values))
    return best


def poisedness_lambda(basis: LagrangeBasis, delta: float | None = None) -> float:
    """Exact maximum of ``|ell_i|`` over the inf-norm ball of radius delta."""
    if delta is None:
        delta = basis.delta
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return max(_max_abs_on_box(ell, delta) for ell in basis.ell)


def layout_case(case: int, delta: float) -> tuple[PlaneCoords, PlaneCoords, PlaneCoords]:
    """Canonical 3-point layouts of the plane extension.

    Case 1 places the second point opposite the first across the axis
    (``beta = -delta``); case 2 stacks it beyond (``beta = 2*delta``).  In
    both the third point sits at ``(delta, delta)``.
    """
    if case == 1:
        return (PlaneCoords(0.0, delta), PlaneCoords(0.0, -delta), PlaneCoords(delta, delta))
    if case == 2:
        return (PlaneCoords(0.0, delta), PlaneCoords(0.0, 2.0 * delta), PlaneCoords(delta, delta))
    raise ValueError("case must be 1 or 2")


def reframe_quad(q: Quad2D, shift: PlaneCoords, rot: np.ndarray) -> Quad2D:
    """Express ``q`` in a new chart: ``q'(p) = q(shift + rot @ p)``.

    ``rot`` is the 2x2 matrix whose columns are the new directions written
    in the old frame's coordinates.
    """
    g = np.array([q.a, q.c])
    h = np.array([[q.b, 0.5 * q.e], [0.5 * q.e, q.d]])
    s = np.array([shift.alpha, shift.beta])
    q0 = q.q0 + float(g @ s + s @ h @ s)
    g_new = rot.T @ (g + 2.0 * h @ s)
    h_new = rot.T @ h @ rot
    return Quad2D(q0, float(g_new[0]), float(h_new[0, 0]),
                  float(g_new[1]), float(h_new[1, 1]),
                  float(h_new[0, 1] + h_new[1, 0]))
