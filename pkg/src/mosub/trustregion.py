"""Exact solution of the 2-D trust-region subproblem.

Minimizes a quadratic over the disk ``alpha**2 + beta**2 <= delta**2``.
Because the problem is two dimensional the eigendecomposition is closed
form and the secular equation can be driven to full precision cheaply, so
the solver returns the true global minimizer (including the hard case).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .geometry import PlaneCoords
from .models import Quad2D, eval2d

# Gradient components along a minimal eigendirection below this (relative)
# threshold are treated as zero when detecting the hard case.
_HARD_TOL = 1e-13


@dataclass(frozen=True)
class TRSResult:
    """Global minimizer of a quadratic over a disk.

    ``lagrange_multiplier`` is the boundary multiplier (0 for interior
    solutions); ``hard_case`` flags solutions assembled from an eigenvector
    step because the gradient has no component along the minimal curvature
    direction.
    """

    point: PlaneCoords
    value: float
    lagrange_multiplier: float
    on_boundary: bool
    hard_case: bool


def _eig2(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric 2x2.

    Deterministic orientation: each eigenvector has a nonnegative first
    component (nonnegative second when the first vanishes).
    """
    mean = 0.5 * (h[0, 0] + h[1, 1])
    diff = 0.5 * (h[0, 0] - h[1, 1])
    rad = math.hypot(diff, h[0, 1])
    lam = np.array([mean - rad, mean + rad])
    if rad == 0.0:
        vecs = np.eye(2)
    else:
        # Pick the better conditioned of the two analytic eigenvector forms.
        cand_a = np.array([h[0, 1], lam[0] - h[0, 0]])
        cand_b = np.array([lam[0] - h[1, 1], h[0, 1]])
        v = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
        v = v / np.linalg.norm(v)
        if v[0] < 0.0 or (v[0] == 0.0 and v[1] < 0.0):
            v = -v
        w = np.array([-v[1], v[0]])
        if w[0] < 0.0 or (w[0] == 0.0 and w[1] < 0.0):
            w = -w
        vecs = np.column_stack([v, w])
    return lam, vecs


def _norm_p(lam: np.ndarray, g_eig: np.ndarray, shift: float) -> float:
    """``||(H + shift*I)^-1 g||`` in the eigenbasis; +inf past a pole."""
    total = 0.0
    for lam_i, g_i in zip(lam, g_eig):
        if g_i == 0.0:
            continue
        denom = lam_i + shift
        if denom <= 0.0:
            return math.inf
        total += (g_i / denom) ** 2
    return math.sqrt(total)


def solve_trs(q: Quad2D, delta: float) -> TRSResult:
    """Global minimizer of ``q`` over the disk of radius ``delta``.

    Interior Newton point when the Hessian is positive definite and the
    step fits; otherwise the boundary multiplier solves the secular
    equation ``||(H + lam*I)^-1 g|| = delta`` by bracketed root finding,
    with the hard case assembled from the minimal eigendirection.
    """
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    if not all(math.isfinite(v) for v in q):
        raise ValueError("model coefficients must be finite")

    g = np.array([q.a, q.c])
    h = np.array([[2.0 * q.b, q.e], [q.e, 2.0 * q.d]])
    lam, vecs = _eig2(h)
    g_eig = vecs.T @ g

    def finish(p_eig: np.ndarray, multiplier: float, boundary: bool, hard: bool) -> TRSResult:
        p = vecs @ p_eig
        point = PlaneCoords(float(p[0]), float(p[1]))
        return TRSResult(point, float(eval2d(q, point)), multiplier, boundary, hard)

    # Interior candidate: needs positive semidefinite curvature and a
    # consistent Newton system (zero gradient along any null direction).
    if lam[0] > 0.0 or (lam[0] == 0.0 and abs(g_eig[0]) <= _HARD_TOL * max(1.0, np.linalg.norm(g))):
        p_eig = np.array([-g_i / lam_i if lam_i > 0.0 else 0.0
                          for lam_i, g_i in zip(lam, g_eig)])
        norm = np.linalg.norm(p_eig)
        if norm <= delta:
            return finish(p_eig, 0.0, bool(norm >= delta), False)

    lam_lo = max(0.0, -lam[0])

    if lam[0] < 0.0:
        # Hard case: no gradient component along the minimal eigenspace and
        # the limiting step at lam = -lam_min still fits inside the disk.
        min_space = np.abs(lam - lam[0]) <= _HARD_TOL * max(1.0, abs(lam[0]))
        g_min = np.linalg.norm(g_eig[min_space])
        if g_min <= _HARD_TOL * max(1.0, np.linalg.norm(g)):
            p_hat = np.array([
                0.0 if min_space[i] else -g_eig[i] / (lam[i] + lam_lo)
                for i in range(2)
            ])
            p_hat_norm = np.linalg.norm(p_hat)
            if p_hat_norm <= delta:
                tau = math.sqrt(max(delta * delta - p_hat_norm * p_hat_norm, 0.0))
                p_eig = p_hat.copy()
                p_eig[int(np.argmax(min_space))] += tau
                return finish(p_eig, lam_lo, True, True)

    # Regular boundary solution via the secular equation.
    def phi(shift: float) -> float:
        return _norm_p(lam, g_eig, shift) - delta

    hi = lam_lo + float(np.linalg.norm(g_eig)) / delta + 1.0
    lo = lam_lo
    if not math.isfinite(phi(lo)) or phi(lo) <= 0.0:
        # Move just inside the domain until phi is finite; if the sign is
        # already negative there the root is at lam_lo itself.
        step = max(lam_lo, 1.0) * 1e-16
        while not math.isfinite(phi(lo + step)):
            step *= 4.0
        lo = lam_lo + step
    if phi(lo) <= 0.0:
        lam_star = lo
    else:
        lam_star = brentq(phi, lo, hi, rtol=1e-12, maxiter=200)
    p_eig = np.array([
        -g_i / (lam_i + lam_star) if (lam_i + lam_star) != 0.0 else 0.0
        for lam_i, g_i in zip(lam, g_eig)
    ])
    return finish(p_eig, float(lam_star), True, False)
