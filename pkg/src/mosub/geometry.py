"""Affine 2-D frames in R^n and the coordinate maps between R^n and the plane.

Every iteration of the solver works inside an affine plane
``origin + span{d1, d2}`` with orthonormal ``d1, d2``.  This module owns the
frame type, the forward/backward coordinate transformations, the 1-D
projection used during initialization, and the randomized generation of an
orthonormal companion direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Tolerances for frame validity.  Unit norms are checked tighter than
# orthogonality because normalization is a single rounding step while the
# Gram-Schmidt sweep can accumulate a little more error.
_UNIT_TOL = 1e-12
_ORTHO_TOL = 1e-10

# A candidate direction whose residual (after projecting off d1) is shorter
# than this is considered degenerate and is resampled.
_RESIDUAL_MIN = 1e-8
_MAX_RESAMPLES = 100


def as_vector(x) -> np.ndarray:
    """Return ``x`` as a 1-D float64 array of length >= 2 with finite entries."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"expected a 1-D vector of length >= 2, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def _readonly(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float)
    out.flags.writeable = False
    return out


class PlaneCoords(NamedTuple):
    """Coordinates ``(alpha, beta)`` of a point expressed in a frame."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class Frame:
    """Affine plane ``origin + span{d1, d2}`` with orthonormal directions.

    Construction validates unit norms and orthogonality; the arrays are
    copied and frozen so frames can be shared freely.
    """

    origin: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        origin = as_vector(self.origin)
        d1 = as_vector(self.d1)
        d2 = as_vector(self.d2)
        if not (origin.size == d1.size == d2.size):
            raise ValueError("origin, d1 and d2 must have matching dimension")
        if abs(np.linalg.norm(d1) - 1.0) > _UNIT_TOL:
            raise ValueError("d1 is not a unit vector")
        if abs(np.linalg.norm(d2) - 1.0) > _UNIT_TOL:
            raise ValueError("d2 is not a unit vector")
        if abs(float(np.dot(d1, d2))) > _ORTHO_TOL:
            raise ValueError("d1 and d2 are not orthogonal")
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "d1", _readonly(d1))
        object.__setattr__(self, "d2", _readonly(d2))

    @property
    def dim(self) -> int:
        return self.origin.size


def to_plane(frame: Frame, y) -> PlaneCoords:
    """Project ``y`` onto the frame: ``(<y - origin, d1>, <y - origin, d2>)``."""
    y = np.asarray(y, dtype=float)
    if y.shape != frame.origin.shape:
        raise ValueError(f"dimension mismatch: point has shape {y.shape}, frame is {frame.origin.shape}")
    r = y - frame.origin
    return PlaneCoords(float(np.dot(r, frame.d1)), float(np.dot(r, frame.d2)))


def from_plane(frame: Frame, p) -> np.ndarray:
    """Lift plane coordinates back to R^n: ``origin + alpha*d1 + beta*d2``."""
    alpha, beta = p
    return frame.origin + alpha * frame.d1 + beta * frame.d2


def project_1d(origin, d, y) -> float:
    """Signed coordinate of ``y`` along the unit direction ``d`` from ``origin``."""
    origin = np.asarray(origin, dtype=float)
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (origin.shape == d.shape == y.shape):
        raise ValueError("dimension mismatch between origin, direction and point")
    return float(np.dot(y - origin, d))


def offplane_residual(frame: Frame, y) -> float:
    """Norm of the component of ``y - origin`` outside the frame's plane."""
    y = np.asarray(y, dtype=float)
    r = y - frame.origin
    r = r - np.dot(r, frame.d1) * frame.d1 - np.dot(r, frame.d2) * frame.d2
    return float(np.linalg.norm(r))


def orthonormal_complement(d1, rng: np.random.Generator) -> np.ndarray:
    """Draw a unit vector orthogonal to ``d1``.

    A standard-normal sample is projected off ``d1`` and normalized, which
    makes the direction rotation invariant.  Samples nearly parallel to
    ``d1`` are rejected and redrawn; persistent failure signals a broken
    random source and raises.
    """
    d1 = as_vector(d1)
    for _ in range(_MAX_RESAMPLES):
        z = np.asarray(rng.standard_normal(d1.size), dtype=float)
        w = z - np.dot(z, d1) * d1
        norm = np.linalg.norm(w)
        if norm >= _RESIDUAL_MIN:
            return w / norm
    raise RuntimeError("could not generate a direction orthogonal to d1 "
                       f"after {_MAX_RESAMPLES} samples")


def derive_next_frame(frame: Frame, x_next) -> Frame:
    """Re-anchor ``frame`` at ``x_next`` with d1 along the step just taken.

    ``x_next`` must lie in the frame's plane and differ from its origin.
    The new d2 spans the same plane: it is the old d2 with its component
    along the new d1 removed (falling back to the old d1 as seed when the
    step is parallel to d2).
    """
    x_next = as_vector(x_next)
    step = x_next - frame.origin
    step_norm = float(np.linalg.norm(step))
    if step_norm == 0.0:
        raise ValueError("x_next equals the frame origin (zero step)")
    residual = offplane_residual(frame, x_next)
    if residual > _RESIDUAL_MIN * (1.0 + float(np.linalg.norm(x_next))):
        raise ValueError(f"x_next is off the frame's plane (residual {residual:.3e})")

    d1_new = step / step_norm
    seed = frame.d2 - np.dot(frame.d2, d1_new) * d1_new
    if np.linalg.norm(seed) < _RESIDUAL_MIN:
        seed = frame.d1 - np.dot(frame.d1, d1_new) * d1_new
    d2_new = seed / np.linalg.norm(seed)
    # Second orthogonalization pass: a nearly parallel seed amplifies the
    # first pass's rounding well past the frame tolerance.
    d2_new = d2_new - np.dot(d2_new, d1_new) * d1_new
    d2_new = d2_new / np.linalg.norm(d2_new)
    return Frame(x_next, d1_new, d2_new)
