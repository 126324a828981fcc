"""Classic unconstrained test objectives, dimension parameterized.

Formulations follow the standard CUTE/CUTEst definitions of these names
(see the SIF collection and the usual DFO benchmarking sets), with the
conventional starting points.  Objectives are pure functions of a 1-D
float array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Problem:
    """A named objective with its start point and reference optimum.

    ``f_ref`` is the analytic minimum value when known and ``None`` for
    problems whose optimum is only known as best-found.
    """

    name: str
    dim: int
    objective: Callable[[np.ndarray], float]
    x_start: np.ndarray
    f_ref: float | None


def _sphere(x: np.ndarray) -> float:
    return float(np.dot(x, x))


def _chrosen(x: np.ndarray) -> float:
    # Chained Rosenbrock: sum 4*(x_i^2 - x_{i+1})^2 + (x_i - 1)^2.
    head, tail = x[:-1], x[1:]
    return float(np.sum(4.0 * (head**2 - tail) ** 2 + (head - 1.0) ** 2))


def _srosenbr(x: np.ndarray) -> float:
    # Extended Rosenbrock in independent pairs (SROSENBR).
    odd, even = x[0::2], x[1::2]
    return float(np.sum(100.0 * (even - odd**2) ** 2 + (odd - 1.0) ** 2))


def _arwhead(x: np.ndarray) -> float:
    head = x[:-1]
    return float(np.sum((head**2 + x[-1] ** 2) ** 2 - 4.0 * head + 3.0))


def _woods(x: np.ndarray) -> float:
    x1, x2, x3, x4 = x[0::4], x[1::4], x[2::4], x[3::4]
    return float(np.sum(
        100.0 * (x2 - x1**2) ** 2 + (1.0 - x1) ** 2
        + 90.0 * (x4 - x3**2) ** 2 + (1.0 - x3) ** 2
        + 10.0 * (x2 + x4 - 2.0) ** 2 + 0.1 * (x2 - x4) ** 2
    ))


def _dqrtic(x: np.ndarray) -> float:
    i = np.arange(1, x.size + 1, dtype=float)
    return float(np.sum((x - i) ** 4))


def _power(x: np.ndarray) -> float:
    # Oren's power function: (sum i*x_i^2)^2.
    i = np.arange(1, x.size + 1, dtype=float)
    return float(np.sum(i * x**2) ** 2)


def _bdqrtic(x: np.ndarray) -> float:
    n = x.size
    head = x[: n - 4]
    quad = (head**2 + 2.0 * x[1: n - 3] ** 2 + 3.0 * x[2: n - 2] ** 2
            + 4.0 * x[3: n - 1] ** 2 + 5.0 * x[-1] ** 2)
    return float(np.sum((3.0 - 4.0 * head) ** 2 + quad**2))


def _start_srosenbr(n: int) -> np.ndarray:
    x = np.empty(n)
    x[0::2] = -1.2
    x[1::2] = 1.0
    return x


def _start_woods(n: int) -> np.ndarray:
    x = np.empty(n)
    x[0::2] = -3.0
    x[1::2] = -1.0
    return x


# name -> (objective, start builder, f_ref, dimension rule, rule description)
_REGISTRY: dict[str, tuple] = {
    "sphere": (_sphere, lambda n: np.ones(n), 0.0, lambda n: n >= 2, "n >= 2"),
    "chrosen": (_chrosen, lambda n: -np.ones(n), 0.0, lambda n: n >= 2, "n >= 2"),
    "srosenbr": (_srosenbr, _start_srosenbr, 0.0, lambda n: n >= 2 and n % 2 == 0,
                 "even n >= 2"),
    "arwhead": (_arwhead, lambda n: np.ones(n), 0.0, lambda n: n >= 2, "n >= 2"),
    "woods": (_woods, _start_woods, 0.0, lambda n: n >= 4 and n % 4 == 0,
              "n divisible by 4"),
    "dqrtic": (_dqrtic, lambda n: 2.0 * np.ones(n), 0.0, lambda n: n >= 2, "n >= 2"),
    "power": (_power, lambda n: np.ones(n), 0.0, lambda n: n >= 2, "n >= 2"),
    "bdqrtic": (_bdqrtic, lambda n: np.ones(n), None, lambda n: n >= 5, "n >= 5"),
}


def registry() -> list[tuple[str, str]]:
    """Problem names with their dimension rules, in a fixed order."""
    return [(name, entry[4]) for name, entry in _REGISTRY.items()]


def make_problem(name: str, n: int) -> Problem:
    """Instantiate a registered problem at dimension ``n``.

    Raises for unknown names and for dimensions violating the problem's
    rule (use :func:`nearest_valid_dim` to snap a requested dimension).
    """
    try:
        objective, start, f_ref, valid, rule = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {sorted(_REGISTRY)}") from None
    if not valid(n):
        raise ValueError(f"problem {name!r} requires {rule}, got n={n}")
    x_start = np.asarray(start(n), dtype=float)
    x_start.flags.writeable = False
    return Problem(name, n, objective, x_start, f_ref)


def nearest_valid_dim(name: str, n: int) -> int:
    """Largest valid dimension <= n (or the smallest valid one overall)."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown problem {name!r}")
    valid = _REGISTRY[name][3]
    for m in range(n, 1, -1):
        if valid(m):
            return m
    m = n
    while not valid(m):
        m += 1
    return m
