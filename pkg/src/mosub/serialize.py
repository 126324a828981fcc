"""JSON writers for solver traces and benchmark records.

All reals are emitted with 17 significant digits so that a written file
reloads to bit-identical floats.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj: Any, indent: int | None = None) -> str:
    """Serialize to JSON with 17-significant-digit floats."""
    pieces: list[str] = []
    _write(obj, pieces, indent, 0)
    return "".join(pieces)


def _write(obj: Any, out: list[str], indent: int | None, level: int) -> None:
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, (str, bool, int)) and not isinstance(obj, float):
        out.append(json.dumps(obj))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, (np.integer,)):
        out.append(str(int(obj)))
    elif isinstance(obj, np.ndarray):
        _write(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                out.append("," if indent is None else ",")
            out.append(pad)
            out.append(json.dumps(str(key)) + (": " if indent is None else ": "))
            _write(val, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
                if indent is None:
                    out.append(" ")
            out.append(pad)
            _write(val, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dump(obj: Any, path, indent: int | None = None) -> None:
    with open(path, "w") as fp:
        fp.write(dumps(obj, indent=indent))
        fp.write("\n")


def load(path) -> Any:
    with open(path) as fp:
        return json.load(fp)


def trace_document(result, problem: str, n: int, cfg) -> dict:
    """Schema of one solver run: config, termination, trace and history."""
    return {
        "problem": problem,
        "n": n,
        "seed": cfg.seed,
        "config": {
            "delta1": cfg.delta1,
            "delta_low": cfg.delta_low,
            "delta_upper": cfg.delta_upper,
            "gamma1": cfg.gamma1,
            "gamma2": cfg.gamma2,
            "eta": cfg.eta,
            "eta0": cfg.eta0,
            "d_init": None if cfg.d_init is None else np.asarray(cfg.d_init, dtype=float),
            "max_fevals": cfg.max_fevals,
            "seed": cfg.seed,
            "target_facc": cfg.target_facc,
            "f_ref": cfg.f_ref,
        },
        "termination": result.termination,
        "n_evals": result.n_evals,
        "best_value": result.best_value,
        "iterations": [
            {
                "k": rec.k,
                "f": rec.f,
                "delta": rec.delta,
                "rho": rec.rho,
                "step_kind": rec.step_kind,
                "n_evals_after": rec.n_evals_after,
            }
            for rec in result.trace
        ],
        "eval_history": [[idx, val] for idx, val in result.eval_history],
    }
