"""Canonical JSON output shared by the service and the CLI.

Floats are rendered with 17 significant digits (which round-trips every
double exactly), keys keep insertion order, and exact rationals are
rendered as "num/den" strings, so a given report always serializes to the
same bytes.  Reports carry a UTC timestamp field unless ci mode is on.
"""

import json
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np


def fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(float(x), ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON text for dicts/lists/scalars/Fractions."""
    return "".join(_emit(obj))


def _emit(obj):
    if obj is None:
        yield "null"
    elif obj is True:
        yield "true"
    elif obj is False:
        yield "false"
    elif isinstance(obj, Fraction):
        yield json.dumps(f"{obj.numerator}/{obj.denominator}")
    elif isinstance(obj, str):
        yield json.dumps(obj)
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, (float, np.floating)):
        yield fmt_float(float(obj))
    elif isinstance(obj, dict):
        yield "{"
        for i, (k, v) in enumerate(obj.items()):
            if i:
                yield ","
            yield json.dumps(str(k))
            yield ":"
            yield from _emit(v)
        yield "}"
    elif isinstance(obj, (list, tuple)):
        yield "["
        for i, v in enumerate(obj):
            if i:
                yield ","
            yield from _emit(v)
        yield "]"
    elif isinstance(obj, np.ndarray):
        yield from _emit(obj.tolist())
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def with_envelope(payload: dict, ci: bool) -> dict:
    """Prepend the timestamp field unless ci mode suppresses it."""
    if ci:
        return payload
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {"timestamp": stamp, **payload}


def ssa_report_dict(report, function_label: str, params: dict, dim: int,
                    partition, diagnostics=None, decomposable=None) -> dict:
    """The fixed check-report schema."""
    diag = None
    if diagnostics is not None:
        diag = {
            "log_residual": diagnostics.log_residual,
            "a13_norm": diagnostics.a13_norm,
            "a12a23_norm": diagnostics.a12a23_norm,
            "decomposable": decomposable,
        }
    return {
        "function": function_label,
        "params": dict(params),
        "dim": int(dim),
        "partition": [int(v) for v in partition],
        "form": report.form,
        "gap": report.gap,
        "traces": {
            "A": report.tr_a,
            "A22": report.tr_a22,
            "B": report.tr_b,
            "C": report.tr_c,
        },
        "holds": report.holds,
        "equality": report.equality,
        "tol": report.tol_used,
        "diagnostics": diag,
    }


def scan_summary_dict(summary, function_label: str, params: dict) -> dict:
    return {
        "function": function_label,
        "params": dict(params),
        "kind": summary.kind,
        "dims": list(summary.dims),
        "trials": summary.trials,
        "seed": summary.seed,
        "eps": summary.eps,
        "form": summary.form,
        "min_gap": summary.min_gap,
        "argmin_seed": summary.argmin_seed,
        "skipped": summary.skipped,
        "violated": summary.violated,
        "histogram": {
            "edges": list(summary.histogram_edges),
            "counts": list(summary.histogram_counts),
        },
    }


def search_result_dict(result, function_label: str, params: dict, dims,
                       iters: int, seed: int, step0: float, kind: str,
                       eps: float, include_matrix: bool = True) -> dict:
    out = {
        "function": function_label,
        "params": dict(params),
        "kind": kind,
        "dims": [int(v) for v in dims],
        "iters": int(iters),
        "seed": int(seed),
        "step0": step0,
        "eps": eps,
        "best_gap": result.best_gap,
        "violated": result.violated,
        "tol": result.best_report.tol_used,
        "trace": [[int(i), g] for i, g in result.trace],
    }
    if include_matrix:
        out["best_matrix"] = {
            "dim": result.best_matrix.dim,
            "entries": result.best_matrix.entries.tolist(),
        }
    return out


def monotone_verdict_dict(verdict, function_label: str, params: dict,
                          neg_derivative: bool, interval, seed: int,
                          message: str) -> dict:
    worst = verdict.worst
    return {
        "function": function_label,
        "params": dict(params),
        "neg_derivative": bool(neg_derivative),
        "interval": [float(interval[0]), float(interval[1])],
        "order": verdict.order,
        "trials": verdict.trials,
        "seed": int(seed),
        "verdict": verdict.verdict.value,
        "min_eig": None if worst is None else worst.min_eig,
        "psd_tol": None if worst is None else worst.tol,
        "worst_points": None if worst is None else [float(x) for x in worst.points],
        "clamped_trials": verdict.clamped_trials,
        "message": message,
    }


def equality_dict(diag, krylov, dim: int, partition, tol: float) -> dict:
    return {
        "dim": int(dim),
        "partition": [int(v) for v in partition],
        "tol": tol,
        "log_residual": diag.log_residual,
        "a13_norm": diag.a13_norm,
        "a12a23_norm": diag.a12a23_norm,
        "krylov_rank": int(krylov.basis.shape[1]),
        "invariance_residual": krylov.invariance_residual,
        "range_residual": krylov.range_residual,
        "kernel_residual": krylov.kernel_residual,
        "decomposable": krylov.decomposable,
    }


def ando_dict(report) -> dict:
    return {
        "tr_A_inv": report.tr_a_inv,
        "tr_B_inv": report.tr_b_inv,
        "tr_C_inv": report.tr_c_inv,
        "tr_A22_inv": report.tr_a22_inv,
        "gap": report.gap,
        "float_gap": report.float_gap,
        "float_abs_diff": report.float_abs_diff,
    }


def represent_dict(check: str, x: float, t, variant, value: float,
                   reference: float) -> dict:
    return {
        "check": check,
        "x": x,
        "t": t,
        "variant": variant,
        "value": value,
        "reference": reference,
        "abs_err": abs(value - reference),
    }
