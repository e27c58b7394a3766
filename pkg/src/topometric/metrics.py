"""Windowed drift metrics: translation [%] and rotation [deg/m] vs length.

For every window length L and every start pose, the window closes at the
first pose whose cumulative ground-truth arc length reaches the start's
distance plus L. The estimate's and the truth's relative displacements over
the window (each expressed in its own start-pose frame) are compared, as are
the relative heading changes; errors are normalized by L and averaged over
all start poses, then over window lengths.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .odometry import Trajectory

DEFAULT_SUB_LENGTHS = (10.0, 25.0, 50.0, 100.0, 150.0, 200.0)

_DEG = 180.0 / math.pi


@dataclass(frozen=True)
class ErrorReport:
    avg_translation_pct: float
    avg_rotation_deg_per_m: float
    per_length: tuple[tuple[float, float, float], ...]
    endpoint_error: float


def evaluate(
    estimate: Trajectory,
    truth: Trajectory,
    sub_lengths: Sequence[float] = DEFAULT_SUB_LENGTHS,
) -> ErrorReport:
    """Windowed relative errors of ``estimate`` against ``truth``.

    Both trajectories must share their timesteps. Sub-lengths longer than
    the ground-truth path are skipped with a warning; at least one must fit.
    """
    if estimate.timesteps != truth.timesteps:
        raise ValueError("estimate and truth must have identical timesteps")
    for length in sub_lengths:
        if length <= 0:
            raise ValueError(f"sub-lengths must be positive, got {length}")

    est_xy = estimate.xy()
    tru_xy = truth.xy()
    est_th = estimate.headings()
    tru_th = truth.headings()
    seg = np.hypot(*np.diff(tru_xy, axis=0).T)
    cumdist = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(cumdist[-1])

    per_length = []
    for length in sub_lengths:
        if length > total:
            warnings.warn(
                f"sub-length {length} m exceeds path length {total:.3f} m; skipped",
                stacklevel=2,
            )
            continue
        ends = np.searchsorted(cumdist, cumdist + length, side="left")
        starts = np.nonzero(ends < len(cumdist))[0]
        ends = ends[starts]
        t_err = _window_displacement(est_xy, est_th, starts, ends) - _window_displacement(
            tru_xy, tru_th, starts, ends
        )
        trans_pct = float(np.mean(np.hypot(t_err[:, 0], t_err[:, 1]))) / length * 100.0
        d_est = est_th[ends] - est_th[starts]
        d_tru = tru_th[ends] - tru_th[starts]
        gap = np.abs(np.arctan2(np.sin(d_est - d_tru), np.cos(d_est - d_tru)))
        rot_deg_per_m = float(np.mean(gap)) / length * _DEG
        per_length.append((float(length), trans_pct, rot_deg_per_m))

    if not per_length:
        raise ValueError(f"no sub-length fits the {total:.3f} m path")
    avg_t = float(np.mean([row[1] for row in per_length]))
    avg_r = float(np.mean([row[2] for row in per_length]))
    endpoint = float(np.hypot(*(est_xy[-1] - tru_xy[-1])))
    return ErrorReport(avg_t, avg_r, tuple(per_length), endpoint)


def _window_displacement(
    xy: np.ndarray, th: np.ndarray, starts: np.ndarray, ends: np.ndarray
) -> np.ndarray:
    # Window displacement expressed in the start pose's frame, (W, 2).
    delta = xy[ends] - xy[starts]
    c = np.cos(th[starts])
    s = np.sin(th[starts])
    return np.column_stack([c * delta[:, 0] + s * delta[:, 1], -s * delta[:, 0] + c * delta[:, 1]])


def report_to_csv(report: ErrorReport) -> str:
    """Per-length rows plus an ``avg`` summary row."""
    lines = ["sub_length,trans_pct,rot_deg_per_m"]
    for length, trans, rot in report.per_length:
        lines.append(f"{length!r},{trans!r},{rot!r}")
    lines.append(f"avg,{report.avg_translation_pct!r},{report.avg_rotation_deg_per_m!r}")
    return "\n".join(lines) + "\n"


def report_to_json(report: ErrorReport) -> str:
    payload = {
        "avg_translation_pct": report.avg_translation_pct,
        "avg_rotation_deg_per_m": report.avg_rotation_deg_per_m,
        "endpoint_error_m": report.endpoint_error,
        "per_length": [
            {"sub_length": length, "trans_pct": trans, "rot_deg_per_m": rot}
            for length, trans, rot in report.per_length
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(report: ErrorReport, csv_path: str | Path, json_path: str | Path) -> None:
    Path(csv_path).write_text(report_to_csv(report))
    Path(json_path).write_text(report_to_json(report))
