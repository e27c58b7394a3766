"""Dead reckoning: fold relative motions into a metric trajectory.

A trajectory is an ordered list of (timestep, pose) pairs with strictly
increasing timesteps starting at 0. Drift correction rewrites poses, so the
trajectory stores poses directly; the motions between them are always
recoverable through ``relative_between``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import Pose2, RelativeMotion, compose


@dataclass(frozen=True)
class Trajectory:
    poses: tuple[tuple[int, Pose2], ...]

    def __post_init__(self) -> None:
        if not self.poses:
            raise ValueError("trajectory must contain at least one pose")
        ts = [t for t, _ in self.poses]
        if ts[0] != 0:
            raise ValueError(f"timesteps must start at 0, got {ts[0]}")
        for prev, cur in zip(ts, ts[1:]):
            if cur <= prev:
                raise ValueError(f"timesteps must be strictly increasing, got {prev} -> {cur}")

    @property
    def origin(self) -> Pose2:
        return self.poses[0][1]

    @property
    def timesteps(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.poses)

    def __len__(self) -> int:
        return len(self.poses)

    def pose_at(self, timestep: int) -> Pose2:
        for t, p in self.poses:
            if t == timestep:
                return p
        raise KeyError(f"timestep {timestep} not in trajectory")

    def xy(self) -> np.ndarray:
        """Positions as an (N, 2) float array, in timestep order."""
        return np.array([[p.x, p.y] for _, p in self.poses], dtype=np.float64)

    def headings(self) -> np.ndarray:
        return np.array([p.theta for _, p in self.poses], dtype=np.float64)

    def with_xy(self, xy: np.ndarray) -> "Trajectory":
        """Same timesteps and headings, positions replaced by ``xy``."""
        if xy.shape != (len(self.poses), 2):
            raise ValueError(f"expected xy of shape {(len(self.poses), 2)}, got {xy.shape}")
        return Trajectory(
            tuple(
                (t, Pose2(float(xy[i, 0]), float(xy[i, 1]), p.theta))
                for i, (t, p) in enumerate(self.poses)
            )
        )

    def arc_length(self) -> float:
        """Total path length along the polyline, in meters."""
        xy = self.xy()
        return float(np.sum(np.hypot(*np.diff(xy, axis=0).T))) if len(xy) > 1 else 0.0


def integrate(origin: Pose2, motions: Sequence[RelativeMotion]) -> Trajectory:
    """Accumulate relative motions from ``origin`` into a trajectory.

    Pose t is the composition of pose t-1 with motion t-1, so the result has
    one more pose than there are motions. Motion errors are re-raised with
    the offending timestep attached.
    """
    poses = [(0, origin)]
    cur = origin
    for i, m in enumerate(motions):
        try:
            cur = compose(cur, m)
        except ValueError as e:
            raise ValueError(f"motion into timestep {i + 1}: {e}") from e
        poses.append((i + 1, cur))
    return Trajectory(tuple(poses))


def vo_loss(pred: RelativeMotion, truth: RelativeMotion, beta: float) -> float:
    """Weighted odometry regression loss between two relative motions.

    Euclidean norm of the translation error plus ``beta`` times the Euclidean
    norm of the (sin, cos) heading-encoding error. ``beta`` balances the two
    scales and must be positive.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    t_err = math.hypot(pred.dx - truth.dx, pred.dy - truth.dy)
    r_err = math.hypot(pred.sin_dtheta - truth.sin_dtheta, pred.cos_dtheta - truth.cos_dtheta)
    return t_err + beta * r_err


def save_trajectory(trajectory: Trajectory, path: str | Path) -> None:
    """Write one ``t x y theta`` record per line, '.' decimal separator."""
    lines = [f"{t} {p.x!r} {p.y!r} {p.theta!r}" for t, p in trajectory.poses]
    Path(path).write_text("\n".join(lines) + "\n")


def load_trajectory(path: str | Path) -> Trajectory:
    poses = []
    for lineno, line in enumerate(_records(path), start=1):
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 't x y theta', got {line!r}")
        t = int(parts[0])
        poses.append((t, Pose2(float(parts[1]), float(parts[2]), float(parts[3]))))
    return Trajectory(tuple(poses))


def _records(path: str | Path) -> Iterable[str]:
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line
