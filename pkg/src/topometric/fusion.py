"""Drift correction for dead-reckoned trajectories from sparse place detections.

Three cooperating mechanisms, applied to the integrated trajectory:

* forward correction: when a detection clears the confidence threshold, the
  current pose snaps to the detected node's pose and the residual offset is
  carried forward, shifting every later integrated pose until the next
  confident detection replaces it;
* backward correction: the same residual is pushed into the poses of the
  preceding time window, scaled by an exponential decay in the time gap, with
  separate decay rates for translation and heading;
* smoothing: a locally weighted quadratic regression over the translation
  channels (headings untouched), blended into the corrected trajectory with
  a weight derived from the smoothness parameter.

The first two run online over the motion stream; smoothing is a single final
pass over the completed trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .geometry import Pose2, RelativeMotion, compose, normalize_angle
from .odometry import Trajectory
from .topo_map import NodeDetection, TopoMap


@dataclass(frozen=True)
class FusionConfig:
    """Knobs of the correction pipeline.

    delta         confidence threshold a detection must exceed to trigger
                  corrections, in (0, 1]
    lambda_s      smoothness weight; the smoothed translation is blended in
                  with weight lambda_s / (1 + lambda_s), so 0 disables
                  smoothing and large values approach the pure local fit
    lambda_tr     per-timestep exponential decay rate of backward
                  translation corrections
    lambda_theta  per-timestep exponential decay rate of backward heading
                  corrections
    t_w           how many timesteps the backward correction reaches
    bandwidth     smoothing span as a fraction of trajectory length, (0, 1]
    """

    delta: float = 0.9
    lambda_s: float = 1.0
    lambda_tr: float = 0.5
    lambda_theta: float = 0.5
    t_w: int = 10
    bandwidth: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.lambda_s <= 0:
            raise ValueError(f"lambda_s must be positive, got {self.lambda_s}")
        if self.lambda_tr <= 0:
            raise ValueError(f"lambda_tr must be positive, got {self.lambda_tr}")
        if self.lambda_theta <= 0:
            raise ValueError(f"lambda_theta must be positive, got {self.lambda_theta}")
        if not isinstance(self.t_w, int) or self.t_w < 1:
            raise ValueError(f"t_w must be an integer >= 1, got {self.t_w!r}")
        if not 0.0 < self.bandwidth <= 1.0:
            raise ValueError(f"bandwidth must be in (0, 1], got {self.bandwidth}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "FusionConfig":
        kwargs: dict = {}
        for key, raw in values.items():
            if key == "t_w":
                kwargs[key] = int(raw)
            elif key in ("delta", "lambda_s", "lambda_tr", "lambda_theta", "bandwidth"):
                kwargs[key] = float(raw)
            else:
                raise ValueError(f"unknown fusion config key {key!r}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "FusionConfig":
        """Read a flat ``key = value`` config; every key is optional."""
        return cls.from_mapping(parse_kv_file(path))


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` text file; '#' starts a comment line."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


@dataclass(frozen=True)
class CorrectionState:
    """Residual offset carried between confident detections.

    ``pending_offset`` is a global-frame (dx, dy, dtheta) added to every
    integrated pose; it is zero until the first confident detection and is
    replaced wholesale at each one. ``last_confident`` remembers which
    (timestep, node_id) set it.
    """

    pending_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    last_confident: Optional[tuple[int, int]] = None

    def apply(self, pose: Pose2) -> Pose2:
        dx, dy, dth = self.pending_offset
        if dx == 0.0 and dy == 0.0 and dth == 0.0:
            return pose
        return Pose2(pose.x + dx, pose.y + dy, normalize_angle(pose.theta + dth))


def forward_correct(
    state: CorrectionState,
    pose: Pose2,
    detection: NodeDetection,
    topo: TopoMap,
    cfg: FusionConfig,
) -> tuple[Pose2, CorrectionState]:
    """Snap the current pose to a confidently detected node.

    ``pose`` is the raw integrated pose at the detection's timestep. Above
    the threshold the returned pose is exactly the node pose, and the state
    carries the residual (node minus pose, heading wrap-aware) forward. At
    or below the threshold the pose just gets the pending offset applied and
    the state is unchanged.
    """
    node_pose = topo.lookup(detection.node_id)
    if detection.confidence <= cfg.delta:
        return state.apply(pose), state
    offset = (
        node_pose.x - pose.x,
        node_pose.y - pose.y,
        normalize_angle(node_pose.theta - pose.theta),
    )
    return node_pose, CorrectionState(offset, (detection.timestep, detection.node_id))


def backward_correct(
    trajectory: Trajectory, t: int, node_pose: Pose2, cfg: FusionConfig
) -> Trajectory:
    """Push the residual at timestep ``t`` into the preceding window.

    The residual is measured against the trajectory's current pose at ``t``
    (so call this before snapping that pose). Each pose with timestep tau in
    [t - t_w, t - 1] moves by exp(-lambda_tr * (t - tau)) of the translation
    residual and exp(-lambda_theta * (t - tau)) of the wrap-aware heading
    residual; everything outside the window, including pose t itself, is
    untouched.
    """
    timesteps = trajectory.timesteps
    if t not in timesteps:
        raise ValueError(f"timestep {t} is not in the trajectory")
    anchor = trajectory.pose_at(t)
    r_x = node_pose.x - anchor.x
    r_y = node_pose.y - anchor.y
    r_th = normalize_angle(node_pose.theta - anchor.theta)
    corrected = []
    for tau, p in trajectory.poses:
        if t - cfg.t_w <= tau <= t - 1:
            k_tr = math.exp(-cfg.lambda_tr * (t - tau))
            k_th = math.exp(-cfg.lambda_theta * (t - tau))
            p = Pose2(p.x + k_tr * r_x, p.y + k_tr * r_y, p.theta + k_th * r_th)
        corrected.append((tau, p))
    return Trajectory(tuple(corrected))


def tricube(u: np.ndarray) -> np.ndarray:
    """Tricube kernel (1 - u^3)^3 on normalized distances in [0, 1]."""
    return (1.0 - np.clip(u, 0.0, 1.0) ** 3) ** 3


def _window_bounds(ts: np.ndarray, i: int, k: int) -> tuple[int, int]:
    # k nearest timesteps to ts[i] are contiguous; grow toward the closer
    # side, preferring the earlier timestep on exact ties.
    lo = hi = i
    n = len(ts)
    while hi - lo + 1 < k:
        if lo == 0:
            hi += 1
        elif hi == n - 1:
            lo -= 1
        elif ts[i] - ts[lo - 1] <= ts[hi + 1] - ts[i]:
            lo -= 1
        else:
            hi += 1
    return lo, hi


def smooth(trajectory: Trajectory, cfg: FusionConfig) -> Trajectory:
    """Locally weighted quadratic regression over the translation channels.

    For every timestep the x and y series are refit independently on the
    window of bandwidth-nearest timesteps: a quadratic polynomial in the
    (centered, rescaled) timestep, weighted by the tricube kernel of the
    normalized time distance, evaluated back at the query timestep. Headings
    are copied through untouched. Needs at least 3 poses.
    """
    n = len(trajectory)
    if n < 3:
        raise ValueError(f"smoothing needs at least 3 poses, got {n}")
    ts = np.array(trajectory.timesteps, dtype=np.float64)
    xy = trajectory.xy()
    out = np.empty_like(xy)
    k = min(n, max(3, math.ceil(cfg.bandwidth * n)))
    for i in range(n):
        lo, hi = _window_bounds(ts, i, k)
        tau = ts[lo : hi + 1]
        dist = np.abs(tau - ts[i])
        dmax = float(dist.max())
        if dmax == 0.0:
            raise ValueError("degenerate smoothing window: all timesteps identical")
        w = tricube(dist / dmax)
        if not np.any(w > 0.0):
            raise ValueError(f"all smoothing weights vanished at timestep {int(ts[i])}")
        # Centered and rescaled abscissa keeps the 3-column design well
        # conditioned; the fitted value at the query point is then coef[0].
        s = (tau - ts[i]) / dmax
        design = np.column_stack([np.ones_like(s), s, s * s])
        sw = np.sqrt(w)
        a = design * sw[:, None]
        for c in (0, 1):
            coef, *_ = np.linalg.lstsq(a, xy[lo : hi + 1, c] * sw, rcond=None)
            out[i, c] = coef[0]
    return trajectory.with_xy(out)


def smoothing_blend_weight(lambda_s: float) -> float:
    """Convex blend weight for the smoothed translation: lambda / (1 + lambda)."""
    return lambda_s / (1.0 + lambda_s)


def smooth_blend(trajectory: Trajectory, cfg: FusionConfig) -> Trajectory:
    """Blend the locally smoothed translation into the trajectory.

    Output translation is (1 - w) * input + w * smoothed with
    w = lambda_s / (1 + lambda_s); headings pass through. Trajectories too
    short to fit a quadratic (< 3 poses) are returned unchanged.
    """
    if len(trajectory) < 3:
        return trajectory
    smoothed = smooth(trajectory, cfg)
    w = smoothing_blend_weight(cfg.lambda_s)
    blended = (1.0 - w) * trajectory.xy() + w * smoothed.xy()
    return trajectory.with_xy(blended)


def fuse(
    motions: Sequence[RelativeMotion],
    detections: Sequence[NodeDetection],
    topo: TopoMap,
    origin: Pose2,
    cfg: FusionConfig,
) -> Trajectory:
    """Run the full correction pipeline over a motion stream.

    Online pass: integrate each motion; at timesteps carrying a detection,
    apply the backward window correction (residual measured before the snap)
    and the forward snap when the detection clears the threshold, otherwise
    just carry the pending offset. Final pass: blend in the smoothed
    translation. Output length is len(motions) + 1.
    """
    _check_detections(motions, detections, topo)
    det_by_t = {d.timestep: d for d in detections}
    state = CorrectionState()
    raw = origin
    out: list[tuple[int, Pose2]] = []
    for t in range(len(motions) + 1):
        if t > 0:
            try:
                raw = compose(raw, motions[t - 1])
            except ValueError as e:
                raise ValueError(f"motion into timestep {t}: {e}") from e
        out.append((t, state.apply(raw)))
        det = det_by_t.get(t)
        if det is None:
            continue
        if det.confidence > cfg.delta:
            node_pose = topo.lookup(det.node_id)
            out = list(backward_correct(Trajectory(tuple(out)), t, node_pose, cfg).poses)
        corrected, state = forward_correct(state, raw, det, topo, cfg)
        out[t] = (t, corrected)
    return smooth_blend(Trajectory(tuple(out)), cfg)


def _check_detections(
    motions: Sequence[RelativeMotion],
    detections: Sequence[NodeDetection],
    topo: TopoMap,
) -> None:
    last_t = None
    for d in detections:
        if last_t is not None and d.timestep <= last_t:
            raise ValueError(
                f"detections must be sorted by timestep with at most one per "
                f"timestep, got {last_t} then {d.timestep}"
            )
        last_t = d.timestep
        if d.timestep > len(motions):
            raise ValueError(
                f"detection at timestep {d.timestep} is beyond the trajectory "
                f"(last timestep {len(motions)})"
            )
        topo.lookup(d.node_id)
