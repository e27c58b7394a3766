"""Key-frame node map: a sparse set of globally referenced places.

Nodes are selected greedily along a reference trajectory so that any two of
them are at least ``d_th`` apart in the plane. Place recognition then only
has to name a node id; the map resolves it back to a metric pose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import Pose2
from .odometry import Trajectory, _records

# Slack when re-checking the pairwise spacing invariant, to absorb float
# round-off in distances that were computed equal to d_th at build time.
_SPACING_SLACK = 1e-9


@dataclass(frozen=True)
class TopoNode:
    """One key-frame: a dense integer id, its pose, and an optional descriptor
    vector standing in for the key-frame image."""

    id: int
    pose: Pose2
    descriptor: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class TopoMap:
    nodes: tuple[TopoNode, ...]
    d_th: float

    def __post_init__(self) -> None:
        if self.d_th <= 0:
            raise ValueError(f"d_th must be positive, got {self.d_th}")
        if not self.nodes:
            raise ValueError("map must contain at least one node")
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node ids must be dense 0..N-1, found id {node.id} at index {i}")
        xy = self._node_xy
        if len(xy) > 1:
            deltas = xy[:, None, :] - xy[None, :, :]
            dists = np.hypot(deltas[..., 0], deltas[..., 1])
            np.fill_diagonal(dists, np.inf)
            closest = float(dists.min())
            if closest < self.d_th - _SPACING_SLACK:
                raise ValueError(
                    f"node spacing invariant violated: closest pair is {closest:.6f} m "
                    f"apart, d_th = {self.d_th}"
                )

    @cached_property
    def _node_xy(self) -> np.ndarray:
        return np.array([[n.pose.x, n.pose.y] for n in self.nodes], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.nodes)

    def lookup(self, node_id: int) -> Pose2:
        """Resolve a node id to its stored pose; unknown ids are rejected."""
        if not isinstance(node_id, int) or node_id < 0 or node_id >= len(self.nodes):
            raise KeyError(f"unknown node id {node_id!r} (map has {len(self.nodes)} nodes)")
        return self.nodes[node_id].pose

    def nearest(self, pose: Pose2) -> tuple[int, float]:
        """Node id minimizing planar distance to ``pose``, plus that distance.

        Exact ties resolve to the lowest id.
        """
        xy = self._node_xy
        d2 = (xy[:, 0] - pose.x) ** 2 + (xy[:, 1] - pose.y) ** 2
        idx = int(np.argmin(d2))  # argmin takes the first minimum: lowest id wins
        return idx, float(math.sqrt(d2[idx]))


def build_map(reference: Trajectory, d_th: float) -> TopoMap:
    """Greedy key-frame selection along a reference trajectory.

    The first pose becomes node 0; each later pose is kept iff it lies at
    least ``d_th`` from every node selected so far. Deterministic and order
    dependent, which also prunes revisited stretches of the path down to the
    nodes already covering them.
    """
    if d_th <= 0:
        raise ValueError(f"d_th must be positive, got {d_th}")
    if len(reference) == 0:
        raise ValueError("cannot build a map from an empty trajectory")
    selected: list[Pose2] = [reference.poses[0][1]]
    xs = [selected[0].x]
    ys = [selected[0].y]
    for _, pose in reference.poses[1:]:
        dx = np.asarray(xs) - pose.x
        dy = np.asarray(ys) - pose.y
        if float(np.min(np.hypot(dx, dy))) >= d_th:
            selected.append(pose)
            xs.append(pose.x)
            ys.append(pose.y)
    nodes = tuple(TopoNode(i, p) for i, p in enumerate(selected))
    return TopoMap(nodes, d_th)


@dataclass(frozen=True)
class NodeDetection:
    """A place-recognition hit: at ``timestep`` the detector named ``node_id``
    with the given confidence probability."""

    timestep: int
    node_id: int
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.timestep < 0:
            raise ValueError(f"timestep must be non-negative, got {self.timestep}")
        if self.node_id < 0:
            raise ValueError(f"node id must be non-negative, got {self.node_id}")


def save_map(topo: TopoMap, path: str | Path) -> None:
    """Write ``id x y theta`` records; d_th rides along as a comment header."""
    lines = [f"# d_th {topo.d_th!r}"]
    lines += [f"{n.id} {n.pose.x!r} {n.pose.y!r} {n.pose.theta!r}" for n in topo.nodes]
    Path(path).write_text("\n".join(lines) + "\n")


def load_map(path: str | Path) -> TopoMap:
    """Read a node map written by ``save_map``.

    If the d_th header comment is missing, the tightest value consistent
    with the stored nodes (their minimum pairwise distance) is used.
    """
    d_th = None
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("# d_th"):
            d_th = float(stripped.split()[2])
            break
    nodes = []
    for lineno, line in enumerate(_records(path), start=1):
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'id x y theta', got {line!r}")
        nodes.append(
            TopoNode(int(parts[0]), Pose2(float(parts[1]), float(parts[2]), float(parts[3])))
        )
    if d_th is None:
        d_th = _min_pairwise_distance(nodes)
    return TopoMap(tuple(nodes), d_th)


def _min_pairwise_distance(nodes: list[TopoNode]) -> float:
    if len(nodes) < 2:
        return 1.0
    xy = np.array([[n.pose.x, n.pose.y] for n in nodes])
    deltas = xy[:, None, :] - xy[None, :, :]
    dists = np.hypot(deltas[..., 0], deltas[..., 1])
    np.fill_diagonal(dists, np.inf)
    return float(dists.min())


def save_detections(detections: list[NodeDetection] | tuple[NodeDetection, ...], path: str | Path) -> None:
    """Write ``t node_id confidence`` records."""
    lines = [f"{d.timestep} {d.node_id} {d.confidence!r}" for d in detections]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_detections(path: str | Path) -> tuple[NodeDetection, ...]:
    dets = []
    for lineno, line in enumerate(_records(path), start=1):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 't node_id confidence', got {line!r}")
        dets.append(NodeDetection(int(parts[0]), int(parts[1]), float(parts[2])))
    return tuple(dets)
