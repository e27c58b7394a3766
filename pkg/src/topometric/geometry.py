"""SE(2) pose algebra and the sin/cos angle encoding used across the package.

Poses live in the plane: position (x, y) in meters plus a heading theta in
radians, always normalized to (-pi, pi]. Relative motions carry their heading
increment as the pair (sin, cos) so regression targets and noisy measurements
never wrap; the angle is recovered with atan2 when a motion is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Unit-circle drift on (sin, cos) below this is accepted as float noise.
UNIT_CIRCLE_TOL = 1e-9
# Drift between the two bounds is silently renormalized; above, it is an error.
UNIT_CIRCLE_REJECT = 1e-6


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi].

    The boundary maps to the closed end: -pi wraps to +pi. Rejects
    non-finite input.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def angular_error(a: float, b: float) -> float:
    """Magnitude of the shortest angular difference between a and b, in [0, pi]."""
    return abs(normalize_angle(a - b))


@dataclass(frozen=True)
class Pose2:
    """A planar pose (x, y, theta); theta is normalized on construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def xy_distance(self, other: "Pose2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class RelativeMotion:
    """A body-frame motion increment: translation (dx, dy) plus heading change
    encoded as (sin, cos).

    The encoding must sit on the unit circle. Small drift (below
    ``UNIT_CIRCLE_REJECT``) is renormalized on construction so accumulated
    float error never leaks; anything larger is treated as a bug in the
    caller and rejected.
    """

    dx: float
    dy: float
    sin_dtheta: float
    cos_dtheta: float

    def __post_init__(self) -> None:
        err = abs(self.sin_dtheta**2 + self.cos_dtheta**2 - 1.0)
        if err <= UNIT_CIRCLE_TOL:
            return
        if err > UNIT_CIRCLE_REJECT:
            raise ValueError(
                f"(sin, cos) = ({self.sin_dtheta}, {self.cos_dtheta}) is off "
                f"the unit circle by {err:.3e}"
            )
        norm = math.hypot(self.sin_dtheta, self.cos_dtheta)
        object.__setattr__(self, "sin_dtheta", self.sin_dtheta / norm)
        object.__setattr__(self, "cos_dtheta", self.cos_dtheta / norm)

    @classmethod
    def from_planar(cls, dx: float, dy: float, dtheta: float) -> "RelativeMotion":
        """Build a motion from an explicit heading increment in radians."""
        return cls(float(dx), float(dy), math.sin(dtheta), math.cos(dtheta))

    @property
    def dtheta(self) -> float:
        """Heading increment recovered from the (sin, cos) pair, in (-pi, pi]."""
        return math.atan2(self.sin_dtheta, self.cos_dtheta)

    def translation_norm(self) -> float:
        return math.hypot(self.dx, self.dy)


def _check_unit_circle(rel: RelativeMotion) -> None:
    err = abs(rel.sin_dtheta**2 + rel.cos_dtheta**2 - 1.0)
    if err > UNIT_CIRCLE_TOL:
        raise ValueError(f"relative motion violates the unit-circle invariant by {err:.3e}")


def compose(a: Pose2, rel: RelativeMotion) -> Pose2:
    """Apply a body-frame motion to a pose.

    The translation (dx, dy) is expressed in the frame of ``a`` (rotated by
    a.theta before being added) and the heading advances by the encoded
    angle increment.
    """
    _check_unit_circle(rel)
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    return Pose2(
        a.x + rel.dx * c - rel.dy * s,
        a.y + rel.dx * s + rel.dy * c,
        a.theta + math.atan2(rel.sin_dtheta, rel.cos_dtheta),
    )


def relative_between(a: Pose2, b: Pose2) -> RelativeMotion:
    """Motion that takes pose ``a`` to pose ``b``, expressed in the frame of ``a``.

    Satisfies the round-trip law compose(a, relative_between(a, b)) == b.
    """
    gx = b.x - a.x
    gy = b.y - a.y
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    dth = b.theta - a.theta
    return RelativeMotion(
        gx * c + gy * s,
        -gx * s + gy * c,
        math.sin(dth),
        math.cos(dth),
    )
