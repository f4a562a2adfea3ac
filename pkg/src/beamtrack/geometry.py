"""Road-to-overpass geometry: angles of arrival/departure from vehicle kinematics.

The receiver sits on an overpass of height ``h`` above a straight road.  A
vehicle at horizontal distance ``d`` sees the link at a transmit angle
``phi`` (first quadrant) while the overpass unit sees the receive angle
``theta`` (third quadrant).  Both are measured against the road axis, so the
two rays are antiparallel: ``phi + |theta| = pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Scenario:
    """Static link geometry and block timing.

    Attributes:
        h: overpass height in meters, strictly positive.
        dt: transmission-block duration in seconds, strictly positive.
    """

    h: float
    dt: float

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class AnglePair:
    """Receive angle theta and transmit angle phi, radians in (-pi, pi]."""

    theta: float
    phi: float


def angles_from_position(d: float, scenario: Scenario) -> AnglePair:
    """Map a horizontal distance to the (theta, phi) geometry.

    Args:
        d: horizontal distance from the overpass foot, meters, d >= 0.
        scenario: link geometry.

    Returns:
        AnglePair with theta = atan2(-h, -d) in [-pi, -pi/2] and
        phi = atan2(h, d) in (0, pi/2].
    """
    h = scenario.h
    return AnglePair(theta=math.atan2(-h, -d), phi=math.atan2(h, d))


def cos_angles_from_state(d_prev: float, v_prev: float,
                          scenario: Scenario) -> tuple[float, float]:
    """Angle cosines after one block of constant-velocity motion.

    The displaced distance is ``d_prev + v_prev * dt``; the cosines follow
    from the right triangle against the overpass height.

    Returns:
        (cos theta, cos phi); cos theta = -cos phi in this geometry.
    """
    displaced = d_prev + v_prev * scenario.dt
    cos_phi = displaced / math.hypot(scenario.h, displaced)
    return -cos_phi, cos_phi


def angle_delta_closed_form(theta1: float, v1: float, w1: float,
                            scenario: Scenario) -> float:
    """Closed-form one-block change of the receive angle.

    Diagnostic expression only: it illustrates how nonlinear the angle
    evolution is in the velocity, and it is never used by the filters, which
    work from the exact geometry instead.  Compare its output against
    ``angles_from_position`` evaluated before and after the displacement to
    see how far it strays.

    Args:
        theta1: current receive angle, radians, cos(theta1) != 0.
        v1: velocity, m/s.
        w1: velocity perturbation, m/s.

    Raises:
        ZeroDivisionError: if (v1 + w1) * dt * cos^2(theta1) is zero.
    """
    c = math.cos(theta1)
    denom = (v1 + w1) * scenario.dt * c * c
    if denom == 0.0:
        raise ZeroDivisionError(
            "angle_delta_closed_form is singular when (v1+w1)*dt*cos^2(theta1) = 0")
    return -math.atan(scenario.h / denom - math.tan(theta1))
