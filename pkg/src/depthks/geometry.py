"""Planar geometry for point patterns on the basketball half court.

Shot locations follow the public shot-chart convention: Cartesian
coordinates centered at the basket, x running along the baseline and y
toward half court, in units of 0.1 ft.  Polar coordinates are taken
about the basket with the full-quadrant ``atan2`` convention, angles in
``(-pi, pi]`` measured counterclockwise from the positive x axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateOriginWarning",
    "Rect",
    "HALF_COURT",
    "PointPattern",
    "wrap_angle",
    "to_polar",
    "from_polar",
    "to_polar_pattern",
]


class DegenerateOriginWarning(UserWarning):
    """A point coincides with the polar origin; its angle is set to 0."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("degenerate rectangle: need xmax > xmin and ymax > ymin")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def contains(self, x, y):
        """Vectorized membership test (closed rectangle)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)


#: Half-court data window in shot-chart units (0.1 ft).
HALF_COURT = Rect(-250.0, 250.0, -50.0, 420.0)


@dataclass(frozen=True)
class PointPattern:
    """An immutable planar point pattern with its observation window.

    Parameters
    ----------
    points : ndarray of shape (n, 2)
        Cartesian coordinates; coerced to a read-only float64 array.
        ``n`` may be zero.
    region : Rect
        The observation window.  Membership is *not* enforced: jittered
        patterns may spill slightly past their nominal window.
    """

    points: np.ndarray
    region: Rect = field(default=HALF_COURT)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts = np.array(pts, dtype=float, copy=True)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_xy(cls, x, y, region: Rect = HALF_COURT) -> "PointPattern":
        return cls(np.column_stack([np.asarray(x, float), np.asarray(y, float)]), region)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def wrap_angle(theta):
    """Wrap angles into ``(-pi, pi]``."""
    theta = np.asarray(theta, dtype=float)
    wrapped = theta - 2.0 * np.pi * np.ceil((theta - np.pi) / (2.0 * np.pi))
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def to_polar(p, origin=(0.0, 0.0)) -> tuple[float, float]:
    """Polar coordinates ``(r, theta)`` of a single point about ``origin``.

    ``theta`` uses ``atan2`` and lies in ``(-pi, pi]``.  A point equal to
    the origin gets ``(0.0, 0.0)`` and raises `DegenerateOriginWarning`.
    """
    dx = float(p[0]) - float(origin[0])
    dy = float(p[1]) - float(origin[1])
    r = math.hypot(dx, dy)
    if r == 0.0:
        warnings.warn(
            "point coincides with the polar origin; angle set to 0",
            DegenerateOriginWarning,
            stacklevel=2,
        )
        return 0.0, 0.0
    theta = math.atan2(dy, dx)
    if theta <= -math.pi:  # atan2 returns -pi for (x < 0, y = -0.0)
        theta = math.pi
    return r, theta


def from_polar(r, theta, origin=(0.0, 0.0)):
    """Inverse of `to_polar`; accepts scalars or arrays."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x = origin[0] + r * np.cos(theta)
    y = origin[1] + r * np.sin(theta)
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def to_polar_pattern(pattern, origin=(0.0, 0.0)) -> np.ndarray:
    """Polar transform of a whole pattern, preserving point order.

    Parameters
    ----------
    pattern : PointPattern or ndarray of shape (n, 2)
    origin : pair of floats

    Returns
    -------
    ndarray of shape (n, 2)
        Columns ``(r, theta)`` with ``theta`` in ``(-pi, pi]``.
    """
    pts = pattern.points if isinstance(pattern, PointPattern) else np.asarray(pattern, float)
    if pts.size == 0:
        return np.empty((0, 2))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("pattern must have shape (n, 2)")
    dx = pts[:, 0] - origin[0]
    dy = pts[:, 1] - origin[1]
    r = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    theta[theta <= -np.pi] = np.pi
    at_origin = r == 0.0
    if np.any(at_origin):
        warnings.warn(
            f"{int(at_origin.sum())} point(s) coincide with the polar origin; angles set to 0",
            DegenerateOriginWarning,
            stacklevel=2,
        )
        theta[at_origin] = 0.0
    return np.column_stack([r, theta])
