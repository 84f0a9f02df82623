"""Statistical depth functions for univariate samples and planar point sets.

The workhorses are the one-dimensional halfspace (Tukey) depth

    D(x; F_n) = min( #{v_i <= x}, #{v_i >= x} ) / n,

where ties are counted on *both* sides, and its two-dimensional
counterpart, the minimum fraction of sample points in any closed
halfplane containing the query point.  Depths of pooled polar
coordinates feed the depth-transformed two-sample test; Mahalanobis
depth and the Liu-Singh rank are provided as alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .geometry import PointPattern

__all__ = [
    "halfspace_depth_1d",
    "DepthReference",
    "pooled_depth_pair",
    "pooled_depth_pairs",
    "tukey_depth_2d",
    "mahalanobis_depth",
    "liu_singh_R",
]


def _as_points(sample) -> np.ndarray:
    pts = sample.points if isinstance(sample, PointPattern) else np.asarray(sample, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("sample must have shape (n, 2)")
    return pts


def halfspace_depth_1d(x, sample):
    """One-dimensional halfspace depth of ``x`` with respect to ``sample``.

    Points of the sample equal to ``x`` are counted in both the
    left-tail and right-tail counts, so duplicated samples can exceed
    depth 1/2 (all-equal samples give depth 1).

    Parameters
    ----------
    x : float or array_like
        Query value(s).
    sample : array_like
        Reference sample; must be non-empty.

    Returns
    -------
    float or ndarray
        ``min(#{v <= x}, #{v >= x}) / n``, elementwise in ``x``.
    """
    s = np.asarray(sample, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("empty reference sample")
    s = np.sort(s)
    n = s.size
    xq = np.asarray(x, dtype=float)
    le = np.searchsorted(s, xq, side="right")
    ge = n - np.searchsorted(s, xq, side="left")
    d = np.minimum(le, ge) / n
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class DepthReference:
    """Sorted pooled marginals used to assign component-wise depths.

    Built from the union of two polar samples; ``r_sorted`` and
    ``theta_sorted`` each hold all ``n`` pooled values.
    """

    r_sorted: np.ndarray
    theta_sorted: np.ndarray
    n: int

    def __post_init__(self):
        r = np.sort(np.asarray(self.r_sorted, dtype=float).ravel())
        t = np.sort(np.asarray(self.theta_sorted, dtype=float).ravel())
        if r.size == 0 or r.size != t.size:
            raise ValueError("reference marginals must be non-empty and equally sized")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "r_sorted", r)
        object.__setattr__(self, "theta_sorted", t)
        object.__setattr__(self, "n", int(r.size))

    @classmethod
    def from_pooled(cls, polar_points) -> "DepthReference":
        pts = np.asarray(polar_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("pooled polar points must have shape (n, 2)")
        return cls(pts[:, 0], pts[:, 1], pts.shape[0])

    @classmethod
    def from_samples(cls, polar_a, polar_b) -> "DepthReference":
        a = np.asarray(polar_a, dtype=float)
        b = np.asarray(polar_b, dtype=float)
        return cls.from_pooled(np.vstack([a, b]))


def pooled_depth_pairs(polar_points, ref: DepthReference) -> np.ndarray:
    """Component-wise pooled depths ``(D(r), D(theta))`` for each point."""
    pts = np.asarray(polar_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("polar points must have shape (n, 2)")
    d_r = halfspace_depth_1d(pts[:, 0], ref.r_sorted)
    d_t = halfspace_depth_1d(pts[:, 1], ref.theta_sorted)
    return np.column_stack([np.atleast_1d(d_r), np.atleast_1d(d_t)])


def pooled_depth_pair(p, ref: DepthReference) -> tuple[float, float]:
    """Depth pair of a single polar point ``p = (r, theta)``."""
    d = pooled_depth_pairs(np.asarray(p, dtype=float).reshape(1, 2), ref)
    return float(d[0, 0]), float(d[0, 1])


def _tukey_one(q: np.ndarray, pts: np.ndarray) -> float:
    """Exact 2D halfspace depth of one query point via an angular sweep.

    The closed-halfplane count, as a function of the halfplane's inward
    normal direction, is piecewise constant with breakpoints at the
    sample angles +- pi/2; its minimum is attained on the open arcs
    between breakpoints, so evaluating at arc midpoints is exact.
    """
    n = pts.shape[0]
    d = pts - q
    coincident = (d[:, 0] == 0.0) & (d[:, 1] == 0.0)
    m = int(np.count_nonzero(coincident))
    rest = d[~coincident]
    if rest.shape[0] == 0:
        return m / n
    ang = np.arctan2(rest[:, 1], rest[:, 0])
    two_pi = 2.0 * np.pi
    brk = np.unique(np.mod(np.concatenate([ang - 0.5 * np.pi, ang + 0.5 * np.pi]), two_pi))
    nxt = np.append(brk[1:], brk[0] + two_pi)
    mids = 0.5 * (brk + nxt)
    a = np.sort(np.mod(ang, two_pi))
    ext = np.concatenate([a, a + two_pi])
    lo = np.mod(mids - 0.5 * np.pi, two_pi)
    hi = lo + np.pi
    counts = np.searchsorted(ext, hi, side="right") - np.searchsorted(ext, lo, side="left")
    return (m + int(counts.min())) / n


def tukey_depth_2d(z, sample):
    """Two-dimensional halfspace (Tukey) depth.

    Parameters
    ----------
    z : array_like, shape (2,) or (k, 2)
        Query point(s).
    sample : PointPattern or array_like of shape (n, 2)
        Non-empty reference sample.

    Returns
    -------
    float or ndarray
        The minimum, over closed halfplanes containing ``z``, of the
        fraction of sample points in the halfplane.  Exact for the
        empirical distribution; O(n log n) per query.
    """
    pts = _as_points(sample)
    if pts.shape[0] == 0:
        raise ValueError("empty reference sample")
    zq = np.asarray(z, dtype=float)
    if zq.ndim == 1:
        if zq.shape != (2,):
            raise ValueError("query point must have shape (2,)")
        return _tukey_one(zq, pts)
    if zq.ndim != 2 or zq.shape[1] != 2:
        raise ValueError("query points must have shape (k, 2)")
    return np.array([_tukey_one(q, pts) for q in zq])


def mahalanobis_depth(z, sample):
    """Mahalanobis depth ``1 / (1 + (z-mu)' Sigma^{-1} (z-mu))``.

    ``Sigma`` is the unbiased (n-1) sample covariance; a rank-deficient
    covariance (fewer than 3 points, or collinear data) is an error.
    """
    pts = _as_points(sample)
    if pts.shape[0] < 3:
        raise ValueError("need at least 3 sample points for a covariance estimate")
    mu = pts.mean(axis=0)
    cov = np.cov(pts, rowvar=False, ddof=1)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate sample covariance") from exc
    zq = np.asarray(z, dtype=float)
    scalar = zq.ndim == 1
    zq = zq.reshape(-1, 2)
    w = solve_triangular(chol, (zq - mu).T, lower=True)
    d2 = np.sum(w * w, axis=0)
    depth = 1.0 / (1.0 + d2)
    return float(depth[0]) if scalar else depth


def liu_singh_R(y, ref_sample, depth_fn=tukey_depth_2d):
    """Fraction of reference points no deeper than ``y``.

    ``R(y; H) = #{ i : D(X_i; H) <= D(y; H) } / m`` with the reference
    sample ``H`` supplying both the depth function's frame and the
    points being ranked.  Ties count in favor of ``y`` (<=).
    """
    pts = _as_points(ref_sample)
    if pts.shape[0] == 0:
        raise ValueError("empty reference sample")
    ref_depths = np.sort(np.atleast_1d(depth_fn(pts, ref_sample)))
    dy = depth_fn(np.asarray(y, dtype=float), ref_sample)
    r = np.searchsorted(ref_depths, np.atleast_1d(dy), side="right") / ref_depths.size
    return float(r[0]) if np.asarray(dy).ndim == 0 else r
