"""Two-sample and goodness-of-fit tests for planar point patterns.

Six two-sample procedures are exposed through `run_method`:

========  ==========================================================
  M1      Liu-Singh depth rank-sum test on raw (x, y) coordinates
  M2      Liu-Singh test on polar coordinates about the basket
  M3      quadrant-count two-dimensional KS test on raw coordinates
  M4      quadrant-count 2D KS test on polar coordinates
  M5      2D KS test on pooled component-wise depth pairs of (x, y)
  M6      2D KS test on pooled depth pairs of (r, theta)  [default]
========  ==========================================================

M6 is the depth-transformed procedure this package exists for: both
samples are mapped to polar coordinates, each point is replaced by the
pair of one-dimensional halfspace depths of its coordinates within the
*pooled* marginals, and the two resulting depth clouds are compared
with the quadrant-count KS statistic.

One-sample checks of a pattern against a reference pattern are provided
as a depth chi-square test and depth-quantile KS*/CM* tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import norm as norm_dist

from . import depth as _depth
from .geometry import PointPattern, to_polar_pattern

__all__ = [
    "TestResult",
    "QuadrantCounts",
    "qks",
    "ks2d_pvalue",
    "quadrant_counts",
    "ks2d_two_sample",
    "liu_singh_test",
    "depth_chi_square_test",
    "depth_ks_star",
    "depth_cm_star",
    "depth_ks2d_test",
    "run_method",
    "METHODS",
]

#: Selectable two-sample methods, in canonical order.
METHODS = ("M1", "M2", "M3", "M4", "M5", "M6")

_QKS_MAX_TERMS = 100
_QKS_TOL = 1e-12


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test.

    ``statistic`` is the method's test statistic (the standardized z
    value for Liu-Singh methods), ``n_eff`` and ``corr`` are populated
    by the 2D-KS family only, and ``flags`` carries non-fatal warnings
    such as ``small_n_eff`` or ``degenerate_marginal``.
    """

    method: str
    statistic: float
    p_value: float
    n1: int
    n2: int
    alpha: float
    reject: bool
    n_eff: float | None = None
    corr: float | None = None
    flags: tuple[str, ...] = ()


class QuadrantCounts(NamedTuple):
    """Counts of points in the four quadrants about an anchor."""

    c1: int  # x >  ax, y >  ay
    c2: int  # x <= ax, y >  ay
    c3: int  # x <= ax, y <= ay
    c4: int  # x >  ax, y <= ay


def qks(x: float) -> float:
    """Kolmogorov asymptotic tail probability ``Q(x)``.

    ``Q(x) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)``, truncated when
    a term falls below 1e-12 in absolute value or after 100 terms, and
    clamped to [0, 1].  ``Q(0) = 1`` and ``Q`` decreases to 0.
    """
    if x < 0:
        raise ValueError("qks requires x >= 0")
    if x == 0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, _QKS_MAX_TERMS + 1):
        term = 2.0 * sign * math.exp(-2.0 * j * j * x * x)
        total += term
        if abs(term) < _QKS_TOL:
            break
        sign = -sign
    return min(1.0, max(0.0, total))


def ks2d_pvalue(t_ks: float, n_eff: float, corr: float) -> float:
    """Approximate p-value for the two-sample quadrant-count KS statistic.

    Uses the sample-size/correlation-adjusted argument

        sqrt(N) * T / (1 + sqrt(1 - corr^2) * (0.25 - 0.75 / sqrt(N)))

    fed to the Kolmogorov tail `qks`, with ``N`` the effective sample
    size ``n1*n2/(n1+n2)``.  The approximation is indicative only when
    ``N <= 20`` or when the returned p-value exceeds 0.20; callers
    surface those conditions as result flags.
    """
    if not -1.0 <= corr <= 1.0:
        raise ValueError("corr must lie in [-1, 1]")
    if n_eff <= 0:
        raise ValueError("n_eff must be positive")
    if not -1e-9 <= t_ks <= 1.0 + 1e-9:
        raise ValueError("t_ks must lie in [0, 1]")
    t_ks = min(max(t_ks, 0.0), 1.0)
    sqrt_n = math.sqrt(n_eff)
    denom = 1.0 + math.sqrt(1.0 - corr * corr) * (0.25 - 0.75 / sqrt_n)
    return qks(sqrt_n * t_ks / denom)


def quadrant_counts(anchor, pts) -> QuadrantCounts:
    """Partition ``pts`` into the four quadrants about ``anchor``.

    Quadrant 1 is strictly above-right of the anchor; boundaries (ties)
    go to the <= side, so the four counts always sum to ``len(pts)``
    and an anchor taken from the set counts itself in quadrant 3.
    """
    p = np.asarray(pts, dtype=float)
    if p.size == 0:
        return QuadrantCounts(0, 0, 0, 0)
    gx = p[:, 0] > float(anchor[0])
    gy = p[:, 1] > float(anchor[1])
    c1 = int(np.count_nonzero(gx & gy))
    c2 = int(np.count_nonzero(~gx & gy))
    c3 = int(np.count_nonzero(~gx & ~gy))
    c4 = int(np.count_nonzero(gx & ~gy))
    return QuadrantCounts(c1, c2, c3, c4)


def _quadrant_fractions(anchors: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """(len(anchors), 4) array of quadrant fractions of ``pts``."""
    n = pts.shape[0]
    gx = pts[None, :, 0] > anchors[:, None, 0]
    gy = pts[None, :, 1] > anchors[:, None, 1]
    c1 = np.count_nonzero(gx & gy, axis=1)
    c2 = np.count_nonzero(~gx & gy, axis=1)
    c3 = np.count_nonzero(~gx & ~gy, axis=1)
    c4 = np.count_nonzero(gx & ~gy, axis=1)
    return np.stack([c1, c2, c3, c4], axis=1) / n


def _max_quadrant_gap(anchors: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    gaps = np.abs(_quadrant_fractions(anchors, a) - _quadrant_fractions(anchors, b))
    return float(gaps.max())


def _pearson_or_zero(pts: np.ndarray) -> tuple[float, bool]:
    """Pearson correlation of the two columns; 0 with a flag if degenerate."""
    x = pts[:, 0]
    y = pts[:, 1]
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0, True
    r = float(np.corrcoef(x, y)[0, 1])
    # guard against rounding slightly past +-1
    return min(1.0, max(-1.0, r)), False


def ks2d_two_sample(a, b, alpha: float = 0.05, method: str = "M3") -> TestResult:
    """Two-sample two-dimensional KS test via quadrant counts.

    For every data point used as an anchor, the plane is split into four
    quadrants (strict >/> for quadrant 1, ties to the <= side) and the
    largest absolute difference between the two samples' quadrant
    fractions is recorded; the statistic averages the maxima obtained
    anchoring on each sample in turn.  The p-value uses the Kolmogorov
    tail with the effective-size/correlation adjustment of
    `ks2d_pvalue`, where the correlation blends the two samples'
    Pearson coefficients as ``sqrt((r_a^2 + r_b^2) / 2)``.

    Parameters
    ----------
    a, b : PointPattern or array_like of shape (n, 2)
        The two samples; each needs at least 2 points.
    alpha : float
        Rejection level; ``reject = p_value < alpha``.
    method : str
        Label recorded on the result (the dispatcher relabels).
    """
    pa = _depth._as_points(a)
    pb = _depth._as_points(b)
    n1, n2 = pa.shape[0], pb.shape[0]
    if n1 < 2 or n2 < 2:
        raise ValueError("need at least 2 points in each sample")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    t1 = _max_quadrant_gap(pa, pa, pb)
    t2 = _max_quadrant_gap(pb, pa, pb)
    statistic = 0.5 * (t1 + t2)

    flags: list[str] = []
    ra, dega = _pearson_or_zero(pa)
    rb, degb = _pearson_or_zero(pb)
    if dega or degb:
        flags.append("degenerate_marginal")
    corr = math.sqrt(0.5 * (ra * ra + rb * rb))
    n_eff = n1 * n2 / (n1 + n2)
    p = ks2d_pvalue(statistic, n_eff, corr)
    if n_eff <= 20:
        flags.append("small_n_eff")
    if p > 0.20:
        flags.append("pvalue_above_approx_range")
    return TestResult(
        method=method,
        statistic=statistic,
        p_value=p,
        n1=n1,
        n2=n2,
        alpha=alpha,
        reject=p < alpha,
        n_eff=n_eff,
        corr=corr,
        flags=tuple(flags),
    )


def liu_singh_test(
    a,
    b,
    depth_fn: Callable = _depth.tukey_depth_2d,
    alpha: float = 0.05,
    method: str = "M1",
) -> TestResult:
    """Liu-Singh depth rank-sum two-sample test.

    Sample ``a`` is the reference: with ``R(y; a)`` the fraction of
    reference points no deeper than ``y`` within ``a``, the rank-sum
    ``Q = mean_j R(Y_j; a)`` is standardized as

        z = (Q - 1/2) / sqrt((1/m + 1/n) / 12)

    and referred to N(0, 1) two-sidedly.  ``statistic`` holds z.
    Sizes below 20 per sample are outside the asymptotic comfort zone
    and set a ``small_sample`` flag.
    """
    pa = _depth._as_points(a)
    pb = _depth._as_points(b)
    m, n = pa.shape[0], pb.shape[0]
    if m == 0 or n == 0:
        raise ValueError("need non-empty samples")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    flags: list[str] = []
    if m < 20 or n < 20:
        flags.append("small_sample")
    ref_depths = np.sort(np.atleast_1d(depth_fn(pa, pa)))
    y_depths = np.atleast_1d(depth_fn(pb, pa))
    r_vals = np.searchsorted(ref_depths, y_depths, side="right") / m
    q = float(r_vals.mean())
    z = (q - 0.5) / math.sqrt((1.0 / m + 1.0 / n) / 12.0)
    p = 2.0 * float(norm_dist.sf(abs(z)))
    p = min(1.0, p)
    return TestResult(
        method=method,
        statistic=z,
        p_value=p,
        n1=m,
        n2=n,
        alpha=alpha,
        reject=p < alpha,
        flags=tuple(flags),
    )


def _one_sample_depths(sample, ref, depth_fn):
    ps = _depth._as_points(sample)
    pr = _depth._as_points(ref)
    if ps.shape[0] == 0 or pr.shape[0] == 0:
        raise ValueError("need non-empty sample and reference")
    ref_depths = np.sort(np.atleast_1d(depth_fn(pr, ref)))
    sample_depths = np.atleast_1d(depth_fn(ps, ref))
    return sample_depths, ref_depths


def depth_chi_square_test(
    sample,
    ref,
    breaks,
    depth_fn: Callable = _depth.tukey_depth_2d,
    alpha: float = 0.05,
) -> TestResult:
    """Chi-square test of depth-cell occupancy against a reference.

    Depth values of the sample (computed within the reference pattern)
    are binned into cells ``(a_{i-1}, a_i]`` given by ``breaks`` running
    from 0 to 1; expected cell probabilities come from the reference's
    own depths.  The statistic ``sum (n_i - n p_i)^2 / (n p_i)`` is
    referred to chi-square with ``len(breaks) - 2`` degrees of freedom.

    Cells the reference never touches must be unoccupied by the sample
    (otherwise an error); expected counts below 5 set a
    ``small_expected_count`` flag, and sample points of depth exactly 0
    fall outside every cell and set ``zero_depth_outside_cells``.
    """
    br = np.asarray(breaks, dtype=float).ravel()
    if br.size < 2 or br[0] != 0.0 or br[-1] != 1.0 or np.any(np.diff(br) <= 0):
        raise ValueError("breaks must increase strictly from 0 to 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sample_depths, ref_depths = _one_sample_depths(sample, ref, depth_fn)
    n = sample_depths.size

    def cell_counts(values: np.ndarray) -> np.ndarray:
        sorted_vals = np.sort(values)
        hi = np.searchsorted(sorted_vals, br[1:], side="right")
        lo = np.searchsorted(sorted_vals, br[:-1], side="right")
        return (hi - lo).astype(float)

    p_i = cell_counts(ref_depths) / ref_depths.size
    n_i = cell_counts(sample_depths)
    flags: list[str] = []
    if np.any((p_i == 0.0) & (n_i > 0)):
        raise ValueError("sample occupies a depth cell the reference never touches")
    if np.any(sample_depths == 0.0):
        flags.append("zero_depth_outside_cells")
    occupied = p_i > 0.0
    expected = n * p_i[occupied]
    if np.any(expected < 5.0):
        flags.append("small_expected_count")
    statistic = float(np.sum((n_i[occupied] - expected) ** 2 / expected))
    dof = br.size - 2
    p = float(chi2_dist.sf(statistic, dof))
    return TestResult(
        method="chi2",
        statistic=statistic,
        p_value=p,
        n1=n,
        n2=ref_depths.size,
        alpha=alpha,
        reject=p < alpha,
        flags=tuple(flags),
    )


def _depth_quantiles(sample, ref, depth_fn) -> np.ndarray:
    """Sorted ``T_i``: reference fraction at least as deep as sample point i."""
    sample_depths, ref_depths = _one_sample_depths(sample, ref, depth_fn)
    n_ref = ref_depths.size
    t = (n_ref - np.searchsorted(ref_depths, sample_depths, side="left")) / n_ref
    t.sort()
    return t


def depth_ks_star(
    sample,
    ref,
    depth_fn: Callable = _depth.tukey_depth_2d,
    alpha: float = 0.05,
) -> TestResult:
    """One-sample KS test of depth quantiles against uniformity.

    Each sample point is mapped to ``T_i``, the fraction of reference
    points at least as deep as it; under agreement with the reference
    the ``T_i`` are approximately U[0, 1].  The statistic is
    ``sup_t |G_n(t) - t|`` and the p-value the Kolmogorov tail at
    ``sqrt(n) * KS*``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    t = _depth_quantiles(sample, ref, depth_fn)
    n = t.size
    i = np.arange(1, n + 1)
    statistic = float(max(np.max(i / n - t), np.max(t - (i - 1) / n)))
    p = qks(math.sqrt(n) * statistic)
    return TestResult(
        method="ks_star",
        statistic=statistic,
        p_value=p,
        n1=n,
        n2=_depth._as_points(ref).shape[0],
        alpha=alpha,
        reject=p < alpha,
    )


def _cm_statistic(sorted_t: np.ndarray) -> float:
    n = sorted_t.size
    grid = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return float(1.0 / (12.0 * n) + np.sum((sorted_t - grid) ** 2))


def depth_cm_star(
    sample,
    ref,
    depth_fn: Callable = _depth.tukey_depth_2d,
    alpha: float = 0.05,
    n_resamples: int = 10_000,
    seed: int = 0,
) -> TestResult:
    """One-sample Cramer-von Mises test of depth quantiles.

    The statistic is the classical ``n * CM* = 1/(12n) + sum_i
    (T_(i) - (2i-1)/(2n))^2`` on the sorted depth quantiles; its null
    distribution is approximated by seeded Monte Carlo over uniform
    resamples, and the p-value is the fraction of resampled statistics
    at least as large as the observed one.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if n_resamples < 1:
        raise ValueError("n_resamples must be positive")
    t = _depth_quantiles(sample, ref, depth_fn)
    n = t.size
    statistic = _cm_statistic(t)
    rng = np.random.default_rng(seed)
    exceed = 0
    chunk = max(1, int(2e6) // max(n, 1))
    done = 0
    grid = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    while done < n_resamples:
        k = min(chunk, n_resamples - done)
        u = rng.random((k, n))
        u.sort(axis=1)
        sims = 1.0 / (12.0 * n) + np.sum((u - grid) ** 2, axis=1)
        exceed += int(np.count_nonzero(sims >= statistic))
        done += k
    p = exceed / n_resamples
    return TestResult(
        method="cm_star",
        statistic=statistic,
        p_value=p,
        n1=n,
        n2=_depth._as_points(ref).shape[0],
        alpha=alpha,
        reject=p < alpha,
    )


def depth_ks2d_test(
    a,
    b,
    coords: str = "polar",
    origin=(0.0, 0.0),
    alpha: float = 0.05,
) -> TestResult:
    """Depth-transformed two-sample KS test (methods M5/M6).

    Both samples are optionally mapped to polar coordinates about
    ``origin``, every point is replaced by the pair of one-dimensional
    halfspace depths of its two coordinates within the *pooled*
    marginals, and the two depth clouds are compared with
    `ks2d_two_sample`.  ``coords="polar"`` is M6, ``"cartesian"`` M5.
    """
    if coords not in ("polar", "cartesian"):
        raise ValueError("coords must be 'polar' or 'cartesian'")
    pa = _depth._as_points(a)
    pb = _depth._as_points(b)
    if coords == "polar":
        pa = to_polar_pattern(pa, origin)
        pb = to_polar_pattern(pb, origin)
    ref = _depth.DepthReference.from_samples(pa, pb)
    d1 = _depth.pooled_depth_pairs(pa, ref)
    d2 = _depth.pooled_depth_pairs(pb, ref)
    tag = "M6" if coords == "polar" else "M5"
    return ks2d_two_sample(d1, d2, alpha=alpha, method=tag)


def run_method(
    method: str,
    a,
    b,
    alpha: float = 0.05,
    origin=(0.0, 0.0),
    depth_fn: Callable = _depth.tukey_depth_2d,
) -> TestResult:
    """Dispatch one of the six two-sample methods.

    ``depth_fn`` affects the Liu-Singh methods M1/M2 only (M5/M6 always
    use the pooled one-dimensional halfspace depths that define them).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    if method == "M1":
        return liu_singh_test(a, b, depth_fn=depth_fn, alpha=alpha, method="M1")
    if method == "M2":
        pa = to_polar_pattern(_depth._as_points(a), origin)
        pb = to_polar_pattern(_depth._as_points(b), origin)
        return liu_singh_test(pa, pb, depth_fn=depth_fn, alpha=alpha, method="M2")
    if method == "M3":
        return ks2d_two_sample(a, b, alpha=alpha, method="M3")
    if method == "M4":
        pa = to_polar_pattern(_depth._as_points(a), origin)
        pb = to_polar_pattern(_depth._as_points(b), origin)
        return ks2d_two_sample(pa, pb, alpha=alpha, method="M4")
    if method == "M5":
        return depth_ks2d_test(a, b, coords="cartesian", origin=origin, alpha=alpha)
    return depth_ks2d_test(a, b, coords="polar", origin=origin, alpha=alpha)


def relabel(result: TestResult, method: str) -> TestResult:
    """Return a copy of ``result`` carrying a different method label."""
    return replace(result, method=method)
