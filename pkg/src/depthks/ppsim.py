"""Inhomogeneous Poisson point-process simulation on gridded intensities.

An `IntensityGrid` holds per-cell expected counts over a rectangular
window; `sample_nhpp` draws a Poisson total, assigns points to cells
categorically by mass, and places them uniformly within their cell.
Perturbation helpers (per-point jitter, additive half-Gaussian and
lognormal cell noise, horizontal pixel shifts) feed the two experiment
runners, which reproduce null-calibration and power sweeps for the
two-sample methods at configurable scale.

All randomness flows from ``numpy.random.SeedSequence`` spawned off a
single master seed, so every runner is deterministic given its config.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import beta as beta_dist

from .geometry import PointPattern, Rect
from .hyptest import run_method

__all__ = [
    "IntensityGrid",
    "load_grid",
    "save_grid",
    "demo_intensity_grid",
    "builtin_grid",
    "DEMO_EXTENT",
    "sample_nhpp",
    "jitter_pattern",
    "perturb_grid_half_gaussian",
    "perturb_grid_lognormal",
    "shift_grid",
    "NoiseSpec",
    "ExperimentConfig",
    "Type1Row",
    "PowerRow",
    "run_type1_experiment",
    "run_power_experiment",
    "read_flat_config",
]

_DATA_DIR = Path(__file__).parent / "data"

#: Half-court window of the bundled demo designs, in feet.
DEMO_EXTENT = Rect(-25.0, 25.0, -5.0, 42.0)

NOISE_KINDS = ("location_jitter", "half_gaussian", "lognormal", "pixel_shift")


@dataclass(frozen=True)
class IntensityGrid:
    """Nonnegative expected counts per cell over a rectangular window.

    ``cells[i, j]`` is the mass of the cell in row ``i`` (row 0 sits at
    ``extent.ymin``) and column ``j`` (column 0 at ``extent.xmin``).
    """

    cells: np.ndarray
    extent: Rect

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=float)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError("cells must be a 2D array")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("cell intensities must be finite and nonnegative")
        c = np.array(c, dtype=float, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.cells.sum())

    @property
    def cell_size(self) -> tuple[float, float]:
        return self.extent.width / self.width, self.extent.height / self.height


def save_grid(grid: IntensityGrid, path) -> None:
    """Write a grid as plain text: a header line ``width height xmin
    xmax ymin ymax`` followed by ``height`` rows of ``width`` reals
    (row 0 = bottom row).  ``#`` lines are comments."""
    ext = grid.extent
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# intensity grid: width height xmin xmax ymin ymax, then row-major cells\n")
        fh.write(f"{grid.width} {grid.height} {ext.xmin!r} {ext.xmax!r} {ext.ymin!r} {ext.ymax!r}\n")
        for row in grid.cells:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_grid(path) -> IntensityGrid:
    """Read a grid written by `save_grid` (or by hand in that format)."""
    lines = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            s = raw.strip()
            if s and not s.startswith("#"):
                lines.append(s)
    if not lines:
        raise ValueError(f"{path}: empty intensity grid file")
    head = lines[0].split()
    if len(head) != 6:
        raise ValueError(f"{path}: header must be 'width height xmin xmax ymin ymax'")
    try:
        width, height = int(head[0]), int(head[1])
        xmin, xmax, ymin, ymax = (float(v) for v in head[2:])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header") from exc
    values: list[float] = []
    for s in lines[1:]:
        values.extend(float(v) for v in s.split())
    if len(values) != width * height:
        raise ValueError(
            f"{path}: expected {width * height} cell values, found {len(values)}"
        )
    cells = np.asarray(values, dtype=float).reshape(height, width)
    return IntensityGrid(cells, Rect(xmin, xmax, ymin, ymax))


def _cell_centers(extent: Rect, width: int, height: int):
    dx = extent.width / width
    dy = extent.height / height
    xs = extent.xmin + (np.arange(width) + 0.5) * dx
    ys = extent.ymin + (np.arange(height) + 0.5) * dy
    return np.meshgrid(xs, ys)


def demo_intensity_grid(name: str, size: int = 112, total_mass: float = 400.0) -> IntensityGrid:
    """Parametric demo designs over the half court in feet.

    ``design1`` concentrates nearly all mass in a single blob over the
    painted area.  ``design2`` is a modern-guard chart: a tight rim blob,
    a broader paint blob, a faint mid-range band, and a three-point arc
    ridge with corner and top-of-arc concentrations.  Both integrate to
    ``total_mass`` expected points.
    """
    x, y = _cell_centers(DEMO_EXTENT, size, size)
    if name == "design1":
        blob = np.exp(-0.5 * ((x / 4.0) ** 2 + ((y - 3.0) / 5.0) ** 2))
        cells = blob / blob.sum()
    elif name == "design2":
        radius = np.hypot(x, y)
        angle = np.degrees(np.arctan2(y, x))
        arc = np.exp(-0.5 * ((radius - 23.75) / 0.8) ** 2)
        parts = [
            (0.22, np.exp(-0.5 * ((x / 0.75) ** 2 + ((y - 1.2) / 0.75) ** 2))),
            (0.28, np.exp(-0.5 * ((x / 3.5) ** 2 + ((y - 5.0) / 4.5) ** 2))),
            (0.10, np.exp(-0.5 * ((radius - 12.0) / 2.5) ** 2)),
            (0.16, arc),
            (0.09, arc * np.exp(-0.5 * ((angle - 4.0) / 3.0) ** 2)),
            (0.09, arc * np.exp(-0.5 * ((angle - 176.0) / 3.0) ** 2)),
            (0.06, arc * np.exp(-0.5 * ((angle - 90.0) / 8.0) ** 2)),
        ]
        cells = sum(w * p / p.sum() for w, p in parts)
    else:
        raise ValueError(f"unknown demo design {name!r}")
    cells = cells * (total_mass / cells.sum())
    return IntensityGrid(cells, DEMO_EXTENT)


def builtin_grid(name: str) -> IntensityGrid:
    """Load one of the bundled demo grids (``design1`` or ``design2``)."""
    path = _DATA_DIR / f"{name}.grid.txt"
    if not path.exists():
        raise ValueError(f"unknown builtin grid {name!r}")
    return load_grid(path)


def sample_nhpp(grid: IntensityGrid, rng: np.random.Generator) -> PointPattern:
    """Draw one inhomogeneous Poisson realization from ``grid``.

    The total count is Poisson with mean the grid's total mass; cells
    are then chosen categorically in proportion to their mass and each
    point is placed uniformly within its cell's rectangle.
    """
    lam = grid.total_mass
    if lam <= 0:
        raise ValueError("empty intensity: total mass must be positive")
    n = int(rng.poisson(lam))
    probs = (grid.cells / lam).ravel()
    probs = probs / probs.sum()
    idx = rng.choice(probs.size, size=n, p=probs)
    rows, cols = np.divmod(idx, grid.width)
    dx, dy = grid.cell_size
    u = rng.random((n, 2))
    xs = grid.extent.xmin + (cols + u[:, 0]) * dx
    ys = grid.extent.ymin + (rows + u[:, 1]) * dy
    return PointPattern(np.column_stack([xs, ys]), grid.extent)


def _jitter_with(points: np.ndarray, r: float, z: np.ndarray) -> np.ndarray:
    """Displace ``points`` by ``sqrt(0.25 r)`` times unit normals ``z``."""
    return points + np.sqrt(0.25 * r) * z


def jitter_pattern(pattern: PointPattern, r: float, rng: np.random.Generator) -> PointPattern:
    """Independent Gaussian location jitter, per-coordinate variance 0.25*r.

    ``r = 0`` returns the pattern unchanged.  Jittered points may land
    slightly outside the nominal window; the window tag is kept.
    """
    if r < 0:
        raise ValueError("jitter magnitude must be nonnegative")
    if r == 0:
        return pattern
    z = rng.standard_normal((len(pattern), 2))
    return PointPattern(_jitter_with(pattern.points, r, z), pattern.region)


def perturb_grid_half_gaussian(
    grid: IntensityGrid, r: float, rng: np.random.Generator
) -> IntensityGrid:
    """Add per-cell ``|N(0, r^2)|`` noise (``r`` is the sd; ``r=0`` is identity)."""
    if r < 0:
        raise ValueError("noise magnitude must be nonnegative")
    noise = np.abs(rng.normal(0.0, r, size=grid.cells.shape)) if r > 0 else 0.0
    return IntensityGrid(grid.cells + noise, grid.extent)


def perturb_grid_lognormal(
    grid: IntensityGrid, r: float, rng: np.random.Generator, param: str = "variance"
) -> IntensityGrid:
    """Add per-cell lognormal noise with ``log eps ~ N(0, r)``.

    ``r`` is read as the variance of ``log eps`` by default; pass
    ``param="sd"`` to read it as the standard deviation instead.  As
    ``r -> 0`` the noise degenerates to an additive constant 1 per cell.
    """
    if r < 0:
        raise ValueError("noise magnitude must be nonnegative")
    if param not in ("variance", "sd"):
        raise ValueError("param must be 'variance' or 'sd'")
    sigma = np.sqrt(r) if param == "variance" else r
    noise = rng.lognormal(mean=0.0, sigma=sigma, size=grid.cells.shape)
    return IntensityGrid(grid.cells + noise, grid.extent)


def shift_grid(grid: IntensityGrid, c: int) -> IntensityGrid:
    """Shift all columns ``c`` cells to the right (negative = left).

    Mass shifted past the window is dropped and vacated columns are
    zero-filled; ``|c|`` must be smaller than the grid width.
    """
    c = int(c)
    if abs(c) >= grid.width:
        raise ValueError("shift magnitude must be smaller than the grid width")
    out = np.zeros_like(grid.cells)
    if c > 0:
        out[:, c:] = grid.cells[:, :-c]
    elif c < 0:
        out[:, :c] = grid.cells[:, -c:]
    else:
        out[:, :] = grid.cells
    return IntensityGrid(out, grid.extent)


@dataclass(frozen=True)
class NoiseSpec:
    """A perturbation family and magnitude (``r``, or cell shift ``c``)."""

    kind: str
    magnitude: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.magnitude < 0:
            raise ValueError("noise magnitude must be nonnegative")


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared configuration for the experiment runners.

    ``designs`` maps design names to intensity grids.  ``n_pairs``
    distinct unordered pairs are drawn per design for the null
    calibration; ``n_tests`` replications are run per power level.
    """

    designs: tuple[tuple[str, IntensityGrid], ...]
    n_realizations: int = 100
    n_pairs: int = 200
    n_tests: int = 100
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[str, ...] = ("M1", "M2", "M3", "M4", "M5", "M6")
    pairing: str = "without_replacement"

    def __post_init__(self):
        if not self.designs:
            raise ValueError("need at least one design")
        if self.n_realizations < 2:
            raise ValueError("need at least 2 realizations per design")
        if self.n_pairs < 1 or self.n_tests < 1:
            raise ValueError("need at least one pair/test")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.pairing != "without_replacement":
            raise ValueError("only 'without_replacement' pairing is implemented")
        if not self.methods:
            raise ValueError("need at least one method")


@dataclass(frozen=True)
class Type1Row:
    design: str
    method: str
    n_tests: int
    n_reject: int
    rate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class PowerRow:
    design: str
    noise: str
    magnitude: float
    method: str
    n_tests: int
    n_reject: int
    mean_p: float


def _clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    a = (1.0 - level) / 2.0
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1.0 - a, k + 1, n - k))
    return lo, hi


def _realization_pool(grid, seq, count):
    return [sample_nhpp(grid, np.random.default_rng(child)) for child in seq.spawn(count)]


def run_type1_experiment(cfg: ExperimentConfig) -> list[Type1Row]:
    """Null calibration: same-design pairs tested at ``cfg.alpha``.

    For each design, a pool of ``n_realizations`` patterns is drawn and
    ``n_pairs`` distinct unordered pairs are sampled without
    replacement; every configured method tests every pair.  Rows report
    rejection counts with exact (Clopper-Pearson) 95% binomial CIs.
    """
    n = cfg.n_realizations
    max_pairs = n * (n - 1) // 2
    if cfg.n_pairs > max_pairs:
        raise ValueError(
            f"n_pairs={cfg.n_pairs} exceeds the {max_pairs} distinct pairs of {n} realizations"
        )
    rows: list[Type1Row] = []
    root = np.random.SeedSequence(cfg.seed)
    for (name, grid), dseq in zip(cfg.designs, root.spawn(len(cfg.designs))):
        pool_seq, pair_seq = dseq.spawn(2)
        pool = _realization_pool(grid, pool_seq, n)
        iu, ju = np.triu_indices(n, k=1)
        sel = np.random.default_rng(pair_seq).choice(max_pairs, size=cfg.n_pairs, replace=False)
        pairs = [(pool[iu[s]], pool[ju[s]]) for s in sel]
        for method in cfg.methods:
            n_rej = sum(run_method(method, a, b, alpha=cfg.alpha).reject for a, b in pairs)
            lo, hi = _clopper_pearson(n_rej, cfg.n_pairs)
            rows.append(
                Type1Row(name, method, cfg.n_pairs, n_rej, n_rej / cfg.n_pairs, lo, hi)
            )
    return rows


def run_power_experiment(
    cfg: ExperimentConfig, noise: NoiseSpec, magnitudes
) -> list[PowerRow]:
    """Power sweep: each base realization against a perturbed partner.

    ``location_jitter`` jitters the base pattern itself (one set of
    unit-normal displacements per replication, rescaled per magnitude,
    so the sweep is coupled by common random numbers and the per-level
    trend is monotone net of Monte Carlo noise).  The grid-noise kinds
    perturb the intensity map once per magnitude, regenerate fresh
    realizations from it, and test them against the base realizations.

    Returns one `PowerRow` per (design, magnitude, method) with the
    rejection count and the mean p-value over ``cfg.n_tests`` tests.
    """
    mags = [float(m) for m in magnitudes]
    if not mags:
        raise ValueError("need at least one magnitude")
    if any(m < 0 for m in mags):
        raise ValueError("magnitudes must be nonnegative")
    if noise.kind == "pixel_shift" and any(m != int(m) for m in mags):
        raise ValueError("pixel_shift magnitudes must be integers")
    rows: list[PowerRow] = []
    root = np.random.SeedSequence(cfg.seed)
    for (name, grid), dseq in zip(cfg.designs, root.spawn(len(cfg.designs))):
        base_seq, noise_seq = dseq.spawn(2)
        base = _realization_pool(grid, base_seq, cfg.n_tests)

        def emit(mag: float, partners) -> None:
            for method in cfg.methods:
                results = [
                    run_method(method, s, ss, alpha=cfg.alpha)
                    for s, ss in zip(base, partners)
                ]
                rows.append(
                    PowerRow(
                        design=name,
                        noise=noise.kind,
                        magnitude=mag,
                        method=method,
                        n_tests=cfg.n_tests,
                        n_reject=sum(r.reject for r in results),
                        mean_p=float(np.mean([r.p_value for r in results])),
                    )
                )

        if noise.kind == "location_jitter":
            draws = [
                np.random.default_rng(child).standard_normal((len(pat), 2))
                for pat, child in zip(base, noise_seq.spawn(cfg.n_tests))
            ]
            for mag in mags:
                partners = [
                    pat if mag == 0 else PointPattern(_jitter_with(pat.points, mag, z), pat.region)
                    for pat, z in zip(base, draws)
                ]
                emit(mag, partners)
        else:
            for mag, mseq in zip(mags, noise_seq.spawn(len(mags))):
                perturb_seq, regen_seq = mseq.spawn(2)
                if noise.kind == "half_gaussian":
                    pgrid = perturb_grid_half_gaussian(grid, mag, np.random.default_rng(perturb_seq))
                elif noise.kind == "lognormal":
                    pgrid = perturb_grid_lognormal(grid, mag, np.random.default_rng(perturb_seq))
                else:
                    pgrid = shift_grid(grid, int(mag))
                partners = _realization_pool(pgrid, regen_seq, cfg.n_tests)
                emit(mag, partners)
    return rows


def read_flat_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` config file.

    Blank lines and ``#`` comments are ignored; keys are lowercased.
    Duplicate keys take the last value.
    """
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = s.split("=", 1)
            out[key.strip().lower()] = value.strip()
    return out
