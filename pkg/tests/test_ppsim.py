import numpy as np
import pytest

from depthks.geometry import Rect
from depthks.ppsim import (
    DEMO_EXTENT,
    ExperimentConfig,
    IntensityGrid,
    NoiseSpec,
    _clopper_pearson,
    builtin_grid,
    demo_intensity_grid,
    jitter_pattern,
    load_grid,
    perturb_grid_half_gaussian,
    perturb_grid_lognormal,
    read_flat_config,
    run_power_experiment,
    run_type1_experiment,
    sample_nhpp,
    save_grid,
    shift_grid,
)

UNIT = Rect(0.0, 1.0, 0.0, 1.0)


def flat_grid(mass, shape=(4, 4), extent=UNIT):
    cells = np.full(shape, mass / (shape[0] * shape[1]))
    return IntensityGrid(cells, extent)


class TestIntensityGrid:
    def test_properties(self):
        g = IntensityGrid(np.arange(12, dtype=float).reshape(3, 4), Rect(0, 8, 0, 6))
        assert (g.height, g.width) == (3, 4)
        assert g.total_mass == 66.0
        assert g.cell_size == (2.0, 2.0)

    @pytest.mark.parametrize(
        "cells", [np.array([1.0, 2.0]), np.array([[-1.0]]), np.array([[np.nan]])]
    )
    def test_bad_cells_rejected(self, cells):
        with pytest.raises(ValueError):
            IntensityGrid(cells, UNIT)

    def test_cells_read_only(self):
        g = flat_grid(4.0)
        with pytest.raises(ValueError):
            g.cells[0, 0] = 5.0


class TestGridIO:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        g = IntensityGrid(rng.random((5, 7)) * 3.0, Rect(-2.5, 2.5, -0.5, 4.2))
        path = tmp_path / "g.grid.txt"
        save_grid(g, path)
        back = load_grid(path)
        assert np.array_equal(back.cells, g.cells)
        assert back.extent == g.extent

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# comment\n\n2 2 0 1 0 1\n1 2\n\n# mid\n3 4\n")
        g = load_grid(path)
        assert g.cells.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("2 2 0 1 0\n1 2 3 4\n")
        with pytest.raises(ValueError, match="header"):
            load_grid(path)

    def test_wrong_cell_count(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("2 2 0 1 0 1\n1 2 3\n")
        with pytest.raises(ValueError, match="expected 4 cell values"):
            load_grid(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("# nothing\n")
        with pytest.raises(ValueError, match="empty"):
            load_grid(path)


class TestDemoGrids:
    @pytest.mark.parametrize("name", ["design1", "design2"])
    def test_mass_and_shape(self, name):
        g = demo_intensity_grid(name)
        assert g.cells.shape == (112, 112)
        assert g.total_mass == pytest.approx(400.0)
        assert g.extent == DEMO_EXTENT

    def test_design1_concentrates_in_paint(self):
        g = demo_intensity_grid("design1")
        x, y = np.meshgrid(
            np.linspace(-25, 25, 112, endpoint=False) + 25 / 112,
            np.linspace(-5, 42, 112, endpoint=False) + 47 / 224,
        )
        paint = (np.abs(x) <= 8.0) & (y <= 19.0)
        assert g.cells[paint].sum() / g.total_mass > 0.5

    def test_design2_has_mass_near_arc(self):
        g = demo_intensity_grid("design2")
        x, y = np.meshgrid(
            np.linspace(-25, 25, 112, endpoint=False) + 25 / 112,
            np.linspace(-5, 42, 112, endpoint=False) + 47 / 224,
        )
        ring = np.abs(np.hypot(x, y) - 23.75) <= 2.5
        assert g.cells[ring].sum() / g.total_mass > 0.3

    def test_unknown_design(self):
        with pytest.raises(ValueError, match="unknown demo design"):
            demo_intensity_grid("design9")

    @pytest.mark.parametrize("name", ["design1", "design2"])
    def test_shipped_files_match_builders(self, name):
        shipped = builtin_grid(name)
        built = demo_intensity_grid(name)
        assert np.array_equal(shipped.cells, built.cells)
        assert shipped.extent == built.extent


class TestSampleNhpp:
    def test_deterministic_given_seed(self):
        g = flat_grid(50.0)
        p1 = sample_nhpp(g, np.random.default_rng(7))
        p2 = sample_nhpp(g, np.random.default_rng(7))
        assert np.array_equal(p1.points, p2.points)

    def test_points_stay_in_window(self):
        g = flat_grid(200.0, extent=Rect(-3.0, 1.0, 2.0, 4.0))
        p = sample_nhpp(g, np.random.default_rng(1))
        assert np.all(g.extent.contains(p.x, p.y))

    def test_single_hot_cell(self):
        cells = np.zeros((4, 4))
        cells[2, 3] = 80.0  # row 2, column 3: x in (.75, 1], y in (.5, .75)
        g = IntensityGrid(cells, UNIT)
        p = sample_nhpp(g, np.random.default_rng(2))
        assert np.all((p.x >= 0.75) & (p.x <= 1.0))
        assert np.all((p.y >= 0.5) & (p.y <= 0.75))

    def test_count_moments(self):
        g = flat_grid(400.0)
        rng = np.random.default_rng(3)
        counts = [len(sample_nhpp(g, rng)) for _ in range(200)]
        assert abs(np.mean(counts) - 400.0) < 5.0  # sd of the mean is ~1.4
        assert 250.0 < np.var(counts) < 600.0  # Poisson variance is 400

    def test_cell_occupancy_proportions(self):
        cells = np.array([[100.0, 300.0]])
        g = IntensityGrid(cells, Rect(0, 2, 0, 1))
        p = sample_nhpp(g, np.random.default_rng(4))
        frac_right = np.mean(p.x > 1.0)
        assert abs(frac_right - 0.75) < 0.07

    def test_empty_grid_rejected(self):
        g = IntensityGrid(np.zeros((2, 2)), UNIT)
        with pytest.raises(ValueError, match="total mass"):
            sample_nhpp(g, np.random.default_rng(0))


class TestJitter:
    def test_zero_magnitude_is_identity(self):
        p = sample_nhpp(flat_grid(30.0), np.random.default_rng(5))
        assert jitter_pattern(p, 0.0, np.random.default_rng(6)) is p

    def test_displacement_variance(self):
        pts = np.zeros((4000, 2))
        from depthks.geometry import PointPattern

        p = PointPattern(pts, UNIT)
        out = jitter_pattern(p, 4.0, np.random.default_rng(7))
        # per-coordinate variance is 0.25 * r = 1.0
        assert np.var(out.points[:, 0]) == pytest.approx(1.0, abs=0.1)
        assert np.var(out.points[:, 1]) == pytest.approx(1.0, abs=0.1)

    def test_negative_magnitude_rejected(self):
        p = sample_nhpp(flat_grid(10.0), np.random.default_rng(8))
        with pytest.raises(ValueError):
            jitter_pattern(p, -1.0, np.random.default_rng(9))


class TestGridNoise:
    def test_half_gaussian_zero_is_identity(self):
        g = flat_grid(16.0)
        out = perturb_grid_half_gaussian(g, 0.0, np.random.default_rng(0))
        assert np.array_equal(out.cells, g.cells)

    def test_half_gaussian_adds_folded_normal(self):
        g = IntensityGrid(np.zeros((100, 100)), UNIT)
        out = perturb_grid_half_gaussian(g, 2.0, np.random.default_rng(1))
        assert np.all(out.cells >= 0.0)
        # E|N(0, r^2)| = r * sqrt(2/pi) ~ 1.596
        assert out.cells.mean() == pytest.approx(2.0 * np.sqrt(2.0 / np.pi), abs=0.05)

    def test_lognormal_zero_adds_unit_constant(self):
        g = flat_grid(16.0)
        out = perturb_grid_lognormal(g, 0.0, np.random.default_rng(2))
        assert np.allclose(out.cells, g.cells + 1.0)

    def test_lognormal_parameterization(self):
        g = IntensityGrid(np.zeros((200, 200)), UNIT)
        as_var = perturb_grid_lognormal(g, 4.0, np.random.default_rng(3), param="variance")
        as_sd = perturb_grid_lognormal(g, 4.0, np.random.default_rng(3), param="sd")
        # sigma = 2 vs sigma = 4: the heavier tail dominates the mean
        assert as_sd.cells.mean() > as_var.cells.mean()
        assert as_var.cells.mean() == pytest.approx(np.exp(2.0), rel=0.2)

    def test_lognormal_bad_param(self):
        with pytest.raises(ValueError, match="param"):
            perturb_grid_lognormal(flat_grid(1.0), 1.0, np.random.default_rng(0), param="mean")

    @pytest.mark.parametrize("fn", [perturb_grid_half_gaussian, perturb_grid_lognormal])
    def test_negative_magnitude_rejected(self, fn):
        with pytest.raises(ValueError):
            fn(flat_grid(1.0), -0.5, np.random.default_rng(0))


class TestShiftGrid:
    row = np.array([[1.0, 2.0, 3.0, 4.0]])

    def test_right_shift_zero_fills(self):
        g = IntensityGrid(self.row, Rect(0, 4, 0, 1))
        assert shift_grid(g, 1).cells.tolist() == [[0.0, 1.0, 2.0, 3.0]]

    def test_left_shift_zero_fills(self):
        g = IntensityGrid(self.row, Rect(0, 4, 0, 1))
        assert shift_grid(g, -2).cells.tolist() == [[3.0, 4.0, 0.0, 0.0]]

    def test_zero_shift(self):
        g = IntensityGrid(self.row, Rect(0, 4, 0, 1))
        assert np.array_equal(shift_grid(g, 0).cells, g.cells)

    def test_mass_is_dropped_not_wrapped(self):
        g = IntensityGrid(self.row, Rect(0, 4, 0, 1))
        assert shift_grid(g, 2).total_mass == 3.0  # lost cells 3 and 4

    @pytest.mark.parametrize("c", [4, -4, 7])
    def test_too_large_shift_rejected(self, c):
        g = IntensityGrid(self.row, Rect(0, 4, 0, 1))
        with pytest.raises(ValueError):
            shift_grid(g, c)


class TestNoiseSpec:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown noise kind"):
            NoiseSpec("wobble", 1.0)

    def test_negative_magnitude(self):
        with pytest.raises(ValueError):
            NoiseSpec("location_jitter", -1.0)


class TestExperimentConfig:
    def base(self, **kw):
        args = dict(designs=(("d", flat_grid(20.0)),))
        args.update(kw)
        return ExperimentConfig(**args)

    def test_defaults(self):
        cfg = self.base()
        assert cfg.n_realizations == 100
        assert cfg.n_pairs == 200
        assert cfg.methods == ("M1", "M2", "M3", "M4", "M5", "M6")

    @pytest.mark.parametrize(
        "kw",
        [
            dict(designs=()),
            dict(n_realizations=1),
            dict(n_pairs=0),
            dict(alpha=0.0),
            dict(alpha=1.0),
            dict(pairing="bootstrap"),
            dict(methods=()),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            self.base(**kw)


class TestClopperPearson:
    def test_boundary_cases(self):
        lo, hi = _clopper_pearson(0, 10)
        assert lo == 0.0
        assert hi == pytest.approx(1.0 - 0.025 ** (1 / 10))
        lo, hi = _clopper_pearson(10, 10)
        assert hi == 1.0
        assert lo == pytest.approx(0.025 ** (1 / 10))

    def test_interior_symmetry(self):
        lo, hi = _clopper_pearson(5, 10)
        assert lo == pytest.approx(1.0 - hi)
        assert lo < 0.5 < hi


class TestRunType1:
    def small_cfg(self, **kw):
        args = dict(
            designs=(("toy", flat_grid(60.0)),),
            n_realizations=8,
            n_pairs=6,
            methods=("M3", "M6"),
            seed=11,
        )
        args.update(kw)
        return ExperimentConfig(**args)

    def test_row_structure_and_determinism(self):
        cfg = self.small_cfg()
        rows = run_type1_experiment(cfg)
        assert [(r.design, r.method) for r in rows] == [("toy", "M3"), ("toy", "M6")]
        for r in rows:
            assert r.n_tests == 6
            assert 0 <= r.n_reject <= 6
            assert r.rate == pytest.approx(r.n_reject / 6)
            assert 0.0 <= r.ci_low <= r.rate <= r.ci_high <= 1.0
        again = run_type1_experiment(cfg)
        assert again == rows

    def test_too_many_pairs_rejected(self):
        with pytest.raises(ValueError, match="distinct pairs"):
            run_type1_experiment(self.small_cfg(n_pairs=999))


class TestRunPower:
    def small_cfg(self, **kw):
        args = dict(
            designs=(("toy", flat_grid(60.0)),),
            n_realizations=4,
            n_tests=5,
            methods=("M3", "M6"),
            seed=13,
        )
        args.update(kw)
        return ExperimentConfig(**args)

    def test_zero_jitter_never_rejects(self):
        # magnitude 0 pairs each pattern with itself: statistic 0, p = 1
        rows = run_power_experiment(
            self.small_cfg(), NoiseSpec("location_jitter"), magnitudes=[0.0]
        )
        for r in rows:
            assert r.n_reject == 0
            assert r.mean_p == 1.0

    def test_row_grid_and_determinism(self):
        cfg = self.small_cfg()
        spec = NoiseSpec("half_gaussian")
        rows = run_power_experiment(cfg, spec, magnitudes=[0.01, 0.1])
        assert [(r.magnitude, r.method) for r in rows] == [
            (0.01, "M3"),
            (0.01, "M6"),
            (0.1, "M3"),
            (0.1, "M6"),
        ]
        for r in rows:
            assert r.design == "toy"
            assert r.noise == "half_gaussian"
            assert r.n_tests == 5
        assert run_power_experiment(cfg, spec, magnitudes=[0.01, 0.1]) == rows

    def test_pixel_shift_requires_integers(self):
        with pytest.raises(ValueError, match="integer"):
            run_power_experiment(
                self.small_cfg(), NoiseSpec("pixel_shift"), magnitudes=[1.5]
            )

    def test_empty_magnitudes_rejected(self):
        with pytest.raises(ValueError):
            run_power_experiment(self.small_cfg(), NoiseSpec("location_jitter"), [])

    def test_strong_shift_rejects(self):
        g = flat_grid(80.0, shape=(1, 8), extent=Rect(0, 8, 0, 1))
        cfg = self.small_cfg(designs=(("toy", g),), methods=("M3",))
        rows = run_power_experiment(cfg, NoiseSpec("pixel_shift"), magnitudes=[6])
        assert rows[0].n_reject >= 4


class TestFlatConfig:
    def test_parse(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text(
            "# experiment\nSEED = 42\nalpha=0.05  # trailing comment\n\n"
            "methods = M3,M6\nseed = 43\n"
        )
        got = read_flat_config(path)
        assert got == {"seed": "43", "alpha": "0.05", "methods": "M3,M6"}

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("seed 42\n")
        with pytest.raises(ValueError, match="key = value"):
            read_flat_config(path)
