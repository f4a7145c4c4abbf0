import logging

# Disable logging during the test
logging.disable(logging.CRITICAL)

import unittest  # noqa: E402

import numpy as np  # noqa: E402
from scipy import stats  # noqa: E402

from holab.processors.diffusion import (  # noqa: E402
    simulate_radial,
    simulate_radial_ensemble,
    terminal_points,
)
from holab.processors.ho_operators import coefficients  # noqa: E402
from holab.processors.jumps import (  # noqa: E402
    compare_constructions,
    couple_full,
    full_ensemble,
    jump_window_counts,
    projection_directions,
    simulate_skew_product,
    simulate_thinning,
    trajectory_frame,
)
from holab.processors.rootsys import build_root_system, radial_decompose  # noqa: E402
from holab.tools.rng import MarkStream  # noqa: E402
from holab.validation.validators import StepperConfig  # noqa: E402


class TinyMarks:
    """Marks far below any clock value, so every root keeps jumping."""

    def next(self, label: int) -> float:
        return 1e-9


def assert_angular_consistent(test: unittest.TestCase, R, trajectory):
    for point, index in zip(trajectory.base.positions, trajectory.angular_indices):
        test.assertEqual(radial_decompose(R, point).angular.index, int(index))


def cumulative_clock(times, rates):
    """Left-point integral of ``rates`` on the grid ``times``."""
    return np.concatenate([[0.0], np.cumsum(rates[:-1] * np.diff(times))])


def cumulative_marks(marks, label, total):
    """Cumulative marks of ``label`` up to the first one beyond ``total``."""
    values, threshold = [], marks.next(label)
    while threshold <= total:
        values.append(threshold)
        threshold += marks.next(label)
    return values


def crossing_rows(clock, thresholds):
    return [int(np.searchsorted(clock, threshold, side="left")) for threshold in thresholds]


def crossing_times(times, clock, rows, thresholds):
    out = []
    for row, threshold in zip(rows, thresholds):
        fraction = (threshold - clock[row - 1]) / (clock[row] - clock[row - 1])
        out.append(times[row - 1] + fraction * (times[row] - times[row - 1]))
    return out


class TestThinning(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.b2 = build_root_system("B", 2)
        self.cfg = StepperConfig(dt_max=0.005, t_horizon=1.0, seed=21)

    def test_jumps_are_reflections(self):
        trajectory = simulate_thinning(self.rank1, 1.0, [0.3], self.cfg)
        for event in trajectory.jumps:
            np.testing.assert_allclose(event.after, -event.before)
        self.assertEqual(trajectory.method, "thinning")
        self.assertEqual(len(trajectory.angular_path), trajectory.jump_count + 1)

    def test_angular_part_tracks_chamber(self):
        for R, x0 in ((self.rank1, [0.3]), (self.b2, [0.6, 0.2])):
            trajectory = simulate_thinning(R, 1.0, x0, self.cfg)
            assert_angular_consistent(self, R, trajectory)

    def test_start_in_other_chamber(self):
        trajectory = simulate_thinning(self.rank1, 1.0, [-2.0], self.cfg.model_copy(update={"rate_scale": 0.0}))
        self.assertEqual(trajectory.angular_path[0][1].label, "s0")
        self.assertLess(trajectory.terminal[0], 0.0)

    def test_no_jumps_without_rates(self):
        cfg = self.cfg.model_copy(update={"rate_scale": 0.0})
        trajectory = simulate_thinning(self.b2, 1.0, [0.6, 0.2], cfg)
        self.assertEqual(trajectory.jump_count, 0)
        self.assertEqual(trajectory.residual_intensity, 0.0)
        self.assertTrue(trajectory.final_angular.is_identity)

    def test_undetermined_when_still_active(self):
        cfg = self.cfg.model_copy(update={"t_horizon": 0.1})
        trajectory = simulate_thinning(self.rank1, 1.0, [0.3], cfg)
        self.assertIsNone(trajectory.final_angular)
        self.assertGreater(trajectory.residual_intensity, 1e-6)

    def test_reproducible(self):
        a = simulate_thinning(self.b2, 1.0, [0.6, 0.2], self.cfg, trajectory_id=4)
        b = simulate_thinning(self.b2, 1.0, [0.6, 0.2], self.cfg, trajectory_id=4)
        np.testing.assert_array_equal(a.jump_times, b.jump_times)
        np.testing.assert_array_equal(a.terminal, b.terminal)

    def test_irregular_start(self):
        with self.assertRaises(ValueError):
            simulate_thinning(self.rank1, 1.0, [0.0], self.cfg)
        with self.assertRaises(ValueError):
            simulate_thinning(self.b2, 1.0, [1.0, 1.0], self.cfg)


class TestSkewProduct(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.b2 = build_root_system("B", 2)
        self.cfg = StepperConfig(dt_max=0.005, t_horizon=1.0, seed=8)

    def test_radial_part_is_the_radial_path(self):
        radial = simulate_radial(self.rank1, 1.0, [0.3], self.cfg)
        trajectory = simulate_skew_product(self.rank1, 1.0, [0.3], self.cfg, radial=radial)
        np.testing.assert_allclose(np.abs(trajectory.base.positions), radial.positions)
        self.assertEqual(trajectory.method, "skew")

    def test_angular_part_tracks_chamber(self):
        for R, x0 in ((self.rank1, [0.3]), (self.b2, [0.6, 0.2]), (self.b2, [-0.2, 0.6])):
            trajectory = simulate_skew_product(R, 1.0, x0, self.cfg)
            assert_angular_consistent(self, R, trajectory)

    def test_clock_thresholds_lie_ahead(self):
        trajectory = simulate_skew_product(self.b2, 1.0, [0.6, 0.2], self.cfg, root_order=[3, 2, 1, 0])
        clock = trajectory.clock
        self.assertEqual(clock.root_order, (3, 2, 1, 0))
        self.assertTrue(np.all(np.isfinite(clock.A)))
        self.assertTrue(np.all(clock.next_thresholds > clock.A))

    def test_clocks_integrate_along_the_jumped_path(self):
        R = self.b2
        coeffs = coefficients(R, 1.0)
        for order in ([0, 1, 2, 3], [0, 2, 1, 3]):
            trajectory = simulate_skew_product(R, 1.0, [0.6, 0.2], self.cfg, root_order=order, trajectory_id=1)
            times, positions = trajectory.base.times, trajectory.base.positions
            rates = coeffs.full_coefficients(positions[:-1])[:, order]
            expected = np.sum(rates * np.diff(times)[:, None], axis=0)
            np.testing.assert_allclose(trajectory.clock.A, expected, rtol=1e-9, atol=1e-12)

    def test_first_level_matches_hand_built_path(self):
        R, order = self.b2, [0, 2, 1, 3]
        coeffs = coefficients(R, 1.0)
        cfg = self.cfg.model_copy(update={"t_horizon": 3.0})
        first = order[0]
        for trajectory_id in range(3):
            radial = simulate_radial(R, 1.0, [0.6, 0.2], cfg, trajectory_id)
            trajectory = simulate_skew_product(
                R, 1.0, [0.6, 0.2], cfg, root_order=order, trajectory_id=trajectory_id, radial=radial
            )
            times, points = radial.times, radial.positions

            # X^1: the radial path reflected across the first root at each crossing of A^0
            clock = cumulative_clock(times, coeffs.full_coefficients(points)[:, first])
            thresholds = cumulative_marks(MarkStream(cfg.seed, trajectory_id, 0.5), 0, clock[-1])
            rows = crossing_rows(clock, thresholds)
            flips = np.zeros(len(times), dtype=int)
            for row in rows:
                flips[row:] += 1
            level_one = np.where(
                (flips % 2 == 1)[:, None], points @ R.reflection_matrices[first].T, points
            )
            hand_times = crossing_times(times, clock, rows, thresholds)

            others = [event for event in trajectory.jumps if event.root != first]
            cutoff = others[0].time if others else np.inf
            reported = [event.time for event in trajectory.jumps if event.root == first and event.time < cutoff]
            np.testing.assert_allclose(reported, [t for t in hand_times if t < cutoff], atol=1e-9)

            marks = MarkStream(cfg.seed, trajectory_id, 0.5)
            for level in range(1, len(order)):
                level_clock = cumulative_clock(
                    times, coeffs.full_coefficients(level_one)[:, order[level]]
                )
                threshold = marks.next(level)
                if others and others[0].root == order[level]:
                    row = crossing_rows(level_clock, [threshold])[0]
                    hand = crossing_times(times, level_clock, [row], [threshold])[0]
                    self.assertAlmostEqual(others[0].time, hand, places=9)
                elif not others:
                    self.assertLess(level_clock[-1], threshold)

    def test_jump_times_sorted_and_inside_horizon(self):
        trajectory = simulate_skew_product(self.rank1, 1.0, [0.2], self.cfg)
        times = trajectory.jump_times
        self.assertTrue(np.all(np.diff(times) >= 0))
        self.assertTrue(np.all((times >= 0) & (times <= 1.0)))
        for event in trajectory.jumps:
            np.testing.assert_allclose(event.after, -event.before)

    def test_shared_marks_and_path_are_deterministic(self):
        radial = simulate_radial(self.b2, 1.0, [0.6, 0.2], self.cfg)
        a = simulate_skew_product(self.b2, 1.0, [0.6, 0.2], self.cfg, marks=MarkStream(1, 0, 0.5), radial=radial)
        b = simulate_skew_product(self.b2, 1.0, [0.6, 0.2], self.cfg, marks=MarkStream(1, 0, 0.5), radial=radial)
        np.testing.assert_array_equal(a.jump_times, b.jump_times)
        self.assertEqual(a.terminal_angular, b.terminal_angular)

    def test_bad_root_order(self):
        with self.assertRaises(ValueError):
            simulate_skew_product(self.b2, 1.0, [0.6, 0.2], self.cfg, root_order=[0, 1, 2, 2])
        with self.assertRaises(ValueError):
            simulate_skew_product(self.b2, 1.0, [0.6, 0.2], self.cfg, root_order=[0, 1])

    def test_runaway_clock(self):
        cfg = self.cfg.model_copy(update={"max_jumps": 5})
        with self.assertRaises(RuntimeError):
            simulate_skew_product(self.rank1, 1.0, [0.5], cfg, marks=TinyMarks())


class TestEnsembleAndCoupling(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.cfg = StepperConfig(dt_max=0.01, t_horizon=0.5, seed=2)

    def test_unknown_method(self):
        with self.assertRaises(ValueError):
            full_ensemble(self.rank1, 1.0, [0.5], self.cfg, 2, method="exact", threads=1)

    def test_ensemble_methods(self):
        for method in ("thinning", "skew"):
            ensemble = full_ensemble(self.rank1, 1.0, [0.5], self.cfg, 3, method=method, threads=1)
            self.assertEqual([t.method for t in ensemble], [method] * 3)

    def test_comparison_needs_many_paths(self):
        with self.assertRaises(ValueError):
            compare_constructions(self.rank1, 1.0, [0.5], self.cfg, 10)

    def test_couple_full_identical_starts_merge(self):
        record = couple_full(self.rank1, 1.0, [0.5], [0.5], self.cfg)
        self.assertTrue(record.merged)
        self.assertEqual(record.merge_time, 0.0)
        np.testing.assert_array_equal(record.x.jump_times, record.y.jump_times)

    def test_couple_full_needs_same_chamber(self):
        with self.assertRaises(ValueError):
            couple_full(self.rank1, 1.0, [0.5], [-0.5], self.cfg)


class TestLawAgreement(unittest.TestCase):
    """Seeded two-sample comparisons, each at Bonferroni-corrected level 0.01."""

    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.b2 = build_root_system("B", 2)
        self.cfg = StepperConfig(dt_max=0.02, t_horizon=1.0, seed=21)

    def test_thinning_and_skew_product_agree(self):
        report = compare_constructions(self.rank1, 1.0, [0.5], self.cfg, 1000, "thinning", "skew", threads=1)
        self.assertTrue(report.passed, report.failures())
        self.assertGreater(report.estimates["mean_jumps_a"], 0.2)

    def test_split_sample_passes(self):
        report = compare_constructions(
            self.rank1, 1.0, [0.5], self.cfg, 1000, "thinning", "thinning", trajectory_offset=2000, threads=1
        )
        self.assertTrue(report.passed, report.failures())

    def test_doubled_rates_are_detected(self):
        report = compare_constructions(
            self.rank1, 1.0, [0.5], self.cfg, 1000, "thinning", "skew", rate_scale_b=2.0,
            trajectory_offset=4000, threads=1,
        )
        self.assertFalse(report.passed)
        self.assertIn("chi2_jump_counts", report.failures())
        self.assertGreater(report.estimates["mean_jumps_b"], 1.5 * report.estimates["mean_jumps_a"])

    def test_root_order_does_not_change_the_law(self):
        report = compare_constructions(
            self.b2, 1.0, [1.0, 0.4], self.cfg, 1000, "skew", "skew",
            root_order_a=[0, 1, 2, 3], root_order_b=[3, 2, 1, 0], threads=1,
        )
        self.assertTrue(report.passed, report.failures())

    def test_radial_part_has_the_radial_law(self):
        full = full_ensemble(self.rank1, 1.0, [0.5], self.cfg, 500, threads=1)
        radial = simulate_radial_ensemble(self.rank1, 1.0, [0.5], self.cfg, 500, trajectory_offset=500, threads=1)
        norms = np.abs(np.vstack([t.terminal for t in full])[:, 0])
        result = stats.ks_2samp(norms, terminal_points(radial)[:, 0])
        self.assertGreater(result.pvalue, 0.01)

    def test_weyl_image_of_start_moves_the_law(self):
        v = self.b2.weyl_group[1]
        x0 = np.array([1.0, 0.4])
        moved = full_ensemble(self.b2, 1.0, x0, self.cfg, 500, threads=1)
        started = full_ensemble(self.b2, 1.0, v.act(x0), self.cfg, 500, trajectory_offset=500, threads=1)
        image = v.act(np.vstack([t.terminal for t in moved]))
        direct = np.vstack([t.terminal for t in started])
        directions = projection_directions(2)
        for direction in directions:
            result = stats.ks_2samp(image @ direction, direct @ direction)
            self.assertGreater(result.pvalue, 0.01 / len(directions))

    def test_jumps_stop(self):
        cfg = StepperConfig(dt_max=0.05, t_horizon=15.0, seed=5)
        ensemble = full_ensemble(self.rank1, 1.0, [0.5], cfg, 200, threads=1)
        table = jump_window_counts(ensemble, [(0.0, 5.0), (10.0, 15.0)])
        early, late = table["mean_jumps"]
        self.assertGreater(early, 0.2)
        self.assertLess(late, 0.01)


class TestTables(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.cfg = StepperConfig(dt_max=0.005, t_horizon=1.0, seed=13)

    def test_window_counts_add_up(self):
        ensemble = full_ensemble(self.rank1, 1.0, [0.3], self.cfg, 5, threads=1)
        table = jump_window_counts(ensemble, [(0.0, 0.5), (0.5, 2.0)])
        self.assertEqual(list(table.columns), ["start", "end", "mean_jumps", "stderr"])
        mean_total = np.mean([t.jump_count for t in ensemble])
        self.assertAlmostEqual(float(table["mean_jumps"].sum()), mean_total)

    def test_trajectory_frame(self):
        trajectory = simulate_thinning(self.rank1, 1.0, [0.3], self.cfg)
        frame = trajectory_frame(self.rank1, trajectory)
        self.assertEqual(list(frame.columns), ["t", "x1", "angular_word", "jump_flag"])
        self.assertEqual(int(frame["jump_flag"].sum()), trajectory.jump_count)
        self.assertEqual(frame["angular_word"].iloc[0], "id")

    def test_projection_directions(self):
        np.testing.assert_array_equal(projection_directions(1), [[1.0]])
        directions = projection_directions(3)
        self.assertEqual(directions.shape, (5, 3))
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)
        np.testing.assert_array_equal(directions, projection_directions(3))


if __name__ == "__main__":
    unittest.main()
