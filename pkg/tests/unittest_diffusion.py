import logging

# Disable logging during the test
logging.disable(logging.CRITICAL)

import math  # noqa: E402
import unittest  # noqa: E402

import numpy as np  # noqa: E402

from holab.processors.diffusion import (  # noqa: E402
    CouplingRecord,
    TrajectoryRecord,
    _euler_step,
    couple_ensemble,
    coupling_statistics,
    mirror_couple,
    radial_checkpoint_ensemble,
    simulate_radial,
    simulate_radial_checkpoints,
    simulate_radial_ensemble,
    step_radial,
    terminal_points,
)
from holab.processors.rootsys import build_root_system  # noqa: E402
from holab.tools.rng import NORMALS, KeyedStream  # noqa: E402
from holab.validation.validators import StepperConfig  # noqa: E402


class TestStepRadial(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)

    def test_zero_increment_follows_drift(self):
        x = step_radial(self.rank1, 1.0, [1.0], 0.01, [0.0])
        self.assertAlmostEqual(x[0], 1.0 + 0.01 / math.tanh(1.0), places=14)

    def test_rejected_proposal_halves_step(self):
        # cap 0.05 * 0.1^2 = 5e-4, halved three times before the proposal stays positive
        x = step_radial(self.rank1, 1.0, [0.1], 0.01, [-10.0])
        dt = 5e-4 / 8
        expected = 0.1 + dt / math.tanh(0.1) - 10.0 * math.sqrt(dt)
        self.assertAlmostEqual(x[0], expected, places=12)
        self.assertGreater(x[0], 0.0)

    def test_wall_contact(self):
        cfg = StepperConfig(dt_max=0.01, max_rejections=2)
        with self.assertRaises(RuntimeError):
            step_radial(self.rank1, 1.0, [1.0], 0.01, [-1e6], cfg)

    def test_start_outside_chamber(self):
        with self.assertRaises(ValueError):
            step_radial(self.rank1, 1.0, [-1.0], 0.01, [0.0])
        with self.assertRaises(ValueError):
            step_radial(build_root_system("B", 2), 1.0, [0.5, 1.0], 0.01, [0.0, 0.0])


class ScriptedWall:
    """Zero drift, far walls, and the first ``rejections`` proposals refused."""

    def __init__(self, rejections):
        self.left = rejections
        self.started = False
        self.proposals = []

    def margins(self, x):
        if not self.started:
            self.started = True
            return np.ones(1)
        self.proposals.append(np.array(x))
        if self.left > 0:
            self.left -= 1
            return -np.ones(1)
        return np.ones(1)

    def wall_distance(self, x):
        return 10.0

    def drift(self, x):
        return np.zeros_like(x)


class TestBridgedRejection(unittest.TestCase):
    def setUp(self):
        self.cfg = StepperConfig(dt_max=0.04)
        self.x = np.array([1.0])
        self.g = np.array([0.5])

    def test_step_keeps_its_brownian_increment(self):
        for rejections in (0, 1, 3, 6):
            stream = KeyedStream(3, NORMALS, 0, 1)
            x, dt, rejected = _euler_step(
                ScriptedWall(rejections), self.x, 0.04, self.g, self.cfg, stream
            )
            self.assertEqual(dt, 0.04)
            self.assertEqual(rejected, rejections)
            self.assertEqual(stream.draws, rejections)
            self.assertAlmostEqual(x[0], 1.0 + 0.2 * 0.5, places=12)

    def test_split_uses_the_bridge_midpoint(self):
        coeffs = ScriptedWall(1)
        _euler_step(coeffs, self.x, 0.04, self.g, self.cfg, KeyedStream(3, NORMALS, 0, 1))
        z = KeyedStream(3, NORMALS, 0, 1).next()[0]
        dw = 0.2 * 0.5
        first = 0.5 * dw + 0.5 * 0.2 * z
        self.assertEqual(len(coeffs.proposals), 3)
        self.assertAlmostEqual(coeffs.proposals[0][0], 1.0 + dw, places=12)
        self.assertAlmostEqual(coeffs.proposals[1][0], 1.0 + first, places=12)
        self.assertAlmostEqual(coeffs.proposals[2][0], 1.0 + dw, places=12)

    def test_wall_contact_after_max_rejections(self):
        cfg = StepperConfig(dt_max=0.04, max_rejections=4)
        with self.assertRaises(RuntimeError):
            _euler_step(
                ScriptedWall(100), self.x, 0.04, self.g, cfg, KeyedStream(3, NORMALS, 0, 1)
            )


class TestSimulateRadial(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.b2 = build_root_system("B", 2)
        self.cfg = StepperConfig(dt_max=0.01, t_horizon=1.0, seed=3)

    def test_path_shape(self):
        record = simulate_radial(self.rank1, 1.0, [1.0], self.cfg)
        self.assertEqual(record.times[0], 0.0)
        self.assertAlmostEqual(record.times[-1], 1.0, places=10)
        self.assertEqual(record.positions.shape, (len(record.times), 1))
        np.testing.assert_array_equal(record.positions[-1], record.terminal)
        self.assertTrue(np.all(np.diff(record.times) > 0))

    def test_stays_in_chamber(self):
        record = simulate_radial(self.b2, 1.0, [1.5, 0.5], self.cfg)
        margins = record.positions @ self.b2.positive_roots.T
        self.assertTrue(np.all(margins > 0))
        self.assertGreater(record.wall_min, 0.0)
        self.assertAlmostEqual(record.wall_min, float(np.min(margins)), places=12)

    def test_reproducible(self):
        a = simulate_radial(self.b2, 1.0, [1.5, 0.5], self.cfg, trajectory_id=7)
        b = simulate_radial(self.b2, 1.0, [1.5, 0.5], self.cfg, trajectory_id=7)
        c = simulate_radial(self.b2, 1.0, [1.5, 0.5], self.cfg, trajectory_id=8)
        np.testing.assert_array_equal(a.positions, b.positions)
        self.assertFalse(np.array_equal(a.terminal, c.terminal))

    def test_terminal_only(self):
        cfg = self.cfg.model_copy(update={"record_path": False})
        record = simulate_radial(self.rank1, 1.0, [1.0], cfg)
        self.assertEqual(len(record.times), 2)
        full = simulate_radial(self.rank1, 1.0, [1.0], self.cfg)
        np.testing.assert_array_equal(record.terminal, full.terminal)

    def test_record_stride(self):
        cfg = self.cfg.model_copy(update={"record_stride": 10})
        record = simulate_radial(self.rank1, 1.0, [1.0], cfg)
        full = simulate_radial(self.rank1, 1.0, [1.0], self.cfg)
        self.assertLess(len(record.times), len(full.times))
        np.testing.assert_array_equal(record.terminal, full.terminal)

    def test_drift_only_flow(self):
        cfg = self.cfg.model_copy(update={"noise_scale": 0.0})
        record = simulate_radial(self.rank1, 1.0, [1.0], cfg)
        # d/dt cosh x = coth x sinh x = cosh x, so cosh x_t = e^t cosh x_0
        self.assertAlmostEqual(math.cosh(record.terminal[0]), math.e * math.cosh(1.0), delta=2e-2)

    def test_checkpoints(self):
        rows = simulate_radial_checkpoints(self.b2, 1.0, [1.5, 0.5], self.cfg, [0.25, 0.5, 1.0])
        self.assertEqual(rows.shape, (3, 2))
        self.assertTrue(np.all(rows @ self.b2.positive_roots.T > 0))
        with self.assertRaises(ValueError):
            simulate_radial_checkpoints(self.b2, 1.0, [1.5, 0.5], self.cfg, [0.5, 0.25])


class TestEnsembles(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.cfg = StepperConfig(dt_max=0.02, t_horizon=0.5, seed=11, record_path=False)

    def test_independent_of_thread_budget(self):
        serial = simulate_radial_ensemble(self.rank1, 1.0, [1.0], self.cfg, 6, threads=1)
        pooled = simulate_radial_ensemble(self.rank1, 1.0, [1.0], self.cfg, 6, threads=2)
        np.testing.assert_array_equal(terminal_points(serial), terminal_points(pooled))

    def test_offset_selects_trajectory_ids(self):
        ensemble = simulate_radial_ensemble(self.rank1, 1.0, [1.0], self.cfg, 3, trajectory_offset=5, threads=1)
        self.assertEqual([r.trajectory_id for r in ensemble], [5, 6, 7])
        single = simulate_radial(self.rank1, 1.0, [1.0], self.cfg, trajectory_id=6)
        np.testing.assert_array_equal(ensemble[1].terminal, single.terminal)

    def test_checkpoint_ensemble_shape(self):
        cube = radial_checkpoint_ensemble(self.rank1, 1.0, [1.0], self.cfg, [0.1, 0.5], 4, threads=1)
        self.assertEqual(cube.shape, (4, 2, 1))


class TestMirrorCouple(unittest.TestCase):
    def setUp(self):
        self.rank1 = build_root_system("rank1", 1)
        self.b2 = build_root_system("B", 2)

    def test_coupled_at_start(self):
        cfg = StepperConfig(dt_max=0.01, t_horizon=0.2, seed=1)
        record = mirror_couple(self.rank1, 1.0, [1.0], [1.0 + 1e-7], cfg)
        self.assertTrue(record.coupled)
        self.assertEqual(record.coupling_time, 0.0)
        np.testing.assert_array_equal(record.x_path.positions, record.y_path.positions)
        self.assertTrue(np.all(record.z == 0.0))

    def test_stop_at_coupling(self):
        cfg = StepperConfig(dt_max=0.01, t_horizon=0.2, seed=1, run_to_horizon=False)
        record = mirror_couple(self.rank1, 1.0, [1.0], [1.0], cfg)
        self.assertEqual(len(record.z_times), 1)

    def test_not_coupled_on_short_horizon(self):
        cfg = StepperConfig(dt_max=0.001, t_horizon=0.01, seed=2)
        record = mirror_couple(self.rank1, 1.0, [1.0], [3.0], cfg)
        self.assertFalse(record.coupled)
        self.assertIsNone(record.coupling_time)
        self.assertEqual(record.z[0], 2.0)
        self.assertIsNotNone(record.qv_rate)
        self.assertGreater(record.drift_gap_sup, 0.0)

    def test_mirror_cancels_noise_in_the_sum(self):
        # in rank one the mirrored increment is -g, so x + y moves by the drifts only
        cfg = StepperConfig(dt_max=0.001, t_horizon=0.05, seed=4)
        record = mirror_couple(self.rank1, 1.0, [1.0], [4.0], cfg)
        x, y, t = record.x_path.positions[:, 0], record.y_path.positions[:, 0], record.z_times
        self.assertFalse(record.coupled)
        increments = np.diff(x + y)
        expected = (1.0 / np.tanh(x[:-1]) + 1.0 / np.tanh(y[:-1])) * np.diff(t)
        np.testing.assert_allclose(increments, expected, atol=1e-12)

    def test_distance_matches_paths(self):
        cfg = StepperConfig(dt_max=0.005, t_horizon=0.5, seed=9)
        record = mirror_couple(self.b2, 1.0, [1.5, 0.5], [2.0, 1.2], cfg)
        distances = np.linalg.norm(record.y_path.positions - record.x_path.positions, axis=1)
        np.testing.assert_allclose(record.z, distances, atol=1e-12)

    def test_start_outside_chamber(self):
        cfg = StepperConfig(dt_max=0.01, t_horizon=0.1)
        with self.assertRaises(ValueError):
            mirror_couple(self.rank1, 1.0, [1.0], [-2.0], cfg)

    def test_pairs_couple(self):
        cfg = StepperConfig(dt_max=0.01, t_horizon=20.0, seed=5, record_path=False)
        records = couple_ensemble(self.rank1, 1.0, [1.0], [1.5], cfg, 40, threads=1)
        summary = coupling_statistics(records)
        self.assertEqual(summary.n, 40)
        self.assertGreaterEqual(summary.fraction_coupled, 0.75)
        for record in records:
            if record.coupled:
                self.assertLessEqual(record.coupling_time, 20.0)
                np.testing.assert_array_equal(record.x_path.terminal, record.y_path.terminal)


def _record(coupling_time, horizon, gap=0.0, qv_rate=None) -> CouplingRecord:
    path = TrajectoryRecord(
        times=np.array([0.0, horizon]), positions=np.zeros((2, 1)), terminal=np.zeros(1), wall_min=1.0
    )
    return CouplingRecord(
        x_path=path,
        y_path=path,
        z_times=np.array([0.0, horizon]),
        z=np.zeros(2),
        coupling_time=coupling_time,
        qv=0.0,
        qv_rate=qv_rate,
        drift_gap_sup=gap,
    )


class TestCouplingStatistics(unittest.TestCase):
    def setUp(self):
        self.records = [
            _record(1.0, 5.0, 0.1, 1.1),
            _record(2.0, 5.0, 0.2, 0.9),
            _record(None, 1.5, 0.3),
            _record(3.0, 5.0, 0.4, 1.0),
        ]

    def test_ecdf(self):
        summary = coupling_statistics(self.records)
        self.assertEqual(summary.n_coupled, 3)
        self.assertEqual(summary.ecdf_times, [1.0, 2.0, 3.0])
        self.assertEqual(summary.ecdf_values, [0.25, 0.5, 0.75])
        self.assertEqual(summary.censor_times, [1.5])
        self.assertEqual(summary.fraction_coupled_by(2.0), 0.5)

    def test_kaplan_meier(self):
        summary = coupling_statistics(self.records)
        np.testing.assert_allclose(summary.km_survival, [0.75, 0.375, 0.0])
        self.assertEqual(summary.survival_at(0.5), 1.0)
        self.assertEqual(summary.survival_at(2.5), 0.375)

    def test_medians(self):
        summary = coupling_statistics(self.records)
        self.assertAlmostEqual(summary.median_qv_rate, 1.0)
        self.assertAlmostEqual(summary.median_drift_gap, 0.25)

    def test_too_few_records(self):
        with self.assertRaises(ValueError):
            coupling_statistics(self.records[:1])


if __name__ == "__main__":
    unittest.main()
