import logging

# Disable logging for duration
logging.disable(logging.CRITICAL)


import unittest  # noqa: E402
from pydantic import ValidationError  # noqa: E402

import holab as hl  # noqa: E402


class TestStepperConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = hl.validators.StepperConfig()
        self.assertEqual(cfg.dt_max, 0.01)
        self.assertEqual(cfg.wall_safety, 0.05)
        self.assertEqual(cfg.max_rejections, 30)
        self.assertTrue(cfg.run_to_horizon)

    def test_rejected_values(self):
        for field, value in (
            ("dt_max", 0.0),
            ("t_horizon", -1.0),
            ("couple_tolerance", float("nan")),
            ("max_rejections", 0),
            ("seed", -3),
            ("noise_scale", -0.5),
            ("stationarity_window", 1.0),
        ):
            with self.assertRaises(ValidationError, msg=field):
                hl.validators.StepperConfig(**{field: value})
        with self.assertRaises(ValidationError):
            hl.validators.StepperConfig(dt=0.1)

    def test_frozen(self):
        cfg = hl.validators.StepperConfig()
        with self.assertRaises(ValidationError):
            cfg.dt_max = 0.5
        self.assertEqual(cfg.model_copy(update={"dt_max": 0.5}).dt_max, 0.5)


class TestRank1Params(unittest.TestCase):
    def test_rho(self):
        self.assertEqual(hl.validators.Rank1Params().rho, 1.0)
        self.assertEqual(hl.validators.Rank1Params(alpha=1.0, k=2.5).rho, 1.25)

    def test_rejected(self):
        with self.assertRaises(ValidationError):
            hl.validators.Rank1Params(k=0.3)
        with self.assertRaises(ValidationError):
            hl.validators.Rank1Params(alpha=0.0)


class TestEstimates(unittest.TestCase):
    def estimate(self, value, n=10):
        return hl.validators.McEstimate(value=value, stderr=0.1, n=n, seed=0)

    def test_negative_stderr(self):
        with self.assertRaises(ValidationError):
            hl.validators.McEstimate(value=0.0, stderr=-0.1, n=3, seed=0)

    def test_hw_table(self):
        table = hl.validators.HwTable(
            start=[1.0],
            per_w={"id": self.estimate(0.7), "s0": self.estimate(0.3)},
            counts={"id": 7, "s0": 3},
            n_determined=10,
            excluded=1,
            method="skew",
        )
        self.assertEqual(table.value("s0"), 0.3)
        self.assertEqual(table.total(), 1.0)

    def test_hw_table_counts_must_add_up(self):
        with self.assertRaises(ValidationError):
            hl.validators.HwTable(
                start=[1.0],
                per_w={"id": self.estimate(0.7), "s0": self.estimate(0.3)},
                counts={"id": 7, "s0": 2},
                n_determined=10,
                excluded=0,
                method="thinning",
            )
        with self.assertRaises(ValidationError):
            hl.validators.HwTable(
                start=[1.0],
                per_w={"id": self.estimate(1.0)},
                counts={"id": 7, "s0": 3},
                n_determined=10,
                excluded=0,
                method="thinning",
            )

    def test_coupling_summary_helpers(self):
        summary = hl.validators.CouplingSummary(
            n=4,
            n_coupled=2,
            fraction_coupled=0.5,
            coupling_times=[1.0, 3.0],
            censor_times=[5.0, 5.0],
            ecdf_times=[1.0, 3.0],
            ecdf_values=[0.25, 0.5],
            km_times=[1.0, 3.0],
            km_survival=[0.75, 0.5],
        )
        self.assertEqual(summary.fraction_coupled_by(0.5), 0.0)
        self.assertEqual(summary.fraction_coupled_by(3.0), 0.5)
        self.assertEqual(summary.survival_at(2.0), 0.75)


class TestReports(unittest.TestCase):
    def test_pass_alias(self):
        outcome = hl.validators.CheckOutcome(name="a", passed=True)
        self.assertEqual(hl.validators.CheckOutcome(**{"name": "a", "pass": True}), outcome)
        self.assertIn("pass", outcome.model_dump(by_alias=True))

    def test_report(self):
        report = hl.validators.ExperimentReport(
            experiment="hw",
            checks=[
                hl.validators.CheckOutcome(name="a", statistic=0.5, threshold=3.0, passed=True),
                hl.validators.CheckOutcome(name="b", p=0.001, threshold=0.01, passed=False),
            ],
        )
        self.assertFalse(report.passed)
        self.assertEqual(report.failures(), ["b"])
        self.assertEqual(report.check("a").statistic, 0.5)
        with self.assertRaises(KeyError):
            report.check("c")
        self.assertEqual(len(report.model_dump(by_alias=True)["tests"]), 2)

    def test_empty_report_passes(self):
        self.assertTrue(hl.validators.ExperimentReport(experiment="rootsys_info").passed)


class TestRunConfig(unittest.TestCase):
    def test_multiplicity_forms(self):
        self.assertEqual(hl.validators.SystemSection(k=1.0).k, 1.0)
        self.assertEqual(hl.validators.SystemSection(k=[0.5, 2.0]).k, [0.5, 2.0])
        self.assertEqual(hl.validators.SystemSection(k={"k0": 0.5}).k, {"k0": 0.5})
        for bad in (0.3, [1.0, 0.2], {"k1": 0.1}):
            with self.assertRaises(ValidationError):
                hl.validators.SystemSection(k=bad)

    def test_strict_types(self):
        with self.assertRaises(ValidationError):
            hl.validators.SystemSection(rank=1.5)
        with self.assertRaises(ValidationError):
            hl.validators.SystemSection(family="E")
        with self.assertRaises(ValidationError):
            hl.validators.ExperimentSection(paths="100")
        with self.assertRaises(ValidationError):
            hl.validators.RunSection(use_cache="yes")

    def test_experiment_section(self):
        section = hl.validators.ExperimentSection(**{"name": "oracle_eval", "lambda": 0.5})
        self.assertEqual(section.lam, 0.5)
        self.assertEqual(section.t_values, [5.0, 20.0])
        with self.assertRaises(ValidationError):
            hl.validators.ExperimentSection(name="unknown")
        with self.assertRaises(ValidationError):
            hl.validators.ExperimentSection(burn_in=1.5)

    def test_run_section(self):
        with self.assertRaises(ValidationError):
            hl.validators.RunSection(threads=0)
        with self.assertRaises(ValidationError):
            hl.validators.RunConfig(output={"x": 1})
        self.assertEqual(hl.validators.RunConfig().run.out, "output/files")


if __name__ == "__main__":
    unittest.main()
