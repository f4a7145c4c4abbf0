import logging

# Disable logging during the test
logging.disable(logging.CRITICAL)

import math  # noqa: E402
import unittest  # noqa: E402

import numpy as np  # noqa: E402

from holab.processors.hypergeometric import (  # noqa: E402
    Rank1Oracle,
    coth_series_coefficients,
    oracle_field,
    parse_grid,
    rank1_F,
    rank1_F_closed_form,
    rank1_G,
    rank1_components,
)
from holab.validation.validators import Rank1Params  # noqa: E402


def g_rho_exact(x):
    """G_rho for alpha = 2, k = 1, valid away from 0."""
    return 1.0 + 1.0 / math.tanh(x) - x / math.sinh(x) ** 2


class TestNormalisation(unittest.TestCase):
    def setUp(self):
        self.p = Rank1Params(alpha=2.0, k=1.0)

    def test_value_at_origin(self):
        for lam in (0.0, 0.4, 1.0, 2.5):
            self.assertAlmostEqual(rank1_F(self.p, lam, 0.0), 1.0, places=14)
            self.assertAlmostEqual(rank1_G(self.p, lam, 0.0), 1.0, places=14)

    def test_scalar_and_array(self):
        self.assertIsInstance(rank1_F(self.p, 0.4, 1.0), float)
        self.assertEqual(rank1_G(self.p, 0.4, [0.5, 1.0, 2.0]).shape, (3,))

    def test_rho_params(self):
        self.assertEqual(Rank1Params(alpha=2.0, k=1.0).rho, 1.0)
        self.assertEqual(Rank1Params(alpha=3.0, k=0.5).rho, 0.75)
        with self.assertRaises(ValueError):
            Rank1Params(alpha=2.0, k=0.3)


class TestIdentities(unittest.TestCase):
    def setUp(self):
        self.p = Rank1Params(alpha=2.0, k=1.0)
        self.grid = np.linspace(-5.0, 5.0, 41)

    def test_f_rho_is_one(self):
        np.testing.assert_allclose(rank1_F(self.p, self.p.rho, self.grid), 1.0, atol=1e-10)
        other = Rank1Params(alpha=1.0, k=2.5)
        np.testing.assert_allclose(rank1_F(other, other.rho, self.grid), 1.0, atol=1e-10)

    def test_g_minus_rho_is_one(self):
        np.testing.assert_allclose(rank1_G(self.p, -self.p.rho, self.grid), 1.0, atol=1e-10)

    def test_g_rho_closed_form(self):
        xs = np.array([-4.0, -1.5, -0.3, 0.05, 0.3, 1.0, 2.5, 4.5])
        expected = [g_rho_exact(x) for x in xs]
        np.testing.assert_allclose(rank1_G(self.p, 1.0, xs), expected, rtol=1e-8, atol=1e-10)

    def test_even_part_is_f(self):
        for lam in (0.0, 0.3, 1.7):
            parts = rank1_components(self.p, lam, self.grid)
            np.testing.assert_allclose(parts["E"], parts["F"], atol=1e-8)
            np.testing.assert_allclose(
                0.5 * (rank1_G(self.p, lam, self.grid) + rank1_G(self.p, lam, -self.grid)),
                rank1_F(self.p, lam, self.grid),
                atol=1e-8,
            )

    def test_f_is_even(self):
        values = rank1_F(self.p, 0.6, self.grid)
        np.testing.assert_allclose(values, values[::-1], atol=1e-14)

    def test_against_gauss_function(self):
        xs = np.linspace(-2.0, 2.0, 17)
        for p in (self.p, Rank1Params(alpha=1.0, k=1.5)):
            np.testing.assert_allclose(rank1_F(p, 0.3, xs), rank1_F_closed_form(p, 0.3, xs), rtol=1e-8)

    def test_g_at_plus_minus_rho_positive(self):
        for lam in (1.0, -1.0):
            self.assertTrue(np.all(rank1_G(self.p, lam, self.grid) > 0))

    def test_imaginary_lambda(self):
        values = rank1_F(self.p, 0.8j, np.array([0.0, 1.0, 3.0]))
        self.assertAlmostEqual(values[0], 1.0, places=14)
        # oscillatory decay for imaginary spectral parameter
        self.assertLess(abs(values[2]), 1.0)
        with self.assertRaises(ValueError):
            rank1_F(self.p, 0.5 + 0.5j, 1.0)

    def test_series_reaches_ode(self):
        # continuity where the series start hands over to the integrator
        x0 = 0.1
        below = rank1_G(self.p, 0.4, x0 - 1e-9)
        above = rank1_G(self.p, 0.4, x0 + 1e-9)
        self.assertAlmostEqual(below, above, places=8)


class TestOracleErrors(unittest.TestCase):
    def setUp(self):
        self.p = Rank1Params(alpha=2.0, k=1.0)

    def test_out_of_range(self):
        oracle = Rank1Oracle(self.p, 0.3, x_max=2.0)
        with self.assertRaises(ValueError):
            oracle.G(5.0)

    def test_series_not_converged(self):
        with self.assertRaises(ArithmeticError):
            Rank1Oracle(self.p, 0.3, n_terms=3)

    def test_series_radius_too_large(self):
        with self.assertRaises(ArithmeticError):
            Rank1Oracle(self.p, 0.3, x0=4.0)

    def test_g_needs_real_lambda(self):
        oracle = Rank1Oracle(self.p, 0.5j)
        with self.assertRaises(ValueError):
            oracle.G(1.0)


class TestHelpers(unittest.TestCase):
    def test_coth_series(self):
        c = coth_series_coefficients(2.0, 12)
        x = 0.3
        series = sum(c[m] * x ** (2 * m - 1) for m in range(12))
        self.assertAlmostEqual(series, 1.0 / math.tanh(x), places=12)

    def test_parse_grid(self):
        np.testing.assert_allclose(parse_grid("0:1:5"), [0.0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_allclose(parse_grid("-5:5:3"), [-5.0, 0.0, 5.0])
        with self.assertRaises(ValueError):
            parse_grid("0:1")
        with self.assertRaises(ValueError):
            parse_grid("a:b:c")

    def test_components_table(self):
        table = rank1_components(Rank1Params(), 0.5, [-1.0, 0.0, 1.0])
        self.assertEqual(list(table.columns), ["x", "F", "G", "E", "O"])
        np.testing.assert_allclose(table["G"], table["E"] + table["O"])
        self.assertEqual(table["O"][1], 0.0)

    def test_oracle_field(self):
        field = oracle_field(Rank1Params(), 1.0, "G")
        points = np.array([[0.5], [1.0], [2.0]])
        np.testing.assert_allclose(field.evaluate_many(points), [field(p) for p in points])
        self.assertEqual(field.name, "G_1")
        with self.assertRaises(ValueError):
            oracle_field(Rank1Params(), 1.0, "H")


if __name__ == "__main__":
    unittest.main()
