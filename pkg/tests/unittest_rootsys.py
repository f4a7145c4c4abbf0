import logging

# Disable logging during the test
logging.disable(logging.CRITICAL)

import itertools  # noqa: E402
import json  # noqa: E402
import unittest  # noqa: E402

import numpy as np  # noqa: E402

from holab.processors.rootsys import (  # noqa: E402
    build_root_system,
    generate_weyl_group,
    is_regular,
    multiplicity,
    radial_decompose,
    reflect,
    rho,
    root_system_from_json,
    root_system_info,
    root_system_to_json,
)

SYSTEMS = [("rank1", 1), ("A", 2), ("A", 3), ("B", 2), ("B", 3), ("C", 2), ("D", 2), ("D", 3), ("BC", 2)]


class TestBuildRootSystem(unittest.TestCase):
    def test_rank1_default(self):
        R = build_root_system("rank1", 1)
        np.testing.assert_allclose(R.roots, [[2.0], [-2.0]])
        np.testing.assert_allclose(R.positive_roots, [[2.0]])

    def test_rank1_root_length(self):
        R = build_root_system("rank1", 1, 3.0)
        np.testing.assert_allclose(R.positive_roots, [[3.0]])

    def test_b2_positive_roots(self):
        R = build_root_system("B", 2)
        np.testing.assert_allclose(R.positive_roots, [[1, -1], [1, 1], [1, 0], [0, 1]])

    def test_a2_angles(self):
        R = build_root_system("A", 2)
        self.assertEqual(len(R.roots), 6)
        for a, b in itertools.combinations(R.roots, 2):
            cosine = a @ b / np.linalg.norm(a) / np.linalg.norm(b)
            if np.isclose(cosine, -1.0):
                continue
            self.assertTrue(np.isclose(cosine, 0.5) or np.isclose(cosine, -0.5), cosine)

    def test_closure_and_integrality(self):
        for family, rank in SYSTEMS:
            R = build_root_system(family, rank)
            for alpha in R.roots:
                for beta in R.roots:
                    image = reflect(alpha, beta)
                    self.assertTrue(
                        np.any(np.all(np.isclose(R.roots, image), axis=1)),
                        f"{family}{rank} not closed",
                    )
                    pairing = 2.0 * (alpha @ beta) / (alpha @ alpha)
                    self.assertAlmostEqual(pairing, round(pairing), places=9)

    def test_positive_and_negative_split(self):
        for family, rank in SYSTEMS:
            R = build_root_system(family, rank)
            np.testing.assert_allclose(R.roots[R.n_positive:], -R.positive_roots)

    def test_reduced_except_bc(self):
        for family, rank in SYSTEMS:
            R = build_root_system(family, rank)
            doubles = 0
            for a, b in itertools.permutations(R.positive_roots, 2):
                if np.allclose(b, 2.0 * a):
                    doubles += 1
            if family == "BC":
                self.assertEqual(doubles, rank)
            else:
                self.assertEqual(doubles, 0)

    def test_normalization_rescales_short_roots(self):
        R = build_root_system("B", 2, 2.0)
        self.assertAlmostEqual(float(np.min(R.squared_norms)), 2.0)

    def test_invalid_combinations(self):
        with self.assertRaises(ValueError):
            build_root_system("D", 1)
        with self.assertRaises(ValueError):
            build_root_system("rank1", 2)
        with self.assertRaises(ValueError):
            build_root_system("E", 6)
        with self.assertRaises(ValueError):
            build_root_system("B", 0)
        with self.assertRaises(ValueError):
            build_root_system("B", 2, -1.0)


class TestReflect(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_allclose(reflect([1, 0], [3, 2]), [-3, 2])
        np.testing.assert_allclose(reflect([1, 1], [1, 0]), [0, -1])
        np.testing.assert_allclose(reflect([1, 0], [0, 5]), [0, 5])

    def test_involution(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            alpha, x = rng.normal(size=3), rng.normal(size=3)
            np.testing.assert_allclose(reflect(alpha, reflect(alpha, x)), x)

    def test_zero_root(self):
        with self.assertRaises(AssertionError):
            reflect([0, 0], [1, 2])


class TestWeylGroup(unittest.TestCase):
    def test_orders(self):
        expected = {("rank1", 1): 2, ("A", 2): 6, ("A", 3): 24, ("B", 2): 8, ("B", 3): 48, ("D", 3): 24, ("BC", 2): 8}
        for (family, rank), order in expected.items():
            self.assertEqual(len(generate_weyl_group(build_root_system(family, rank))), order)

    def test_identity_first(self):
        R = build_root_system("B", 2)
        group = generate_weyl_group(R)
        self.assertTrue(group[0].is_identity)
        self.assertEqual(group[0].label, "id")
        self.assertEqual(group[1].label, "s0")

    def test_closure_and_orthogonality(self):
        R = build_root_system("B", 2)
        group = R.weyl_group
        members = set(group)
        for a in group:
            np.testing.assert_allclose(a.matrix @ a.matrix.T, np.eye(2), atol=1e-12)
            for b in group:
                product = R.compose(a, b)
                self.assertIn(product, members)
                np.testing.assert_allclose(product.matrix, a.matrix @ b.matrix, atol=1e-12)

    def test_permutation_matches_matrix(self):
        R = build_root_system("A", 2)
        for w in R.weyl_group:
            for i, root in enumerate(R.roots):
                np.testing.assert_allclose(w.matrix @ root, R.roots[w.root_permutation[i]], atol=1e-12)

    def test_inverse(self):
        R = build_root_system("B", 3)
        for w in R.weyl_group[:12]:
            self.assertTrue(R.compose(w, R.inverse(w)).is_identity)

    def test_left_and_right_reflect(self):
        R = build_root_system("B", 2)
        w = R.weyl_group[3]
        r0 = R.weyl_group[1]
        self.assertEqual(R.right_reflect(w, 0), R.compose(w, r0))
        self.assertEqual(R.left_reflect(w, 0), R.compose(r0, w))

    def test_cap(self):
        R = build_root_system("B", 3, weyl_cap=10)
        with self.assertRaises(RuntimeError):
            generate_weyl_group(R)


class TestRadialDecompose(unittest.TestCase):
    def test_rank1(self):
        R = build_root_system("rank1", 1)
        d = radial_decompose(R, [-3.0])
        np.testing.assert_allclose(d.radial, [3.0])
        self.assertEqual(d.angular.label, "s0")
        self.assertTrue(d.is_regular)

    def test_b2_example(self):
        R = build_root_system("B", 2)
        d = radial_decompose(R, [-1.0, 2.0])
        np.testing.assert_allclose(d.radial, [2.0, 1.0])
        np.testing.assert_allclose(d.angular.act(d.radial), [-1.0, 2.0])

    def test_chamber_point_is_fixed(self):
        R = build_root_system("A", 3)
        x = rho(R, 1.0)
        d = radial_decompose(R, x)
        np.testing.assert_allclose(d.radial, x)
        self.assertTrue(d.angular.is_identity)

    def test_radial_part_is_invariant(self):
        R = build_root_system("B", 2)
        x = np.array([0.7, -2.3])
        radial = radial_decompose(R, x).radial
        for w in R.weyl_group:
            np.testing.assert_allclose(radial_decompose(R, w.act(x)).radial, radial, atol=1e-12)

    def test_round_trip_on_regular_points(self):
        R = build_root_system("B", 2)
        rng = np.random.default_rng(11)
        for x in rng.normal(size=(20, 2)):
            d = radial_decompose(R, x)
            np.testing.assert_allclose(d.angular.act(d.radial), x, atol=1e-12)
            self.assertTrue(np.all(R.positive_roots @ d.radial >= 0))

    def test_wall_point_uses_shortest_word(self):
        R = build_root_system("B", 2)
        d = radial_decompose(R, [0.0, 1.0])
        self.assertFalse(d.is_regular)
        np.testing.assert_allclose(d.angular.act(d.radial), [0.0, 1.0], atol=1e-12)
        self.assertLessEqual(len(d.angular.word), 1)


class TestMultiplicityAndRho(unittest.TestCase):
    def test_rho_rank1(self):
        np.testing.assert_allclose(rho(build_root_system("rank1", 1), 1.0), [1.0])

    def test_rho_b2(self):
        np.testing.assert_allclose(rho(build_root_system("B", 2), 1.0), [1.5, 0.5])

    def test_rho_regular(self):
        for family, rank in SYSTEMS:
            R = build_root_system(family, rank)
            self.assertTrue(is_regular(R, rho(R, 1.0)), f"{family}{rank}")

    def test_orbits(self):
        self.assertEqual(len(build_root_system("B", 2).orbits), 2)
        self.assertEqual(len(build_root_system("A", 3).orbits), 1)
        self.assertEqual(len(build_root_system("D", 2).orbits), 2)
        self.assertEqual(len(build_root_system("BC", 2).orbits), 3)

    def test_per_orbit_values(self):
        R = build_root_system("B", 2)
        k = multiplicity(R, [0.5, 2.0])
        self.assertEqual(k.values, (0.5, 2.0))
        # short roots e1, e2 carry the first value
        np.testing.assert_allclose(k.per_positive_root, [2.0, 2.0, 0.5, 0.5])
        np.testing.assert_allclose(rho(R, k), [2.25, 0.25])

    def test_rejections(self):
        R = build_root_system("B", 2)
        with self.assertRaises(ValueError):
            multiplicity(R, 0.3)
        with self.assertRaises(ValueError):
            multiplicity(R, [1.0])
        with self.assertRaises(ValueError):
            multiplicity(R, {"k0": 1.0, "other": 1.0})


class TestSerialisation(unittest.TestCase):
    def test_json_round_trip(self):
        R = build_root_system("B", 2)
        text = root_system_to_json(R, [1.0, 2.0])
        document = json.loads(text)
        self.assertEqual(sorted(document), ["family", "k", "normalization", "rank", "roots"])
        R2, k2 = root_system_from_json(text)
        np.testing.assert_allclose(R2.roots, R.roots)
        self.assertEqual(k2.values, (1.0, 2.0))

    def test_json_rejects_mismatched_roots(self):
        document = json.loads(root_system_to_json(build_root_system("B", 2)))
        document["roots"][0] = [5.0, 5.0]
        with self.assertRaises(ValueError):
            root_system_from_json(json.dumps(document))

    def test_info(self):
        info = root_system_info(build_root_system("B", 2), 1.0)
        self.assertEqual(info["weyl_order"], 8)
        self.assertEqual(info["rho"], [1.5, 0.5])
        self.assertTrue(info["rho_regular"])
        json.dumps(info)


if __name__ == "__main__":
    unittest.main()
