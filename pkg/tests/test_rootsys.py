"""
Unit tests for root systems and generating sets
"""

import unittest

from core.algebra.rootsys import (
    Root, adjoint_order, build_root_system, center_order, chevalley_order, check_positive_span, decompose_as_root_sum,
    graded_size, positive_cone, prefix_decompose, special_set,
)
from core.errors import DomainError


class TestBuildRootSystem(unittest.TestCase):
    """Test cases for build_root_system."""

    def test_root_counts(self):
        """Test |Φ| for every family."""
        expected = {
            ("A", 1): 2, ("A", 2): 6, ("A", 3): 12, ("B", 2): 8, ("B", 3): 18, ("C", 3): 18,
            ("D", 4): 24, ("G", 2): 12, ("F", 4): 48, ("E", 6): 72, ("E", 7): 126, ("E", 8): 240,
        }
        for (family, rank), size in expected.items():
            self.assertEqual(len(build_root_system(family, rank)), size, f"{family}{rank}")

    def test_illegal_pairs(self):
        """Test illegal (family, rank) pairs raise DomainError."""
        for family, rank in [("A", 0), ("B", 1), ("C", 2), ("D", 3), ("G", 3), ("F", 3), ("E", 5), ("X", 2)]:
            with self.assertRaises(DomainError):
                build_root_system(family, rank)

    def test_invariants(self):
        """Test the root-system axioms hold exhaustively."""
        for family, rank in [("A", 3), ("B", 3), ("C", 3), ("D", 4), ("G", 2), ("F", 4), ("E", 6)]:
            checks = build_root_system(family, rank).check_invariants()
            self.assertTrue(all(checks.values()), f"{family}{rank}: {checks}")

    def test_a2_roots(self):
        """Test A2 is {e_i - e_j} in the scaled coordinates."""
        system = build_root_system("A", 2)
        coords = {r.coords for r in system}
        self.assertIn((2, -2, 0), coords)
        self.assertIn((0, -2, 2), coords)
        self.assertEqual(len(system.positive_roots()), 3)
        self.assertEqual(system.height(system.highest_root()), 2)

    def test_zero_root_rejected(self):
        """Test the zero vector is not a root."""
        with self.assertRaises(DomainError):
            Root((0, 0, 0))

    def test_simple_coordinates_are_sign_coherent(self):
        """Test every root has all simple coordinates of one sign."""
        system = build_root_system("E", 7)
        for r in system:
            c = system.simple_coefficients(r)
            self.assertTrue(all(x >= 0 for x in c) or all(x <= 0 for x in c))
        self.assertTrue(system.check_invariants()["simple_signs"])


class TestReflections(unittest.TestCase):
    """Test cases for reflections and basis coefficients."""

    def setUp(self):
        """Set up test fixtures."""
        self.a2 = build_root_system("A", 2)

    def test_reflect(self):
        """Test w_α(α) = −α and w_α(β) = α + β in A2."""
        a, b = self.a2.simples
        self.assertEqual(self.a2.reflect(a, a), (-a).coords)
        self.assertEqual(self.a2.reflect(b, a), tuple(x + y for x, y in zip(a.coords, b.coords)))

    def test_coefficients(self):
        """Test exact coefficients over the simple roots."""
        a, b = self.a2.simples
        ab = self.a2.get(tuple(x + y for x, y in zip(a.coords, b.coords)))
        self.assertEqual(self.a2.coefficients(ab, [a, b]), (1, 1))
        self.assertEqual(self.a2.simple_coefficients(-ab), (-1, -1))


class TestSpecialSet(unittest.TestCase):
    """Test cases for special_set and check_positive_span."""

    def setUp(self):
        """Set up test fixtures."""
        self.a2 = build_root_system("A", 2)
        self.b2 = build_root_system("B", 2)

    def test_a2_special_set(self):
        """Test A2 gives {α1, α2, −α1−α2}."""
        s = special_set(self.a2)
        a1, a2 = self.a2.simples
        self.assertEqual(len(s), 3)
        self.assertEqual(s.members[:2], (a1, a2))
        self.assertEqual(s.members[2].coords, tuple(-x - y for x, y in zip(a1.coords, a2.coords)))

    def test_a_d_last_member(self):
        """Test the extra member of A_d is e_d − e_1 (zero-based: e_d − e_0)."""
        s = special_set(build_root_system("A", 4))
        self.assertEqual(s.members[-1].coords, (-2, 0, 0, 0, 2))

    def test_positive_span_for_supported_systems(self):
        """Test special sets positively span Φ."""
        for family, rank in [("A", 2), ("A", 4), ("B", 2), ("B", 3), ("C", 3), ("D", 4), ("G", 2), ("F", 4),
                             ("E", 6)]:
            system = build_root_system(family, rank)
            s = special_set(system)
            self.assertEqual(len(s), rank + 1)
            self.assertTrue(check_positive_span(system, s), f"{family}{rank}")

    def test_simples_alone_do_not_span(self):
        """Test Π alone only reaches the positive roots."""
        self.assertFalse(check_positive_span(self.a2, list(self.a2.simples)))

    def test_b2_alternate(self):
        """Test the alternate B2 set {α, β, −β−2α} with α short."""
        s = special_set(self.b2, "alternate")
        long_root, short_root = self.b2.simples
        self.assertEqual(s.members[0], short_root)
        self.assertEqual(s.members[1], long_root)
        expected = tuple(-l - 2 * x for l, x in zip(long_root.coords, short_root.coords))
        self.assertEqual(s.members[2].coords, expected)
        self.assertTrue(check_positive_span(self.b2, s))

    def test_g2_alternate(self):
        """Test the alternate G2 set spans."""
        g2 = build_root_system("G", 2)
        self.assertTrue(check_positive_span(g2, special_set(g2, "alternate")))

    def test_bad_variants(self):
        """Test rank one and unknown variants raise DomainError."""
        with self.assertRaises(DomainError):
            special_set(build_root_system("A", 1))
        with self.assertRaises(DomainError):
            special_set(self.a2, "alternate")
        with self.assertRaises(DomainError):
            special_set(self.a2, "other")


class TestPositiveCone(unittest.TestCase):
    """Test cases for positive_cone case labels."""

    def test_a2_simple_pair(self):
        """Test an A2 simple pair is Case 2."""
        a2 = build_root_system("A", 2)
        a, b = a2.simples
        cone = positive_cone(a2, a, b)
        self.assertEqual(len(cone.members), 3)
        self.assertEqual(cone.generation_case, "r1")
        self.assertEqual(cone.link_case, "case2")

    def test_b2_short_long(self):
        """Test B2 short then long gives {α, β, α+β, 2α+β}."""
        b2 = build_root_system("B", 2)
        long_root, short_root = b2.simples
        cone = positive_cone(b2, short_root, long_root)
        self.assertEqual(len(cone.members), 4)
        self.assertEqual(cone.generation_case, "r2")
        self.assertEqual(cone.link_case, "case3")
        self.assertEqual(cone.short, short_root)

    def test_b2_orthogonal_long_roots(self):
        """Test orthogonal long roots commute."""
        b2 = build_root_system("B", 2)
        x, y = b2.get((2, -2)), b2.get((2, 2))
        cone = positive_cone(b2, x, y)
        self.assertEqual(len(cone.members), 2)
        self.assertEqual(cone.link_case, "case1")

    def test_g2_cases(self):
        """Test the two G2 cones."""
        g2 = build_root_system("G", 2)
        a, b = g2.simples
        self.assertEqual(positive_cone(g2, a, b).link_case, "g2_I")
        ab = g2.get(tuple(x + y for x, y in zip(a.coords, b.coords)))
        self.assertEqual(positive_cone(g2, a, ab).link_case, "g2_II")

    def test_opposite_roots(self):
        """Test β = −α raises DomainError."""
        a2 = build_root_system("A", 2)
        a = a2.simples[0]
        with self.assertRaises(DomainError):
            positive_cone(a2, a, -a)


class TestDecompositions(unittest.TestCase):
    """Test cases for prefix_decompose and decompose_as_root_sum."""

    def _check_prefixes(self, system, sequence, gamma):
        total = [0] * system.dim
        for r in sequence:
            total = [t + c for t, c in zip(total, r.coords)]
            self.assertIn(tuple(total), system)
        self.assertEqual(tuple(total), gamma.coords)

    def test_prefix_decompose_a2(self):
        """Test α+β splits into two roots with root prefixes."""
        a2 = build_root_system("A", 2)
        a, b = a2.simples
        gamma = a2.get(tuple(x + y for x, y in zip(a.coords, b.coords)))
        seq = prefix_decompose(a2, gamma, [a, b])
        self.assertEqual(len(seq), 2)
        self._check_prefixes(a2, seq, gamma)

    def test_prefix_decompose_b2(self):
        """Test 2α+β in B2 has three letters with root prefixes."""
        b2 = build_root_system("B", 2)
        long_root, short_root = b2.simples
        gamma = b2.get(tuple(2 * s + l for s, l in zip(short_root.coords, long_root.coords)))
        seq = prefix_decompose(b2, gamma, [short_root, long_root])
        self.assertEqual(sorted(seq), sorted([short_root, short_root, long_root]))
        self._check_prefixes(b2, seq, gamma)

    def test_prefix_decompose_single(self):
        """Test (α, {α}) gives [α]."""
        a2 = build_root_system("A", 2)
        a = a2.simples[0]
        self.assertEqual(prefix_decompose(a2, a, [a]), [a])

    def test_prefix_decompose_unreachable(self):
        """Test a negative root is not in the span of the simples."""
        a2 = build_root_system("A", 2)
        a, b = a2.simples
        with self.assertRaises(DomainError):
            prefix_decompose(a2, -a, [a, b])

    def test_root_sum(self):
        """Test every root of B2 and G2 is a sum of two other roots."""
        for family in ("B", "G"):
            system = build_root_system(family, 2)
            for gamma in system:
                delta, eps = decompose_as_root_sum(system, gamma)
                self.assertEqual(tuple(d + e for d, e in zip(delta.coords, eps.coords)), gamma.coords)
                self.assertNotIn(delta, (gamma, -gamma))
                self.assertNotIn(eps, (gamma, -gamma))

    def test_root_sum_rank_one(self):
        """Test rank one is rejected."""
        a1 = build_root_system("A", 1)
        with self.assertRaises(DomainError):
            decompose_as_root_sum(a1, a1.simples[0])


class TestGroupOrders(unittest.TestCase):
    """Test cases for order formulas."""

    def test_chevalley_orders(self):
        """Test |SL3(F5)|, |Sp4(F5)| and |SL2(F5)|."""
        self.assertEqual(chevalley_order("A", 2, 5), 372000)
        self.assertEqual(chevalley_order("C", 2, 5), 9360000)
        self.assertEqual(chevalley_order("A", 1, 5), 120)

    def test_center_orders(self):
        """Test gcd formulas for the center."""
        self.assertEqual(center_order("A", 2, 5), 1)
        self.assertEqual(center_order("A", 2, 7), 3)
        self.assertEqual(center_order("C", 2, 5), 2)
        self.assertEqual(center_order("G", 2, 7), 1)

    def test_adjoint_orders(self):
        """Test the adjoint order divides out the center."""
        self.assertEqual(adjoint_order("A", 2, 7) * 3, chevalley_order("A", 2, 7))
        self.assertEqual(adjoint_order("C", 2, 5), 4680000)

    def test_graded_size(self):
        """Test Π p^{min(h, m−1)+1}."""
        self.assertEqual(graded_size(5, 1, [1, 1, 2]), 125)
        self.assertEqual(graded_size(5, 3, [1, 1, 2]), 5 ** 7)
        self.assertEqual(graded_size(5, 4, [1, 1, 2, 3]), 5 ** 11)


if __name__ == '__main__':
    unittest.main()
