"""
Unit tests for finite field arithmetic
"""

import unittest

import numpy as np

from core.algebra.gf import FieldSpec, find_irreducible, is_irreducible, is_prime
from core.errors import DomainError, ResourceBudgetError


class TestIrreducibles(unittest.TestCase):
    """Test cases for prime and polynomial helpers."""

    def test_is_prime(self):
        """Test primality on small integers."""
        self.assertEqual([n for n in range(20) if is_prime(n)], [2, 3, 5, 7, 11, 13, 17, 19])

    def test_find_irreducible_quadratic(self):
        """Test the smallest monic irreducible quadratic over F_5 is x^2 + 2."""
        self.assertEqual(find_irreducible(5, 2), (2, 0, 1))

    def test_find_irreducible_is_irreducible(self):
        """Test the returned polynomials for several degrees."""
        for p, m in [(5, 3), (7, 2), (5, 4)]:
            poly = find_irreducible(p, m)
            self.assertEqual(len(poly), m + 1)
            self.assertEqual(poly[-1], 1)
            self.assertTrue(is_irreducible(poly, p))

    def test_reducible_polynomial(self):
        """Test x^2 + 1 splits over F_5."""
        self.assertFalse(is_irreducible((1, 0, 1), 5))

    def test_find_irreducible_rejects_composite(self):
        """Test a composite characteristic is rejected."""
        with self.assertRaises(DomainError):
            find_irreducible(6, 2)


class TestFieldSpec(unittest.TestCase):
    """Test cases for FieldSpec arithmetic."""

    def setUp(self):
        """Set up test fixtures."""
        np.random.seed(42)
        self.f5 = FieldSpec.from_params(5, 1)
        self.f25 = FieldSpec.from_params(5, 2)
        self.f125 = FieldSpec.from_params(5, 3)

    def test_prime_field_arithmetic(self):
        """Test F_5 operations on scalars."""
        f = self.f5
        self.assertEqual(f.add(4, 3), 2)
        self.assertEqual(f.mul(3, 2), 1)
        self.assertEqual(f.inv(2), 3)
        self.assertEqual(f.neg(1), 4)
        self.assertEqual(f.sub(1, 3), 3)
        self.assertEqual(f.mul_scalar(-1, 3), 2)

    def test_inverse_of_zero(self):
        """Test inverting zero raises DomainError."""
        with self.assertRaises(DomainError):
            self.f25.inv(0)
        with self.assertRaises(DomainError):
            self.f25.inv(np.array([1, 0, 2]))

    def test_vectorized_inverses(self):
        """Test a * a^-1 = 1 for every nonzero element of F_25."""
        nonzero = np.arange(1, 25)
        self.assertTrue(np.all(self.f25.mul(nonzero, self.f25.inv(nonzero)) == 1))

    def test_field_axioms_sampled(self):
        """Test distributivity and associativity on random elements of F_125."""
        f = self.f125
        a, b, c = (np.random.randint(0, f.q, size=200) for _ in range(3))
        self.assertTrue(np.array_equal(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c))))
        self.assertTrue(np.array_equal(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c))))
        self.assertTrue(np.all(f.add(a, f.neg(a)) == 0))

    def test_scalar_and_array_agree(self):
        """Test scalar calls return the same values as the broadcast table lookup."""
        f = self.f25
        a = np.arange(25)
        products = f.mul(a, 7)
        for x in range(25):
            self.assertEqual(f.mul(x, 7), int(products[x]))

    def test_multiplicative_order(self):
        """Test a^(q-1) = 1 for nonzero a."""
        f = self.f125
        for a in (1, 2, 6, 31, 124):
            self.assertEqual(f.pow(a, f.q - 1), 1)
        self.assertEqual(f.pow(7, -1), f.inv(7))

    def test_x_squared_reduces_by_modulus(self):
        """Test x * x = -2 in F_5[x]/(x^2 + 2)."""
        x = 5  # code of the polynomial x
        self.assertEqual(self.f25.mul(x, x), 3)

    def test_degree_grading(self):
        """Test degree and the count of elements up to a degree."""
        f = self.f125
        self.assertEqual(f.degree(0), -1)
        self.assertEqual(f.degree(4), 0)
        self.assertEqual(f.degree(7), 1)
        self.assertEqual(f.degree(30), 2)
        self.assertEqual(f.count_up_to_degree(-1), 1)
        self.assertEqual(f.count_up_to_degree(0), 5)
        self.assertEqual(f.count_up_to_degree(1), 25)
        self.assertEqual(f.count_up_to_degree(7), 125)
        self.assertTrue(np.array_equal(f.elements_up_to_degree(0), np.arange(5)))
        with self.assertRaises(DomainError):
            f.count_up_to_degree(-2)

    def test_power_basis(self):
        """Test the codes of x^0..x^k are capped at m-1."""
        self.assertEqual(self.f125.power_basis(1), [1, 5])
        self.assertEqual(self.f125.power_basis(9), [1, 5, 25])
        self.assertEqual(self.f5.power_basis(3), [1])

    def test_parse_and_format(self):
        """Test comma-separated serialization low degree first."""
        f = self.f125
        self.assertEqual(f.format(f.parse("1,2")), "1,2,0")
        self.assertEqual(f.parse("3"), 3)
        with self.assertRaises(DomainError):
            f.parse("1,2,3,4")

    def test_small_characteristic_rejected(self):
        """Test p = 3 needs allow_small_p."""
        with self.assertRaises(DomainError):
            FieldSpec.from_params(3, 1)
        f3 = FieldSpec.from_params(3, 1, allow_small_p=True)
        self.assertEqual(f3.mul(2, 2), 1)

    def test_bad_parameters(self):
        """Test composite p, m < 1 and reducible moduli."""
        with self.assertRaises(DomainError):
            FieldSpec.from_params(9, 1)
        with self.assertRaises(DomainError):
            FieldSpec(5, 0, (1,))
        with self.assertRaises(DomainError):
            FieldSpec(5, 2, (1, 0, 1))
        with self.assertRaises(DomainError):
            FieldSpec(5, 2, (2, 0, 3))

    def test_modulus_override(self):
        """Test a modulus string selects a different but valid field."""
        f = FieldSpec.from_params(5, 2, "3,0,1")
        self.assertEqual(f.modulus, (3, 0, 1))
        self.assertNotEqual(f, self.f25)
        self.assertEqual(f.mul(5, 5), 2)

    def test_equality_and_hash(self):
        """Test specs compare by (p, m, modulus)."""
        again = FieldSpec.from_params(5, 2)
        self.assertEqual(again, self.f25)
        self.assertEqual(len({again, self.f25}), 1)

    def test_large_field_scalar_only(self):
        """Test fields above the table limit do scalar arithmetic and refuse arrays."""
        f = FieldSpec.from_params(5, 6)
        self.assertFalse(f.tables)
        a = 1234
        self.assertEqual(f.mul(a, f.inv(a)), 1)
        with self.assertRaises(ResourceBudgetError):
            f.mul(np.array([1, 2]), np.array([3, 4]))


if __name__ == '__main__':
    unittest.main()
