"""
Unit tests for walk graphs, link spectra and certificates
"""

import math
import os
import unittest
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix

from core.algebra.gf import FieldSpec
from core.algebra.matgroups import MatrixRealization, enumerate_group
from core.algebra.rootsys import build_root_system
from core.config import config
from core.coset_complex import build_complex
from core.errors import CertificateFailure, DomainError
from core.spectra import (
    SparseWalkGraph, cayley_side, charsum_case2, charsum_case3, corollary_bound, corollary_threshold, hdx_certificate,
    link_family_certificate, link_graph, link_lambda2, oracle_agreement, second_eigenvalue, square_one_side,
    trickle_bound,
)

HEAVY = os.environ.get("HDX_HEAVY") == "1"


def _cycle(n):
    adj = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        adj[i, (i + 1) % n] = adj[(i + 1) % n, i] = 1
    return adj


def _complete_bipartite(a, b):
    adj = np.zeros((a + b, a + b), dtype=np.int64)
    adj[:a, a:] = 1
    adj[a:, :a] = 1
    return adj, np.array([0] * a + [1] * b, dtype=np.int8)


class TestWalkGraphs(unittest.TestCase):
    """Test cases for SparseWalkGraph and second_eigenvalue."""

    def setUp(self):
        """Set up test fixtures."""
        self.petersen = SparseWalkGraph.from_adjacency(nx.to_scipy_sparse_array(nx.petersen_graph()),
                                                       name="petersen")
        self.c6 = SparseWalkGraph.from_adjacency(_cycle(6), sides=np.array([0, 1] * 3, dtype=np.int8), name="C6")

    def test_petersen_all_methods(self):
        """Test λ₂ = 1/3 for the Petersen graph by every method."""
        for method in ("dense", "power", "lanczos"):
            report = second_eigenvalue(self.petersen, method=method)
            self.assertAlmostEqual(report.lambda2, 1 / 3, places=6, msg=method)
        self.assertEqual(self.petersen.degree, 3)

    def test_bipartite_cycle(self):
        """Test the sign eigenvector of C6 is deflated: λ₂ = cos(π/3)."""
        report = second_eigenvalue(self.c6, method="power")
        self.assertAlmostEqual(report.lambda2, 0.5, places=6)
        self.assertTrue(report.bipartite)
        self.assertTrue(report.converged)
        self.assertLessEqual(report.lower, report.lambda2)
        self.assertGreaterEqual(report.upper, report.lambda2)
        dense = second_eigenvalue(self.c6, method="dense")
        self.assertAlmostEqual(dense.eigenvalues[-1], -1.0, places=9)

    def test_complete_bipartite(self):
        """Test K_{3,3} has λ₂ = 0 and its one-sided square is complete."""
        adj, sides = _complete_bipartite(3, 3)
        g = SparseWalkGraph.from_adjacency(adj, sides=sides)
        self.assertAlmostEqual(second_eigenvalue(g, method="dense").lambda2, 0.0, places=9)
        square = square_one_side(g, "left")
        self.assertEqual(square.n, 3)
        self.assertTrue(square.psd)
        self.assertAlmostEqual(second_eigenvalue(square, method="power").lambda2, 0.0, places=6)

    def test_square_of_cycle(self):
        """Test one side of C6 squares to a lazy triangle with λ₂ = cos²(π/3)."""
        square = square_one_side(self.c6, "right")
        self.assertEqual(square.n, 3)
        self.assertAlmostEqual(second_eigenvalue(square, method="dense").lambda2, 0.25, places=9)

    def test_square_errors(self):
        """Test squares need an explicit bipartite CSR graph and a known side."""
        with self.assertRaises(DomainError):
            square_one_side(self.petersen)
        with self.assertRaises(DomainError):
            square_one_side(self.c6, "middle")
        wrong = SparseWalkGraph.from_adjacency(_cycle(6), sides=np.array([0, 0, 1, 1, 0, 1], dtype=np.int8))
        with self.assertRaises(DomainError):
            square_one_side(wrong)

    def test_disconnected_graph(self):
        """Test eigenvalue 1 with multiplicity 2 raises DomainError."""
        adj = np.zeros((4, 4), dtype=np.int64)
        adj[0, 1] = adj[1, 0] = adj[2, 3] = adj[3, 2] = 1
        g = SparseWalkGraph.from_adjacency(adj)
        self.assertEqual(g.components(), 2)
        with self.assertRaises(DomainError):
            second_eigenvalue(g)

    def test_bad_inputs(self):
        """Test isolated vertices, asymmetric adjacency and unknown methods."""
        with self.assertRaises(DomainError):
            SparseWalkGraph.from_adjacency(csr_matrix(np.zeros((2, 2), dtype=np.int64)))
        with self.assertRaises(DomainError):
            SparseWalkGraph.from_adjacency(np.array([[0, 1], [2, 0]]))
        with self.assertRaises(DomainError):
            second_eigenvalue(self.petersen, method="qr")

    def test_dense_limit(self):
        """Test dense solves above spectra.dense_limit are refused."""
        previous = config.get("spectra.dense_limit")
        config.override("spectra.dense_limit", 5)
        try:
            with self.assertRaises(DomainError):
                second_eigenvalue(self.c6, method="dense")
        finally:
            config.override("spectra.dense_limit", previous)

    def test_cayley_backend(self):
        """Test a lazy cycle on Z_5 against its FFT spectrum and dense matrix."""
        counts = np.array([2, 1, 0, 0, 1])
        g = SparseWalkGraph.cayley(counts, name="lazy C5")
        self.assertEqual(g.degree, 4)
        exact = np.sort(g.exact_eigenvalues())[::-1]
        expected = (1 + math.cos(2 * math.pi / 5)) / 2
        self.assertAlmostEqual(exact[0], 1.0, places=12)
        self.assertAlmostEqual(exact[1], expected, places=12)
        self.assertAlmostEqual(second_eigenvalue(g, method="power").lambda2, expected, places=6)
        self.assertAlmostEqual(np.sort(np.linalg.eigvalsh(g.to_dense()))[-2], expected, places=9)
        with self.assertRaises(DomainError):
            self.petersen.exact_eigenvalues()

    def test_asymmetric_cayley_rejected(self):
        """Test a generator multiset without inverses is rejected."""
        with self.assertRaises(DomainError):
            SparseWalkGraph.cayley(np.array([0, 1, 0, 0, 0]))


class TestCharacterSums(unittest.TestCase):
    """Test cases for the character-sum oracles."""

    def test_case2(self):
        """Test the largest nontrivial value is 1/p."""
        for p in (5, 7):
            spectrum = charsum_case2(p)
            self.assertEqual(spectrum.trivial(), 1)
            self.assertEqual(spectrum.max_nontrivial(), Fraction(1, p))
            self.assertEqual(sum(spectrum.distribution().values()), p ** 5)

    def test_case3(self):
        """Test the B2 oracle gives 2/5 over F_5."""
        spectrum = charsum_case3(5)
        self.assertEqual(spectrum.trivial(), 1)
        self.assertEqual(spectrum.max_nontrivial(), Fraction(2, 5))
        self.assertNotEqual(spectrum.constant, 0)

    def test_case3_quadratic_witness(self):
        """Test h = C(c² − c), h′ = 0 vanishes on 2p of the p² pairs."""
        for p in (5, 7):
            spectrum = charsum_case3(p)
            r = [0] * 9
            r[2] = -spectrum.constant % p
            r[5] = 1
            self.assertEqual(spectrum.value(r), Fraction(2, p))

    def test_small_characteristic(self):
        """Test p ≤ 2 and a zero constant are rejected."""
        with self.assertRaises(DomainError):
            charsum_case2(2)
        with self.assertRaises(DomainError):
            charsum_case3(5, constant=5)


class TestRankTwoLinks(unittest.TestCase):
    """Test cases for rank-2 link graphs and their squared sides."""

    def setUp(self):
        """Set up test fixtures."""
        self.a2 = build_root_system("A", 2)
        self.b2 = build_root_system("B", 2)
        self.f5 = FieldSpec.from_params(5, 1)

    def test_explicit_a2_link(self):
        """Test CC(α, β) over F_5 is 5-regular on 25 + 25 vertices with λ₂ = 1/√5."""
        a, b = self.a2.simples
        graph = link_graph(self.a2, a, b, self.f5)
        self.assertEqual((graph.n_left, graph.n_right), (25, 25))
        self.assertEqual(graph.regular_degree(), 5)
        report = second_eigenvalue(SparseWalkGraph.from_link(graph), method="dense")
        self.assertAlmostEqual(report.lambda2, 1 / math.sqrt(5), places=9)

    def test_square_matches_explicit_link(self):
        """Test λ₂ of the Cayley side is the square of the link's λ₂."""
        a, b = self.a2.simples
        result = link_lambda2(self.a2, a, b, self.f5)
        self.assertEqual(result["case"], "case2")
        self.assertEqual(result["vertices"], 25)
        self.assertTrue(result["agree"])
        self.assertAlmostEqual(result["square_lambda2"], 0.2, places=9)
        self.assertAlmostEqual(result["lambda2"], 1 / math.sqrt(5), places=9)

    def test_case2_over_extension_field(self):
        """Test the A2 side at m = 3 has p^5 vertices and λ₂² = 1/p."""
        a, b = self.a2.simples
        result = link_lambda2(self.a2, a, b, FieldSpec.from_params(5, 3))
        self.assertEqual(result["vertices"], 5 ** 5)
        self.assertTrue(result["agree"])
        self.assertAlmostEqual(result["square_exact"], 0.2, places=9)

    def test_cayley_side_matches_oracle(self):
        """Test the top nontrivial Cayley eigenvalue equals the character-sum maximum."""
        a, b = self.a2.simples
        side = cayley_side(self.a2, a, b, FieldSpec.from_params(5, 3))
        exact = np.sort(side.exact_eigenvalues())[::-1]
        self.assertAlmostEqual(exact[1], float(charsum_case2(5).max_nontrivial()), places=9)

    def test_sorted_spectrum_matches_character_sums(self):
        """Test the whole A2 side spectrum at m = 3 equals the Case 2 character sums."""
        a, b = self.a2.simples
        side = cayley_side(self.a2, a, b, FieldSpec.from_params(5, 3))
        spectrum = charsum_case2(5)
        np.testing.assert_allclose(np.sort(side.exact_eigenvalues()), spectrum.sorted_values(), atol=1e-8)
        self.assertEqual(spectrum.distribution(),
                         {Fraction(0): 504, Fraction(1, 25): 2500, Fraction(1, 5): 120, Fraction(1): 1})
        report = oracle_agreement(spectrum, side)
        self.assertTrue(report["comparable"])
        self.assertTrue(report["agree"])

    def test_link_lambda2_oracle(self):
        """Test oracle=True attaches the comparison only when sizes match."""
        a, b = self.a2.simples
        result = link_lambda2(self.a2, a, b, FieldSpec.from_params(5, 3), method="exact", oracle=True)
        self.assertTrue(result["oracle"]["agree"])
        self.assertNotIn("oracle", link_lambda2(self.a2, a, b, self.f5, method="exact", oracle=True))
        self.assertIsNone(oracle_agreement(charsum_case2(5), cayley_side(self.a2, a, b, self.f5))["agree"])

    def test_b2_link(self):
        """Test the B2 link is connected and both methods agree."""
        long_root, short_root = self.b2.simples
        result = link_lambda2(self.b2, long_root, short_root, self.f5)
        self.assertEqual(result["case"], "case3")
        self.assertEqual(result["pair"], [str(short_root), str(long_root)])
        self.assertTrue(result["agree"])
        self.assertLess(result["lambda2"], 1.0)

    def test_g2_side_is_not_cayley(self):
        """Test G2 pairs are refused by the abelian construction."""
        g2 = build_root_system("G", 2)
        with self.assertRaises(DomainError):
            cayley_side(g2, *g2.simples, self.f5)

    @unittest.skipUnless(HEAVY, "set HDX_HEAVY=1 for the m = 4 B2 side")
    def test_case3_over_extension_field(self):
        """Test the B2 side at m = 4 has p^9 vertices and λ₂² = 2/p."""
        long_root, short_root = self.b2.simples
        result = link_lambda2(self.b2, short_root, long_root, FieldSpec.from_params(5, 4), method="exact")
        self.assertEqual(result["vertices"], 5 ** 9)
        self.assertAlmostEqual(result["square_exact"], 0.4, places=9)


class TestTricklingDown(unittest.TestCase):
    """Test cases for the bound arithmetic."""

    def test_trickle_bound(self):
        """Test γ/(1 − (d−1)γ) and its domain."""
        self.assertAlmostEqual(trickle_bound(0.2, 2), 0.25)
        self.assertAlmostEqual(trickle_bound(0.25, 2), 1 / 3)
        self.assertAlmostEqual(trickle_bound(0.0, 3), 0.0)
        self.assertAlmostEqual(trickle_bound(0.5, 2), 1.0)
        with self.assertRaises(DomainError):
            trickle_bound(0.6, 2)
        with self.assertRaises(DomainError):
            trickle_bound(-0.1, 2)
        with self.assertRaises(DomainError):
            trickle_bound(0.1, 0)

    def test_corollary(self):
        """Test the corollary bound and its threshold are inverse to each other."""
        self.assertAlmostEqual(corollary_bound(50, 2), 0.25)
        self.assertTrue(math.isinf(corollary_bound(2, 2)))
        self.assertAlmostEqual(corollary_threshold(0.25, 2), 50.0)
        self.assertAlmostEqual(corollary_bound(int(corollary_threshold(0.5, 2)), 2), 0.5)
        with self.assertRaises(DomainError):
            corollary_threshold(0.0)


class TestCertificates(unittest.TestCase):
    """Test cases for hdx_certificate and link_family_certificate."""

    def setUp(self):
        """Set up test fixtures."""
        self.a2 = build_root_system("A", 2)
        self.f5 = FieldSpec.from_params(5, 1)

    def test_link_certificate_a2(self):
        """Test SL3(F_5) links give γ = 1/√5 and trickle down below 1."""
        cert = link_family_certificate(self.a2, self.f5)
        self.assertTrue(cert["passed"])
        self.assertEqual(cert["method"], "trickle")
        self.assertEqual(len(cert["links"]), 3)
        gamma = 1 / math.sqrt(5)
        self.assertAlmostEqual(cert["gamma"], gamma, places=9)
        self.assertAlmostEqual(cert["final_lambda"], gamma / (1 - gamma), places=9)

    def test_link_certificate_target(self):
        """Test a requested λ below the threshold fails with a reason."""
        cert = link_family_certificate(self.a2, self.f5, target=0.9)
        self.assertFalse(cert["passed"])
        self.assertIn("threshold", cert["reason"])

    def test_g2_refused(self):
        """Test G2 has no certificate."""
        with self.assertRaises(CertificateFailure) as ctx:
            link_family_certificate(build_root_system("G", 2), self.f5)
        self.assertEqual(ctx.exception.witness["family"], "G2")

    def test_b2_alternate_certificate(self):
        """Test the B2 links of the alternate special set are all connected."""
        b2 = build_root_system("B", 2)
        cert = link_family_certificate(b2, self.f5, variant="alternate")
        self.assertEqual(cert["variant"], "alternate")
        self.assertEqual(len(cert["links"]), 3)
        self.assertTrue(all(v < 1 for v in cert["link_lambda2"].values()))

    def test_complex_certificate_small_p(self):
        """Test SL3(F_3) is connected but p = 3 is too small for a bound."""
        realization = MatrixRealization("sl3", FieldSpec.from_params(3, 1, allow_small_p=True))
        K = build_complex(enumerate_group(realization), realization.special)
        cert = hdx_certificate(K)
        self.assertEqual(cert["mode"], "complex")
        self.assertTrue(cert["connectivity"]["connected"])
        self.assertEqual(len(cert["links"]), 3)
        for gamma in cert["link_lambda2"].values():
            self.assertAlmostEqual(gamma, 1 / math.sqrt(3), places=9)
        self.assertEqual(cert["method"], "corollary")
        self.assertFalse(cert["passed"])

    def test_disconnected_complex_fails(self):
        """Test a complex with trivial subgroups has no certificate."""
        realization = MatrixRealization("sl3", FieldSpec.from_params(3, 1, allow_small_p=True))
        special = realization.special
        K = build_complex(enumerate_group(realization), special,
                          subgroup_generators={a: [] for a in special.members})
        with self.assertRaises(CertificateFailure):
            hdx_certificate(K)


if __name__ == '__main__':
    unittest.main()
