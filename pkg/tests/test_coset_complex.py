"""
Unit tests for coset complexes, links and structural checks
"""

import os
import tempfile
import unittest

import networkx as nx
import numpy as np

from core.algebra.gf import FieldSpec
from core.algebra.matgroups import MatrixRealization, compute_center, enumerate_group
from core.coset_complex import (
    CosetComplex, LinkGraph, adjoint_complex, build_complex, connectivity_check, degree_stats,
    extract_vertex_link_at_identity, link, link_agreement, load_complex, local_ball, save_complex,
    subgroup_intersection_check, transitivity_check, verify_complex,
)
from core.errors import DomainError

HEAVY = os.environ.get("HDX_HEAVY") == "1"


class TestSmallComplex(unittest.TestCase):
    """Test cases on the complex of SL3(F3)."""

    @classmethod
    def setUpClass(cls):
        """Build the complex once: |G| = 5616, |H_α| = 27."""
        cls.realization = MatrixRealization("sl3", FieldSpec.from_params(3, 1, allow_small_p=True))
        cls.table = enumerate_group(cls.realization)
        cls.K = build_complex(cls.table, cls.realization.special)

    def test_counts(self):
        """Test one face per group element and |G|/|H| vertices per type."""
        self.assertEqual(len(self.table), 5616)
        self.assertEqual(self.K.num_faces, 5616)
        self.assertEqual([len(p) for p in self.K.parts], [208, 208, 208])
        self.assertEqual(self.K.dimension, 2)
        self.assertTrue(self.K.is_partite())

    def test_transitivity(self):
        """Test ∩ H_α = {1} and simple transitivity."""
        report = transitivity_check(self.K)
        self.assertTrue(report["intersection_trivial"])
        self.assertTrue(report["simply_transitive"])

    def test_connectivity(self):
        """Test the skeleton and every vertex link are connected."""
        report = connectivity_check(self.K)
        self.assertTrue(report["skeleton_connected"])
        self.assertTrue(report["all_links_connected"])
        self.assertIsNone(report["witness"])

    def test_degree_stats(self):
        """Test every vertex lies in |H_α| faces."""
        stats = degree_stats(self.K)
        for per_type in stats["per_type"].values():
            self.assertTrue(per_type["uniform"])
            self.assertEqual(per_type["max"], 27)
            self.assertEqual(per_type["subgroup_size"], 27)

    def test_vertex_link(self):
        """Test the identity vertex link is 3-regular bipartite on 9 + 9 vertices."""
        graph = extract_vertex_link_at_identity(self.K, [0], validate=True)
        self.assertIsInstance(graph, LinkGraph)
        self.assertEqual((graph.n_left, graph.n_right), (9, 9))
        self.assertEqual(graph.regular_degree(), 3)
        self.assertEqual(graph.num_edges, 27)
        self.assertEqual(graph.provenance, "extracted")

    def test_link_networkx_export(self):
        """Test the networkx export keeps both sides and every edge."""
        exported = extract_vertex_link_at_identity(self.K, [0]).to_networkx()
        self.assertEqual(exported.number_of_nodes(), 18)
        self.assertEqual(exported.number_of_edges(), 27)
        self.assertTrue(nx.is_connected(exported))
        self.assertTrue(nx.is_bipartite(exported))

    def test_link_agrees_with_direct_construction(self):
        """Test extracted and directly built links agree for every type."""
        for t in range(3):
            self.assertTrue(link_agreement(self.K, [t]))

    def test_links_of_one_type_match(self):
        """Test two vertices of the same type have isomorphic-degree links."""
        first = link(self.K, [int(self.K.maximal_faces[0, 1])])
        last = link(self.K, [int(self.K.maximal_faces[-1, 1])])
        self.assertEqual(sorted(first.degrees()[0]), sorted(last.degrees()[0]))
        self.assertEqual(first.num_edges, last.num_edges)

    def test_link_of_empty_face(self):
        """Test the link of ∅ is the complex itself."""
        self.assertIs(link(self.K, []), self.K)

    def test_link_of_edge(self):
        """Test an edge link is a 0-dimensional complex of |X_α| vertices."""
        face = self.K.maximal_faces[0]
        result = link(self.K, [int(face[0]), int(face[1])])
        self.assertIsInstance(result, CosetComplex)
        self.assertEqual(result.num_faces, 3)

    def test_bad_faces(self):
        """Test same-type vertices and maximal faces raise DomainError."""
        part = self.K.parts[0]
        with self.assertRaises(DomainError):
            link(self.K, [int(part[0]), int(part[1])])
        with self.assertRaises(DomainError):
            link(self.K, [int(v) for v in self.K.maximal_faces[0]])

    def test_verify_report(self):
        """Test verify_complex passes."""
        self.assertTrue(verify_complex(self.K)["passed"])

    def test_purity(self):
        """Test faces cover every vertex once per type; dropping faces breaks purity."""
        self.assertTrue(self.K.is_pure())
        self.assertTrue(verify_complex(self.K)["pure"])
        truncated = CosetComplex(self.K.types, self.K.parts, self.K.maximal_faces[:1])
        self.assertFalse(truncated.is_pure())
        narrow = CosetComplex(self.K.types, self.K.parts, self.K.maximal_faces[:, :2])
        self.assertFalse(narrow.is_pure())

    def test_save_and_load(self):
        """Test the npz archive and manifest reload to the same complex."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "sl3_f3.npz")
            archive, manifest = save_complex(self.K, path)
            self.assertTrue(os.path.exists(manifest))
            loaded = load_complex(archive)
        self.assertEqual(loaded.counts(), self.K.counts())
        self.assertTrue(np.array_equal(loaded.maximal_faces, self.K.maximal_faces))
        self.assertTrue(link_agreement(loaded, [0]))

    def test_load_missing(self):
        """Test loading a missing archive raises DomainError."""
        with self.assertRaises(DomainError):
            load_complex(os.path.join(tempfile.gettempdir(), "no_such_complex.npz"))


class TestDegenerateComplexes(unittest.TestCase):
    """Test cases for complexes built with overridden subgroups."""

    def setUp(self):
        """Set up test fixtures."""
        self.realization = MatrixRealization("sl3", FieldSpec.from_params(3, 1, allow_small_p=True))
        self.table = enumerate_group(self.realization)

    def test_trivial_subgroups(self):
        """Test trivial subgroups give one isolated face per element."""
        special = self.realization.special
        K = build_complex(self.table, special, subgroup_generators={a: [] for a in special.members})
        self.assertEqual(K.num_faces, 5616)
        self.assertEqual([len(p) for p in K.parts], [5616] * 3)
        report = connectivity_check(K)
        self.assertFalse(report["skeleton_connected"])
        self.assertEqual(report["skeleton_components"], 5616)
        self.assertTrue(transitivity_check(K)["simply_transitive"])

    def test_dropped_generators_disconnect(self):
        """Test subgroups generated by one root each no longer connect the complex."""
        special = self.realization.special
        members = special.members
        reduced = {a: self.realization.graded_generators([members[(i + 1) % 3]]) for i, a in enumerate(members)}
        K = build_complex(self.table, special, subgroup_generators=reduced)
        self.assertFalse(connectivity_check(K)["connected"])
        with self.assertRaises(DomainError):
            adjoint_complex(K)


class TestSubgroupLaws(unittest.TestCase):
    """Test cases for subgroup intersections and local balls."""

    def setUp(self):
        """Set up test fixtures."""
        self.f5 = FieldSpec.from_params(5, 1)

    def test_subgroup_intersections(self):
        """Test X_Ψ ∩ X_Ψ′ = X_{Ψ∩Ψ′} for all pairs of H_α in SL3 and Sp4."""
        for name in ("sl3", "sp4"):
            realization = MatrixRealization(name, self.f5)
            members = list(realization.special.members)
            for i in range(3):
                for j in range(i + 1, 3):
                    psi = [r for r in members if r != members[i]]
                    psi2 = [r for r in members if r != members[j]]
                    self.assertTrue(subgroup_intersection_check(realization, psi, psi2), f"{name} {i} {j}")

    def test_disjoint_intersection(self):
        """Test disjoint root sets meet in the identity."""
        realization = MatrixRealization("sl3", self.f5)
        a, b = realization.system.simples
        self.assertTrue(subgroup_intersection_check(realization, [a], [b]))

    def test_local_ball(self):
        """Test the radius-1 ball is H_0 ∪ H_1 ∪ H_2."""
        realization = MatrixRealization("sl3", self.f5)
        self.assertEqual(local_ball(realization, 0).num_faces, 1)
        ball = local_ball(realization, 1)
        self.assertEqual(ball.num_faces, 3 * 125 - 3 * 5 + 1)
        self.assertTrue(ball.metadata["local_ball"])
        with self.assertRaises(DomainError):
            local_ball(realization, -1)

    def test_local_ball_extension_field(self):
        """Test balls work at m = 2, where the group is not enumerated."""
        realization = MatrixRealization("sl3", FieldSpec.from_params(3, 2, allow_small_p=True))
        ball = local_ball(realization, 1)
        sizes = [len(h) for h in ball.subgroup_table.values()]
        self.assertEqual(sizes, [9 ** 3] * 3)
        self.assertEqual(ball.num_faces, 3 * 9 ** 3 - 3 * 9 + 1)


class TestAdjointComplex(unittest.TestCase):
    """Test cases for the adjoint complex over F_4, where |Z| = 3."""

    @classmethod
    def setUpClass(cls):
        """Build the universal complex of SL3(F4)."""
        cls.realization = MatrixRealization("sl3", FieldSpec.from_params(2, 2, allow_small_p=True))
        cls.K = build_complex(enumerate_group(cls.realization), cls.realization.special)

    def test_center(self):
        """Test |Z| = 3."""
        self.assertEqual(compute_center(self.realization).size, 3)

    def test_adjoint_counts(self):
        """Test the adjoint complex has a third of the faces and vertices."""
        adjoint = adjoint_complex(self.K)
        self.assertEqual(self.K.num_faces, 60480)
        self.assertEqual(adjoint.num_faces, 60480 // 3)
        self.assertEqual([len(p) for p in adjoint.parts], [len(p) // 3 for p in self.K.parts])
        self.assertTrue(adjoint.metadata["center_intersection_certified"])

    def test_adjoint_links_match(self):
        """Test vertex links of the two complexes have the same shape."""
        adjoint = adjoint_complex(self.K)
        for t in range(3):
            universal = extract_vertex_link_at_identity(self.K, [t])
            quotient = extract_vertex_link_at_identity(adjoint, [t])
            self.assertEqual(universal.regular_degree(), quotient.regular_degree())
            self.assertEqual(universal.num_edges, quotient.num_edges)


@unittest.skipUnless(HEAVY, "set HDX_HEAVY=1 for whole-group complexes over F5")
class TestAcceptanceComplexes(unittest.TestCase):
    """Whole complexes of SL3(F5) and Sp4(F5)."""

    def test_sl3_f5(self):
        """Test 372000 faces and 2976 vertices per type."""
        realization = MatrixRealization("sl3", FieldSpec.from_params(5, 1))
        K = build_complex(enumerate_group(realization), realization.special)
        self.assertEqual(K.num_faces, 372000)
        self.assertEqual([len(p) for p in K.parts], [2976] * 3)
        self.assertTrue(connectivity_check(K)["connected"])
        self.assertEqual(degree_stats(K)["max"], 125)

    def test_sp4_f5(self):
        """Test 9360000 faces, trivial intersection and connected links."""
        realization = MatrixRealization("sp4", FieldSpec.from_params(5, 1))
        K = build_complex(enumerate_group(realization), realization.special)
        report = verify_complex(K)
        self.assertEqual(K.num_faces, 9360000)
        self.assertTrue(report["transitivity"]["intersection_trivial"])
        self.assertTrue(report["connectivity"]["connected"])


if __name__ == '__main__':
    unittest.main()
