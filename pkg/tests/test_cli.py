"""
Unit tests for the command line, configuration and reports
"""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from fractions import Fraction
from unittest.mock import patch

import numpy as np
import pandas as pd

from core.algebra.gf import FieldSpec
from core.algebra.rootsys import build_root_system
from core.config import BUDGET_ENV_VAR, Config, RunConfig, config
from core.errors import (
    EXIT_BUDGET, EXIT_OK, EXIT_PROPERTY_FAILED, EXIT_USAGE, CertificateFailure, DomainError, IntegrityError,
    ResourceBudgetError, UsageError, exit_code_for,
)
from core.reporting import ReportingManager, dumps_report, summarize, to_jsonable
from core.spectra import charsum_case2, link_graph
from main import dispatch
from utils.diagnostics import check_budget


def _run(argv):
    out = io.StringIO()
    with redirect_stdout(out):
        code = dispatch(argv + ["--log-level", "WARNING"])
    return code, out.getvalue()


class TestDispatch(unittest.TestCase):
    """Test cases for command dispatch and exit codes."""

    def test_field_make(self):
        """Test field make prints the modulus as JSON."""
        code, out = _run(["field", "make", "--p", "5", "--m", "2"])
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["q"], 25)
        self.assertEqual(report["modulus_coefficients"], [2, 0, 1])

    def test_rootsys_info(self):
        """Test rootsys info lists the special set and pair cases."""
        code, out = _run(["rootsys", "info", "--family", "B", "--rank", "2", "--variant", "alternate"])
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["roots"], 8)
        self.assertTrue(report["special_set"]["positive_span"])
        self.assertIn("case3", {v["link_case"] for v in report["pairs"].values()})

    def test_missing_argument(self):
        """Test argparse failures exit with the usage code."""
        with redirect_stdout(io.StringIO()), patch("sys.stderr", new=io.StringIO()):
            self.assertEqual(dispatch(["rootsys", "info"]), EXIT_USAGE)

    def test_invalid_parameters(self):
        """Test composite p and small p for certificates are usage errors."""
        self.assertEqual(_run(["field", "make", "--p", "6"])[0], EXIT_USAGE)
        self.assertEqual(_run(["hdx", "certify", "--family", "A", "--rank", "2", "--p", "3"])[0], EXIT_USAGE)

    def test_g2_certificate_refused(self):
        """Test hdx certify on G2 reports a finding with exit code 1."""
        code, out = _run(["hdx", "certify", "--family", "G", "--rank", "2"])
        self.assertEqual(code, EXIT_PROPERTY_FAILED)
        report = json.loads(out)
        self.assertFalse(report["passed"])
        self.assertEqual(report["witness"]["family"], "G2")

    def test_link_certificate(self):
        """Test the link-mode certificate for SL3(F_5) passes."""
        code, out = _run(["hdx", "certify", "--family", "A", "--rank", "2", "--mode", "links"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(json.loads(out)["passed"])

    def test_matgroup_enumerate(self):
        """Test SL2(F_5) enumeration through the CLI."""
        code, out = _run(["matgroup", "enumerate", "--realization", "sl2"])
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertEqual(report["order"], 120)
        self.assertEqual(report["order"], report["formula_order"])

    def test_system_check(self):
        """Test diagnostics report a health score."""
        code, out = _run(["system", "check"])
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertIn(report["overall_status"], ("HEALTHY", "DEGRADED", "UNHEALTHY"))
        self.assertIn("health_score", report)

    def test_heavy_guard(self):
        """Test whole groups above one million elements need --heavy."""
        code, _ = _run(["complex", "build", "--family", "B", "--rank", "2"])
        self.assertEqual(code, EXIT_USAGE)

    def test_summary_and_report_file(self):
        """Test --summary prints key: value lines and --report writes sorted JSON."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "field.json")
            code, out = _run(["field", "make", "--p", "7", "--summary", "--report", path])
            self.assertEqual(code, EXIT_OK)
            self.assertIn("q: 7", out.splitlines())
            with open(path) as f:
                text = f.read()
        self.assertEqual(text, dumps_report(json.loads(text)))


class TestRunConfig(unittest.TestCase):
    """Test cases for RunConfig and Config."""

    def test_validate(self):
        """Test each precondition raises UsageError."""
        RunConfig(p=5, m=2).validate()
        for kwargs in ({"p": 9}, {"m": 0}, {"tolerance": 0.0}, {"threads": 0}):
            with self.assertRaises(UsageError):
                RunConfig(**kwargs).validate()
        with self.assertRaises(UsageError):
            RunConfig(p=3).validate(certificate=True)
        RunConfig(p=3, allow_small_p=True).validate(certificate=True)

    def test_defaults(self):
        """Test dot-notation lookups and defaults."""
        self.assertEqual(config.get("spectra.seed"), 42)
        self.assertIsNone(config.get("no.such.key"))
        self.assertEqual(config.get("no.such.key", 7), 7)

    def test_override_is_in_memory(self):
        """Test override leaves the file untouched."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "config.json")
            local = Config(path)
            with open(path) as f:
                before = f.read()
            local.override("budgets.max_link_elements", 10)
            self.assertEqual(local.get("budgets.max_link_elements"), 10)
            with open(path) as f:
                self.assertEqual(f.read(), before)

    def test_memory_budget_from_environment(self):
        """Test the environment variable wins over the file."""
        with patch.dict(os.environ, {BUDGET_ENV_VAR: "12.5"}):
            self.assertEqual(config.memory_budget_mb(), 12.5)


class TestErrorsAndReports(unittest.TestCase):
    """Test cases for exit codes, budgets and report rendering."""

    def test_exit_codes(self):
        """Test each error class maps onto its exit code."""
        self.assertEqual(exit_code_for(CertificateFailure("x")), EXIT_PROPERTY_FAILED)
        self.assertEqual(exit_code_for(IntegrityError("x")), EXIT_PROPERTY_FAILED)
        self.assertEqual(exit_code_for(DomainError("x")), EXIT_USAGE)
        self.assertEqual(exit_code_for(UsageError("x")), EXIT_USAGE)
        self.assertEqual(exit_code_for(ResourceBudgetError("x")), EXIT_BUDGET)
        self.assertEqual(exit_code_for(ValueError("x")), EXIT_PROPERTY_FAILED)

    def test_check_budget(self):
        """Test allocations above HDX_BUDGET_MB raise ResourceBudgetError."""
        with patch.dict(os.environ, {BUDGET_ENV_VAR: "1"}):
            self.assertLess(check_budget(1000, 8, "small"), 1)
            with self.assertRaises(ResourceBudgetError) as ctx:
                check_budget(10 ** 6, 8, "large")
        self.assertEqual(ctx.exception.budget, 1.0)

    def test_json_is_deterministic(self):
        """Test key order, fractions and numpy values in the JSON output."""
        report = {"b": Fraction(1, 5), "a": np.int64(3), "c": [np.float64(0.5), Fraction(4, 2)],
                  "d": {"z": np.bool_(True)}}
        text = dumps_report(report)
        self.assertEqual(text, dumps_report(dict(reversed(list(report.items())))))
        parsed = json.loads(text)
        self.assertEqual(parsed["b"], "1/5")
        self.assertEqual(parsed["c"], [0.5, "2"])
        self.assertIs(parsed["d"]["z"], True)
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(to_jsonable((1, 2)), [1, 2])

    def test_summarize(self):
        """Test nested sections are indented and long lists collapsed."""
        lines = summarize({"x": 0.25, "nested": {"y": 1}, "long": list(range(20))}, title="demo")
        self.assertEqual(lines[:2], ["demo", "===="])
        self.assertIn("nested:", lines)
        self.assertIn("  y: 1", lines)
        self.assertIn("long: [20 items]", lines)
        self.assertIn("x: 0.25", lines)

    def test_reporting_manager(self):
        """Test reports land in the reports directory and read back."""
        with tempfile.TemporaryDirectory() as tmp:
            manager = ReportingManager(reports_dir=tmp)
            path = manager.write_json({"value": Fraction(2, 3)}, "out.json")
            self.assertTrue(path.startswith(tmp))
            self.assertEqual(manager.read_json(path), {"value": "2/3"})

    def test_csv_exports(self):
        """Test spectrum and edge CSVs have one row per character and per edge."""
        a2 = build_root_system("A", 2)
        with tempfile.TemporaryDirectory() as tmp:
            manager = ReportingManager(reports_dir=tmp)
            spectrum = pd.read_csv(manager.export_spectrum_csv(charsum_case2(5), "case2.csv"))
            edges = pd.read_csv(manager.export_edges_csv(link_graph(a2, *a2.simples, FieldSpec.from_params(5, 1)),
                                                         "edges.csv"))
        self.assertEqual(len(spectrum), 5 ** 5)
        self.assertEqual(list(spectrum.columns), ["r", "count", "denominator", "value"])
        self.assertAlmostEqual(spectrum["value"].iloc[1:].max(), 0.2)
        self.assertEqual(len(edges), 125)
        self.assertTrue((edges["multiplicity"] == 1).all())


if __name__ == '__main__':
    unittest.main()
