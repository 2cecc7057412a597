"""
Environment checks and the memory-budget guard.

check_budget is called before every large allocation (group tables, link
vertex sets, walk operators). SystemDiagnostics backs `system check`.
"""

import importlib
import os
import sys
import tempfile
import time
from typing import Any, Callable, Dict, List, Optional, Tuple

from core.config import config
from core.errors import ResourceBudgetError
from utils.logging_setup import get_logger

REQUIRED_PACKAGES = ("numpy", "scipy", "pandas", "networkx")

# root counts for the rank-2 systems the toolkit certifies
EXPECTED_ROOTS = {("A", 2): 6, ("B", 2): 8, ("G", 2): 12}


def available_memory_mb() -> Optional[float]:
    """MemAvailable from /proc/meminfo, or None where it does not exist."""
    try:
        with open('/proc/meminfo', 'r') as f:
            for line in f:
                if line.startswith("MemAvailable:"):
                    return int(line.split()[1]) / 1024.0
    except OSError:
        pass
    return None


def check_budget(predicted_elements: int, bytes_per_element: int, what: str) -> float:
    """
    Raise ResourceBudgetError when a planned allocation exceeds the memory budget.

    Args:
        predicted_elements: number of items the computation will hold
        bytes_per_element: storage per item
        what: label for the log and the error

    Returns:
        Predicted size in MB
    """
    logger = get_logger(__name__)
    predicted_mb = predicted_elements * bytes_per_element / (1024.0 * 1024.0)
    budget_mb = config.memory_budget_mb()
    if predicted_mb > budget_mb:
        logger.error(f"❌ {what}: predicted {predicted_mb:.1f} MB exceeds budget {budget_mb:.0f} MB")
        raise ResourceBudgetError(f"{what} needs about {predicted_mb:.1f} MB, budget is {budget_mb:.0f} MB",
                                  predicted=predicted_mb, budget=budget_mb)
    logger.debug(f"📊 {what}: predicted {predicted_mb:.1f} MB within budget {budget_mb:.0f} MB")
    return predicted_mb


def _check(status: str, message: str, details: Any = None) -> Dict[str, Any]:
    return {"status": status, "message": message, "details": details}


class SystemDiagnostics:
    """Environment health checks run before long computations."""

    def __init__(self):
        self.logger = get_logger(__name__)
        self.results: Dict[str, Dict[str, Any]] = {}

    def checks(self) -> List[Tuple[str, Callable[[], Dict[str, Any]]]]:
        return [
            ("Python", self.check_python),
            ("Packages", self.check_packages),
            ("Memory Budget", self.check_memory),
            ("Writable Directories", self.check_directories),
            ("Field Tables", self.check_field_tables),
            ("Root Systems", self.check_root_systems),
        ]

    def run_all_checks(self) -> Dict[str, Any]:
        """
        Run every check; a check that raises counts as ERROR.

        Returns:
            overall_status, health_score (percent of PASS), per-check results
        """
        self.logger.info("🔍 Running system diagnostics")
        start = time.perf_counter()
        checks = self.checks()

        for name, check in checks:
            try:
                result = check()
            except Exception as e:
                result = _check("ERROR", f"check raised: {str(e)}")
            self.results[name] = result

            status = result["status"]
            if status == "PASS":
                self.logger.info(f"✅ {name}: {result['message']}")
            elif status == "WARN":
                self.logger.warning(f"⚠️ {name}: {result['message']}")
            else:
                self.logger.error(f"❌ {name}: {status} - {result['message']}")

        passed = sum(1 for r in self.results.values() if r["status"] == "PASS")
        health_score = 100.0 * passed / len(checks)
        if health_score >= 80:
            overall = "HEALTHY"
        elif health_score >= 50:
            overall = "DEGRADED"
        else:
            overall = "UNHEALTHY"

        duration = time.perf_counter() - start
        self.logger.info(f"📊 Health score {health_score:.1f}% ({passed}/{len(checks)}) in {duration:.2f}s")
        return {
            "overall_status": overall,
            "health_score": health_score,
            "checks_passed": passed,
            "total_checks": len(checks),
            "duration_seconds": duration,
            "results": self.results,
        }

    def check_python(self) -> Dict[str, Any]:
        version = ".".join(str(v) for v in sys.version_info[:3])
        details = {"version": version, "executable": sys.executable}
        if sys.version_info < (3, 11):
            return _check("FAIL", f"Python 3.11+ required, found {version}", details)
        return _check("PASS", f"Python {version}", details)

    def check_packages(self) -> Dict[str, Any]:
        versions = {}
        for package in REQUIRED_PACKAGES:
            try:
                versions[package] = getattr(importlib.import_module(package), "__version__", "unknown")
            except ImportError:
                versions[package] = None
        missing = [p for p, v in versions.items() if v is None]
        if missing:
            return _check("FAIL", f"missing packages: {', '.join(missing)}", versions)
        return _check("PASS", "required packages importable", versions)

    def check_memory(self) -> Dict[str, Any]:
        """Compare the configured budget with available memory."""
        budget_mb = config.memory_budget_mb()
        available = available_memory_mb()
        details = {"budget_mb": budget_mb, "available_mb": None if available is None else round(available, 1)}
        if available is None:
            return _check("WARN", "available memory unknown", details)
        if available < budget_mb:
            return _check("WARN", f"budget {budget_mb:.0f} MB exceeds available {available:.0f} MB", details)
        return _check("PASS", f"budget {budget_mb:.0f} MB fits in {available:.0f} MB", details)

    def check_directories(self) -> Dict[str, Any]:
        details = {}
        for key, default in (("reports.directory", "reports"), ("logging.log_dir", "logs")):
            path = config.get(key, default)
            try:
                os.makedirs(path, exist_ok=True)
                with tempfile.NamedTemporaryFile(dir=path):
                    pass
                details[path] = "OK"
            except OSError as e:
                details[path] = str(e)
        failed = [path for path, state in details.items() if state != "OK"]
        if failed:
            return _check("FAIL", f"not writable: {', '.join(failed)}", details)
        return _check("PASS", "report and log directories writable", details)

    def check_field_tables(self) -> Dict[str, Any]:
        """Inverse and negation identities over F_5 and F_25."""
        from core.algebra.gf import FieldSpec

        details = {}
        for p, m in ((5, 1), (5, 2)):
            field = FieldSpec.from_params(p, m)
            nonzero = field.elements()[1:]
            ok = bool((field.mul(nonzero, field.inv(nonzero)) == 1).all())
            ok = ok and bool((field.add(nonzero, field.neg(nonzero)) == 0).all())
            details[f"F_{field.q}"] = ok
        if not all(details.values()):
            return _check("FAIL", "field table identities failed", details)
        return _check("PASS", "field tables consistent", details)

    def check_root_systems(self) -> Dict[str, Any]:
        from core.algebra.rootsys import build_root_system

        details = {f"{family}{rank}": len(build_root_system(family, rank)) for family, rank in EXPECTED_ROOTS}
        wrong = [f"{family}{rank}" for (family, rank), n in EXPECTED_ROOTS.items() if details[f"{family}{rank}"] != n]
        if wrong:
            return _check("FAIL", f"unexpected root counts: {', '.join(wrong)}", details)
        return _check("PASS", "rank-2 root systems complete", details)
