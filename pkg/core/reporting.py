"""
Report emission for the HDX toolkit.
Writes deterministic JSON reports, CSV exports and human-readable summaries.
"""

import json
import os
import threading
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from core.config import config
from utils.logging_setup import get_logger


def to_jsonable(obj: Any) -> Any:
    """Convert fractions, numpy values and containers into plain JSON types."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    return obj


def dumps_report(report: Dict[str, Any]) -> str:
    """Sorted-key JSON; identical input gives identical bytes."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ReportingManager:
    """Writes reports and exports under one directory."""

    def __init__(self, reports_dir: Optional[str] = None):
        self.logger = get_logger(__name__)
        self.reports_dir = reports_dir or config.get("reports.directory", "reports")
        self.reporting_lock = threading.Lock()
        self.written: List[str] = []

    def _resolve(self, path: str) -> str:
        if os.path.isabs(path) or os.path.dirname(path):
            target = path
        else:
            target = os.path.join(self.reports_dir, path)
        directory = os.path.dirname(target)
        if directory:
            os.makedirs(directory, exist_ok=True)
        return target

    def write_json(self, report: Dict[str, Any], path: str) -> str:
        """
        Write one report as deterministic JSON.

        Args:
            report: report body (no timestamps)
            path: file name, relative to the reports directory unless it has a directory part

        Returns:
            The path written
        """
        with self.reporting_lock:
            target = self._resolve(path)
            with open(target, "w", encoding="utf-8") as f:
                f.write(dumps_report(report))
            self.written.append(target)
        self.logger.info(f"📊 Report saved: {target}")
        return target

    def read_json(self, path: str) -> Dict[str, Any]:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def export_spectrum_csv(self, spectrum, path: str) -> str:
        """
        Dump a character-sum spectrum, one row per character.

        Columns: r (comma-joined), count, denominator, value.
        """
        rs = spectrum.characters()
        counts = np.asarray(spectrum.counts, dtype=np.int64)
        frame = pd.DataFrame({
            "r": [",".join(str(int(x)) for x in row) for row in rs],
            "count": counts,
            "denominator": spectrum.denominator,
        })
        frame["value"] = frame["count"] / frame["denominator"]
        with self.reporting_lock:
            target = self._resolve(path)
            frame.to_csv(target, index=False)
            self.written.append(target)
        self.logger.info(f"📊 Spectrum CSV saved: {target} ({len(frame)} rows)")
        return target

    def export_edges_csv(self, link_graph, path: str) -> str:
        """Edge list of a link graph with multiplicities, by global vertex id."""
        rows = link_graph.edge_multiset()
        frame = pd.DataFrame(rows, columns=["left", "right", "multiplicity"])
        frame["provenance"] = link_graph.provenance
        with self.reporting_lock:
            target = self._resolve(path)
            frame.to_csv(target, index=False)
            self.written.append(target)
        self.logger.info(f"📊 Edge CSV saved: {target} ({len(frame)} edges)")
        return target


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def summarize(report: Dict[str, Any], title: Optional[str] = None) -> List[str]:
    """Human-readable lines for standard output; nested sections are indented."""
    lines = []
    if title:
        lines.append(title)
        lines.append("=" * len(title))

    def walk(node: Dict[str, Any], indent: int) -> None:
        pad = "  " * indent
        for key in sorted(node):
            value = node[key]
            if isinstance(value, dict):
                lines.append(f"{pad}{key}:")
                walk(value, indent + 1)
            elif isinstance(value, (list, tuple)) and len(value) > 8:
                lines.append(f"{pad}{key}: [{len(value)} items]")
            elif isinstance(value, (list, tuple)):
                lines.append(f"{pad}{key}: {', '.join(_fmt(v) for v in value)}")
            else:
                lines.append(f"{pad}{key}: {_fmt(value)}")

    walk(to_jsonable(report) if not isinstance(report, dict) else report, 0)
    return lines
