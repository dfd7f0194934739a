"""
Task reports: deterministic JSON documents plus a plain-text rendering
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from kybra_simple_logging import get_logger

from .constants import EXIT_OK
from .storage import MemoryStorage, Storage

logger = get_logger(__name__)

TOOL_NAME = "tangent_lifts"
TEXT_LIST_LIMIT = 8


@dataclass
class TaskReport:
    """Outcome of one task.

    Attributes:
        task: Task name
        label: Unique label within the run; report files are named after it
        passed: Every residual check met its tolerance
        exit_code: Exit code this task contributes to the run
        result: Task-specific residuals, flags and summaries
        violation: The first sample point that failed a check, if any
        error: Message of the error that stopped the task, if any
    """

    task: str
    label: str
    passed: bool
    exit_code: int = EXIT_OK
    result: Dict[str, Any] = field(default_factory=dict)
    violation: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task": self.task,
            "label": self.label,
            "passed": self.passed,
            "exit_code": self.exit_code,
            "result": self.result,
            "violation": self.violation,
            "error": self.error,
        }


def to_jsonable(value: Any) -> Any:
    """numpy and tuple values to plain JSON types; non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    return value


def _fmt(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return f"{value:.3g}"
    return str(value)


def _render(prefix: str, value: Any, lines: List[str]) -> None:
    if isinstance(value, dict):
        if not value:
            lines.append(f"{prefix}: {{}}")
        for k in sorted(value):
            _render(f"{prefix}.{k}" if prefix else str(k), value[k], lines)
    elif isinstance(value, list):
        flat = all(not isinstance(v, (dict, list)) for v in value)
        if flat and len(value) <= TEXT_LIST_LIMIT:
            lines.append(f"{prefix}: [{', '.join(_fmt(v) for v in value)}]")
        elif flat and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            lines.append(
                f"{prefix}: {len(value)} values, min {_fmt(float(min(value)))}, "
                f"max {_fmt(float(max(value)))}"
            )
        else:
            for i, v in enumerate(value[:TEXT_LIST_LIMIT]):
                _render(f"{prefix}[{i}]", v, lines)
            if len(value) > TEXT_LIST_LIMIT:
                lines.append(f"{prefix}: ... {len(value) - TEXT_LIST_LIMIT} more")
    else:
        lines.append(f"{prefix}: {_fmt(value)}")


def render_text(document: Dict[str, Any]) -> str:
    """One "path: value" line per leaf, residuals at 3 significant digits."""
    lines: List[str] = []
    _render("", document, lines)
    return "\n".join(lines) + "\n"


class ReportBook:
    """Stores task reports, each wrapped in the run envelope (tool, version,
    config hash, seed, tolerances), under "<label>.json" and "<label>.txt"."""

    def __init__(self, envelope: Dict[str, Any], storage: Optional[Storage] = None):
        self._storage = storage if storage else MemoryStorage()
        self.envelope = to_jsonable(envelope)
        self._labels: List[str] = []

    @staticmethod
    def dumps(document: Dict[str, Any], pretty: bool = True) -> str:
        if pretty:
            return json.dumps(document, sort_keys=True, indent=2) + "\n"
        return json.dumps(document, sort_keys=True, separators=(",", ":"))

    def document(self, report: TaskReport) -> Dict[str, Any]:
        doc = dict(self.envelope)
        doc.update(to_jsonable(report.to_dict()))
        return doc

    def save(self, report: TaskReport) -> Dict[str, Any]:
        """Store the report under its label

        Args:
            report: Report of a finished task

        Returns:
            The stored JSON document
        """
        doc = self.document(report)
        self._storage.write(f"{report.label}.json", self.dumps(doc))
        self._storage.write(f"{report.label}.txt", render_text(doc))
        if report.label not in self._labels:
            self._labels.append(report.label)
        logger.debug(f"Saved report {report.label} (passed={report.passed})")
        return doc

    def save_artifact(self, name: str, text: str) -> None:
        self._storage.write(name, text)

    def load(self, label: str) -> Optional[Dict[str, Any]]:
        data = self._storage.read(f"{label}.json")
        if data:
            return json.loads(data)
        return None

    def load_text(self, label: str) -> Optional[str]:
        return self._storage.read(f"{label}.txt")

    def artifact(self, name: str) -> Optional[str]:
        return self._storage.read(name)

    @property
    def labels(self) -> List[str]:
        return list(self._labels)

    def dump_json(self, pretty: bool = False) -> str:
        """All reports of this book as one JSON object keyed by label."""
        result = {label: self.load(label) for label in self._labels}
        if pretty:
            return json.dumps(result, indent=2, sort_keys=True)
        return json.dumps(result, sort_keys=True)
