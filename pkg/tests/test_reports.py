"""Tests for task reports and the report book."""

import json
import math

import numpy as np

from tangent_lifts.reports import ReportBook, TaskReport, render_text, to_jsonable

ENVELOPE = {"tool": "tangent_lifts", "version": "0.1.0", "config_hash": "abc", "seed": 42}


class TestJsonable:
    def test_numpy_values(self):
        data = to_jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": np.bool_(True), 1: (1, 2)})
        assert data == {"a": 1.5, "b": [0, 1, 2], "c": True, "1": [1, 2]}
        assert type(data["a"]) is float and type(data["c"]) is bool

    def test_non_finite(self):
        assert to_jsonable([math.nan, math.inf]) == ["nan", "inf"]


class TestRenderText:
    def test_paths_and_precision(self):
        text = render_text({"result": {"max_residuals": {"bracket": 1.23456e-13}}, "passed": True})
        assert "passed: true" in text.splitlines()
        assert "result.max_residuals.bracket: 1.23e-13" in text

    def test_long_lists_are_summarized(self):
        text = render_text({"psi": [float(i) for i in range(20)], "flags": [True, False]})
        assert "psi: 20 values, min 0, max 19" in text
        assert "flags: [true, false]" in text


class TestReportBook:
    def test_save_and_load(self, storage):
        book = ReportBook(ENVELOPE, storage)
        report = TaskReport("classify", "rot", True, result={"psi": np.zeros(2)})
        doc = book.save(report)
        assert doc["tool"] == "tangent_lifts" and doc["label"] == "rot"
        assert book.load("rot") == doc
        assert "rot.json" in storage and "rot.txt" in storage
        assert book.load_text("rot").startswith("config_hash: abc")
        assert book.labels == ["rot"]

    def test_json_is_deterministic(self, storage):
        book = ReportBook(ENVELOPE, storage)
        book.save(TaskReport("integrate", "b", False, 1, {"z": 1, "a": 2}))
        text = storage.read("b.json")
        assert text.endswith("\n")
        assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"

    def test_artifacts_and_dump(self):
        book = ReportBook(ENVELOPE)
        book.save_artifact("run.csv", "sigma\n0\n")
        book.save(TaskReport("verify-brackets", "one", True))
        book.save(TaskReport("verify-brackets", "two", False, 1))
        assert book.artifact("run.csv") == "sigma\n0\n"
        dumped = json.loads(book.dump_json())
        assert list(dumped) == ["one", "two"]
        assert dumped["two"]["exit_code"] == 1
        assert book.load("three") is None
