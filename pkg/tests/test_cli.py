"""Tests for the command-line entry points and report plumbing."""

import json

import numpy as np
import pytest

from torsionlab.analytic import ModelGeometry, geometry_to_json
from torsionlab.cli import format_report, main, run_torsion, run_verify
from torsionlab.complexes import MetricComplex, complex_to_json
from torsionlab.morse import arc_data, double, morse_to_json, split_circle_data

LOG2 = float(np.log(2.0))


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestTorsionCommand:
    def test_two_term_complex(self, tmp_path):
        path = write(tmp_path, "two.json", complex_to_json(
            MetricComplex([1, 1], [np.array([[2.0]])], [np.eye(1), np.eye(1)])))
        report = run_torsion(path, "complex")
        assert report["values"]["torsion_degree0"] == pytest.approx(-LOG2, abs=1e-9)
        assert main(["torsion", path, "--kind", "complex"]) == 0

    def test_zero_complex(self, tmp_path):
        path = write(tmp_path, "zero.json", complex_to_json(
            MetricComplex([0, 0], [np.zeros((0, 0))], [np.zeros((0, 0))] * 2)))
        assert run_torsion(path, "complex")["values"]["torsion_degree0"] == 0.0

    def test_circle_geometry(self, tmp_path):
        path = write(tmp_path, "circle.json",
                     geometry_to_json(ModelGeometry("circle", 2.0)))
        report = run_torsion(path, "geometry")
        assert report["values"]["torsion_degree0"] == pytest.approx(-LOG2, abs=1e-12)

    def test_morse_and_double_kinds(self, tmp_path):
        U = np.array([[np.exp(0.9j)]])
        path = write(tmp_path, "morse.json", morse_to_json(split_circle_data(U)))
        expected = -np.log(np.abs(1 - np.exp(0.9j)))
        report = run_torsion(path, "morse")
        assert report["values"]["torsion_degree0"] == pytest.approx(expected, abs=1e-10)
        path = write(tmp_path, "double.json",
                     morse_to_json(double(arc_data(rank=1))))
        report = run_torsion(path, "double")
        assert set(report["values"]) == {"torsion_degree0",
                                         "equivariant_identity",
                                         "equivariant_reflection"}

    def test_malformed_input_exits_2(self, tmp_path):
        path = write(tmp_path, "bad.json", "{not valid json")
        assert main(["torsion", path, "--kind", "complex"]) == 2
        assert main(["torsion", str(tmp_path / "missing.json"),
                     "--kind", "complex"]) == 2

    def test_invariant_violation_exits_3(self, tmp_path):
        doc = {"kind": "circle", "length": 1.0, "rank": 1,
               "holonomy": {"re": [[2.0]], "im": [[0.0]]}}
        path = write(tmp_path, "nonunitary.json", json.dumps(doc))
        assert main(["torsion", path, "--kind", "geometry"]) == 3


class TestVerifyCommand:
    def test_suites_pass(self):
        for suite in ("spectral", "morse", "analytic", "gluing"):
            report = run_verify(suite, seed=3)
            assert report["verdict"] == "pass", report

    def test_exit_code_zero_on_pass(self, capsys):
        assert main(["verify", "morse", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "verdict: pass" in out

    def test_failure_exit_code(self):
        # an absurdly tight tolerance forces check failures -> exit 1
        report = run_verify("gluing", seed=0, tolerance=1e-30)
        assert report["verdict"] == "fail"
        assert main(["verify", "gluing", "--seed", "0",
                     "--tolerance", "1e-30"]) == 1

    def test_deterministic_reports(self):
        a = format_report(run_verify("morse", seed=11), "json")
        b = format_report(run_verify("morse", seed=11), "json")
        assert a == b
        c = format_report(run_verify("morse", seed=12), "json")
        assert a != c

    def test_json_report_is_valid(self):
        doc = json.loads(format_report(run_verify("analytic", seed=2), "json"))
        assert doc["command"] == "verify"
        assert all(c["verdict"] == "pass" for c in doc["checks"])
