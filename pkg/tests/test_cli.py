# This file is part of lsst-lorentzshape.
#
# Developed for the LSST Data Management System.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# Use of this source code is governed by a 3-clause BSD-style
# license that can be found in the LICENSE file.

import json
import os
import unittest

import numpy as np
from click.testing import CliRunner

from lsst.lorentzshape.cli import main
from lsst.lorentzshape.curve import SampledCurve, read_curve, write_curve
from lsst.lorentzshape.minkowski import random_psimilarity
from lsst.lorentzshape.reconstruction import example1_spec
from lsst.lorentzshape.tests import CurveTestCase
from lsst.lorentzshape.version import __version__


class CommandLineTestCase(CurveTestCase, unittest.TestCase):
    """Test the lorentz-shape commands."""

    def setUp(self):
        self.root = self.makeTempDir()
        self.runner = CliRunner()

    def _path(self, name):
        return os.path.join(self.root, name)

    def _write_json(self, name, data):
        path = self._path(name)
        with open(path, "w") as fh:
            json.dump(data, fh)
        return path

    def _invoke(self, *args, exit_code=0):
        result = self.runner.invoke(main, list(args))
        self.assertEqual(result.exit_code, exit_code, msg=result.output)
        return result

    def _summary(self, result):
        return json.loads(result.stdout.splitlines()[-1])

    def _error(self, result):
        return json.loads(result.stderr.splitlines()[-1])

    def test_version(self):
        result = self._invoke("--version")
        self.assertIn(__version__, result.stdout)

    def test_invariants(self):
        path = str(write_curve(self.sample("example1", (0.0, 1.0), 201, a=0.7), self._path("c.csv")))
        result = self._invoke("invariants", path)
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0], "sigma,kappa1,kappa2,ktilde1,ktilde2")
        self.assertEqual(len(lines), 203)
        summary = self._summary(result)
        self.assertEqual(summary["label"], "c.csv")
        self.assertEqual(summary["dim"], 3)
        self.assertEqual(summary["samples"], 201)
        self.assertEqual(summary["causal"], "spacelike")
        self.assertLess(summary["orthonormality_residual"], 1e-9)
        self.assertLess(summary["structure_residual"], 1e-5)
        self.assertAlmostEqual(summary["arc_length"], 1.0, places=7)
        self.assertEqual(summary["low_confidence"], 6)
        self.assertIsNone(summary["flat_from"])
        self.assertIsNone(summary["out"])

        out = self._path("table.csv")
        result = self._invoke("invariants", path, "--out", out)
        self.assertEqual(len(result.stdout.splitlines()), 1)
        self.assertEqual(self._summary(result)["out"], out)
        with open(out) as fh:
            self.assertEqual(fh.readline().strip(), "sigma,kappa1,kappa2,ktilde1,ktilde2")

    def test_reconstruct_example(self):
        spec = self._write_json("spec.json", {"example": "example1", "a": 0.7, "sigma": [0.0, 1.0]})
        out = self._path("curve.csv")
        result = self._invoke("reconstruct", spec, "--step", "0.01", "--out", out)
        summary = self._summary(result)
        self.assertEqual(summary["samples"], 101)
        self.assertEqual(summary["sigma_range"], [0.0, 1.0])
        self.assertLess(summary["max_residual"], 1e-12)
        self.assertTrue(summary["out"].endswith("curve.csv"))
        expected = self.sample("example1", (0.0, 1.0), 101, a=0.7)
        self.assertCurvesClose(read_curve(out), expected, atol=1e-7)

        result = self._invoke("reconstruct", spec, "--step", "0.1")
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0], "t,x0,x1,x2")
        self.assertEqual(len(lines), 13)

    def test_reconstruct_explicit(self):
        reference = example1_spec(0.7, step=0.01)
        data = {
            "dim": 3,
            "z": [0.0, {"kind": "const", "value": 0.7}],
            "x0": reference.x0.tolist(),
            "frame": reference.frame.tolist(),
            "sigma": [0.0, 1.0],
            "step": 0.01,
        }
        out = self._path("explicit.json")
        self._invoke("reconstruct", self._write_json("explicit_spec.json", data), "--out", out)
        expected = self.sample("example1", (0.0, 1.0), 101, a=0.7)
        self.assertCurvesClose(read_curve(out), expected, atol=1e-7)

        # The same invariants read from a table next to the spec.
        sigma = np.linspace(0.0, 1.0, 21)
        with open(self._path("z.csv"), "w") as fh:
            fh.write("sigma,z1,z2\n")
            for s in sigma:
                fh.write(f"{s},0.0,0.7\n")
        del data["z"]
        data["z_table"] = "z.csv"
        out = self._path("table.json")
        self._invoke("reconstruct", self._write_json("table_spec.json", data), "--out", out)
        self.assertCurvesClose(read_curve(out), expected, atol=1e-7)

    def test_reconstruct_errors(self):
        spec = self._write_json("bad.json", {"z": [0.0, 1.0], "x0": [0.0, 0.0, 0.0], "sigma": [0.0, 1.0]})
        error = self._error(self._invoke("reconstruct", spec, exit_code=2))
        self.assertEqual(error["error"], "InfeasibleParametersError")
        self.assertEqual(error["exit_code"], 2)

        spec = self._write_json("unknown.json", {"example": "example3"})
        self.assertEqual(self._error(self._invoke("reconstruct", spec, exit_code=2))["exit_code"], 2)

        with open(self._path("broken.json"), "w") as fh:
            fh.write("{")
        error = self._error(self._invoke("reconstruct", self._path("broken.json"), exit_code=2))
        self.assertEqual(error["error"], "CurveParseError")

        error = self._error(self._invoke("reconstruct", self._path("missing.json"), exit_code=2))
        self.assertEqual(error["error"], "FileNotFoundError")

    def test_malformed_input(self):
        with open(self._path("latin1.json"), "wb") as fh:
            fh.write(b"{\"example\": \"caf\xe9\"}")
        for command in ("reconstruct", "selfsimilar"):
            error = self._error(self._invoke(command, self._path("latin1.json"), exit_code=2))
            self.assertEqual(error["error"], "CurveParseError")
            self.assertEqual(error["exit_code"], 2)

        for data in (
            {"example": "example1", "a": "wide"},
            {"example": "example1", "a": [1.0]},
            {"example": "example2", "sigma": 3},
            {"example": "example1", "step": "fine"},
            {"z": [0.0, 0.7], "x0": [0.0, 0.0, 0.0], "frame": [], "sigma": [0.0, 1.0], "kappa0": "one"},
        ):
            spec = self._write_json("malformed.json", data)
            error = self._error(self._invoke("reconstruct", spec, exit_code=2))
            self.assertEqual(error["error"], "InfeasibleParametersError", msg=str(data))

    def test_match(self):
        c = self.sample("example1", (0.0, 1.0), 201, a=0.7)
        f = random_psimilarity(3, 21, max_rapidity=0.5)
        first = str(write_curve(c, self._path("first.csv")))
        second = str(write_curve(c.transformed(f), self._path("second.json")))
        report = self._summary(self._invoke("match", first, second))
        self.assertTrue(report["matched"])
        self.assertAlmostEqual(report["mu"], f.mu, delta=1e-6 * f.mu)
        np.testing.assert_allclose(report["A"], f.A, atol=1e-6)

        other = str(write_curve(self.sample("example1", (0.0, 1.0), 201, a=1.0), self._path("other.csv")))
        report = self._summary(self._invoke("match", first, other))
        self.assertFalse(report["matched"])
        self.assertIsNone(report["mu"])

        plane = str(write_curve(self.sample("unit_hyperbola", (0.0, 1.0), 201), self._path("plane.csv")))
        error = self._error(self._invoke("match", first, plane, exit_code=2))
        self.assertEqual(error["error"], "IncompatibleDimensionError")

    def test_selfsimilar(self):
        spec = self._write_json("selfsim.json", {"dim": 3, "ktilde": [0.3, 0.5], "case": "e1_timelike"})
        out = self._path("selfsim.csv")
        result = self._invoke("selfsimilar", spec, "--samples", "201", "--out", out)
        summary = self._summary(result)
        self.assertEqual(summary["eigenstructure"]["spec"]["ktilde"], [0.3, 0.5])
        self.assertAlmostEqual(summary["eigenstructure"]["lambda_squared"][0], 0.75, places=10)
        self.assertLess(summary["hypersurface_residual"], 1e-10)
        self.assertAlmostEqual(summary["exponential_rate"], 0.3, places=10)
        c = read_curve(out)
        self.assertEqual(c.size, 201)
        self.assertEqual(c.params[-1], 2.0)

        plane = self._write_json("plane.json", {"ktilde": [0.5]})
        result = self._invoke("selfsimilar", plane, "--range", "0:1", "--samples", "11")
        summary = self._summary(result)
        self.assertIsNone(summary["hypersurface_residual"])
        self.assertEqual(len(result.stdout.splitlines()), 13)

        bad = self._write_json("bad.json", {"ktilde": [0.3, 1.5]})
        error = self._error(self._invoke("selfsimilar", bad, exit_code=2))
        self.assertEqual(error["error"], "InfeasibleSpecError")
        self._invoke("selfsimilar", plane, "--range", "oops", exit_code=2)

    def test_verify(self):
        spec = self._write_json("selfsim.json", {"ktilde": [0.3, 0.5]})
        curve = self._path("selfsim.csv")
        self._invoke("selfsimilar", spec, "--samples", "401", "--out", curve)
        summary = self._summary(self._invoke("verify", curve, spec, "--step", "1e-3", "--tolerance", "1e-4"))
        self.assertTrue(summary["round_trip"]["passed"])
        self.assertTrue(summary["selfsimilar"]["passed"])
        self.assertTrue(summary["passed"])

        summary = self._summary(self._invoke("verify", curve, "--step", "1e-3"))
        self.assertIsNone(summary["selfsimilar"])

    def test_numerical_error(self):
        t = np.linspace(0.0, 1.0, 101)
        null = SampledCurve(t, np.column_stack([t, t, t**2]))
        path = str(write_curve(null, self._path("null.csv")))
        error = self._error(self._invoke("invariants", path, exit_code=3))
        self.assertEqual(error["error"], "LightlikeTangentError")
        self.assertEqual(error["exit_code"], 3)


if __name__ == "__main__":
    unittest.main()
