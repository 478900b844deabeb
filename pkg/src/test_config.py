#!/usr/bin/python3
# SPDX-License-Identifier: MIT

"""
This module contains unit tests for the scenario configuration in the quantum-thermo-tools package.
"""

import copy
import json
import logging
import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from qthermo.config import (
    OUTPUT_ENV,
    ScenarioConfig,
    default_output_dir,
    dump,
    load,
    resolve,
    validate,
)
from qthermo.errors import ConfigError
from qthermo.propagators import ConstrainedPolicy, NoDissipation, ReservoirPolicy, SeparationPolicy

BASE = {
    "schema": "1.0",
    "name": "qubit",
    "dims": [2],
    "hamiltonian": {"h1": {"base": {"two_level": 1.0}}},
    "initial_state": {"kind": "canonical", "theta": 1.0},
    "integration": {"t_end": 1.0, "dt": 0.1},
}

BIPARTITE = {
    "schema": "1.0",
    "name": "pair",
    "seed": 7,
    "dims": [2, 2],
    "hamiltonian": {
        "h1": {"base": {"pauli": "z"}},
        "h2": {"base": {"two_level": 0.5}},
        "h12": {"base": {"random": {"scale": 0.2}}},
    },
    "initial_state": {"kind": "random"},
    "propagator": {
        "policy": "constrained",
        "omega_ex": {"kappa": 0.5},
        "omega_int": {"kappa": 0.2, "kind": "tanh"},
    },
    "temperatures": {"theta1": 1.0, "theta2": 2.0, "t_box": 1.5, "t1": 1.2, "t2": 1.8},
    "integration": {"t_end": 0.2, "dt": 0.01},
}


def scenario(base=None, **changes):
    out = copy.deepcopy(base or BASE)
    out.update(changes)
    return out


class TestValidate(unittest.TestCase):
    """Test scenario validation"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_valid(self):
        """Test valid scenarios"""
        self.assertEqual(validate(scenario()), [])
        self.assertEqual(validate(scenario(BIPARTITE)), [])

    def test_schema_version(self):
        """Test missing and unsupported versions"""
        payload = scenario()
        del payload["schema"]
        errors = validate(payload)
        self.assertTrue(any(e.startswith("$.schema:") for e in errors))
        errors = validate(scenario(schema="2.0"))
        self.assertEqual(errors, ["$.schema: version 2.0 is not supported (expected 1.0)"])
        errors = validate(scenario(schema="one"))
        self.assertEqual(errors, ["$.schema: 'one' is not a version"])

    def test_structural(self):
        """Test errors found by the JSON schema"""
        errors = validate(scenario(integration={"t_end": 1.0, "dt": -0.1}))
        self.assertEqual(len(errors), 1)
        self.assertTrue(errors[0].startswith("$.integration.dt"))
        errors = validate(scenario(colour="blue"))
        self.assertEqual(len(errors), 1)
        self.assertIn("colour", errors[0])

    def test_dimension_mismatch(self):
        """Test a literal that does not fit the dimensions"""
        payload = scenario(BIPARTITE)
        payload["hamiltonian"]["h12"] = {"base": {"literal": [[[0, 0]] * 3] * 3}}
        self.assertEqual(
            validate(payload),
            ["$.hamiltonian.h12.base.literal: expected a 4x4 matrix, got 3x3"],
        )

    def test_seed_required(self):
        """Test random operators without a seed"""
        payload = scenario(BIPARTITE)
        del payload["seed"]
        self.assertIn("$.seed: required when a random operator or state is used", validate(payload))

    def test_protocol_required(self):
        """Test generators without a protocol"""
        payload = scenario()
        payload["hamiltonian"]["h1"]["own"] = [{"pauli": "x"}]
        self.assertEqual(validate(payload), ["$.protocols.a1: required by 1 generator(s)"])
        payload["protocols"] = {"a1": {"times": [0.0, 0.0], "values": [[0.0], [1.0]]}}
        self.assertEqual(validate(payload), ["$.protocols.a1.times: must be strictly increasing"])

    def test_steps(self):
        """Test a time span that is not a whole number of steps"""
        errors = validate(scenario(integration={"t_end": 1.0, "dt": 0.3}))
        self.assertEqual(errors, ["$.integration.dt: the time span is not a whole number of steps"])

    def test_constrained_temperatures(self):
        """Test temperatures the constrained policy needs"""
        payload = scenario(BIPARTITE)
        del payload["temperatures"]["t2"]
        del payload["temperatures"]["t_box"]
        self.assertEqual(
            validate(payload),
            [
                "$.temperatures.t2: required unless the partition is inert",
                "$.temperatures.t_box: required by the external constitutive law",
            ],
        )
        payload["propagator"]["partition"] = "inert"
        payload["temperatures"]["t_box"] = 1.5
        self.assertEqual(validate(payload), [])

    def test_reservoir_needs_two_systems(self):
        """Test the reservoir policy on an undecomposed system"""
        errors = validate(scenario(propagator={"policy": "reservoir"}))
        self.assertIn("$.propagator.reservoir: required by the reservoir policy", errors)
        self.assertIn(
            "$.propagator.policy: the reservoir is sub-system #2, which is missing", errors
        )

    def test_initial_state(self):
        """Test initial states that do not fit"""
        errors = validate(scenario(initial_state={"kind": "weights", "weights": [0.5, 0.75]}))
        self.assertEqual(errors, ["$.initial_state.weights: weights sum to 1.25, not 1"])
        errors = validate(scenario(initial_state={"kind": "pure", "index": 2}))
        self.assertEqual(errors, ["$.initial_state.index: 2 is outside dimension 2"])
        errors = validate(scenario(initial_state={"kind": "product_canonical", "theta1": 1.0}))
        self.assertEqual(errors, ["$.initial_state.kind: product_canonical needs two sub-systems"])


class TestResolve(unittest.TestCase):
    """Test filling in defaults"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_defaults(self):
        """Test every default block"""
        out = resolve(scenario())
        self.assertEqual(out["dims"], [2, 1])
        self.assertEqual(out["constants"], {"k_B": 1.0, "hbar": 1.0, "Z": 1.0})
        self.assertEqual(out["integration"]["sample_every"], 1)
        self.assertEqual(out["propagator"], {"policy": "none"})
        self.assertEqual(out["hamiltonian"]["h12"], {"base": {"zero": True}})
        self.assertEqual(out["output"], {"csv": "ledger.csv", "report": "report.json"})
        self.assertNotIn("constants", scenario())

    def test_constrained_defaults(self):
        """Test the defaults of the constrained policy"""
        out = resolve(scenario(BIPARTITE))["propagator"]
        self.assertEqual(out["mode"], "unrestricted")
        self.assertEqual(out["partition"], "general")
        self.assertEqual(out["omega_ex"], {"kappa": 0.5, "kind": "linear", "shape": 1.0})
        self.assertEqual(out["omega_int"]["kind"], "tanh")

    def test_dump_load(self):
        """Test that a resolved scenario reads back unchanged and stays valid"""
        resolved = resolve(scenario(BIPARTITE))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "resolved.json")
            dump(resolved, path)
            self.assertEqual(load(path), resolved)
        self.assertEqual(validate(resolved), [])


class TestLoad(unittest.TestCase):
    """Test reading scenario files"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_bad_json(self):
        """Test a file that is not JSON"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write("{not json")
            with self.assertRaises(ConfigError) as ctx:
                load(path)
            self.assertIn("not valid JSON", ctx.exception.errors[0])
            with open(path, "w", encoding="utf-8") as f:
                json.dump([1, 2], f)
            with self.assertRaises(ConfigError):
                load(path)

    def test_bundled_scenarios(self):
        """Test that the example scenarios are valid"""
        directory = os.path.join(os.path.dirname(__file__), "..", "scenarios")
        names = sorted(n for n in os.listdir(directory) if n.endswith(".json"))
        self.assertTrue(names)
        for name in names:
            with self.subTest(name=name):
                self.assertEqual(validate(load(os.path.join(directory, name))), [])

    @patch.dict(os.environ, {OUTPUT_ENV: "/tmp/elsewhere"})
    def test_output_dir_env(self):
        """Test the output directory from the environment"""
        self.assertEqual(default_output_dir(), "/tmp/elsewhere")

    @patch.dict(os.environ, {}, clear=True)
    def test_output_dir_default(self):
        """Test the default output directory"""
        self.assertEqual(default_output_dir(), "qthermo-output")


class TestScenarioConfig(unittest.TestCase):
    """Test building scenarios"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_undecomposed(self):
        """Test a plain undecomposed scenario"""
        cfg = ScenarioConfig.from_dict(scenario())
        self.assertEqual(cfg.dims.total, 2)
        self.assertFalse(cfg.dims.bipartite)
        self.assertIsInstance(cfg.policy, NoDissipation)
        self.assertEqual(cfg.t_span, (0.0, 1.0))
        self.assertTrue(np.allclose(cfg.triple.at(0.0).h, np.diag([0.0, 1.0])))
        p = np.exp(-1.0) / (1 + np.exp(-1.0))
        self.assertTrue(np.allclose(np.diag(cfg.initial.matrix).real, [1 - p, p]))

    def test_constrained(self):
        """Test a constrained bipartite scenario"""
        cfg = ScenarioConfig.from_dict(scenario(BIPARTITE))
        self.assertIsInstance(cfg.policy, ConstrainedPolicy)
        self.assertEqual(cfg.temperatures.t2, 1.8)
        # balance temperature of a linear law between Θ¹ = 1 and Θ² = 2
        self.assertAlmostEqual(cfg.temperatures.theta, 2 / (1 + 0.5))
        self.assertEqual(cfg.seed, 7)

    def test_inert_partition(self):
        """Test that an inert partition derives T²"""
        payload = scenario(BIPARTITE)
        payload["propagator"]["partition"] = "inert"
        del payload["temperatures"]["t2"]
        cfg = ScenarioConfig.from_dict(payload)
        self.assertAlmostEqual(1 / cfg.temperatures.t2, 1 / 2.0 + 1 / 1.0 - 1 / 1.2)

    def test_other_policies(self):
        """Test the separation and reservoir policies"""
        cfg = ScenarioConfig.from_dict(
            scenario(propagator={"policy": "separation", "gamma": 0.2}, constants={"Z": 3.0})
        )
        self.assertIsInstance(cfg.policy, SeparationPolicy)
        self.assertEqual(cfg.policy.z, 3.0)
        payload = scenario(BIPARTITE, propagator={"policy": "reservoir", "reservoir": {"temperature": 2.0}})
        cfg = ScenarioConfig.from_dict(payload)
        self.assertIsInstance(cfg.policy, ReservoirPolicy)
        self.assertEqual(cfg.reservoir.rate, 0.0)

    def test_seeded(self):
        """Test that a seed makes the random draws repeatable"""
        first = ScenarioConfig.from_dict(scenario(BIPARTITE))
        second = ScenarioConfig.from_dict(scenario(BIPARTITE))
        self.assertTrue(np.array_equal(first.initial.matrix, second.initial.matrix))
        self.assertTrue(np.array_equal(first.triple.at(0.0).h12, second.triple.at(0.0).h12))
        third = ScenarioConfig.from_dict(scenario(BIPARTITE, seed=8))
        self.assertFalse(np.array_equal(first.initial.matrix, third.initial.matrix))

    def test_invalid(self):
        """Test that every problem is listed"""
        payload = scenario(integration={"t_end": 1.0, "dt": 0.3}, seed=-1)
        with self.assertRaises(ConfigError) as ctx:
            ScenarioConfig.from_dict(payload)
        self.assertEqual(len(ctx.exception.errors), 1)
        self.assertTrue(ctx.exception.errors[0].startswith("$.seed"))

    def test_build_failure(self):
        """Test that a state failing its own checks is a configuration error"""
        payload = scenario(
            initial_state={"kind": "literal", "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}
        )
        with self.assertRaises(ConfigError) as ctx:
            ScenarioConfig.from_dict(payload)
        self.assertTrue(ctx.exception.errors[0].startswith("$: "))
