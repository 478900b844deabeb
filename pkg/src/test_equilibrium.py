#!/usr/bin/python3
# SPDX-License-Identifier: MIT

"""
This module contains unit tests for the equilibrium checks in the quantum-thermo-tools package.
"""

import logging
import unittest

import numpy as np

from qthermo.dynamics import evolve
from qthermo.equilibrium import (
    EquilibriumReport,
    check_equilibrium_bipartite,
    check_equilibrium_undecomposed,
)
from qthermo.hamiltonian import HamiltonianTriple
from qthermo.operators import commutator, random_hermitian, real_trace
from qthermo.propagators import SeparationPolicy
from qthermo.state import DensityOperator, Propagator, canonical, product_state, random_density
from qthermo.thermo import Temperatures


class TestEquilibriumReport(unittest.TestCase):
    """Test the layered report"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_layers(self):
        """Test that sufficiency needs the necessary layer"""
        report = EquilibriumReport(tol=1e-6)
        report.necessary = {"rho_dot": 1e-3}
        report.sufficient = {"ro": 0.0}
        self.assertFalse(report.necessary_ok)
        self.assertTrue(report.complementary_ok)
        self.assertFalse(report.sufficient_ok)
        self.assertEqual(report.failed(), ["necessary.rho_dot"])
        out = report.as_dict()
        self.assertEqual(out["necessary"], {"rho_dot": 1e-3})
        self.assertFalse(out["sufficient_ok"])


class TestUndecomposed(unittest.TestCase):
    """Test equilibrium of a system treated as a whole"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_canonical(self):
        """Test that a canonical state without dissipation is a stable equilibrium"""
        rng = np.random.default_rng(161)
        h = random_hermitian(3, rng)
        rho = canonical(h, 1.4)
        report = check_equilibrium_undecomposed(rho, h, Propagator.zero(3), theta=1.4, t_box=1.4)
        self.assertTrue(report.necessary_ok)
        self.assertTrue(report.complementary_ok)
        self.assertTrue(report.sufficient_ok, report.failed())
        trajectory = evolve(rho, h, t_span=(0.0, 1.0), dt=0.01)
        self.assertLess(np.max(np.abs(trajectory.final.matrix - rho.matrix)), 1e-9)

    def test_stationary_but_not_canonical(self):
        """Test a stationary state with the wrong populations"""
        h = np.diag([0.0, 1.0, 2.0])
        rho = DensityOperator(np.diag([0.2, 0.5, 0.3]))
        report = check_equilibrium_undecomposed(rho, h, Propagator.zero(3), theta=1.0)
        self.assertTrue(report.necessary_ok)
        self.assertFalse(report.sufficient_ok)
        self.assertIn("sufficient.canonical", report.failed())

    def test_without_temperature(self):
        """Test that the temperature conditions are left out without Θ"""
        h = np.diag([0.0, 1.0])
        report = check_equilibrium_undecomposed(canonical(h, 1.0), h, Propagator.zero(2))
        self.assertNotIn("canonical", report.sufficient)
        self.assertNotIn("entropy_production", report.complementary)
        self.assertTrue(report.sufficient_ok)

    def test_evolving(self):
        """Test that a dissipating state is not in equilibrium"""
        rng = np.random.default_rng(162)
        h = random_hermitian(3, rng)
        rho = random_density(3, rng)
        triple = HamiltonianTriple.static(h)
        ro = SeparationPolicy()(rho, triple.at(0.0))
        report = check_equilibrium_undecomposed(rho, h, ro, theta=1.0, a_dot=[0.5], dh_da=[h])
        self.assertFalse(report.necessary_ok)
        failed = report.failed()
        self.assertIn("necessary.ro_iso", failed)
        self.assertIn("necessary.a_dot", failed)
        self.assertIn("complementary.commutator", failed)


class TestBipartite(unittest.TestCase):
    """Test equilibrium of both sub-systems"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_product_canonical(self):
        """Test uncoupled sub-systems canonical at a common temperature"""
        rng = np.random.default_rng(171)
        h1 = random_hermitian(2, rng)
        h2 = random_hermitian(3, rng)
        triple = HamiltonianTriple.static(h1, h2)
        rho = product_state(canonical(h1, 1.1), canonical(h2, 1.1))
        temps = Temperatures(theta1=1.1, theta2=1.1)
        report = check_equilibrium_bipartite(rho, triple.at(0.0), Propagator.zero(6), temps)
        self.assertTrue(report.necessary_ok, report.failed())
        self.assertTrue(report.complementary_ok, report.failed())
        self.assertTrue(report.sufficient_ok, report.failed())

    def test_unequal_temperatures(self):
        """Test that different contact temperatures break equilibrium"""
        rng = np.random.default_rng(172)
        h1 = random_hermitian(2, rng)
        h2 = random_hermitian(2, rng)
        triple = HamiltonianTriple.static(h1, h2)
        rho = product_state(canonical(h1, 1.0), canonical(h2, 2.0))
        temps = Temperatures(theta1=1.0, theta2=2.0)
        report = check_equilibrium_bipartite(
            rho, triple.at(0.0), Propagator(np.zeros((4, 4))), temps
        )
        self.assertIn("necessary.temperature_equalization", report.failed())
        self.assertFalse(report.sufficient_ok)
        self.assertLess(report.sufficient["canonical_1"], 1e-9)
        self.assertLess(report.sufficient["canonical_2"], 1e-9)

    def test_coupled(self):
        """Test that a coupling flow breaks the necessary layer"""
        rng = np.random.default_rng(173)
        triple = HamiltonianTriple.static(
            random_hermitian(2, rng), random_hermitian(2, rng), random_hermitian(4, rng)
        )
        rho = random_density(triple.dims, rng)
        temps = Temperatures(theta1=1.0, theta2=1.0)
        report = check_equilibrium_bipartite(rho, triple.at(0.0), Propagator.zero(4), temps)
        self.assertFalse(report.necessary_ok)
        self.assertIn("necessary.coupling_trace_1", report.failed())

    def test_silent_coupling_flow(self):
        """Test that ro^A = (i/ħ)Tr^B[ℋ¹², ϱ] silences Σ^A without an equilibrium"""
        rng = np.random.default_rng(174)
        h1 = random_hermitian(2, rng)
        h2 = random_hermitian(2, rng)
        triple = HamiltonianTriple.static(h1, h2, random_hermitian(4, rng, scale=0.5))
        snap = triple.at(0.0)
        rho = product_state(canonical(h1, 1.3), canonical(h2, 1.3))
        flow = 1j * commutator(snap.h12, rho.matrix)
        ro = Propagator.from_split(np.zeros_like(flow), flow)
        temps = Temperatures(theta1=1.3, theta2=1.3)
        report = check_equilibrium_bipartite(rho, snap, ro, temps)
        for side in (1, 2):
            self.assertLess(abs(report.necessary[f"entropy_production_{side}"]), 1e-10)
            self.assertLess(report.necessary[f"rho_dot_{side}"], 1e-10)
        failed = report.failed()
        self.assertIn("necessary.ro_1", failed)
        self.assertIn("necessary.coupling_trace_1", failed)
        self.assertFalse(report.necessary_ok)
        self.assertFalse(report.sufficient_ok)

    def test_commuting_coupling(self):
        """Test an equilibrium with a coupling that commutes with the state"""
        rng = np.random.default_rng(175)
        h1 = np.diag([0.0, 1.0])
        h2 = np.diag([0.0, 0.7])
        h12 = np.diag(rng.normal(scale=0.3, size=4))
        triple = HamiltonianTriple.static(h1, h2, h12)
        snap = triple.at(0.0)
        rho = product_state(canonical(h1, 0.9), canonical(h2, 0.9))
        self.assertGreater(abs(real_trace(h12, rho)), 1e-6)
        temps = Temperatures(theta1=0.9, theta2=0.9, t_box=0.9, t1=0.9, t2=0.9)
        report = check_equilibrium_bipartite(rho, snap, Propagator.zero(4), temps)
        self.assertTrue(report.necessary_ok, report.failed())
        self.assertTrue(report.complementary_ok, report.failed())
        self.assertTrue(report.sufficient_ok, report.failed())
        self.assertIn("contact_environment_1", report.complementary)
        self.assertIn("internal_equalization_2", report.complementary)

    def test_common_temperature(self):
        """Test that the environment and internal temperatures must match Θ^A"""
        rng = np.random.default_rng(176)
        h1 = random_hermitian(2, rng)
        h2 = random_hermitian(3, rng)
        triple = HamiltonianTriple.static(h1, h2)
        rho = product_state(canonical(h1, 1.1), canonical(h2, 1.1))
        temps = Temperatures(theta1=1.1, theta2=1.1, t_box=1.4, t1=1.1, t2=0.8)
        report = check_equilibrium_bipartite(rho, triple.at(0.0), Propagator.zero(6), temps)
        self.assertTrue(report.necessary_ok, report.failed())
        self.assertFalse(report.complementary_ok)
        failed = report.failed()
        self.assertIn("complementary.contact_environment_1", failed)
        self.assertIn("complementary.contact_environment_2", failed)
        self.assertIn("complementary.internal_equalization_2", failed)
        self.assertNotIn("complementary.internal_equalization_1", failed)
        self.assertAlmostEqual(report.complementary["contact_environment_1"], 1.1 - 1.4)
