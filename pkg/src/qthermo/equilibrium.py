# SPDX-License-Identifier: MIT
"""Equilibrium checks in three layers.

The necessary layer holds for every equilibrium, the complementary layer
collects consequences that must hold alongside it, and the sufficient layer
identifies the canonical equilibrium. A report is only sufficient when its
necessary layer passes as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from qthermo.dynamics import modified_propagator, rhs_full, rhs_traced
from qthermo.hamiltonian import HamiltonianSnapshot
from qthermo.operators import ENTROPY_EPS, as_matrix, commutator, frobenius, partial_trace, real_trace
from qthermo.state import DensityOperator, Propagator, Units, log_z_rho, partition_function
from qthermo.thermo import Temperatures, entropy_production, entropy_rates, heat_exchanges

EQUILIBRIUM_TOL = 1e-9


@dataclass
class EquilibriumReport:
    """Named residuals sorted into layers; a condition holds when its residual is within ``tol``"""

    tol: float = EQUILIBRIUM_TOL
    necessary: dict = field(default_factory=dict)
    complementary: dict = field(default_factory=dict)
    sufficient: dict = field(default_factory=dict)

    def _ok(self, layer: dict) -> bool:
        return all(abs(v) <= self.tol for v in layer.values())

    @property
    def necessary_ok(self) -> bool:
        return self._ok(self.necessary)

    @property
    def complementary_ok(self) -> bool:
        return self._ok(self.complementary)

    @property
    def sufficient_ok(self) -> bool:
        return self.necessary_ok and self._ok(self.sufficient)

    def failed(self) -> list:
        """Names of the conditions that do not hold, prefixed by their layer"""
        out = []
        for layer in ("necessary", "complementary", "sufficient"):
            for name, value in getattr(self, layer).items():
                if abs(value) > self.tol:
                    out.append(f"{layer}.{name}")
        return out

    def as_dict(self) -> dict:
        return {
            "necessary_ok": self.necessary_ok,
            "complementary_ok": self.complementary_ok,
            "sufficient_ok": self.sufficient_ok,
            "necessary": dict(self.necessary),
            "complementary": dict(self.complementary),
            "sufficient": dict(self.sufficient),
        }


def _canonical_bracket(h, rho, theta: float, units: Units) -> float:
    """Norm of ℋ/Θ + k_B ln(Zϱ) with Z the canonical partition function at Θ"""
    m = as_matrix(h)
    shift = float(np.min(np.linalg.eigvalsh(m)))
    # shifting ℋ keeps Z finite; the shift enters both terms and cancels
    shifted = m - shift * np.eye(m.shape[0])
    z = partition_function(shifted, theta, units.k_B)
    bracket = shifted / theta + units.k_B * log_z_rho(rho, z, ENTROPY_EPS)
    return frobenius(bracket)


def check_equilibrium_undecomposed(
    rho: DensityOperator,
    h,
    ro: Propagator,
    theta: Optional[float] = None,
    a_dot: Sequence[float] = (),
    dh_da: Sequence = (),
    t_box: Optional[float] = None,
    tol: float = EQUILIBRIUM_TOL,
    units: Units = Units(),
) -> EquilibriumReport:
    """Equilibrium of a system treated as a whole.

    Necessary: ϱ̇ = 0, ro_iso = 0, ȧ = 0. Complementary: [ℋ, ϱ] = 0,
    ro_ex = 0, vanishing power, heat, entropy rate, exchange and production,
    Θ = T□. Sufficient: ϱ canonical at Θ and ro = 0. Without Θ the
    conditions that need it are left out.
    """
    m = as_matrix(h)
    iso = ro.iso if ro.has_split else ro.matrix
    ex = ro.ex if ro.has_split else np.zeros_like(ro.matrix)
    rates = np.asarray(a_dot, dtype=float)
    log_rho = log_z_rho(rho)
    heat = real_trace(m, ro.matrix)
    entropy_rate = -units.k_B * real_trace(ro.matrix, log_rho)
    report = EquilibriumReport(tol=tol)
    report.necessary = {
        "rho_dot": frobenius(rhs_full(rho, m, ro, units)),
        "ro_iso": frobenius(iso),
        "a_dot": float(np.max(np.abs(rates))) if rates.size else 0.0,
    }
    report.complementary = {
        "commutator": frobenius(commutator(m, rho)),
        "ro_ex": frobenius(ex),
        "power": sum(real_trace(g, rho) * r for g, r in zip(dh_da, rates)),
        "heat": heat,
        "entropy_rate": entropy_rate,
    }
    report.sufficient = {"ro": frobenius(ro)}
    if theta is None:
        return report
    report.complementary["entropy_exchange"] = heat / theta
    report.complementary["entropy_production"] = entropy_rate - heat / theta
    if t_box is not None:
        report.complementary["contact_environment"] = theta - t_box
    report.sufficient["canonical"] = _canonical_bracket(m, rho, theta, units)
    return report


def check_equilibrium_bipartite(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    temps: Temperatures,
    tol: float = EQUILIBRIUM_TOL,
    units: Units = Units(),
) -> EquilibriumReport:
    """Equilibrium of both sub-systems of a bipartite system.

    Necessary: ȧ¹² = 0, Σ^A = 0, ϱ̇^A = 0, ro^A = Tr^B ro = 0 together with
    Tr^B[ℋ¹², ϱ] = 0, vanishing Ṡ^A, Ξ^A, Q̇^A and Θ¹ = Θ². Complementary:
    Tr^B ϱ̃̇ = 0, an inert contact (no coupling power, no coupling heat) and
    the common temperature T shared by Θ^A, the environment T□ and the
    internal temperature T^A wherever those are set.
    Sufficient: each ϱ^A canonical at Θ^A.
    """
    if not ro.has_split:
        ro = Propagator.from_split(np.zeros_like(ro.matrix), ro.matrix)
    dims = rho.dims
    heats = heat_exchanges(rho, snapshot, ro, units)
    srates = entropy_rates(rho, snapshot, ro, units)
    sigma = entropy_production(rho, snapshot, ro, temps, units)
    coupling = commutator(snapshot.h12, rho)
    driven = modified_propagator(rho, snapshot.h12, ro, units)
    report = EquilibriumReport(tol=tol)
    necessary = {
        "a12_dot": float(np.max(np.abs(snapshot.a12_dot))) if snapshot.a12_dot.size else 0.0,
        "temperature_equalization": (temps.contact(1) or 0.0) - (temps.contact(2) or 0.0),
    }
    complementary = {
        "coupling_power": sum(
            real_trace(g, rho) * r for g, r in zip(snapshot.dh12_coupling, snapshot.a12_dot)
        ),
        "coupling_heat": heats.q12,
    }
    sufficient = {}
    values = {
        1: (sigma.sigma1, srates.s1_dot, heats.q1),
        2: (sigma.sigma2, srates.s2_dot, heats.q2),
    }
    for side in (1, 2):
        other = 2 if side == 1 else 1
        production, entropy_rate, heat = values[side]
        theta = temps.contact(side)
        necessary[f"entropy_production_{side}"] = production
        necessary[f"rho_dot_{side}"] = frobenius(rhs_traced(rho, snapshot, ro, side, units))
        necessary[f"ro_{side}"] = frobenius(partial_trace(ro.matrix, dims, trace_out=other))
        necessary[f"coupling_trace_{side}"] = frobenius(partial_trace(coupling, dims, trace_out=other))
        necessary[f"entropy_rate_{side}"] = entropy_rate
        necessary[f"entropy_exchange_{side}"] = heat / theta if theta else 0.0
        necessary[f"heat_{side}"] = heat
        complementary[f"modified_propagator_{side}"] = frobenius(
            partial_trace(driven, dims, trace_out=other)
        )
        if theta and temps.t_box:
            complementary[f"contact_environment_{side}"] = theta - temps.t_box
        if theta and temps.internal(side):
            complementary[f"internal_equalization_{side}"] = theta - temps.internal(side)
        if theta:
            sufficient[f"canonical_{side}"] = _canonical_bracket(
                snapshot.local(side), rho.reduced(side), theta, units
            )
    report.necessary = necessary
    report.complementary = complementary
    report.sufficient = sufficient
    return report
