# SPDX-License-Identifier: MIT
"""Models for the dissipative term ro.

A propagator policy is any callable ``policy(rho, snapshot) -> Propagator``;
the integrator calls it at every Runge-Kutta stage. The policies here cover
the closed-form constructions (state separation, heat reservoir) and the
constrained construction that realizes prescribed heat flows with the
smallest Frobenius norm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from qthermo.errors import InfeasibleConstraints, InvalidState, NonPositiveTemperature
from qthermo.hamiltonian import HamiltonianSnapshot
from qthermo.operators import (
    ENTROPY_EPS,
    HilbertDims,
    as_matrix,
    commutator,
    diagonal_transform,
    from_traceless_coordinates,
    mat_log_regularized,
    partial_trace,
    real_trace,
    traceless_coordinates,
)
from qthermo.state import DensityOperator, Propagator, Units, canonical, log_z_rho

if TYPE_CHECKING:
    from qthermo.thermo import Temperatures

FEASIBILITY_TOL = 1e-10
# Above this relative heating rate the reservoir is no longer quasi-static
SLOW_RESERVOIR_RATIO = 1e-2

OMEGA_KINDS = ("linear", "cubic", "tanh")


@dataclass(frozen=True)
class ConstitutiveOmega:
    """Odd, monotone map from a reciprocal temperature difference to a heat flow.

    Attributes:
        kappa: non-negative conductance
        kind: ``linear`` (κx), ``cubic`` (κ(x + c x³)) or ``tanh`` (κ s tanh(x/s))
        shape: ``c`` for the cubic law, ``s`` for the tanh law
        state_factor: optional non-negative factor depending on the state
    """

    kappa: float = 0.0
    kind: str = "linear"
    shape: float = 1.0
    state_factor: Optional[Callable[[DensityOperator], float]] = None

    def __post_init__(self):
        if self.kappa < 0:
            raise InvalidState(f"conductance must be non-negative, got {self.kappa}")
        if self.kind not in OMEGA_KINDS:
            raise InvalidState(f"unknown constitutive law {self.kind!r}")
        if self.shape <= 0:
            raise InvalidState(f"constitutive shape must be positive, got {self.shape}")

    def __call__(self, x: float, rho: Optional[DensityOperator] = None) -> float:
        if self.kind == "linear":
            value = self.kappa * x
        elif self.kind == "cubic":
            value = self.kappa * (x + self.shape * x**3)
        else:
            value = self.kappa * self.shape * np.tanh(x / self.shape)
        if self.state_factor is not None and rho is not None:
            factor = self.state_factor(rho)
            if factor < 0:
                raise InvalidState(f"state factor must be non-negative, got {factor}")
            value *= factor
        return float(value)


def omega_eval(omega: ConstitutiveOmega, x: float, rho: Optional[DensityOperator] = None) -> float:
    """Evaluate a constitutive law; Ω(0) = 0 and sign(Ω(x)) = sign(x)"""
    return omega(x, rho)


@dataclass(frozen=True)
class ReservoirSpec:
    """A heat reservoir whose temperature ramps linearly.

    Attributes:
        temperature: T_HR at t = 0
        rate: Ṫ_HR, constant
    """

    temperature: float
    rate: float = 0.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise NonPositiveTemperature("reservoir temperature", self.temperature)

    def at(self, t: float) -> float:
        value = self.temperature + self.rate * t
        if value <= 0:
            raise NonPositiveTemperature("reservoir temperature", value)
        return value


def separation_propagator(h, rho, z: float = 1.0) -> Propagator:
    """[ℋ, [ln(Zϱ), ℋ]] as an isolated propagator; it never decreases the entropy"""
    m = as_matrix(h)
    ro = commutator(m, commutator(log_z_rho(rho, z), m))
    return Propagator.from_split(np.zeros_like(ro), ro)


def reservoir_capacity_operator(rho_hr, t_hr: float) -> np.ndarray:
    """𝒞 = ϱ_HR {Tr(ϱ_HR ln ϱ_HR) - ln ϱ_HR} / T_HR, the derivative of a canonical state.

    The partition function cancels because ϱ_HR has unit trace.
    """
    if t_hr <= 0:
        raise NonPositiveTemperature("reservoir temperature", t_hr)
    m = as_matrix(rho_hr)
    log_rho = mat_log_regularized(m, ENTROPY_EPS)
    mean = real_trace(m, log_rho)
    c = m @ (mean * np.eye(m.shape[0]) - log_rho) / t_hr
    return (c + c.conj().T) / 2


def reservoir_rate(spec: ReservoirSpec, h_hr, t: float = 0.0, k_B: float = 1.0) -> tuple:
    """(ϱ̇_HR, 𝒞) of a reservoir that stays canonical while its temperature ramps.

    Both are evaluated at canonical(ℋ_HR, T_HR(t)); ϱ̇_HR = 𝒞 Ṫ_HR.
    """
    t_hr = spec.at(t)
    c = reservoir_capacity_operator(canonical(h_hr, t_hr, k_B), t_hr)
    return c * spec.rate, c


def reservoir_heat_capacity(h_hr, t_hr: float, k_B: float = 1.0) -> float:
    """C_HR = Tr(ℋ_HR 𝒞) at canonical(ℋ_HR, T_HR), the energy variance over k_B T²"""
    return real_trace(h_hr, reservoir_capacity_operator(canonical(h_hr, t_hr, k_B), t_hr))


def reservoir_propagator(
    spec: ReservoirSpec,
    h12,
    rho: DensityOperator,
    h_hr,
    t: float = 0.0,
    units: Units = Units(),
) -> Propagator:
    """ro_HR = (i/ħ) Tr¹[ℋ¹², ϱ] + 𝒞 Ṫ_HR on the reservoir (sub-system #2)"""
    t_hr = spec.at(t)
    if abs(spec.rate) > SLOW_RESERVOIR_RATIO * t_hr:
        logging.warning(
            "Reservoir heating rate %.3g is not slow compared to T_HR=%.3g", spec.rate, t_hr
        )
    rho_dot, _ = reservoir_rate(spec, h_hr, t, units.k_B)
    coupling = partial_trace(commutator(h12, rho), rho.dims, trace_out=1)
    out = (1j / units.hbar) * coupling + rho_dot
    return Propagator((out + out.conj().T) / 2)


def constrained_propagator(
    constraints: Sequence[tuple],
    dim: int,
    mode: str = "unrestricted",
    rho=None,
    tol: float = FEASIBILITY_TOL,
) -> np.ndarray:
    """Minimum-norm Hermitian traceless X with Tr(O_i X) = b_i.

    Args:
        constraints: pairs ``(O_i, b_i)`` of Hermitian operators and targets
        dim: dimension of X
        mode: ``unrestricted`` searches all Hermitian traceless operators,
            ``diagonal`` only those diagonal in the eigenbasis of ``rho``
        rho: the state, needed for the diagonal mode
        tol: largest accepted residual, relative to max(1, |b|)

    Returns:
        X as a dense matrix; the zero matrix when there are no constraints.

    Raises:
        InfeasibleConstraints: no X satisfies the constraints within ``tol``
    """
    if not constraints:
        return np.zeros((dim, dim), dtype=complex)
    targets = np.array([float(b) for _, b in constraints])
    if mode == "unrestricted":
        rows = np.array([traceless_coordinates(o) for o, _ in constraints])
    elif mode == "diagonal":
        if rho is None:
            raise InvalidState("the diagonal mode needs the state")
        _, basis = scipy.linalg.eigh(as_matrix(rho))
        transform = diagonal_transform(dim)
        rows = np.array(
            [
                transform @ np.diag(basis.conj().T @ as_matrix(o) @ basis).real
                for o, _ in constraints
            ]
        )
    else:
        raise InvalidState(f"unknown constraint mode {mode!r}")

    coefficients, _, rank, _ = scipy.linalg.lstsq(rows, targets)
    residual = float(np.linalg.norm(rows @ coefficients - targets))
    logging.debug(
        "Constrained solve: %d constraints, rank %d, residual %.3e",
        len(constraints),
        rank,
        residual,
    )
    if residual > tol * max(1.0, float(np.linalg.norm(targets))):
        raise InfeasibleConstraints(rank, len(constraints), residual)
    if mode == "diagonal":
        return (basis * (transform.T @ coefficients)) @ basis.conj().T
    return from_traceless_coordinates(coefficients, dim)


def inert_internal_temperature(theta1: float, theta2: float, t1: float) -> float:
    """T² making the internal heats of an inert partition cancel.

    With an odd internal law, 1/T² = 1/Θ² + 1/Θ¹ - 1/T¹ gives
    Ω(1/Θ² - 1/T²) = -Ω(1/Θ¹ - 1/T¹).
    """
    inverse = 1.0 / theta2 + 1.0 / theta1 - 1.0 / t1
    if inverse <= 0:
        raise NonPositiveTemperature("derived internal temperature", 1.0 / inverse if inverse else np.inf)
    return 1.0 / inverse


def external_heat_at(
    t_box: float,
    omega_ex: ConstitutiveOmega,
    thetas: Sequence[float],
    rho: Optional[DensityOperator] = None,
) -> float:
    """Total external heat Σ_A Ω(1/Θ^A - 1/T□) at environment temperature ``t_box``"""
    return sum(omega_ex(1.0 / theta - 1.0 / t_box, rho) for theta in thetas)


def environment_balance_temperature(
    omega_ex: ConstitutiveOmega,
    thetas: Sequence[float],
    rho: Optional[DensityOperator] = None,
) -> float:
    """Environment temperature at which the total external heat vanishes.

    This is the contact temperature of the undecomposed system; it lies
    between the smallest and the largest of ``thetas``.
    """
    inverse = [1.0 / theta for theta in thetas]
    lo, hi = min(inverse), max(inverse)
    if np.isclose(lo, hi, rtol=1e-15, atol=0.0):
        return 1.0 / lo

    def balance(x):
        return sum(omega_ex(y - x, rho) for y in inverse)

    return 1.0 / scipy.optimize.brentq(balance, lo, hi, xtol=1e-15, rtol=1e-14)


@dataclass(frozen=True)
class NoDissipation:
    """ro = 0: plain von Neumann dynamics"""

    def __call__(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> Propagator:
        return Propagator.zero(rho.dim)


@dataclass(frozen=True)
class SeparationPolicy:
    """ro = γ [ℋ, [ln(Zϱ), ℋ]], isolated.

    ``target="local"`` applies the construction to each sub-system and
    recombines it as ro¹⊗ϱ² + ϱ¹⊗ro², which traces back to the local terms.
    """

    gamma: float = 1.0
    target: str = "full"
    z: float = 1.0

    def __call__(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> Propagator:
        if self.target == "full":
            ro = self.gamma * separation_propagator(snapshot.h, rho, self.z).matrix
        else:
            rho1, rho2 = rho.reduced(1), rho.reduced(2)
            ro1 = self.gamma * separation_propagator(snapshot.h1_local, rho1, self.z).matrix
            ro2 = self.gamma * separation_propagator(snapshot.h2_local, rho2, self.z).matrix
            ro = np.kron(ro1, rho2.matrix) + np.kron(rho1.matrix, ro2)
        return Propagator.from_split(np.zeros_like(ro), ro)


@dataclass(frozen=True)
class ReservoirPolicy:
    """Sub-system #2 is a heat reservoir, sub-system #1 compensates.

    ro = ϱ¹⊗ro_HR + ro¹⊗ϱ², where ro¹ is the minimum-norm traceless operator
    on #1 restoring Tr(ℋ ro) = 0. The whole term is isolated.
    """

    reservoir: ReservoirSpec
    units: Units = Units()

    def __call__(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> Propagator:
        dims = rho.dims
        rho1, rho2 = rho.reduced(1), rho.reduced(2)
        ro_hr = reservoir_propagator(
            self.reservoir, snapshot.h12, rho, snapshot.h2_local, snapshot.t, self.units
        ).matrix
        ro = np.kron(rho1.matrix, ro_hr)
        effective = partial_trace(
            snapshot.h @ np.kron(np.eye(dims.d1), rho2.matrix), dims, trace_out=2
        )
        effective = (effective + effective.conj().T) / 2
        deficit = real_trace(snapshot.h, ro)
        ro1 = constrained_propagator([(effective, -deficit)], dims.d1)
        ro = ro + np.kron(ro1, rho2.matrix)
        return Propagator.from_split(np.zeros_like(ro), ro)


@dataclass(frozen=True)
class ConstrainedPolicy:
    """ro_ex and ro_iso realizing the constitutive heat flows.

    ro_ex: Tr(ℋ^A ro_ex) = Ω_ex(1/Θ^A - 1/T□) and Tr(ℋ¹² ro_ex) = 0.
    ro_iso: Tr(ℋ ro_iso) = 0 and
    Tr{ℋ^A (ro_iso - (i/ħ)[ℋ¹², ϱ])} = Ω_int(1/Θ^A - 1/T^A), bipartite only.
    An optional separation term γ[ℋ,[ln ϱ,ℋ]] is added to ro_iso and the
    constrained part solved for the remainder.
    """

    temperatures: "Temperatures"
    omega_ex: ConstitutiveOmega
    omega_int: ConstitutiveOmega = ConstitutiveOmega()
    mode: str = "unrestricted"
    separation_rate: float = 0.0
    units: Units = Units()

    def exchange_part(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> np.ndarray:
        temps = self.temperatures
        if self.omega_ex.kappa == 0:
            return np.zeros((rho.dim, rho.dim), dtype=complex)
        constraints = []
        for side in _active_sides(rho.dims):
            x = 1.0 / temps.contact(side) - 1.0 / temps.t_box
            constraints.append((snapshot.embedded(side), self.omega_ex(x, rho)))
        if np.any(snapshot.h12):
            constraints.append((snapshot.h12, 0.0))
        return constrained_propagator(constraints, rho.dim, self.mode, rho)

    def isolated_part(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> np.ndarray:
        base = np.zeros((rho.dim, rho.dim), dtype=complex)
        if self.separation_rate:
            base = self.separation_rate * separation_propagator(snapshot.h, rho).matrix
        if not rho.dims.bipartite:
            return base
        temps = self.temperatures
        flow = (1j / self.units.hbar) * commutator(snapshot.h12, rho)
        constraints = [(snapshot.h, -real_trace(snapshot.h, base))]
        for side in (1, 2):
            h_side = snapshot.embedded(side)
            x = 1.0 / temps.contact(side) - 1.0 / temps.internal(side)
            target = self.omega_int(x, rho) + real_trace(h_side, flow)
            constraints.append((h_side, target - real_trace(h_side, base)))
        return base + constrained_propagator(constraints, rho.dim, self.mode, rho)

    def __call__(self, rho: DensityOperator, snapshot: HamiltonianSnapshot) -> Propagator:
        return Propagator.from_split(
            self.exchange_part(rho, snapshot), self.isolated_part(rho, snapshot)
        )


def _active_sides(dims: HilbertDims) -> tuple:
    if dims.d2 == 1:
        return (1,)
    return (1, 2)
