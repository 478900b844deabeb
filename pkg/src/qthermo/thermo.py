# SPDX-License-Identifier: MIT
"""Thermodynamic bookkeeping of a bipartite quantum system.

Given the state ϱ, the Hamiltonian snapshot and the propagator ro, this
module computes the energies, the power and heat exchanges split into their
external and internal parts, the entropies and their rates, the entropy
exchanges and productions, contact temperatures and the inequalities those
quantities have to satisfy. One :class:`ExchangeLedger` collects everything
for one instant; its field order is the CSV column order.

Notation: ro_ex is the exchange part of ro, ro_iso the isolated part and
ϱ̃̇ = ro - (i/ħ)[ℋ¹², ϱ] the modified propagator that drives the reduced
states. Θ are contact temperatures, T internal temperatures and T□ the
environment temperature.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from qthermo.dynamics import modified_propagator, rhs_full
from qthermo.errors import ContactTemperatureError, InvalidState, NonPositiveTemperature
from qthermo.hamiltonian import HamiltonianSnapshot
from qthermo.operators import commutator, embed, real_trace
from qthermo.propagators import (
    ConstitutiveOmega,
    ReservoirSpec,
    external_heat_at,
    reservoir_heat_capacity,
)
from qthermo.state import DensityOperator, Propagator, Units, log_z_rho, partial_entropies

# Relative tolerance used to decide that two temperatures coincide
SAME_TEMPERATURE_RTOL = 1e-9
# Denominators below this make a contact temperature undefined
CONTACT_DENOMINATOR_TOL = 1e-14
INEQUALITY_TOL = 1e-10


@dataclass(frozen=True)
class Temperatures:
    """Contact, internal and environment temperatures.

    Unset temperatures are ``None``; quantities and inequalities that need
    them are skipped.

    Attributes:
        theta: contact temperature of the undecomposed system
        theta1, theta2: contact temperatures of the sub-systems
        t_box: environment temperature T□
        t1, t2: internal temperatures of the sub-systems
        t12: internal temperature of a mono-sheet partition
        theta12: common contact temperature when Θ¹ = Θ²
        mode: ``prescribed`` or ``extracted``; in extracted mode the ledger
            uses the contact temperatures recovered from ro_ex when defined
    """

    theta: Optional[float] = None
    theta1: Optional[float] = None
    theta2: Optional[float] = None
    t_box: Optional[float] = None
    t1: Optional[float] = None
    t2: Optional[float] = None
    t12: Optional[float] = None
    theta12: Optional[float] = None
    mode: str = "prescribed"

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name != "mode" and value is not None and value <= 0:
                raise NonPositiveTemperature(f.name, value)
        if self.mode not in ("prescribed", "extracted"):
            raise InvalidState(f"unknown temperature mode {self.mode!r}")

    def contact(self, side: int) -> Optional[float]:
        value = self.theta1 if side == 1 else self.theta2
        if value is None and side == 1:
            return self.theta
        return value

    def internal(self, side: int) -> Optional[float]:
        return self.t1 if side == 1 else self.t2

    def replace(self, **changes) -> Temperatures:
        return dataclasses.replace(self, **changes)

    @property
    def equal_contact(self) -> bool:
        """Θ¹ = Θ²"""
        return _same(self.theta1, self.theta2)


def _same(a, b) -> bool:
    return a is not None and b is not None and np.isclose(a, b, rtol=SAME_TEMPERATURE_RTOL, atol=0)


def _inverse(value) -> float:
    return 1.0 / value if value else 0.0


class PowerExchanges(NamedTuple):
    """Power of the work variables, external and internal"""

    w1_ex: float
    w2_ex: float
    w1_int: float
    w2_int: float
    w12_int: float

    @property
    def external(self) -> float:
        return self.w1_ex + self.w2_ex

    @property
    def internal(self) -> float:
        return self.w1_int + self.w2_int + self.w12_int

    @property
    def total(self) -> float:
        return self.external + self.internal


class HeatExchanges(NamedTuple):
    """Heat exchanges of both sub-systems and of the interaction"""

    q1: float
    q2: float
    q12: float
    q1_ex: float
    q2_ex: float
    q12_ex: float
    q1_int: float
    q2_int: float
    q12_int: float
    # Tr(ℋ ro), Tr(ℋ ro_ex), Tr(ℋ ro_iso)
    total: float
    external: float
    internal: float


class EnergyRates(NamedTuple):
    """Ė¹, Ė², Ė¹² and their sum from the power and heat exchanges"""

    e1_dot: float
    e2_dot: float
    e12_dot: float
    e_dot: float
    # Ė¹ + Ė² + Ė¹² - (Ẇ_ex + Q̇_ex)
    residual: float


class EntropyRates(NamedTuple):
    """Entropy rates of the whole system and of both sub-systems"""

    s_dot: float
    s1_dot: float
    s2_dot: float
    s1_dot_ex: float
    s1_dot_int: float
    s2_dot_ex: float
    s2_dot_int: float


class EntropyExchanges(NamedTuple):
    """Entropy exchanges; zero where the temperature is unknown"""

    xi: float
    xi1_ex: float
    xi2_ex: float
    xi1_int: float
    xi2_int: float
    xi_box: float


class EntropyProduction(NamedTuple):
    """Entropy productions; zero where the temperature is unknown"""

    sigma: float
    sigma_iso: float
    sigma1: float
    sigma2: float
    sigma1_oqu: float
    sigma2_oqu: float


class InequalityCheck(NamedTuple):
    """One evaluated inequality ``value >= 0``"""

    name: str
    value: float
    satisfied: bool


class Partition(NamedTuple):
    """Classification of a bipartite partition"""

    inert: bool
    mono_sheet: bool

    @property
    def name(self) -> str:
        first = "inert" if self.inert else "non_inert"
        second = "mono_sheet" if self.mono_sheet else "double_sheet"
        return f"{first}/{second}"


@dataclass(frozen=True)
class ExchangeLedger:
    """Every thermodynamic quantity at one instant.

    Reciprocal temperatures recovered from ro_ex (``beta*_extracted``) are 0
    where their denominator vanishes; temperatures that are not known are 0.
    """

    t: float
    E: float
    E1: float
    E2: float
    E12: float
    W1_ex: float
    W2_ex: float
    W1_int: float
    W2_int: float
    W12_int: float
    W: float
    Q1: float
    Q2: float
    Q12: float
    Q1_ex: float
    Q2_ex: float
    Q12_ex: float
    Q1_int: float
    Q2_int: float
    Q12_int: float
    Q: float
    Q_ex: float
    Q_int: float
    E1_dot: float
    E2_dot: float
    E12_dot: float
    E_dot: float
    S: float
    S1: float
    S2: float
    S_cd: float
    S_dot: float
    S1_dot: float
    S2_dot: float
    S1_dot_ex: float
    S1_dot_int: float
    S2_dot_ex: float
    S2_dot_int: float
    S_dot_cd: float
    Xi: float
    Xi1_ex: float
    Xi2_ex: float
    Xi1_int: float
    Xi2_int: float
    Xi_box: float
    Sigma: float
    Sigma_iso: float
    Sigma1: float
    Sigma2: float
    Sigma1_oqu: float
    Sigma2_oqu: float
    theta: float
    theta1: float
    theta2: float
    beta_extracted: float
    beta1_extracted: float
    beta2_extracted: float
    T_HR: float
    C_HR: float
    Q2_HR: float
    residual_first_law: float
    residual_energy_balance: float
    residual_heat_sum: float
    residual_inert: float
    residual_entropy_rate_cd: float
    residual_sigma_forms: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


LEDGER_COLUMNS = tuple(f.name for f in dataclasses.fields(ExchangeLedger))


def _side_log(rho: DensityOperator, side: int, z: float) -> np.ndarray:
    """ln(Zϱ^A) embedded in the composite space"""
    return embed(log_z_rho(rho.reduced(side), z), rho.dims, side)


def energy(rho, snapshot: HamiltonianSnapshot) -> tuple:
    """(E, E¹, E², E¹²), the expectation values of the Hamiltonian parts"""
    return (
        real_trace(snapshot.h, rho),
        real_trace(snapshot.h1, rho),
        real_trace(snapshot.h2, rho),
        real_trace(snapshot.h12, rho),
    )


def _power(generators, rates, rho) -> float:
    return float(sum(real_trace(g, rho) * r for g, r in zip(generators, rates)))


def power_exchanges(rho, snapshot: HamiltonianSnapshot) -> PowerExchanges:
    """Ẇ^A_ex = Tr(∂ℋ^A/∂a^A ϱ) ȧ^A and the coupling terms driven by ȧ¹²"""
    return PowerExchanges(
        w1_ex=_power(snapshot.dh1_own, snapshot.a1_dot, rho),
        w2_ex=_power(snapshot.dh2_own, snapshot.a2_dot, rho),
        w1_int=_power(snapshot.dh1_coupling, snapshot.a12_dot, rho),
        w2_int=_power(snapshot.dh2_coupling, snapshot.a12_dot, rho),
        w12_int=_power(snapshot.dh12_coupling, snapshot.a12_dot, rho),
    )


def heat_exchanges(
    rho, snapshot: HamiltonianSnapshot, ro: Propagator, units: Units = Units()
) -> HeatExchanges:
    """Heat exchanges split into external and internal parts.

    Raises:
        InvalidState: ``ro`` carries no exchange/isolated split
    """
    if not ro.has_split:
        raise InvalidState("heat exchanges need ro split into exchange and isolated parts")
    flow = (1j / units.hbar) * commutator(snapshot.h12, rho)
    local = snapshot.h1 + snapshot.h2
    back = (1j / units.hbar) * commutator(local, rho)
    driven = ro.matrix - flow
    driven_iso = ro.iso - flow
    return HeatExchanges(
        q1=real_trace(snapshot.h1, driven),
        q2=real_trace(snapshot.h2, driven),
        q12=real_trace(snapshot.h12, ro.matrix - back),
        q1_ex=real_trace(snapshot.h1, ro.ex),
        q2_ex=real_trace(snapshot.h2, ro.ex),
        q12_ex=real_trace(snapshot.h12, ro.ex),
        q1_int=real_trace(snapshot.h1, driven_iso),
        q2_int=real_trace(snapshot.h2, driven_iso),
        q12_int=real_trace(snapshot.h12, ro.iso - back),
        total=real_trace(snapshot.h, ro.matrix),
        external=real_trace(snapshot.h, ro.ex),
        internal=real_trace(snapshot.h, ro.iso),
    )


def first_law_rates(power: PowerExchanges, heats: HeatExchanges) -> EnergyRates:
    """Energy rates of the parts and the residual of the first law"""
    e1 = power.w1_ex + power.w1_int + heats.q1_ex + heats.q1_int
    e2 = power.w2_ex + power.w2_int + heats.q2_ex + heats.q2_int
    e12 = power.w12_int + heats.q12_int
    total = e1 + e2 + e12
    return EnergyRates(e1, e2, e12, total, total - (power.external + heats.external))


def entropy_rates(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    units: Units = Units(),
    z: float = 1.0,
) -> EntropyRates:
    """Ṡ = -k_B Tr(ro ln Zϱ) and Ṡ^A = -k_B Tr(ϱ̃̇ ln Zϱ^A) with their splits"""
    k = units.k_B
    flow = (1j / units.hbar) * commutator(snapshot.h12, rho)
    driven = ro.matrix - flow
    logs = {side: _side_log(rho, side, z) for side in (1, 2)}
    if ro.has_split:
        ex, iso = ro.ex, ro.iso - flow
    else:
        ex, iso = np.zeros_like(driven), driven
    return EntropyRates(
        s_dot=-k * real_trace(ro.matrix, log_z_rho(rho, z)),
        s1_dot=-k * real_trace(driven, logs[1]),
        s2_dot=-k * real_trace(driven, logs[2]),
        s1_dot_ex=-k * real_trace(ex, logs[1]),
        s1_dot_int=-k * real_trace(iso, logs[1]),
        s2_dot_ex=-k * real_trace(ex, logs[2]),
        s2_dot_int=-k * real_trace(iso, logs[2]),
    )


def entropy_rate_deficiency(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    units: Units = Units(),
) -> float:
    """Ṡ¹ + Ṡ² - Ṡ from the logarithm of the product of the marginals"""
    driven = modified_propagator(rho, snapshot.h12, ro, units)
    product = np.kron(rho.reduced(1).matrix, rho.reduced(2).matrix)
    return -units.k_B * (
        real_trace(driven, log_z_rho(product)) - real_trace(ro, log_z_rho(rho))
    )


def entropy_exchanges(heats: HeatExchanges, temps: Temperatures) -> EntropyExchanges:
    """Ξ^A = Q̇^A/Θ^A per part, Ξ□ = -Q̇_ex/T□ and Ξ = Q̇/Θ"""
    b1 = _inverse(temps.contact(1))
    b2 = _inverse(temps.contact(2))
    return EntropyExchanges(
        xi=heats.total * _inverse(temps.theta),
        xi1_ex=heats.q1_ex * b1,
        xi2_ex=heats.q2_ex * b2,
        xi1_int=heats.q1_int * b1,
        xi2_int=heats.q2_int * b2,
        xi_box=-heats.external * _inverse(temps.t_box),
    )


def entropy_production(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    temps: Temperatures,
    units: Units = Units(),
    z: float = 1.0,
) -> EntropyProduction:
    """Σ^A = -Tr{(ℋ^A/Θ^A + k_B ln Zϱ^A) ϱ̃̇} and the undecomposed Σ in two forms.

    Σ^A_oqu is the same bracket against (i/ħ)[ℋ¹², ϱ], the production that
    remains with ro = 0. The undecomposed production is
    -Tr{(ℋ/Θ + k_B ln Zϱ) ro} and, alternatively, -k_B Tr(ro_iso ln Zϱ).
    """
    k = units.k_B
    flow = (1j / units.hbar) * commutator(snapshot.h12, rho)
    driven = ro.matrix - flow
    sides = []
    for side in (1, 2):
        beta = _inverse(temps.contact(side))
        if not beta:
            sides.append((0.0, 0.0))
            continue
        bracket = snapshot.embedded(side) * beta + k * _side_log(rho, side, z)
        sides.append((-real_trace(bracket, driven), real_trace(bracket, flow)))
    log_rho = log_z_rho(rho, z)
    beta = _inverse(temps.theta)
    sigma = -real_trace(snapshot.h * beta + k * log_rho, ro.matrix) if beta else 0.0
    iso = ro.iso if ro.has_split else ro.matrix
    return EntropyProduction(
        sigma=sigma,
        sigma_iso=-k * real_trace(iso, log_rho),
        sigma1=sides[0][0],
        sigma2=sides[1][0],
        sigma1_oqu=sides[0][1],
        sigma2_oqu=sides[1][1],
    )


def contact_temperature(rho, h, ro_ex, units: Units = Units(), z: float = 1.0) -> float:
    """Θ from 1/Θ = -k_B Tr(ln(Zϱ) ro_ex) / Tr(ℋ ro_ex).

    ``h`` may be a sub-system Hamiltonian embedded in the composite space, in
    which case ``rho`` must be that sub-system's reduced state, embedded
    through its logarithm by :func:`partial_contact_temperature`.

    Raises:
        ContactTemperatureError: the denominator vanishes or Θ is not positive
    """
    return _contact_from_log(log_z_rho(rho, z), h, ro_ex, units)


def partial_contact_temperature(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro_ex,
    side: int,
    units: Units = Units(),
    z: float = 1.0,
) -> float:
    """Θ^A from -k_B Tr(ln(Zϱ^A) ro_ex) / Tr(ℋ^A ro_ex); Z drops out since ro_ex is traceless"""
    return _contact_from_log(_side_log(rho, side, z), snapshot.embedded(side), ro_ex, units)


def _contact_inverse(log_rho, h, ro_ex, units: Units) -> Optional[float]:
    denominator = real_trace(h, ro_ex)
    scale = max(1.0, float(np.max(np.abs(h))) * float(np.max(np.abs(ro_ex))))
    if abs(denominator) <= CONTACT_DENOMINATOR_TOL * scale:
        return None
    return -units.k_B * real_trace(log_rho, ro_ex) / denominator


def _contact_from_log(log_rho, h, ro_ex, units: Units) -> float:
    inverse = _contact_inverse(log_rho, h, ro_ex, units)
    if inverse is None:
        raise ContactTemperatureError("Tr(ℋ ro_ex) vanishes, the contact temperature is undefined")
    if inverse <= 0:
        raise ContactTemperatureError(f"contact temperature is not positive (1/Θ = {inverse:.3e})")
    return 1.0 / inverse


def extracted_inverse_temperatures(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    units: Units = Units(),
    z: float = 1.0,
) -> tuple:
    """(1/Θ, 1/Θ¹, 1/Θ²) recovered from ro_ex, 0 where undefined"""
    if not ro.has_split:
        return (0.0, 0.0, 0.0)
    values = [_contact_inverse(log_z_rho(rho, z), snapshot.h, ro.ex, units)]
    for side in (1, 2):
        values.append(_contact_inverse(_side_log(rho, side, z), snapshot.embedded(side), ro.ex, units))
    return tuple(v if v is not None else 0.0 for v in values)


def compound_deficiency(
    kind: str,
    rho: DensityOperator,
    snapshot: Optional[HamiltonianSnapshot] = None,
    ro: Optional[Propagator] = None,
    units: Units = Units(),
):
    """The part of a quantity not carried by the two sub-systems.

    Args:
        kind: ``hamiltonian`` (ℋ - ℋ¹ - ℋ², an operator), ``energy``,
            ``energy_rate``, ``entropy`` (never positive) or ``entropy_rate``
    """
    if kind == "entropy":
        breakdown = partial_entropies(rho, units.k_B)
        return breakdown.total - breakdown.first - breakdown.second
    if snapshot is None:
        raise InvalidState(f"the {kind} deficiency needs the Hamiltonian")
    if kind == "hamiltonian":
        return snapshot.h - snapshot.h1 - snapshot.h2
    if kind == "energy":
        e, e1, e2, _ = energy(rho, snapshot)
        return e - e1 - e2
    if ro is None:
        raise InvalidState(f"the {kind} deficiency needs the propagator")
    if kind == "energy_rate":
        rho_dot = rhs_full(rho, snapshot.h, ro, units)
        h_dot = snapshot.h_dot
        rates = [
            real_trace(h_dot, rho) + real_trace(snapshot.h, rho_dot),
        ]
        for side in (1, 2):
            own = snapshot.dh1_own if side == 1 else snapshot.dh2_own
            own_rate = snapshot.a1_dot if side == 1 else snapshot.a2_dot
            coupling = snapshot.dh1_coupling if side == 1 else snapshot.dh2_coupling
            rates.append(
                _power(own, own_rate, rho)
                + _power(coupling, snapshot.a12_dot, rho)
                + real_trace(snapshot.embedded(side), rho_dot)
            )
        return rates[0] - rates[1] - rates[2]
    if kind == "entropy_rate":
        rates = entropy_rates(rho, snapshot, ro, units)
        return rates.s_dot - rates.s1_dot - rates.s2_dot
    raise InvalidState(f"unknown compound deficiency {kind!r}")


def classify_partition(ledger: ExchangeLedger, temps: Temperatures, tol: float = 1e-10) -> Partition:
    """Inert when the non-inertness Q̇¹²_int vanishes, mono-sheet when |T¹ - T²| <= tol.

    A driven coupling may still change E¹² in an inert partition; only the
    internal heat of the interaction decides.
    """
    scale = max(1.0, abs(ledger.Q1_int), abs(ledger.Q2_int))
    inert = abs(ledger.Q12_int) <= tol * scale
    if temps.t1 is None or temps.t2 is None:
        return Partition(inert=inert, mono_sheet=False)
    return Partition(inert=inert, mono_sheet=abs(temps.t1 - temps.t2) <= tol)


class _Suite:
    """Collects inequality checks with a magnitude-aware tolerance"""

    def __init__(self, tol: float):
        self.tol = tol
        self.checks = []

    def add(self, name: str, value: float, *terms: float) -> None:
        scale = max([1.0] + [abs(x) for x in terms])
        self.checks.append(InequalityCheck(name, float(value), bool(value >= -self.tol * scale)))

    def equal(self, name: str, value: float, *terms: float) -> None:
        self.add(name, -abs(value), *terms)


def inequality_suite(
    ledger: ExchangeLedger,
    temps: Temperatures,
    omega_ex: Optional[ConstitutiveOmega] = None,
    partition: Optional[Partition] = None,
    rho: Optional[DensityOperator] = None,
    tol: float = INEQUALITY_TOL,
) -> list:
    """Evaluate every inequality whose temperatures are known.

    Each check is written as ``value >= 0``. The partition-specific
    inequalities are only evaluated for the partition they belong to.
    """
    s = _Suite(tol)
    lg = ledger
    th1, th2 = temps.contact(1), temps.contact(2)
    partition = partition or classify_partition(ledger, temps)
    bipartite = th2 is not None

    if temps.theta and temps.t_box:
        s.add(
            "defining_undecomposed",
            (1 / temps.theta - 1 / temps.t_box) * lg.Q_ex,
            lg.Q_ex / temps.theta,
        )
    if temps.t_box:
        for side, theta, q in ((1, th1, lg.Q1_ex), (2, th2, lg.Q2_ex)):
            if theta:
                s.add(f"defining_external_{side}", (1 / theta - 1 / temps.t_box) * q, q / theta)
        if th1 and (th2 or not bipartite):
            s.add("external_entropy_sum", lg.Xi1_ex + lg.Xi2_ex + lg.Xi_box, lg.Xi1_ex, lg.Xi_box)

    if bipartite and th1 and omega_ex is not None and not _same(th1, th2):
        sign = np.sign(th2 - th1)
        at2 = external_heat_at(th2, omega_ex, (th1, th2), rho)
        at1 = external_heat_at(th1, omega_ex, (th1, th2), rho)
        s.add("contact_ordering_1", -sign * at1, at1)
        s.add("contact_ordering_2", sign * at2, at2)
        if temps.theta:
            s.add("undecomposed_between", (th2 - temps.theta) * (temps.theta - th1), th1 * th2)

    if not (bipartite and th1 and temps.t1 and temps.t2):
        return s.checks

    t1, t2 = temps.t1, temps.t2
    q1, q2, q12 = lg.Q1_int, lg.Q2_int, lg.Q12_int
    for side, theta, t, q in ((1, th1, t1, q1), (2, th2, t2, q2)):
        s.add(f"defining_internal_{side}", (1 / theta - 1 / t) * q, q / theta, q / t)
    s.add(
        "internal_sum",
        2 * (q1 / th1 + q2 / th2)
        - ((1 / t1 - 1 / t2) * (q1 - q2) - (1 / t1 + 1 / t2) * q12),
        q1 / th1, q2 / th2, q12 / t1, q12 / t2,
    )
    s.add(
        "internal_entropy_sum",
        lg.Xi1_int + lg.Xi2_int
        - (0.5 * (1 / t1 - 1 / t2) * (q1 - q2) - 0.5 * (1 / t1 + 1 / t2) * q12),
        lg.Xi1_int, lg.Xi2_int, q12 / t1,
    )
    t12 = temps.t12 or t1
    theta12 = temps.theta12 or th1
    if partition.mono_sheet:
        s.add("mono_sheet", q1 / th1 + q2 / th2 + q12 / t12, q1 / th1, q12 / t12)
        s.add(
            "mono_sheet_internal_entropy",
            lg.Xi1_int + lg.Xi2_int + q12 / t12,
            lg.Xi1_int, q12 / t12,
        )
    if temps.equal_contact:
        s.add(
            "equal_contact",
            -((1 / t1 - 1 / t2) * (q1 - q2) + (2 / theta12 - 1 / t1 - 1 / t2) * q12),
            q1 / t1, q12 / theta12,
        )
    if partition.mono_sheet and temps.equal_contact:
        s.add("mono_sheet_equal_contact", (1 / t12 - 1 / theta12) * q12, q12 / t12)
    if partition.inert:
        s.add("inert_internal_entropy", lg.Xi1_int + lg.Xi2_int - (1 / t1 - 1 / t2) * q1, lg.Xi1_int, q1 / t1)
        if temps.equal_contact:
            s.add("inert_double_sheet_1", (1 / t2 - 1 / t1) * q1, q1 / t1)
            s.add("inert_double_sheet_2", (1 / t1 - 1 / t2) * q2, q2 / t2)
        if partition.mono_sheet:
            s.add("inert_mono_sheet_1", (1 / th1 - 1 / th2) * q1, q1 / th1)
            s.add("inert_mono_sheet_2", (1 / th2 - 1 / th1) * q2, q2 / th2)
            s.equal("inert_mono_sheet_sum", 1 / th1 + 1 / th2 - 2 / t12, 1 / t12)
            s.add("inert_mono_sheet_internal_entropy", lg.Xi1_int + lg.Xi2_int, lg.Xi1_int)
            if abs(lg.Q_ex) <= tol * max(1.0, abs(lg.Q1), abs(lg.Q2)):
                s.add("inert_contact", (1 / th2 - 1 / th1) * lg.Q2, lg.Q2 / th2)
    return s.checks


def diagnostics(ledger: ExchangeLedger, temps: Temperatures, tol: float = INEQUALITY_TOL) -> list:
    """Sign checks that depend on how well the scenario is posed.

    Entropy production signs and the reservoir contact ordering are not
    guaranteed by the construction of ro; they are reported, not enforced.
    """
    s = _Suite(tol)
    if temps.contact(1):
        s.add("second_law_1", ledger.Sigma1, ledger.S1_dot)
    if temps.contact(2):
        s.add("second_law_2", ledger.Sigma2, ledger.S2_dot)
    if temps.theta:
        s.add("second_law", ledger.Sigma, ledger.S_dot)
    if ledger.T_HR and temps.contact(1):
        s.add(
            "reservoir_contact",
            (1 / ledger.T_HR - 1 / temps.contact(1)) * ledger.Q2_HR,
            ledger.Q2_HR / ledger.T_HR,
        )
    return s.checks


def build_ledger(
    t: float,
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro: Propagator,
    temps: Temperatures,
    units: Units = Units(),
    z: float = 1.0,
    reservoir: Optional[ReservoirSpec] = None,
) -> ExchangeLedger:
    """Assemble every quantity of the ledger at time ``t``"""
    betas = extracted_inverse_temperatures(rho, snapshot, ro, units, z)
    used = temps
    if temps.mode == "extracted":
        changes = {}
        for name, beta in zip(("theta", "theta1", "theta2"), betas):
            if beta > 0:
                changes[name] = 1.0 / beta
            elif beta < 0:
                logging.debug("Contact temperature %s is negative at t=%g", name, t)
            else:
                logging.debug("Contact temperature %s is undefined at t=%g", name, t)
        used = temps.replace(**changes)

    e, e1, e2, e12 = energy(rho, snapshot)
    power = power_exchanges(rho, snapshot)
    heats = heat_exchanges(rho, snapshot, ro, units)
    rates = first_law_rates(power, heats)
    breakdown = partial_entropies(rho, units.k_B)
    srates = entropy_rates(rho, snapshot, ro, units, z)
    xi = entropy_exchanges(heats, used)
    sigma = entropy_production(rho, snapshot, ro, used, units, z)
    rho_dot = rhs_full(rho, snapshot.h, ro, units)
    e_dot_direct = real_trace(snapshot.h_dot, rho) + real_trace(snapshot.h, rho_dot)
    s_dot_cd = srates.s_dot - srates.s1_dot - srates.s2_dot

    t_hr = c_hr = q2_hr = 0.0
    if reservoir is not None:
        t_hr = reservoir.at(t)
        c_hr = reservoir_heat_capacity(snapshot.h2_local, t_hr, units.k_B)
        # heat the reservoir takes in through the partition
        q2_hr = heats.q2

    return ExchangeLedger(
        t=t,
        E=e,
        E1=e1,
        E2=e2,
        E12=e12,
        W1_ex=power.w1_ex,
        W2_ex=power.w2_ex,
        W1_int=power.w1_int,
        W2_int=power.w2_int,
        W12_int=power.w12_int,
        W=power.total,
        Q1=heats.q1,
        Q2=heats.q2,
        Q12=heats.q12,
        Q1_ex=heats.q1_ex,
        Q2_ex=heats.q2_ex,
        Q12_ex=heats.q12_ex,
        Q1_int=heats.q1_int,
        Q2_int=heats.q2_int,
        Q12_int=heats.q12_int,
        Q=heats.total,
        Q_ex=heats.external,
        Q_int=heats.internal,
        E1_dot=rates.e1_dot,
        E2_dot=rates.e2_dot,
        E12_dot=rates.e12_dot,
        E_dot=rates.e_dot,
        S=breakdown.total,
        S1=breakdown.first,
        S2=breakdown.second,
        S_cd=-breakdown.gap,
        S_dot=srates.s_dot,
        S1_dot=srates.s1_dot,
        S2_dot=srates.s2_dot,
        S1_dot_ex=srates.s1_dot_ex,
        S1_dot_int=srates.s1_dot_int,
        S2_dot_ex=srates.s2_dot_ex,
        S2_dot_int=srates.s2_dot_int,
        S_dot_cd=s_dot_cd,
        Xi=xi.xi,
        Xi1_ex=xi.xi1_ex,
        Xi2_ex=xi.xi2_ex,
        Xi1_int=xi.xi1_int,
        Xi2_int=xi.xi2_int,
        Xi_box=xi.xi_box,
        Sigma=sigma.sigma,
        Sigma_iso=sigma.sigma_iso,
        Sigma1=sigma.sigma1,
        Sigma2=sigma.sigma2,
        Sigma1_oqu=sigma.sigma1_oqu,
        Sigma2_oqu=sigma.sigma2_oqu,
        theta=used.theta or 0.0,
        theta1=used.contact(1) or 0.0,
        theta2=used.contact(2) or 0.0,
        beta_extracted=betas[0],
        beta1_extracted=betas[1],
        beta2_extracted=betas[2],
        T_HR=t_hr,
        C_HR=c_hr,
        Q2_HR=q2_hr,
        residual_first_law=rates.residual,
        residual_energy_balance=rates.e_dot - e_dot_direct,
        residual_heat_sum=heats.q1 + heats.q2 + heats.q12 - heats.total,
        residual_inert=real_trace(snapshot.h12, rho_dot),
        residual_entropy_rate_cd=-s_dot_cd - entropy_rate_deficiency(rho, snapshot, ro, units),
        residual_sigma_forms=(sigma.sigma - sigma.sigma_iso) if used.theta else 0.0,
    )
