# SPDX-License-Identifier: MIT
"""Integration of the equation of motion ϱ̇ = -(i/ħ)[ℋ, ϱ] + ro.

The integrator is a fixed-step classical Runge-Kutta scheme. After every
step the state is symmetrized, renormalized to unit trace and checked for
positivity: eigenvalues in [-1e-8, 0) are clamped to zero, anything more
negative aborts the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from qthermo.errors import InvalidState, NonFiniteState, PositivityBreach
from qthermo.hamiltonian import HamiltonianSnapshot, HamiltonianTriple
from qthermo.operators import as_matrix, commutator, partial_trace
from qthermo.propagators import NoDissipation
from qthermo.state import DensityOperator, Propagator, Units

# Negative eigenvalues down to this value are projected away
CLAMP_TOL = 1e-8
STEP_TOL = 1e-9

Policy = Callable[[DensityOperator, HamiltonianSnapshot], Propagator]
Observer = Callable[[float, DensityOperator, HamiltonianSnapshot, Propagator], object]


def rhs_full(rho, h, ro, units: Units = Units()) -> np.ndarray:
    """-(i/ħ)[ℋ, ϱ] + ro"""
    return -(1j / units.hbar) * commutator(h, rho) + as_matrix(ro)


def modified_propagator(rho, h12, ro, units: Units = Units()) -> np.ndarray:
    """ro - (i/ħ)[ℋ¹², ϱ], the composite term that drives the reduced states"""
    return as_matrix(ro) - (1j / units.hbar) * commutator(h12, rho)


def rhs_traced(
    rho: DensityOperator,
    snapshot: HamiltonianSnapshot,
    ro,
    side: int,
    units: Units = Units(),
    rho_side=None,
) -> np.ndarray:
    """ϱ̇^A = -(i/ħ)[ℋ^A, ϱ^A] + Tr^B(ro - (i/ħ)[ℋ¹², ϱ]).

    ``rho_side`` replaces the reduced state in the commutator term; it lets
    the reduced equation run on its own integrated state.
    """
    other = 2 if side == 1 else 1
    if rho_side is None:
        rho_side = partial_trace(rho, rho.dims, trace_out=other)
    driven = partial_trace(
        modified_propagator(rho, snapshot.h12, ro, units), rho.dims, trace_out=other
    )
    return -(1j / units.hbar) * commutator(snapshot.local(side), rho_side) + driven


def rk4_step(f, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of y' = f(t, y)"""
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    """Samples of an integrated state.

    Attributes:
        times: sample times, the first is the start time
        states: the state at each sample
        ledger: whatever the observer returned at each sample
        hermiticity_drift: largest |ϱ - ϱ†| entry before symmetrizing, per step
        projections: (time, eigenvalue) for every positivity projection
    """

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    ledger: list = field(default_factory=list)
    hermiticity_drift: list = field(default_factory=list)
    projections: list = field(default_factory=list)

    @property
    def final(self) -> DensityOperator:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


def step_count(t_span: tuple, dt: float) -> int:
    """Number of fixed steps covering ``t_span``"""
    t0, t1 = t_span
    if dt <= 0:
        raise InvalidState(f"time step must be positive, got {dt}")
    if t1 < t0:
        raise InvalidState(f"end time {t1} precedes start time {t0}")
    n = int(round((t1 - t0) / dt))
    if abs(n * dt - (t1 - t0)) > STEP_TOL * max(1.0, abs(t1 - t0)):
        raise InvalidState(f"time span {t1 - t0} is not a multiple of dt={dt}")
    return n


def _as_triple(hamiltonian) -> HamiltonianTriple:
    if isinstance(hamiltonian, HamiltonianTriple):
        return hamiltonian
    return HamiltonianTriple.static(hamiltonian)


def _stabilize(m: np.ndarray, t: float, step: int, trajectory: Trajectory) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise NonFiniteState(t, step)
    trajectory.hermiticity_drift.append(float(np.max(np.abs(m - m.conj().T))))
    m = (m + m.conj().T) / 2
    m = m / np.trace(m).real
    w, v = scipy.linalg.eigh(m)
    if w[0] < -CLAMP_TOL:
        raise PositivityBreach(t, step, float(w[0]))
    if w[0] < 0:
        logging.debug("Projecting eigenvalue %.3e at t=%.6g", w[0], t)
        trajectory.projections.append((t, float(w[0])))
        w = np.clip(w, 0.0, None)
        m = (v * (w / w.sum())) @ v.conj().T
    return m


def evolve(
    initial: DensityOperator,
    hamiltonian: Union[HamiltonianTriple, np.ndarray],
    policy: Optional[Policy] = None,
    t_span: tuple = (0.0, 1.0),
    dt: float = 1e-3,
    units: Units = Units(),
    observer: Optional[Observer] = None,
    sample_every: int = 1,
) -> Trajectory:
    """Integrate the state over ``t_span`` with a fixed step.

    Args:
        initial: the state at ``t_span[0]``
        hamiltonian: a triple, or a single operator for an undecomposed system
        policy: supplies ro at every stage; ``None`` means ro = 0
        t_span: (start, end), the span must be a whole number of steps
        dt: step size
        units: k_B and ħ
        observer: called at every step with (t, ϱ, snapshot, ro); its return
            values on kept steps are collected in ``Trajectory.ledger``
        sample_every: keep every n-th step; the end point is always kept.
            Only storage is thinned, the observer still sees every step.

    Returns:
        A trajectory with one sample per kept step plus the start.

    Raises:
        PositivityBreach: an eigenvalue dropped below -1e-8
        NonFiniteState: the state became NaN or infinite
    """
    triple = _as_triple(hamiltonian)
    policy = policy or NoDissipation()
    dims = initial.dims
    if dims.total != triple.dims.total:
        raise InvalidState(
            f"state dimension {dims.total} does not match Hamiltonian {triple.dims.total}"
        )
    n = step_count(t_span, dt)
    t0 = t_span[0]
    trajectory = Trajectory()

    def f(t, y):
        snapshot = triple.at(t)
        ro = policy(DensityOperator(y, dims, checked=False), snapshot)
        return rhs_full(y, snapshot.h, ro, units)

    def sample(step, t, m):
        kept = is_sampled(step, n, sample_every)
        if not kept and observer is None:
            return
        rho = DensityOperator(m, dims)
        if kept:
            trajectory.times.append(t)
            trajectory.states.append(rho)
        if observer is not None:
            snapshot = triple.at(t)
            value = observer(t, rho, snapshot, policy(rho, snapshot))
            if kept:
                trajectory.ledger.append(value)

    y = initial.matrix.copy()
    sample(0, t0, y)
    for step in range(1, n + 1):
        t_prev = t0 + (step - 1) * dt
        t = t0 + step * dt
        y = _stabilize(rk4_step(f, t_prev, y, dt), t, step, trajectory)
        sample(step, t, y)
    logging.debug("Integrated %d steps of dt=%g", n, dt)
    return trajectory


@dataclass
class TracedTrajectory:
    """Full state integrated together with both reduced equations"""

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    first: list = field(default_factory=list)
    second: list = field(default_factory=list)

    def deviation(self) -> float:
        """Largest entry of ϱ^A(traced) - Tr^B ϱ over all samples and both sides"""
        worst = 0.0
        for rho, r1, r2 in zip(self.states, self.first, self.second):
            worst = max(
                worst,
                float(np.max(np.abs(r1 - rho.reduced(1).matrix))),
                float(np.max(np.abs(r2 - rho.reduced(2).matrix))),
            )
        return worst


def evolve_traced(
    initial: DensityOperator,
    hamiltonian: HamiltonianTriple,
    policy: Optional[Policy] = None,
    t_span: tuple = (0.0, 1.0),
    dt: float = 1e-3,
    units: Units = Units(),
) -> TracedTrajectory:
    """Integrate ϱ, ϱ¹ and ϱ² side by side.

    The reduced states follow their own traced equations, fed at every stage
    with the full state of the same stage. No positivity projection is
    applied, so the comparison with Tr^B ϱ is not biased by it.
    """
    triple = _as_triple(hamiltonian)
    policy = policy or NoDissipation()
    dims = initial.dims
    n = step_count(t_span, dt)
    d1 = dims.d1
    t0 = t_span[0]

    def f(t, y):
        full, r1, r2 = y
        snapshot = triple.at(t)
        rho = DensityOperator(full, dims, checked=False)
        ro = policy(rho, snapshot)
        return np.array(
            [
                rhs_full(full, snapshot.h, ro, units),
                _pad(rhs_traced(rho, snapshot, ro, 1, units, r1[:d1, :d1]), full.shape),
                _pad(
                    rhs_traced(rho, snapshot, ro, 2, units, r2[: dims.d2, : dims.d2]),
                    full.shape,
                ),
            ]
        )

    out = TracedTrajectory()
    y = np.array(
        [
            initial.matrix,
            _pad(initial.reduced(1).matrix, initial.matrix.shape),
            _pad(initial.reduced(2).matrix, initial.matrix.shape),
        ]
    )

    def sample(t, y):
        out.times.append(t)
        out.states.append(DensityOperator(y[0], dims, checked=False))
        out.first.append(y[1][:d1, :d1].copy())
        out.second.append(y[2][: dims.d2, : dims.d2].copy())

    sample(t0, y)
    for step in range(1, n + 1):
        y = rk4_step(f, t0 + (step - 1) * dt, y, dt)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(t0 + step * dt, step)
        y = (y + np.conj(np.transpose(y, (0, 2, 1)))) / 2
        sample(t0 + step * dt, y)
    return out


def _pad(m: np.ndarray, shape: tuple) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    out[: m.shape[0], : m.shape[1]] = m
    return out
