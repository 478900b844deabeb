# SPDX-License-Identifier: MIT
"""Time-dependent Hamiltonians of a bipartite system.

ℋ = ℋ¹ ⊗ I + I ⊗ ℋ² + ℋ¹², where each part depends linearly on its work
variables::

    ℋ¹(a¹, a¹²) = B¹ + Σ a¹_i G¹_i + Σ a¹²_j C¹_j
    ℋ²(a², a¹²) = B² + Σ a²_i G²_i + Σ a¹²_j C²_j
    ℋ¹²(a¹²)    = B¹² + Σ a¹²_j C¹²_j

so the derivatives with respect to the work variables are the generators
themselves and ∂ℋ¹²/∂a^A vanishes identically. Work variables follow
piecewise-linear protocols in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qthermo.errors import DimensionMismatch, InvalidState
from qthermo.operators import HermitianOp, HilbertDims, as_matrix, embed


@dataclass(frozen=True, eq=False)
class Protocol:
    """Piecewise-linear work variable a(t).

    Attributes:
        times: strictly increasing knot times
        values: one row of work-variable values per knot
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(times.size, -1)
        if values.shape[0] != times.size or times.size == 0:
            raise InvalidState("protocol needs one value row per knot time")
        if np.any(np.diff(times) <= 0):
            raise InvalidState("protocol knot times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, values: Sequence[float] = ()) -> Protocol:
        return cls([0.0], [list(values)])

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def _segment(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), self.times.size - 2)

    def value(self, t: float) -> np.ndarray:
        if self.times.size == 1 or self.size == 0:
            return self.values[0].copy()
        return np.array(
            [np.interp(t, self.times, self.values[:, i]) for i in range(self.size)]
        )

    def rate(self, t: float) -> np.ndarray:
        """Slope of the segment containing ``t``; zero outside the knots"""
        if self.times.size == 1 or t < self.times[0] or t > self.times[-1]:
            return np.zeros(self.size)
        i = self._segment(t)
        dt = self.times[i + 1] - self.times[i]
        return (self.values[i + 1] - self.values[i]) / dt


@dataclass(frozen=True, eq=False)
class LinearModel:
    """ℋ(a, a¹²) = base + Σ a_i own_i + Σ a¹²_j coupling_j on one space"""

    base: np.ndarray
    own: tuple = ()
    coupling: tuple = ()

    def __post_init__(self):
        base = HermitianOp(self.base).matrix
        own = tuple(HermitianOp(g).matrix for g in self.own)
        coupling = tuple(HermitianOp(g).matrix for g in self.coupling)
        for g in own + coupling:
            if g.shape != base.shape:
                raise DimensionMismatch("generator", base.shape[0], g.shape[0])
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "own", own)
        object.__setattr__(self, "coupling", coupling)

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    def at(self, a_own: np.ndarray, a_coupling: np.ndarray) -> np.ndarray:
        m = self.base.copy()
        for value, g in zip(a_own, self.own):
            m = m + value * g
        for value, g in zip(a_coupling, self.coupling):
            m = m + value * g
        return m


@dataclass(frozen=True, eq=False)
class HamiltonianSnapshot:
    """Hamiltonian parts, derivatives and work-variable rates at one instant.

    Every operator is embedded in the composite space.
    """

    dims: HilbertDims
    t: float
    h1: np.ndarray
    h2: np.ndarray
    h12: np.ndarray
    h1_local: np.ndarray
    h2_local: np.ndarray
    dh1_own: tuple = ()
    dh1_coupling: tuple = ()
    dh2_own: tuple = ()
    dh2_coupling: tuple = ()
    dh12_coupling: tuple = ()
    a1_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a2_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a12_dot: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def h(self) -> np.ndarray:
        """Total Hamiltonian"""
        return self.h1 + self.h2 + self.h12

    def local(self, side: int) -> np.ndarray:
        return self.h1_local if side == 1 else self.h2_local

    def embedded(self, side: int) -> np.ndarray:
        return self.h1 if side == 1 else self.h2

    @property
    def h_dot(self) -> np.ndarray:
        """dℋ/dt through the work variables"""
        out = np.zeros_like(self.h)
        terms = [
            (self.dh1_own, self.a1_dot),
            (self.dh1_coupling, self.a12_dot),
            (self.dh2_own, self.a2_dot),
            (self.dh2_coupling, self.a12_dot),
            (self.dh12_coupling, self.a12_dot),
        ]
        for generators, rates in terms:
            for g, r in zip(generators, rates):
                out = out + r * g
        return out


@dataclass(frozen=True, eq=False)
class HamiltonianTriple:
    """(ℋ¹, ℋ², ℋ¹²) with their work-variable protocols"""

    dims: HilbertDims
    h1: LinearModel
    h2: LinearModel
    h12: LinearModel
    a1: Protocol = field(default_factory=Protocol.constant)
    a2: Protocol = field(default_factory=Protocol.constant)
    a12: Protocol = field(default_factory=Protocol.constant)

    def __post_init__(self):
        if self.h1.dim != self.dims.d1:
            raise DimensionMismatch("ℋ¹", self.dims.d1, self.h1.dim)
        if self.h2.dim != self.dims.d2:
            raise DimensionMismatch("ℋ²", self.dims.d2, self.h2.dim)
        if self.h12.dim != self.dims.total:
            raise DimensionMismatch("ℋ¹²", self.dims.total, self.h12.dim)
        if self.h12.own:
            raise InvalidState("ℋ¹² depends on the coupling work variables only")
        for name, model, own, coupling in (
            ("ℋ¹", self.h1, self.a1, self.a12),
            ("ℋ²", self.h2, self.a2, self.a12),
        ):
            if len(model.own) > own.size or len(model.coupling) > coupling.size:
                raise InvalidState(f"{name} has more generators than work variables")
        if len(self.h12.coupling) > self.a12.size:
            raise InvalidState("ℋ¹² has more generators than work variables")

    @classmethod
    def static(cls, h1, h2=None, h12=None) -> HamiltonianTriple:
        """Time-independent triple; ℋ² and ℋ¹² default to zero"""
        m1 = as_matrix(h1)
        m2 = as_matrix(h2) if h2 is not None else np.zeros((1, 1), dtype=complex)
        dims = HilbertDims(m1.shape[0], m2.shape[0])
        m12 = as_matrix(h12) if h12 is not None else np.zeros((dims.total, dims.total))
        return cls(dims, LinearModel(m1), LinearModel(m2), LinearModel(m12))

    def at(self, t: float) -> HamiltonianSnapshot:
        a1, a2, a12 = self.a1.value(t), self.a2.value(t), self.a12.value(t)
        h1_local = self.h1.at(a1, a12)
        h2_local = self.h2.at(a2, a12)
        return HamiltonianSnapshot(
            dims=self.dims,
            t=t,
            h1=embed(h1_local, self.dims, 1),
            h2=embed(h2_local, self.dims, 2),
            h12=self.h12.at((), a12),
            h1_local=h1_local,
            h2_local=h2_local,
            dh1_own=tuple(embed(g, self.dims, 1) for g in self.h1.own),
            dh1_coupling=tuple(embed(g, self.dims, 1) for g in self.h1.coupling),
            dh2_own=tuple(embed(g, self.dims, 2) for g in self.h2.own),
            dh2_coupling=tuple(embed(g, self.dims, 2) for g in self.h2.coupling),
            dh12_coupling=self.h12.coupling,
            a1_dot=self.a1.rate(t)[: len(self.h1.own)],
            a2_dot=self.a2.rate(t)[: len(self.h2.own)],
            a12_dot=self.a12.rate(t),
        )
