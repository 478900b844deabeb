# SPDX-License-Identifier: MIT
"""Density operators, propagators and their entropies"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from qthermo.errors import DimensionMismatch, InvalidState, NonPositiveTemperature
from qthermo.operators import (
    ENTROPY_EPS,
    RATE_EPS,
    HermitianOp,
    HilbertDims,
    as_matrix,
    mat_log_regularized,
    partial_trace,
    real_trace,
)

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class Units:
    """Boltzmann and reduced Planck constants"""

    k_B: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.k_B <= 0 or self.hbar <= 0:
            raise InvalidState(f"k_B and hbar must be positive, got {self.k_B}, {self.hbar}")


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A Hermitian, positive semi-definite, unit trace operator.

    Attributes:
        entries: the matrix, symmetrized on construction
        dims: the bipartite structure; an undecomposed system uses ``d2 == 1``
    """

    entries: np.ndarray
    dims: Optional[HilbertDims] = None
    checked: InitVar[bool] = True

    def __post_init__(self, checked):
        op = HermitianOp(self.entries)
        dims = self.dims or HilbertDims(op.dim)
        if op.dim != dims.total:
            raise DimensionMismatch("density operator", dims.total, op.dim)
        object.__setattr__(self, "entries", op.matrix)
        object.__setattr__(self, "dims", dims)
        if not checked:
            return
        trace = np.trace(op.matrix).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidState(f"density operator trace is {trace!r}, not 1")
        w = self.spectrum()
        if w[0] < -POSITIVITY_TOL:
            raise InvalidState(f"density operator has negative eigenvalue {w[0]:.3e}")

    def spectrum(self) -> np.ndarray:
        """Eigenvalues in ascending order"""
        return scipy.linalg.eigvalsh(self.entries)

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def reduced(self, side: int) -> DensityOperator:
        """Reduced state of sub-system ``side`` (1 or 2)"""
        other = 2 if side == 1 else 1
        m = partial_trace(self.entries, self.dims, trace_out=other)
        return DensityOperator(m, HilbertDims(self.dims.side(side)), checked=False)


@dataclass(frozen=True, eq=False)
class Propagator:
    """The dissipative term ro of the equation of motion.

    ro is Hermitian and traceless. When ``split`` is given it holds
    ``(ro_ex, ro_iso)``, each Hermitian and traceless, summing to ro.
    """

    entries: np.ndarray
    split: Optional[tuple] = None

    def __post_init__(self):
        op = HermitianOp(self.entries)
        _check_traceless("propagator", op.matrix)
        object.__setattr__(self, "entries", op.matrix)
        if self.split is None:
            return
        ex, iso = (HermitianOp(part).matrix for part in self.split)
        if ex.shape != op.matrix.shape or iso.shape != op.matrix.shape:
            raise DimensionMismatch("propagator split", op.dim, ex.shape[0])
        _check_traceless("exchange part", ex)
        _check_traceless("isolated part", iso)
        scale = max(1.0, float(np.max(np.abs(op.matrix))))
        if np.max(np.abs(ex + iso - op.matrix)) > TRACE_TOL * scale:
            raise InvalidState("exchange and isolated parts do not sum to the propagator")
        object.__setattr__(self, "split", (ex, iso))

    @classmethod
    def zero(cls, dim: int, split: bool = True) -> Propagator:
        z = np.zeros((dim, dim), dtype=complex)
        return cls(z, (z, z) if split else None)

    @classmethod
    def from_split(cls, ex, iso) -> Propagator:
        ex = as_matrix(ex)
        iso = as_matrix(iso)
        return cls(ex + iso, (ex, iso))

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def has_split(self) -> bool:
        return self.split is not None

    @property
    def ex(self) -> np.ndarray:
        if self.split is None:
            raise InvalidState("propagator carries no exchange/isolated split")
        return self.split[0]

    @property
    def iso(self) -> np.ndarray:
        if self.split is None:
            raise InvalidState("propagator carries no exchange/isolated split")
        return self.split[1]


def _check_traceless(what, m) -> None:
    trace = np.trace(m)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if abs(trace) > TRACE_TOL * scale:
        raise InvalidState(f"{what} trace is {trace!r}, not 0")


def _check_basis(basis: np.ndarray, count: int) -> np.ndarray:
    v = np.asarray(basis, dtype=complex)
    if v.ndim != 2 or v.shape[1] != count:
        raise DimensionMismatch("basis", count, v.shape[-1])
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(count))) > ORTHONORMAL_TOL:
        raise InvalidState("basis is not orthonormal")
    return v


def from_weights(
    weights: Sequence[float], basis, dims: Optional[HilbertDims] = None
) -> DensityOperator:
    """Build ϱ = Σ x_j |φ_j⟩⟨φ_j|.

    Args:
        weights: non-negative weights summing to one
        basis: matrix whose columns are the orthonormal vectors |φ_j⟩

    Raises:
        InvalidState: negative weights, weights not summing to one or a
            non-orthonormal basis
    """
    w = np.asarray(weights, dtype=float)
    v = _check_basis(basis, w.size)
    if np.any(w < -POSITIVITY_TOL):
        raise InvalidState(f"negative weight {w.min():.3e}")
    if abs(w.sum() - 1.0) > TRACE_TOL:
        raise InvalidState(f"weights sum to {w.sum()!r}, not 1")
    return DensityOperator((v * w) @ v.conj().T, dims)


def propagator_from_weight_rates(rates: Sequence[float], basis) -> Propagator:
    """Build ro = Σ ẋ_j |φ_j⟩⟨φ_j| from weight rates summing to zero"""
    r = np.asarray(rates, dtype=float)
    v = _check_basis(basis, r.size)
    if abs(r.sum()) > TRACE_TOL * max(1.0, float(np.max(np.abs(r)))):
        raise InvalidState(f"weight rates sum to {r.sum()!r}, not 0")
    return Propagator((v * r) @ v.conj().T)


def canonical(
    hamiltonian, theta: float, k_B: float = 1.0, dims: Optional[HilbertDims] = None
) -> DensityOperator:
    """Canonical state exp(-ℋ/(k_B θ)) / Z"""
    if theta <= 0:
        raise NonPositiveTemperature("theta", theta)
    w, v = scipy.linalg.eigh(as_matrix(hamiltonian))
    p = np.exp(-(w - w[0]) / (k_B * theta))
    p /= p.sum()
    return DensityOperator((v * p) @ v.conj().T, dims)


def partition_function(hamiltonian, theta: float, k_B: float = 1.0) -> float:
    """Z = Tr exp(-ℋ/(k_B θ))"""
    if theta <= 0:
        raise NonPositiveTemperature("theta", theta)
    w = scipy.linalg.eigvalsh(as_matrix(hamiltonian))
    return float(np.sum(np.exp(-w / (k_B * theta))))


def microcanonical(dims) -> DensityOperator:
    """The maximally mixed state I/N"""
    if not isinstance(dims, HilbertDims):
        dims = HilbertDims(int(dims))
    n = dims.total
    return DensityOperator(np.eye(n, dtype=complex) / n, dims)


def product_state(first: DensityOperator, second: DensityOperator) -> DensityOperator:
    """ϱ¹ ⊗ ϱ² on the bipartite space"""
    return DensityOperator(
        np.kron(first.matrix, second.matrix), HilbertDims(first.dim, second.dim)
    )


def random_density(
    dims, rng: np.random.Generator, rank: Optional[int] = None
) -> DensityOperator:
    """Random density operator drawn from the Ginibre ensemble"""
    if not isinstance(dims, HilbertDims):
        dims = HilbertDims(int(dims))
    n = dims.total
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real, dims)


def log_z_rho(rho, z: float = 1.0, eps: float = RATE_EPS) -> np.ndarray:
    """ln(Zϱ) with the eigenvalue floor ``eps``"""
    m = mat_log_regularized(rho, eps)
    return m + np.log(z) * np.eye(m.shape[0])


def _entropy_of_spectrum(w: np.ndarray, k_B: float) -> float:
    w = np.clip(w, 0.0, None)
    return float(-k_B * np.sum(w * np.log(np.maximum(w, ENTROPY_EPS))))


def shannon_entropy(rho, k_B: float = 1.0) -> float:
    """S = -k_B Tr(ϱ ln ϱ)"""
    return _entropy_of_spectrum(scipy.linalg.eigvalsh(as_matrix(rho)), k_B)


class EntropyBreakdown(NamedTuple):
    """Entropies of a bipartite state"""

    total: float
    first: float
    second: float
    # S¹ + S² - S, never negative
    gap: float


def partial_entropies(rho: DensityOperator, k_B: float = 1.0) -> EntropyBreakdown:
    """Entropy of ϱ, of both reduced states and the subadditivity gap"""
    total = shannon_entropy(rho, k_B)
    first = shannon_entropy(rho.reduced(1), k_B)
    second = shannon_entropy(rho.reduced(2), k_B)
    return EntropyBreakdown(total, first, second, first + second - total)


def klein_gap(rho: DensityOperator) -> float:
    """Tr{ϱ (ln(ϱ¹ ⊗ ϱ²) - ln ϱ)} = S - S¹ - S² in units of k_B.

    This is minus the relative entropy of ϱ to the product of its marginals,
    so it is never positive and vanishes only for product states.
    """
    dims = rho.dims
    log_product = np.kron(
        mat_log_regularized(rho.reduced(1)), np.eye(dims.d2)
    ) + np.kron(np.eye(dims.d1), mat_log_regularized(rho.reduced(2)))
    return real_trace(rho, log_product - mat_log_regularized(rho))


def shannon_entropy_rate(rho, ro, k_B: float = 1.0, z: float = 1.0) -> float:
    """Ṡ = -k_B Tr(ro ln(Zϱ))"""
    return -k_B * real_trace(ro, log_z_rho(rho, z))
