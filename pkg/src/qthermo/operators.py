# SPDX-License-Identifier: MIT
"""Linear algebra on finite-dimensional Hilbert spaces.

A bipartite space ℋ = ℋ¹ ⊗ ℋ² uses the row-major composite basis: the
basis vector ``|k⟩⊗|l⟩`` sits at index ``k * d2 + l``. Every operator in this
module is a dense ``numpy`` array; :class:`HermitianOp` wraps one and keeps it
Hermitian.

The operator basis used for constrained solves is the generalized Gell-Mann
basis, normalized so that ``Tr(B_i B_j) = δ_ij``. Only coordinates are ever
materialized, never the basis itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from qthermo.errors import DimensionMismatch, HermiticityError

# Eigenvalue floor used when the logarithm only feeds an entropy
ENTROPY_EPS = 1e-300
# Eigenvalue floor used when the logarithm feeds a rate formula
RATE_EPS = 1e-12
# Largest imaginary part tolerated on the trace of Hermitian products
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class HilbertDims:
    """Dimensions of a bipartite Hilbert space.

    Attributes:
        d1: dimension of sub-system #1
        d2: dimension of sub-system #2, ``1`` for an undecomposed system
    """

    d1: int
    d2: int = 1

    def __post_init__(self):
        for name in ("d1", "d2"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DimensionMismatch(name, "a positive integer", value)

    @property
    def total(self) -> int:
        """Dimension of the composite space"""
        return self.d1 * self.d2

    @property
    def bipartite(self) -> bool:
        """True when both factors are non-trivial"""
        return self.d1 > 1 and self.d2 > 1

    def side(self, which: int) -> int:
        """Dimension of sub-system ``which`` (1 or 2)"""
        if which == 1:
            return self.d1
        if which == 2:
            return self.d2
        raise ValueError(f"sub-system must be 1 or 2, got {which}")


def as_matrix(a) -> np.ndarray:
    """Return the dense complex matrix behind an operator-like object"""
    m = getattr(a, "matrix", a)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("operator", "a square matrix", m.shape)
    return m


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """A Hermitian operator.

    The input is symmetrized to ``(A + A†)/2`` on construction; the largest
    entry of ``A - A†`` seen at that point is kept in ``deviation``.
    """

    entries: np.ndarray
    deviation: float = field(default=0.0, compare=False)

    def __post_init__(self):
        m = as_matrix(self.entries)
        deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "deviation", max(deviation, self.deviation))

    @classmethod
    def zeros(cls, dim: int) -> HermitianOp:
        return cls(np.zeros((dim, dim), dtype=complex))

    @classmethod
    def identity(cls, dim: int) -> HermitianOp:
        return cls(np.eye(dim, dtype=complex))

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other):
        return HermitianOp(self.entries + as_matrix(other))

    def __sub__(self, other):
        return HermitianOp(self.entries - as_matrix(other))

    def __mul__(self, scalar):
        return HermitianOp(self.entries * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return HermitianOp(-self.entries)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors"""
        return scipy.linalg.eigh(self.entries)


def _check_dim(what, a, expected) -> None:
    if a.shape[0] != expected:
        raise DimensionMismatch(what, expected, a.shape[0])


def embed_left(a, dims: HilbertDims) -> np.ndarray:
    """Return A ⊗ I₂"""
    m = as_matrix(a)
    _check_dim("left factor", m, dims.d1)
    return np.kron(m, np.eye(dims.d2))


def embed_right(b, dims: HilbertDims) -> np.ndarray:
    """Return I₁ ⊗ B"""
    m = as_matrix(b)
    _check_dim("right factor", m, dims.d2)
    return np.kron(np.eye(dims.d1), m)


def embed(a, dims: HilbertDims, side: int) -> np.ndarray:
    """Embed a local operator of sub-system ``side`` into the composite space"""
    if side == 1:
        return embed_left(a, dims)
    if side == 2:
        return embed_right(a, dims)
    raise ValueError(f"sub-system must be 1 or 2, got {side}")


def partial_trace(a, dims: HilbertDims, trace_out: int = 2) -> np.ndarray:
    """Partial trace of a composite operator.

    Args:
        a: operator on the composite space, dimension ``dims.total``
        dims: bipartite dimensions
        trace_out: the sub-system to trace out, 1 or 2

    Returns:
        The reduced operator on the remaining sub-system.

    Raises:
        DimensionMismatch: if ``a`` does not live on the composite space
    """
    m = as_matrix(a)
    _check_dim("composite operator", m, dims.total)
    t = m.reshape(dims.d1, dims.d2, dims.d1, dims.d2)
    if trace_out == 2:
        return np.trace(t, axis1=1, axis2=3)
    if trace_out == 1:
        return np.trace(t, axis1=0, axis2=2)
    raise ValueError(f"sub-system must be 1 or 2, got {trace_out}")


def commutator(a, b) -> np.ndarray:
    """[A, B] = AB - BA"""
    ma = as_matrix(a)
    mb = as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch("commutator", ma.shape[0], mb.shape[0])
    return ma @ mb - mb @ ma


def mat_log_regularized(a, eps: float = ENTROPY_EPS) -> np.ndarray:
    """Logarithm of a positive semi-definite Hermitian operator.

    Eigenvalues below ``eps`` are raised to ``eps`` before taking the log, so
    rank deficient states yield a finite (large negative) logarithm.
    """
    w, v = scipy.linalg.eigh(as_matrix(a))
    return (v * np.log(np.maximum(w, eps))) @ v.conj().T


def mat_exp_hermitian(a) -> np.ndarray:
    """Exponential of a Hermitian operator through its eigendecomposition"""
    w, v = scipy.linalg.eigh(as_matrix(a))
    return (v * np.exp(w)) @ v.conj().T


def frobenius(a) -> float:
    """Frobenius norm"""
    return float(np.linalg.norm(as_matrix(a), "fro"))


def real_trace(a, b=None, tol: float = IMAG_TOL) -> float:
    """Real part of Tr(AB) for Hermitian A and B.

    Raises:
        HermiticityError: if the imaginary part exceeds ``tol`` relative to
            max(1, |Tr(AB)|)
    """
    ma = as_matrix(a)
    if b is None:
        t = np.trace(ma)
    else:
        mb = as_matrix(b)
        if ma.shape != mb.shape:
            raise DimensionMismatch("trace product", ma.shape[0], mb.shape[0])
        t = np.einsum("ij,ji->", ma, mb)
    if abs(t.imag) > tol * max(1.0, abs(t.real)):
        raise HermiticityError(f"imaginary part {t.imag:.3e} on a Hermitian trace")
    return float(t.real)


def diagonal_transform(dim: int) -> np.ndarray:
    """Rows are the traceless diagonal members of the basis"""
    m = np.zeros((dim - 1, dim))
    for l in range(1, dim):
        norm = np.sqrt(l * (l + 1))
        m[l - 1, :l] = 1.0 / norm
        m[l - 1, l] = -l / norm
    return m


def traceless_coordinates(a) -> np.ndarray:
    """Coordinates ``Tr(A B_i)`` of a Hermitian operator in the basis.

    The order is: symmetric off-diagonal members (upper triangle, row-major),
    antisymmetric off-diagonal members (same order), then the ``d-1`` diagonal
    members. The identity component of ``A`` is dropped.
    """
    m = as_matrix(a)
    dim = m.shape[0]
    rows, cols = np.triu_indices(dim, k=1)
    upper = m[rows, cols]
    return np.concatenate(
        [
            np.sqrt(2.0) * upper.real,
            -np.sqrt(2.0) * upper.imag,
            diagonal_transform(dim) @ np.diag(m).real,
        ]
    )


def from_traceless_coordinates(c, dim: int) -> np.ndarray:
    """Hermitian traceless operator with the given basis coordinates"""
    c = np.asarray(c, dtype=float)
    if c.shape != (dim * dim - 1,):
        raise DimensionMismatch("coordinates", dim * dim - 1, c.shape[0])
    n_off = dim * (dim - 1) // 2
    rows, cols = np.triu_indices(dim, k=1)
    sym = c[:n_off]
    anti = c[n_off : 2 * n_off]
    out = np.zeros((dim, dim), dtype=complex)
    out[rows, cols] = (sym - 1j * anti) / np.sqrt(2.0)
    out[cols, rows] = (sym + 1j * anti) / np.sqrt(2.0)
    out[np.diag_indices(dim)] = diagonal_transform(dim).T @ c[2 * n_off :]
    return out


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with spectral radius ``scale``"""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + g.conj().T) / 2
    radius = np.max(np.abs(scipy.linalg.eigvalsh(h)))
    if radius == 0:
        return h
    return h * (scale / radius)
