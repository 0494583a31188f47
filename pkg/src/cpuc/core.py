"""Dense Hermitian linear algebra and entropies of finite-dimensional states.

All logarithms are natural, so every information quantity is in nats.
Relative entropies may be ``math.inf``; finite values are never negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
# eigenvalues below this fraction of the largest one count as zero
SUPPORT_RTOL = 1e-12
# admissible weight of rho on the kernel of sigma
SUPPORT_WEIGHT_TOL = 1e-9
EQUAL_TOL = 1e-12


class ValidationError(ValueError):
    """Input violates a structural requirement (shape, hermiticity, trace...)."""


class DomainError(ValueError):
    """Argument lies outside the domain where the quantity is defined."""


class PreconditionError(ValueError):
    """Operation called on an object lacking a required property."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed (truncation leakage, non-convergence)."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a) -> float:
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        return math.inf
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state.

    The input is symmetrized as (A + A^dagger)/2 after the hermiticity
    check, and the stored array is read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValidationError(f"density matrix must be square, got {m.shape}")
        dev = hermiticity_defect(m)
        if dev > HERMITIAN_TOL:
            raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3g})")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        lmin = float(np.linalg.eigvalsh(m)[0])
        if lmin < -PSD_TOL:
            raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {lmin:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, dim: int, k: int) -> "DensityMatrix":
        m = np.zeros((dim, dim), dtype=complex)
        m[k, k] = 1.0
        return cls(m)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


StateLike = Union[DensityMatrix, np.ndarray]


def as_density(rho: StateLike) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in descending order with eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decompose(h, tol: float = HERMITIAN_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Uses LAPACK's Hermitian driver (tridiagonal reduction), so the spectrum
    is real by construction.

    Raises
    ------
    ValidationError
        If ``h`` is not square or not Hermitian within ``tol``.
    """
    m = _as_matrix(h.matrix if isinstance(h, DensityMatrix) else h)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"matrix must be square, got {m.shape}")
    dev = hermiticity_defect(m)
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def _support_mask(eigenvalues: np.ndarray, rtol: float = SUPPORT_RTOL) -> np.ndarray:
    top = max(float(np.max(eigenvalues, initial=0.0)), 0.0)
    return eigenvalues > rtol * top


def entropy_of_spectrum(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[_support_mask(p)]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: StateLike) -> float:
    """S(rho) = -Tr rho ln rho in nats, with 0 ln 0 = 0."""
    rho = as_density(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.matrix))


def _check_same_dim(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dim != sigma.dim:
        raise ValidationError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")


def kernel_weight(rho: StateLike, sigma: StateLike) -> float:
    """Tr(P rho) where P projects onto the numerical kernel of sigma."""
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same_dim(rho, sigma)
    dec = spectral_decompose(sigma.matrix)
    ker = dec.eigenvectors[:, ~_support_mask(dec.eigenvalues)]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(ker.conj().T @ rho.matrix @ ker)))


def support_contained(rho: StateLike, sigma: StateLike, tol: float = SUPPORT_WEIGHT_TOL) -> bool:
    """True when supp(rho) lies inside supp(sigma) up to ``tol`` kernel weight."""
    return kernel_weight(rho, sigma) <= tol


def states_equal(rho: StateLike, sigma: StateLike, tol: float = EQUAL_TOL) -> bool:
    a, b = np.asarray(rho), np.asarray(sigma)
    return a.shape == b.shape and float(np.max(np.abs(a - b))) <= tol


def relative_entropy(
    rho: StateLike, sigma: StateLike, tol: float = SUPPORT_WEIGHT_TOL, support_rtol: float = SUPPORT_RTOL
) -> float:
    """Quantum relative entropy D(rho||sigma) = Tr rho (ln rho - ln sigma).

    Evaluated in the eigenbasis of ``sigma``.  Returns ``math.inf`` exactly
    when :func:`support_contained` fails, and ``0.0`` when the two states
    coincide within :data:`EQUAL_TOL`.  ``support_rtol`` may be lowered
    when the spectrum of ``sigma`` is known to full relative precision
    (e.g. an exactly diagonal sigma).
    """
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same_dim(rho, sigma)
    if states_equal(rho, sigma):
        return 0.0
    dec = spectral_decompose(sigma.matrix)
    mask = _support_mask(dec.eigenvalues, support_rtol)
    v = dec.eigenvectors
    diag = np.real(np.einsum("ij,jk,ki->i", v.conj().T, rho.matrix, v))
    if float(np.sum(diag[~mask])) > tol:
        return math.inf
    cross = float(np.sum(diag[mask] * np.log(dec.eigenvalues[mask])))
    d = -von_neumann_entropy(rho) - cross
    return max(d, 0.0)
