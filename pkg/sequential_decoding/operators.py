"""
Dense complex operator algebra.

Matrices are plain ``numpy.ndarray`` values of shape ``(dim, dim)`` and
dtype ``complex128``. The validators below (``as_hermitian``,
``as_density_matrix``, ``as_projector``) check the spectral invariants of the
corresponding operator class and return a cleaned copy; every other module
works on the arrays they return.
"""
from dataclasses import dataclass
from functools import reduce
import logging

import numpy as np
import scipy.linalg

from .conf import sim_settings
from .exceptions import DimensionMismatch, DimensionOverflow, NonHermitian, NotPSD


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in descending order with matching orthonormal eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {m.shape}.")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matrix has non-finite entries.")
    return m


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermitize(a):
    return 0.5 * (a + dagger(a))


def as_hermitian(a, tol=None):
    tol = sim_settings.TOL_HERM if tol is None else tol
    m = as_matrix(a)
    deviation = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if deviation > tol:
        raise NonHermitian(f"Hermiticity violated by {deviation:.3e} (tolerance {tol:.1e}).")
    return hermitize(m)


def as_density_matrix(a, tol_psd=None, tol_trace=None):
    tol_psd = sim_settings.TOL_PSD if tol_psd is None else tol_psd
    tol_trace = sim_settings.TOL_TRACE if tol_trace is None else tol_trace
    rho = as_hermitian(a)
    lowest = min_eigenvalue(rho)
    if lowest < -tol_psd:
        raise NotPSD(f"Density matrix has eigenvalue {lowest:.3e}.")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol_trace:
        raise NotPSD(f"Density matrix has trace {trace:.12f}.", code='trace')
    return rho


def as_projector(a, tol=None):
    tol = sim_settings.TOL_PROJECTOR if tol is None else tol
    p = as_hermitian(a)
    if np.linalg.norm(p @ p - p) > tol:
        raise NotPSD("Operator is not idempotent.", code='not_projector')
    eigenvalues = scipy.linalg.eigvalsh(p)
    if np.any(np.minimum(np.abs(eigenvalues), np.abs(eigenvalues - 1.0)) > tol):
        raise NotPSD("Projector eigenvalues are not in {0, 1}.", code='not_projector')
    return p


def projector_rank(p):
    return int(round(np.trace(p).real))


def spectral_decompose(h, tol=None):
    h = as_hermitian(h, tol)
    eigenvalues, eigenvectors = scipy.linalg.eigh(h)
    # eigh sorts ascending
    return SpectralDecomposition(eigenvalues[::-1].copy(), eigenvectors[:, ::-1].copy())


def min_eigenvalue(h):
    if h.shape[0] == 0:
        return 0.0
    return float(scipy.linalg.eigvalsh(hermitize(h), subset_by_index=[0, 0])[0])


def _check_dim(dim, max_dim):
    max_dim = sim_settings.MAX_DIM if max_dim is None else max_dim
    if dim > max_dim:
        raise DimensionOverflow(f"Dimension {dim} exceeds the configured maximum {max_dim}.")


def tensor(a, b, max_dim=None):
    """Kronecker product; the left factor carries the slow index."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_dim(a.shape[0] * b.shape[0], max_dim)
    return np.kron(a, b)


def tensor_all(factors, max_dim=None):
    factors = [np.asarray(f, dtype=complex) for f in factors]
    if not factors:
        raise ValueError("Need at least one factor.")
    _check_dim(int(np.prod([f.shape[0] for f in factors])), max_dim)
    return reduce(np.kron, factors)


def tensor_power(a, n, max_dim=None):
    if n < 1:
        raise ValueError(f"Tensor power needs n >= 1, got {n}.")
    a = np.asarray(a, dtype=complex)
    _check_dim(a.shape[0] ** n, max_dim)
    return reduce(np.kron, [a] * n)


def trace_product(a, b):
    """Real part of Tr[a b] without forming the product."""
    return float(np.einsum('ij,ji->', a, b).real)


def psd_margin(a, b):
    """Smallest eigenvalue of b - a; non-negative iff a <= b."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"Cannot compare shapes {a.shape} and {b.shape}.")
    return min_eigenvalue(b - a)


def psd_leq(a, b, tol=None):
    tol = sim_settings.TOL_PSD if tol is None else tol
    return psd_margin(a, b) >= -tol


def pinv_sqrt(h, cutoff=None, tol_psd=None):
    """Inverse square root on the support of h; eigenvalues at or below
    cutoff * largest eigenvalue are treated as zero."""
    cutoff = sim_settings.PINV_CUTOFF if cutoff is None else cutoff
    tol_psd = sim_settings.TOL_PSD if tol_psd is None else tol_psd
    decomposition = spectral_decompose(h)
    eigenvalues = decomposition.eigenvalues
    if eigenvalues.size and eigenvalues[-1] < -tol_psd:
        raise NotPSD(f"pinv_sqrt needs a PSD operator, found eigenvalue {eigenvalues[-1]:.3e}.")
    top = eigenvalues[0] if eigenvalues.size else 0.0
    support = eigenvalues > cutoff * top if top > 0 else np.zeros_like(eigenvalues, dtype=bool)
    vectors = decomposition.eigenvectors[:, support]
    scale = eigenvalues[support] ** -0.5
    logging.debug(f"pinv_sqrt kept {support.sum()} of {eigenvalues.size} eigenvalues")
    return (vectors * scale) @ vectors.conj().T


def support_projector(h, cutoff=None):
    cutoff = sim_settings.PINV_CUTOFF if cutoff is None else cutoff
    decomposition = spectral_decompose(h)
    eigenvalues = decomposition.eigenvalues
    top = eigenvalues[0] if eigenvalues.size else 0.0
    if top <= 0:
        return np.zeros_like(decomposition.eigenvectors)
    vectors = decomposition.eigenvectors[:, eigenvalues > cutoff * top]
    return vectors @ vectors.conj().T


def bar_compress(theta, p):
    """P Θ P."""
    if theta.shape != p.shape:
        raise DimensionMismatch(f"Cannot compress shape {theta.shape} with projector {p.shape}.")
    return hermitize(p @ theta @ p)


def ket_projector(vector):
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
