"""
Typical projectors of the average state and of codeword states.

Membership is decided in the log2 domain on sums of per-site log-eigenvalues,
with both window edges inclusive. Zero eigenvalues have log -inf and are never
typical. Projector matrices are only formed when a caller asks for them, so
mass diagnostics stay cheap at the largest block lengths.
"""
from dataclasses import dataclass
from functools import cached_property, reduce
import itertools
import logging

import numpy as np

from .conf import sim_settings
from .exceptions import BudgetExceeded, ConfigError, DimensionMismatch, DimensionOverflow
from .operators import SpectralDecomposition, psd_margin, spectral_decompose


@dataclass(frozen=True)
class TypicalWindow:
    n: int
    delta: float
    entropy_rate: float
    chi: float

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"Block length must be >= 1, got {self.n}.")
        if not self.delta > 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}.")

    @property
    def average_bounds(self):
        """log2 bounds -n(S + delta), -n(S - delta) on average-state eigenvalue products."""
        return (-self.n * (self.entropy_rate + self.delta), -self.n * (self.entropy_rate - self.delta))

    @property
    def conditional_bounds(self):
        """log2 bounds on codeword eigenvalue products; the same for every codeword."""
        rate = self.entropy_rate - self.chi
        return (-self.n * (rate + self.delta), -self.n * (rate - self.delta))


def typical_window(e, n, delta):
    return TypicalWindow(n=n, delta=delta, entropy_rate=e.entropy, chi=e.chi)


def _check_block(e, n):
    if n < 1:
        raise ConfigError(f"Block length must be >= 1, got {n}.")
    if e.dim ** n > sim_settings.MAX_DIM:
        raise DimensionOverflow(f"Dimension {e.dim}^{n} exceeds the configured maximum {sim_settings.MAX_DIM}.")


def site_logs(decomposition):
    eigenvalues = decomposition.eigenvalues
    logs = np.full(eigenvalues.shape, -np.inf)
    positive = eigenvalues > sim_settings.ZERO_EIGENVALUE
    logs[positive] = np.log2(eigenvalues[positive])
    return logs


def log_spectrum(decompositions):
    """log2 eigenvalue products over all multi-indices, flattened in Kronecker order."""
    return reduce(np.add.outer, [site_logs(d) for d in decompositions]).ravel()


def in_window(logs, bounds):
    lo, hi = bounds
    return (logs >= lo) & (logs <= hi)


def _mass(logs, mask):
    selected = logs[mask]
    return float(np.sum(np.exp2(selected[np.isfinite(selected)])))


def product_columns(decompositions, index_set):
    """Columns |e_{k_1}> (x) ... (x) |e_{k_n}> for each row k of index_set."""
    index_set = np.asarray(index_set, dtype=int).reshape(-1, len(decompositions))
    columns = decompositions[0].eigenvectors[:, index_set[:, 0]]
    for site, decomposition in enumerate(decompositions[1:], start=1):
        factor = decomposition.eigenvectors[:, index_set[:, site]]
        columns = np.einsum('ar,br->abr', columns, factor).reshape(-1, index_set.shape[0])
    return columns


def _index_set(mask, decompositions):
    shape = tuple(d.dim for d in decompositions)
    flat = np.flatnonzero(mask)
    return np.stack(np.unravel_index(flat, shape), axis=1) if flat.size else np.zeros((0, len(shape)), dtype=int)


@dataclass(frozen=True, eq=False)
class AverageTypicalProjector:
    window: TypicalWindow
    site_eigs: SpectralDecomposition
    index_set: np.ndarray
    mass: float

    @property
    def rank(self):
        return self.index_set.shape[0]

    @property
    def empty(self):
        return self.rank == 0

    @property
    def dim(self):
        return self.site_eigs.dim ** self.window.n

    @cached_property
    def matrix(self):
        if self.empty:
            return np.zeros((self.dim, self.dim), dtype=complex)
        columns = product_columns([self.site_eigs] * self.window.n, self.index_set)
        return columns @ columns.conj().T


@dataclass(frozen=True, eq=False)
class ConditionalTypicalProjector:
    codeword: tuple
    site_eigs: tuple
    index_set: np.ndarray
    mass: float

    @property
    def rank(self):
        return self.index_set.shape[0]

    @property
    def dim(self):
        return int(np.prod([d.dim for d in self.site_eigs]))

    @cached_property
    def matrix(self):
        if self.rank == 0:
            return np.zeros((self.dim, self.dim), dtype=complex)
        columns = product_columns(list(self.site_eigs), self.index_set)
        return columns @ columns.conj().T

    @cached_property
    def complement(self):
        return np.eye(self.dim, dtype=complex) - self.matrix


def letter_decompositions(e):
    return tuple(spectral_decompose(s) for s in e.states)


def _check_codeword(e, codeword):
    codeword = tuple(int(j) for j in codeword)
    if not codeword:
        raise ConfigError("A codeword needs at least one letter.")
    if any(j < 0 or j >= e.alphabet_size for j in codeword):
        raise DimensionMismatch(f"Codeword {codeword} uses letters outside the alphabet of size {e.alphabet_size}.")
    return codeword


def average_typical_projector(e, n, delta):
    _check_block(e, n)
    window = typical_window(e, n, delta)
    decomposition = spectral_decompose(e.average)
    logs = log_spectrum([decomposition] * n)
    mask = in_window(logs, window.average_bounds)
    projector = AverageTypicalProjector(
        window=window,
        site_eigs=decomposition,
        index_set=_index_set(mask, [decomposition] * n),
        mass=_mass(logs, mask),
    )
    if projector.empty:
        logging.warning(f"Average typical set is empty for n={n}, delta={delta}")
    return projector


def conditional_typical_projector(e, codeword, delta, decompositions=None):
    codeword = _check_codeword(e, codeword)
    _check_block(e, len(codeword))
    window = typical_window(e, len(codeword), delta)
    decompositions = decompositions or letter_decompositions(e)
    sites = [decompositions[j] for j in codeword]
    logs = log_spectrum(sites)
    mask = in_window(logs, window.conditional_bounds)
    return ConditionalTypicalProjector(
        codeword=codeword,
        site_eigs=tuple(sites),
        index_set=_index_set(mask, sites),
        mass=_mass(logs, mask),
    )


class TypicalProjectorCache:
    """Memoizes P and every P_j for one (ensemble, n, delta)."""

    def __init__(self, ensemble, n, delta):
        _check_block(ensemble, n)
        self.ensemble = ensemble
        self.n = n
        self.delta = delta
        self.window = typical_window(ensemble, n, delta)
        self._conditional = {}

    @cached_property
    def letter_decompositions(self):
        return letter_decompositions(self.ensemble)

    @cached_property
    def average(self):
        return average_typical_projector(self.ensemble, self.n, self.delta)

    @property
    def dim(self):
        return self.ensemble.dim ** self.n

    def conditional(self, codeword):
        key = tuple(int(j) for j in codeword)
        if len(key) != self.n:
            raise DimensionMismatch(f"Codeword {key} has length {len(key)}, expected {self.n}.")
        if key not in self._conditional:
            self._conditional[key] = conditional_typical_projector(
                self.ensemble, key, self.delta, self.letter_decompositions
            )
        return self._conditional[key]


def atypical_mass_average(e, n, delta):
    """Tr[rho^{(x)n} (I - P)], summed directly over the atypical eigenvalue products."""
    _check_block(e, n)
    window = typical_window(e, n, delta)
    logs = log_spectrum([spectral_decompose(e.average)] * n)
    return min(max(_mass(logs, ~in_window(logs, window.average_bounds)), 0.0), 1.0)


@dataclass(frozen=True)
class MassEstimate:
    value: float
    stderr: float = 0.0
    samples: int = 0


def _conditional_atypical(e, codeword, bounds, decompositions):
    logs = log_spectrum([decompositions[j] for j in codeword])
    return _mass(logs, ~in_window(logs, bounds))


def atypical_mass_conditional(e, n, delta, mode='exact', samples=1000, rng=None):
    """Sum over codewords of p_j Tr[rho_j (I - P_j)], exactly or by sampling codewords."""
    _check_block(e, n)
    window = typical_window(e, n, delta)
    decompositions = letter_decompositions(e)
    bounds = window.conditional_bounds

    if mode == 'exact':
        total = e.alphabet_size ** n
        if total > sim_settings.ENUMERATION_BUDGET:
            raise BudgetExceeded(
                f"Exact conditional mass needs {total} codewords, budget is {sim_settings.ENUMERATION_BUDGET}. "
                f"Use Monte Carlo mode or a smaller n."
            )
        # the mass depends only on the letter counts of the codeword
        by_type = {}
        value = 0.0
        for codeword in itertools.product(range(e.alphabet_size), repeat=n):
            key = tuple(sorted(codeword))
            if key not in by_type:
                by_type[key] = _conditional_atypical(e, key, bounds, decompositions)
            value += float(np.prod(e.probs[list(codeword)])) * by_type[key]
        return MassEstimate(value=min(max(value, 0.0), 1.0), samples=total)

    if rng is None:
        raise ConfigError("Monte Carlo mode needs an rng.")
    draws = rng.choice(e.alphabet_size, size=(samples, n), p=e.probs)
    values = np.array([_conditional_atypical(e, tuple(row), bounds, decompositions) for row in draws])
    stderr = float(values.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return MassEstimate(value=float(values.mean()), stderr=stderr, samples=samples)


@dataclass(frozen=True)
class SandwichReport:
    lower_margin: float
    upper_margin: float
    holds: bool


def _apply_power(factor, columns, n):
    """factor^{(x)n} applied to each column without forming the tensor power."""
    d = factor.shape[0]
    block = columns.reshape((d,) * n + (-1,))
    for axis in range(n):
        block = np.moveaxis(np.tensordot(factor, block, axes=([1], [axis])), 0, axis)
    return block.reshape(d ** n, -1)


def sandwich_check(e, n, delta, projector=None, tol=None):
    """Check P 2^{-n(S+delta)} <= P rho^{(x)n} P <= P 2^{-n(S-delta)} on the range of P.

    Margins are the smallest eigenvalues of the two differences restricted to
    range(P); an empty projector holds trivially with zero margins.
    """
    tol = sim_settings.TOL_PSD if tol is None else tol
    projector = projector or average_typical_projector(e, n, delta)
    if projector.empty:
        return SandwichReport(lower_margin=0.0, upper_margin=0.0, holds=True)
    columns = product_columns([projector.site_eigs] * n, projector.index_set)
    compressed = columns.conj().T @ _apply_power(e.average, columns, n)
    identity = np.eye(projector.rank)
    lo, hi = projector.window.average_bounds
    lower = psd_margin(np.exp2(lo) * identity, compressed)
    upper = psd_margin(compressed, np.exp2(hi) * identity)
    return SandwichReport(lower_margin=lower, upper_margin=upper, holds=lower >= -tol and upper >= -tol)


def first_n_below(values_by_n, epsilon):
    """Smallest tested n whose value is below epsilon, or None."""
    for n in sorted(values_by_n):
        if values_by_n[n] < epsilon:
            return n
    return None
