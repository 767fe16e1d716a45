"""
Quantum sources and memoryless channels.

An ``Ensemble`` pairs letter probabilities with the output states of the
channel; its average state, entropies and Holevo information are computed
once at construction. Entropies are in bits.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np
import scipy.linalg
from scipy.special import entr

from .conf import sim_settings
from .exceptions import ConfigError, DimensionMismatch, InvariantViolation, UnknownPreset
from .models import Preset
from .operators import as_density_matrix, as_matrix, dagger, hermitize, ket_projector

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def von_neumann_entropy(rho):
    eigenvalues = scipy.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    eigenvalues = eigenvalues[eigenvalues > sim_settings.ZERO_EIGENVALUE]
    return float(np.sum(entr(eigenvalues)) / math.log(2))


@dataclass(frozen=True, eq=False)
class Ensemble:
    probs: np.ndarray
    states: tuple
    average: np.ndarray = field(init=False, repr=False)
    entropy: float = field(init=False)
    letter_entropies: np.ndarray = field(init=False, repr=False)
    chi: float = field(init=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if probs.size == 0 or probs.size != len(self.states):
            raise ConfigError(f"Got {probs.size} probabilities for {len(self.states)} states.")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
            raise ConfigError(f"Probabilities must be non-negative and sum to 1, got {probs.tolist()}.")
        states = tuple(as_density_matrix(s) for s in self.states)
        if len({s.shape for s in states}) != 1:
            raise DimensionMismatch("All ensemble states must share one dimension.")

        average = hermitize(np.tensordot(probs, np.stack(states), axes=1))
        entropy = von_neumann_entropy(average)
        letter_entropies = np.array([von_neumann_entropy(s) for s in states])
        chi = entropy - float(probs @ letter_entropies)
        if chi < -1e-9 or chi > entropy + 1e-9:
            raise InvariantViolation(f"Holevo information {chi} outside [0, S(rho)={entropy}].")

        object.__setattr__(self, 'probs', probs)
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'average', average)
        object.__setattr__(self, 'entropy', entropy)
        object.__setattr__(self, 'letter_entropies', letter_entropies)
        object.__setattr__(self, 'chi', max(chi, 0.0))

    @property
    def alphabet_size(self):
        return self.probs.size

    @property
    def dim(self):
        return self.states[0].shape[0]

    def is_commuting(self, tol=1e-12):
        """True when every state is diagonal in the computational basis."""
        return all(np.max(np.abs(s - np.diag(np.diag(s)))) <= tol for s in self.states)


def average_state(e):
    return e.average


def holevo_chi(e):
    return e.chi


@dataclass(frozen=True, eq=False)
class Channel:
    kraus: tuple

    def __post_init__(self):
        kraus = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not kraus or len({k.shape for k in kraus}) != 1:
            raise DimensionMismatch("Kraus operators must be non-empty and share one shape.")
        completeness = sum(dagger(k) @ k for k in kraus)
        deviation = np.linalg.norm(completeness - np.eye(kraus[0].shape[1]))
        if deviation > 1e-9:
            raise InvariantViolation(f"Kraus family is not trace preserving (deviation {deviation:.3e}).")
        object.__setattr__(self, 'kraus', kraus)

    @property
    def dim_in(self):
        return self.kraus[0].shape[1]

    @property
    def dim_out(self):
        return self.kraus[0].shape[0]

    def __call__(self, state):
        return hermitize(sum(k @ state @ dagger(k) for k in self.kraus))


def identity_channel(dim=2):
    return Channel((np.eye(dim),))


def depolarizing_channel(strength):
    """rho -> (1 - strength) rho + strength I/2 on a qubit."""
    if not 0.0 <= strength <= 1.0:
        raise ConfigError(f"Depolarizing strength must lie in [0, 1], got {strength}.")
    return Channel((
        math.sqrt(1.0 - 0.75 * strength) * np.eye(2),
        math.sqrt(strength / 4.0) * PAULI_X,
        math.sqrt(strength / 4.0) * PAULI_Y,
        math.sqrt(strength / 4.0) * PAULI_Z,
    ))


def amplitude_damping_channel(gamma):
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"Damping rate must lie in [0, 1], got {gamma}.")
    return Channel((
        np.array([[1, 0], [0, math.sqrt(1.0 - gamma)]]),
        np.array([[0, math.sqrt(gamma)], [0, 0]]),
    ))


def apply_channel(t, ensemble):
    if t.dim_in != ensemble.dim:
        raise DimensionMismatch(f"Channel input dimension {t.dim_in} does not match states of dimension {ensemble.dim}.")
    return Ensemble(ensemble.probs.copy(), tuple(t(s) for s in ensemble.states))


def _qubit_ket(theta, phase=0.0):
    return np.array([math.cos(theta), np.exp(1j * phase) * math.sin(theta)])


def _params(name, params, defaults):
    params = list(params or [])
    if len(params) > len(defaults):
        raise ConfigError(f"Preset '{name}' takes at most {len(defaults)} parameters, got {len(params)}.")
    return params + list(defaults[len(params):])


def preset_ensemble(name, params=None):
    """Build a named qubit ensemble.

    two-pure-theta(theta): |0> and cos(theta)|0> + sin(theta)|1>, p = 1/2 each (theta defaults to pi/4)
    orthogonal-pair: |0> and |1>, p = 1/2 each
    uniform-qubit-trine: three real states 120 degrees apart on the Bloch circle, p = 1/3 each
    depolarized-pair(theta, strength): two-pure-theta(theta) through depolarizing(strength)
    identical-mixed(q): two copies of diag(q, 1 - q)
    diagonal-pair(a, b): diag(a, 1 - a) and diag(b, 1 - b), p = 1/2 each
    """
    if name not in Preset.values:
        raise UnknownPreset(f"Unknown ensemble preset '{name}'. Known presets: {', '.join(Preset.values)}.")
    logging.debug(f"Building preset ensemble {name} with params {params}")

    if name == Preset.TWO_PURE_THETA:
        (theta,) = _params(name, params, [math.pi / 4])
        states = (ket_projector(_qubit_ket(0.0)), ket_projector(_qubit_ket(theta)))
        return Ensemble(np.array([0.5, 0.5]), states)

    if name == Preset.ORTHOGONAL_PAIR:
        _params(name, params, [])
        return Ensemble(np.array([0.5, 0.5]), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))

    if name == Preset.UNIFORM_QUBIT_TRINE:
        _params(name, params, [])
        # Bloch angles 0, 2pi/3, 4pi/3 are ket angles 0, pi/3, 2pi/3
        states = tuple(ket_projector(_qubit_ket(k * math.pi / 3)) for k in range(3))
        return Ensemble(np.full(3, 1.0 / 3.0), states)

    if name == Preset.DEPOLARIZED_PAIR:
        theta, strength = _params(name, params, [math.pi / 4, 0.3])
        return apply_channel(depolarizing_channel(strength), preset_ensemble(Preset.TWO_PURE_THETA, [theta]))

    if name == Preset.IDENTICAL_MIXED:
        (q,) = _params(name, params, [0.8])
        state = np.diag([q, 1.0 - q])
        return Ensemble(np.array([0.5, 0.5]), (state, state.copy()))

    # Preset.DIAGONAL_PAIR
    a, b = _params(name, params, [0.9, 0.2])
    return Ensemble(np.array([0.5, 0.5]), (np.diag([a, 1.0 - a]), np.diag([b, 1.0 - b])))


def ensemble_from_document(data):
    """Inverse of ensemble_to_document, for already-validated data."""
    states = []
    for matrix in data['states']:
        entries = np.asarray(matrix, dtype=float)
        states.append(as_matrix(entries[..., 0] + 1j * entries[..., 1]))
    return Ensemble(np.asarray(data['probs'], dtype=float), tuple(states))


def ensemble_to_document(e):
    return {
        'version': 1,
        'dim': e.dim,
        'probs': e.probs.tolist(),
        'states': [np.stack([s.real, s.imag], axis=-1).tolist() for s in e.states],
    }
