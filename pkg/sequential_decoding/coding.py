"""
Random codebooks drawn from the product distribution of an ensemble.

Codewords are tuples of letters; a ``Codebook`` keeps them in draw order,
duplicates included, because the sequential decoder tests them in exactly that
order.
"""
from dataclasses import dataclass
import itertools
import logging

import numpy as np

from .conf import sim_settings
from .exceptions import BudgetExceeded, ConfigError
from .operators import tensor_all


def make_rng(seed, task=None):
    """Generator for one task; streams for different task indices are independent."""
    if task is None:
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(task),)))


def _check_probs(probs):
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if probs.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-10:
        raise ConfigError(f"Invalid letter distribution {probs.tolist()}.")
    return probs


@dataclass(frozen=True)
class Codebook:
    n: int
    entries: tuple

    def __post_init__(self):
        entries = tuple(tuple(int(j) for j in codeword) for codeword in self.entries)
        if not entries:
            raise ConfigError("A codebook needs at least one codeword.")
        if any(len(codeword) != self.n for codeword in entries):
            raise ConfigError(f"Every codeword must have length {self.n}.")
        if any(j < 0 for codeword in entries for j in codeword):
            raise ConfigError("Codeword letters must be non-negative.")
        object.__setattr__(self, 'entries', entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, position):
        return self.entries[position]

    @property
    def size(self):
        return len(self.entries)

    def check_alphabet(self, alphabet_size):
        if any(j >= alphabet_size for codeword in self.entries for j in codeword):
            raise ConfigError(f"Codebook uses letters outside the alphabet of size {alphabet_size}.")
        return self

    def to_list(self):
        return [list(codeword) for codeword in self.entries]

    @classmethod
    def from_list(cls, entries):
        entries = [tuple(codeword) for codeword in entries]
        if not entries:
            raise ConfigError("A codebook needs at least one codeword.")
        return cls(n=len(entries[0]), entries=tuple(entries))


@dataclass(frozen=True)
class CodeWeight:
    log_prob: float

    @property
    def probability(self):
        return float(np.exp2(self.log_prob))


def code_weight(probs, code):
    probs = _check_probs(probs)
    letters = np.array(code.entries, dtype=int).ravel()
    with np.errstate(divide='ignore'):
        return CodeWeight(log_prob=float(np.sum(np.log2(probs[letters]))))


def sample_codeword(probs, n, rng):
    probs = _check_probs(probs)
    return tuple(int(j) for j in rng.choice(probs.size, size=n, p=probs))


def sample_code(probs, n, N, rng):
    probs = _check_probs(probs)
    if N < 1:
        raise ConfigError(f"A code needs N >= 1 codewords, got {N}.")
    draws = rng.choice(probs.size, size=(N, n), p=probs)
    return Codebook(n=n, entries=tuple(tuple(int(j) for j in row) for row in draws))


def enumerate_codes(probs, n, N, budget=None):
    """Yield every ordered code with its exact probability."""
    probs = _check_probs(probs)
    budget = sim_settings.ENUMERATION_BUDGET if budget is None else budget
    total = probs.size ** (n * N)
    if total > budget:
        raise BudgetExceeded(f"Enumerating {total} codes exceeds the budget of {budget}.")
    logging.debug(f"Enumerating {total} codes for n={n}, N={N}")
    codewords = list(itertools.product(range(probs.size), repeat=n))
    for entries in itertools.product(codewords, repeat=N):
        code = Codebook(n=n, entries=entries)
        yield code, code_weight(probs, code)


def codeword_state(e, codeword):
    return tensor_all([e.states[j] for j in codeword])


def codeword_probability(e, codeword):
    return float(np.prod(e.probs[list(codeword)]))


def codewords_for_rate(rate, n):
    """N = round(2^{nR}), at least one codeword."""
    return max(1, round(2.0 ** (n * rate)))
