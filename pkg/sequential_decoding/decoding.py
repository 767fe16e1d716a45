"""
Decoders for a fixed codebook.

``build_sequential_povm`` gives the effects of the sequential typical-subspace
decoder: codewords are tested in codebook order, each test preceded by a
projection onto the average typical subspace. ``build_pgm_povm`` gives the
pretty good measurement on the same typical subspaces. ``simulate_trajectory``
runs the sequential protocol one measurement at a time with state collapse,
so its outcome frequencies can be compared with the effects.

Outcome 0 is the residual effect ("nothing declared"); outcome u >= 1 declares
the u-th codebook entry.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from .coding import codeword_state
from .conf import sim_settings
from .exceptions import ConfigError, InvariantViolation, NumericalUnderflow
from .models import Decoder
from .operators import dagger, hermitize, min_eigenvalue, pinv_sqrt, trace_product
from .signals import trajectory_resampled
from .typicality import TypicalProjectorCache, typical_window


@dataclass(frozen=True, eq=False)
class DecodingPOVM:
    elements: tuple
    residual: np.ndarray
    typical_empty: bool = False

    @property
    def size(self):
        return len(self.elements)

    @property
    def effects(self):
        """Residual first, then E_1..E_N, matching outcome indices."""
        return (self.residual,) + tuple(self.elements)

    def completeness_error(self):
        total = sum(self.effects)
        return float(np.linalg.norm(total - np.eye(total.shape[0])))

    def is_complete(self, tol=None):
        tol = sim_settings.TOL_COMPLETENESS if tol is None else tol
        return self.completeness_error() <= tol

    def min_eigenvalue(self):
        return min(min_eigenvalue(e) for e in self.effects)

    def probabilities(self, state):
        """Born-rule outcome distribution, indexed 0..N."""
        return np.array([trace_product(e, state) for e in self.effects])


@dataclass(frozen=True, eq=False)
class SequentialPOVM(DecodingPOVM):
    chain: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class PGMPOVM(DecodingPOVM):
    pass


def _cache_for(e, code, delta, cache):
    code.check_alphabet(e.alphabet_size)
    if cache is None:
        return TypicalProjectorCache(e, code.n, delta)
    if cache.n != code.n or cache.ensemble is not e or cache.delta != delta:
        raise ConfigError("Projector cache was built for a different ensemble, block length or delta.")
    return cache


def _residual(elements, dim, tol_psd):
    residual = hermitize(np.eye(dim) - sum(elements)) if elements else np.eye(dim, dtype=complex)
    lowest = min_eigenvalue(residual)
    if lowest < -tol_psd:
        raise InvariantViolation(f"Residual effect has eigenvalue {lowest:.3e}.", code='residual_not_psd')
    return residual


def _checked(povm):
    if not povm.is_complete():
        raise InvariantViolation(
            f"Effects miss the identity by {povm.completeness_error():.3e} in Frobenius norm.", code='incomplete_povm',
        )
    return povm


def build_sequential_povm(e, code, delta, cache=None, tol_psd=None):
    """E_u = M_u^dag M_u with M_u = P_{j_u} P Qbar_{j_{u-1}} ... Qbar_{j_1}."""
    tol_psd = sim_settings.TOL_PSD if tol_psd is None else tol_psd
    cache = _cache_for(e, code, delta, cache)
    p = cache.average.matrix
    # running product R_u = Qbar_{j_u} R_{u-1}, starting from P
    running = p
    elements = []
    chain = []
    for codeword in code:
        p_j = cache.conditional(codeword).matrix
        m = p_j @ running
        chain.append(m)
        elements.append(hermitize(dagger(m) @ m))
        running = p @ (running - p_j @ running)
    return _checked(SequentialPOVM(
        elements=tuple(elements),
        residual=_residual(elements, cache.dim, tol_psd),
        typical_empty=cache.average.empty,
        chain=tuple(chain),
    ))


def build_pgm_povm(e, code, delta, cache=None, tol_psd=None):
    """X_u = S^{-1/2} P P_{j_u} P S^{-1/2} with S the sum over code entries, duplicates included."""
    tol_psd = sim_settings.TOL_PSD if tol_psd is None else tol_psd
    cache = _cache_for(e, code, delta, cache)
    p = cache.average.matrix
    compressed = [hermitize(p @ cache.conditional(codeword).matrix @ p) for codeword in code]
    root = pinv_sqrt(sum(compressed))
    elements = [hermitize(root @ c @ root) for c in compressed]
    return _checked(PGMPOVM(
        elements=tuple(elements),
        residual=_residual(elements, cache.dim, tol_psd),
        typical_empty=cache.average.empty,
    ))


def build_povm(e, code, delta, decoder=Decoder.SEQUENTIAL, cache=None):
    if decoder == Decoder.SEQUENTIAL:
        return build_sequential_povm(e, code, delta, cache)
    if decoder == Decoder.PGM:
        return build_pgm_povm(e, code, delta, cache)
    raise ConfigError(f"Unknown decoder '{decoder}'.")


def code_error_probability(povm, e, code):
    success = sum(trace_product(effect, codeword_state(e, codeword)) for effect, codeword in zip(povm.elements, code))
    return min(max(1.0 - success / code.size, 0.0), 1.0)


def decode_confusion_matrix(povm, e, code):
    """Entry (u, v) is Tr[E_u rho_{j_v}], with rows 0..N and columns for the N sent positions."""
    states = [codeword_state(e, codeword) for codeword in code]
    return np.array([[trace_product(effect, state) for state in states] for effect in povm.effects])


@dataclass(frozen=True)
class TrajectoryOutcome:
    declared: int | None
    record: tuple

    @property
    def outcome(self):
        return 0 if self.declared is None else self.declared


def _collapse(state, projector, probability, threshold, sent, step):
    if probability < threshold:
        exc = NumericalUnderflow(f"Collapse denominator {probability:.3e} at step {step} for sent={sent}.")
        exc.step = step
        exc.denominator = probability
        raise exc
    return hermitize(projector @ state @ projector) / probability


def simulate_trajectory(e, code, sent, delta, rng, cache=None, threshold=None):
    """One run of the two-step sequential measurement on rho_{j_sent}.

    Each round measures {P, I - P} and then {P_{j_i}, I - P_{j_i}}. An I - P
    outcome ends the run with nothing declared.
    """
    threshold = sim_settings.UNDERFLOW_THRESHOLD if threshold is None else threshold
    cache = _cache_for(e, code, delta, cache)
    if not 1 <= sent <= code.size:
        raise ConfigError(f"sent must be in 1..{code.size}, got {sent}.")

    p = cache.average.matrix
    identity = np.eye(cache.dim, dtype=complex)
    state = codeword_state(e, code[sent - 1])
    record = []
    for step, codeword in enumerate(code, start=1):
        p_typ = min(max(trace_product(p, state), 0.0), 1.0)
        if rng.random() >= p_typ:
            record.append((0, None))
            return TrajectoryOutcome(declared=None, record=tuple(record))
        state = _collapse(state, p, p_typ, threshold, sent, step)

        p_j = cache.conditional(codeword).matrix
        p_yes = min(max(trace_product(p_j, state), 0.0), 1.0)
        if rng.random() < p_yes:
            record.append((1, 1))
            return TrajectoryOutcome(declared=step, record=tuple(record))
        record.append((1, 0))
        state = _collapse(state, identity - p_j, 1.0 - p_yes, threshold, sent, step)
    return TrajectoryOutcome(declared=None, record=tuple(record))


@dataclass(frozen=True, eq=False)
class TrajectoryHistogram:
    sent: int
    counts: np.ndarray
    trials: int
    resamples: int = 0

    @property
    def frequencies(self):
        return self.counts / self.trials


def run_trajectories(e, code, sent, delta, trials, rng, decoder=Decoder.SEQUENTIAL, cache=None, max_resamples=None):
    """Histogram of outcomes 0..N over ``trials`` independent runs.

    Sequential runs are simulated step by step; a run whose collapse underflows
    is discarded, counted and redrawn. PGM runs sample the single measurement
    directly from its Born probabilities.
    """
    cache = _cache_for(e, code, delta, cache)
    if not 1 <= sent <= code.size:
        raise ConfigError(f"sent must be in 1..{code.size}, got {sent}.")
    counts = np.zeros(code.size + 1, dtype=int)

    if decoder == Decoder.PGM:
        probs = build_pgm_povm(e, code, delta, cache).probabilities(codeword_state(e, code[sent - 1]))
        probs = np.clip(probs, 0.0, None)
        outcomes = rng.choice(code.size + 1, size=trials, p=probs / probs.sum())
        return TrajectoryHistogram(sent=sent, counts=np.bincount(outcomes, minlength=code.size + 1), trials=trials)
    if decoder != Decoder.SEQUENTIAL:
        raise ConfigError(f"Unknown decoder '{decoder}'.")

    max_resamples = trials if max_resamples is None else max_resamples
    resamples = 0
    done = 0
    while done < trials:
        try:
            outcome = simulate_trajectory(e, code, sent, delta, rng, cache)
        except NumericalUnderflow as exc:
            resamples += 1
            trajectory_resampled.send(sender=run_trajectories, sent=sent, step=exc.step, denominator=exc.denominator)
            if resamples > max_resamples:
                raise
            continue
        counts[outcome.outcome] += 1
        done += 1
    logging.debug(f"Ran {trials} trajectories for sent={sent} with {resamples} resamples")
    return TrajectoryHistogram(sent=sent, counts=counts, trials=trials, resamples=resamples)


def histogram_z_scores(counts, probs, trials):
    """(count - trials p) / sqrt(trials p (1 - p)); zero-variance outcomes score 0 on a match, inf otherwise."""
    counts = np.asarray(counts, dtype=float)
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    expected = trials * probs
    sigma = np.sqrt(trials * probs * (1.0 - probs))
    z = np.zeros_like(expected)
    degenerate = sigma < 1e-12
    z[~degenerate] = (counts[~degenerate] - expected[~degenerate]) / sigma[~degenerate]
    mismatch = degenerate & (np.abs(counts - expected) > 0.5)
    z[mismatch] = np.inf
    return z


def _classical_logs(distribution):
    logs = np.full(distribution.shape, -np.inf)
    positive = distribution > sim_settings.ZERO_EIGENVALUE
    logs[positive] = np.log2(distribution[positive])
    return logs


def _string_logs(distributions):
    logs = _classical_logs(distributions[0])
    for d in distributions[1:]:
        logs = np.add.outer(logs, _classical_logs(d)).ravel()
    return logs


def classical_error_probability(e, code, delta, rule=Decoder.SEQUENTIAL):
    """Error of the typical-set decoders on a commuting ensemble, computed on strings.

    The received string x is drawn from the product of the diagonals of the
    sent codeword. The sequential rule declares the first codeword whose
    conditional typical set contains x, provided x is average-typical. The
    pgm rule splits the declaration evenly among all such code positions.
    """
    if not e.is_commuting():
        raise ConfigError("Classical decoding needs states diagonal in the computational basis.")
    code.check_alphabet(e.alphabet_size)
    window = typical_window(e, code.n, delta)
    lo, hi = window.average_bounds
    avg_logs = _string_logs([np.diag(e.average).real] * code.n)
    typical = (avg_logs >= lo) & (avg_logs <= hi)

    letters = [np.diag(s).real for s in e.states]
    lo, hi = window.conditional_bounds
    members = []
    for codeword in code:
        logs = _string_logs([letters[j] for j in codeword])
        members.append(typical & (logs >= lo) & (logs <= hi))
    members = np.array(members)

    if rule == Decoder.SEQUENTIAL:
        claimed = np.zeros(members.shape[1], dtype=bool)
        decides = np.zeros_like(members, dtype=float)
        for u in range(code.size):
            decides[u] = members[u] & ~claimed
            claimed |= members[u]
    elif rule == Decoder.PGM:
        hits = members.sum(axis=0)
        decides = np.where(hits > 0, members / np.maximum(hits, 1), 0.0)
    else:
        raise ConfigError(f"Unknown decoder '{rule}'.")

    success = 0.0
    for u, codeword in enumerate(code):
        sent = np.exp2(_string_logs([letters[j] for j in codeword]))
        success += float(sent @ decides[u])
    return min(max(1.0 - success / code.size, 0.0), 1.0)
