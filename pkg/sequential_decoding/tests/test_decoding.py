import itertools

import numpy as np
import pytest

from sequential_decoding.coding import Codebook, codeword_state, make_rng, sample_code
from sequential_decoding.conf import sim_settings
from sequential_decoding.decoding import (
    build_pgm_povm,
    build_povm,
    build_sequential_povm,
    classical_error_probability,
    code_error_probability,
    decode_confusion_matrix,
    histogram_z_scores,
    run_trajectories,
    simulate_trajectory,
)
from sequential_decoding.exceptions import ConfigError, InvariantViolation, NumericalUnderflow
from sequential_decoding.models import Decoder
from sequential_decoding.signals import trajectory_resampled
from sequential_decoding.typicality import TypicalProjectorCache

from .oracles import random_ensemble

CODE_4 = Codebook.from_list([[0, 1, 0, 0], [1, 1, 0, 1], [0, 0, 1, 1]])


def projectors(e, code, delta):
    cache = TypicalProjectorCache(e, code.n, delta)
    return cache.average.matrix, [cache.conditional(c).matrix for c in code]


class TestSequentialPOVM:
    def test_single_codeword_is_compressed_projector(self, canonical):
        code = Codebook.from_list([[0, 1, 0, 0]])
        p, (p_1,) = projectors(canonical, code, 0.3)
        povm = build_sequential_povm(canonical, code, 0.3)
        np.testing.assert_allclose(povm.elements[0], p @ p_1 @ p, atol=1e-12)

    def test_effects_match_written_out_products(self, canonical):
        p, (p_1, p_2, p_3) = projectors(canonical, CODE_4, 0.3)
        bar_1, bar_2, bar_3 = (p @ q @ p for q in (p_1, p_2, p_3))
        povm = build_sequential_povm(canonical, CODE_4, 0.3)
        np.testing.assert_allclose(povm.elements[1], (p - bar_1) @ bar_2 @ (p - bar_1), atol=1e-12)
        # E_3 from M_3 = P_3 P Qbar_2 Qbar_1 with Qbar = P (I - P_j) P
        qbar_1 = p @ (np.eye(16) - p_1) @ p
        qbar_2 = p @ (np.eye(16) - p_2) @ p
        m_3 = p_3 @ p @ qbar_2 @ qbar_1
        np.testing.assert_allclose(povm.elements[2], m_3.conj().T @ m_3, atol=1e-12)

    @pytest.mark.parametrize('trial', range(10))
    def test_random_instances_are_valid_povms(self, trial):
        rng = np.random.default_rng(100 + trial)
        e = random_ensemble(rng, size=int(rng.integers(2, 4)), dim=2)
        n = int(rng.integers(2, 5))
        code = sample_code(e.probs, n, int(rng.integers(1, 6)), rng)
        delta = float(rng.uniform(0.1, 0.8))
        for decoder in (Decoder.SEQUENTIAL, Decoder.PGM):
            povm = build_povm(e, code, delta, decoder)
            assert povm.completeness_error() <= 1e-8
            assert povm.min_eigenvalue() >= -1e-9
            for effect in povm.effects:
                np.testing.assert_allclose(effect, effect.conj().T, atol=1e-10)

    def test_every_codebook_order_is_complete(self, canonical, depolarized):
        for e in (canonical, depolarized):
            p, conditionals = projectors(e, CODE_4, 0.3)
            for order in itertools.permutations(range(CODE_4.size)):
                code = Codebook.from_list([CODE_4[k] for k in order])
                povm = build_sequential_povm(e, code, 0.3)
                assert povm.is_complete()
                assert povm.completeness_error() <= 1e-8
                assert povm.min_eigenvalue() >= -1e-9
                np.testing.assert_allclose(povm.elements[0], p @ conditionals[order[0]] @ p, atol=1e-12)

    def test_incomplete_povm_is_an_invariant_violation(self, depolarized):
        with sim_settings.override(TOL_COMPLETENESS=-1.0):
            with pytest.raises(InvariantViolation) as excinfo:
                build_sequential_povm(depolarized, CODE_4, 0.3)
        assert excinfo.value.code == 'incomplete_povm'

    def test_orthogonal_codewords_decode_perfectly(self, orthogonal):
        code = Codebook.from_list([[0, 1], [1, 0]])
        povm = build_sequential_povm(orthogonal, code, 0.1)
        assert code_error_probability(povm, orthogonal, code) == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(decode_confusion_matrix(povm, orthogonal, code)[1:], np.eye(2), atol=1e-12)

    def test_identical_codewords_fail_half_the_time(self, canonical):
        code = Codebook.from_list([[0, 1, 0, 0], [0, 1, 0, 0]])
        povm = build_sequential_povm(canonical, code, 0.3)
        assert code_error_probability(povm, canonical, code) >= 0.5 - 1e-12

    def test_empty_typical_set_declares_nothing(self, canonical):
        code = Codebook.from_list([[0, 1, 0, 0], [1, 1, 0, 1]])
        povm = build_sequential_povm(canonical, code, 0.25)
        assert povm.typical_empty
        np.testing.assert_allclose(povm.residual, np.eye(16), atol=1e-12)
        assert code_error_probability(povm, canonical, code) == 1.0

    def test_confusion_columns_sum_to_one(self, depolarized):
        code = sample_code(depolarized.probs, 3, 4, make_rng(2))
        povm = build_sequential_povm(depolarized, code, 0.3)
        matrix = decode_confusion_matrix(povm, depolarized, code)
        assert matrix.shape == (5, 4)
        np.testing.assert_allclose(matrix.sum(axis=0), np.ones(4), atol=1e-10)

    def test_cache_must_match(self, canonical, depolarized):
        cache = TypicalProjectorCache(depolarized, 4, 0.3)
        with pytest.raises(ConfigError):
            build_sequential_povm(canonical, CODE_4, 0.3, cache=cache)

    def test_unknown_decoder(self, canonical):
        with pytest.raises(ConfigError):
            build_povm(canonical, CODE_4, 0.3, decoder='ml')


class TestPGM:
    def test_pgm_elements_are_pretty_good_measurement(self, depolarized):
        code = sample_code(depolarized.probs, 3, 3, make_rng(4))
        cache = TypicalProjectorCache(depolarized, 3, 0.3)
        p = cache.average.matrix
        compressed = [p @ cache.conditional(c).matrix @ p for c in code]
        povm = build_pgm_povm(depolarized, code, 0.3, cache)
        total = sum(povm.elements)
        # sum of the elements is the projector onto the support of sum_u P P_u P
        np.testing.assert_allclose(total @ total, total, atol=1e-8)
        support = sum(compressed)
        np.testing.assert_allclose(total @ support, support, atol=1e-8)

    def test_orthogonal_codewords(self, orthogonal):
        code = Codebook.from_list([[0, 1], [1, 0], [1, 1]])
        povm = build_pgm_povm(orthogonal, code, 0.1)
        assert code_error_probability(povm, orthogonal, code) == pytest.approx(0.0, abs=1e-12)


class TestClassicalReduction:
    @pytest.mark.parametrize('seed', range(5))
    @pytest.mark.parametrize('decoder', [Decoder.SEQUENTIAL, Decoder.PGM])
    def test_commuting_ensemble_matches_string_decoder(self, diagonal, seed, decoder):
        code = sample_code(diagonal.probs, 3, 3, make_rng(seed))
        povm = build_povm(diagonal, code, 0.3, decoder)
        quantum = code_error_probability(povm, diagonal, code)
        classical = classical_error_probability(diagonal, code, 0.3, rule=decoder)
        assert quantum == pytest.approx(classical, abs=1e-10)

    def test_orthogonal_pair(self, orthogonal):
        code = Codebook.from_list([[0, 0, 1], [1, 0, 1]])
        assert classical_error_probability(orthogonal, code, 0.1) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_non_commuting(self, canonical):
        with pytest.raises(ConfigError):
            classical_error_probability(canonical, CODE_4, 0.3)


class TestTrajectories:
    def test_record_format(self, canonical):
        outcome = simulate_trajectory(canonical, CODE_4, 2, 0.3, make_rng(0))
        assert len(outcome.record) >= 1
        for typical, answer in outcome.record[:-1]:
            assert (typical, answer) == (1, 0)
        if outcome.declared is None:
            assert outcome.record[-1] in {(0, None), (1, 0)}
        else:
            assert outcome.record[-1] == (1, 1)
            assert len(outcome.record) == outcome.declared

    def test_orthogonal_pair_always_declares_sent(self, orthogonal):
        code = Codebook.from_list([[0, 1], [1, 0]])
        for sent in (1, 2):
            histogram = run_trajectories(orthogonal, code, sent, 0.1, 200, make_rng(sent))
            assert histogram.counts[sent] == 200

    def test_empty_typical_set_aborts_at_once(self, canonical):
        for seed in range(20):
            outcome = simulate_trajectory(canonical, CODE_4, 1, 0.1, make_rng(seed))
            assert outcome.declared is None
            assert outcome.record == ((0, None),)

    def test_sent_out_of_range(self, canonical):
        with pytest.raises(ConfigError):
            simulate_trajectory(canonical, CODE_4, 4, 0.3, make_rng(0))

    @pytest.mark.parametrize('sent', [1, 2])
    def test_frequencies_match_povm(self, canonical, sent):
        code = Codebook.from_list([[0, 1, 0, 0], [1, 1, 0, 1]])
        trials = 10_000
        histogram = run_trajectories(canonical, code, sent, 0.3, trials, make_rng(2024, task=sent))
        povm = build_sequential_povm(canonical, code, 0.3)
        exact = povm.probabilities(codeword_state(canonical, code[sent - 1]))
        assert histogram.counts.sum() == trials
        assert np.all(np.abs(histogram_z_scores(histogram.counts, exact, trials)) <= 3.0)

    def test_pgm_histogram(self, depolarized):
        code = sample_code(depolarized.probs, 3, 3, make_rng(8))
        histogram = run_trajectories(depolarized, code, 1, 0.3, 5000, make_rng(9), decoder=Decoder.PGM)
        exact = build_pgm_povm(depolarized, code, 0.3).probabilities(codeword_state(depolarized, code[0]))
        assert np.all(np.abs(histogram_z_scores(histogram.counts, exact, 5000)) <= 3.0)

    def test_underflow_resamples_and_signals(self, orthogonal):
        received = []

        def listener(sender, sent, step, denominator, **kwargs):
            received.append(step)

        code = Codebook.from_list([[0, 1], [1, 0]])
        trajectory_resampled.connect(listener)
        try:
            # P = I here, so every run reaches a collapse and every collapse is below the threshold
            with sim_settings.override(UNDERFLOW_THRESHOLD=2.0):
                with pytest.raises(NumericalUnderflow):
                    run_trajectories(orthogonal, code, 1, 0.1, 5, make_rng(0), max_resamples=3)
        finally:
            trajectory_resampled.disconnect(listener)
        assert received == [1, 1, 1, 1]


class TestZScores:
    def test_degenerate_outcomes(self):
        z = histogram_z_scores([10, 0, 0], [1.0, 0.0, 0.0], 10)
        np.testing.assert_array_equal(z, [0.0, 0.0, 0.0])
        z = histogram_z_scores([9, 1, 0], [1.0, 0.0, 0.0], 10)
        assert np.isinf(z[1])

    def test_regular_outcome(self):
        z = histogram_z_scores([60, 40], [0.5, 0.5], 100)
        np.testing.assert_allclose(z, [2.0, -2.0])
