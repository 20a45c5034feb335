import itertools

import numpy as np
from django.test import SimpleTestCase, override_settings

from core.exceptions import DimensionMismatch, SearchOverflow, UnderDetermined
from core.services.codes import apply_ordering, assemble_codeword, builtin, generator_matrix
from core.services.criteria import orthogonality_matrix
from core.services.linalg import tilde_vec, vec
from core.services.structure import (
    ChannelModel,
    _Objective,
    block_orthogonal_candidates,
    channel_invariance,
    classify,
    compare_hrqf,
    count_pruned_orderings,
    default_channel,
    empirical_pattern,
    equivalent_channel,
    fsd_complexity,
    ordering_search,
    predicted_pattern_theorem4,
    pruned_orderings,
    twin_classes,
)
from core.tests.utils import complex_gaussian, random_code, reference_pattern

TRIALS = 20


def measured(name, trials=TRIALS):
    code = builtin(name)
    return code, empirical_pattern(code, default_channel(code), trials)


class EquivalentChannelTests(SimpleTestCase):
    """Tests for H_eq = (I_T kron check(H)) G"""

    def test_identity_channel_gives_generator(self):
        code = builtin('abba')
        np.testing.assert_array_equal(equivalent_channel(code, np.eye(2)), generator_matrix(code))

    def test_vectorized_model(self):
        rng = np.random.default_rng(20)
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            H = complex_gaussian(rng, (3, code.nt))
            s = complex_gaussian(rng, code.kappa)
            received = tilde_vec(vec(H @ assemble_codeword(code, s)))
            np.testing.assert_allclose(received, equivalent_channel(code, H) @ code.real_vector(s), atol=1e-12)

    def test_wrong_channel_width(self):
        with self.assertRaises(DimensionMismatch):
            equivalent_channel(builtin('abba'), np.ones((2, 3)))

    def test_default_channel(self):
        self.assertEqual(default_channel(builtin('golden')).n_r, 2)
        self.assertEqual(default_channel(builtin('abba'), seed=7).seed, 7)


class EmpiricalPatternTests(SimpleTestCase):
    """Tests for the measured zero structure of R"""

    def test_reference_patterns(self):
        for name in ('abba', 'silver', 'golden'):
            _, pattern = measured(name)
            self.assertEqual(pattern, reference_pattern(name), name)

    def test_stats(self):
        _, pattern = measured('abba')
        self.assertEqual(pattern.stats['trials'], TRIALS)
        self.assertEqual(pattern.stats['redraws'], 0)
        self.assertLess(pattern.stats['largest_relative_zero'], 1e-12)
        self.assertEqual(len(pattern.samples), 16)

    def test_underdetermined(self):
        with self.assertRaises(UnderDetermined):
            empirical_pattern(builtin('golden'), ChannelModel(n_r=1), TRIALS)

    def test_trials_must_be_positive(self):
        with self.assertRaises(ValueError):
            empirical_pattern(builtin('abba'), ChannelModel(n_r=2), 0)

    def test_deterministic_across_workers(self):
        code = builtin('silver')
        channel = ChannelModel(n_r=2, seed=3)
        serial = empirical_pattern(code, channel, TRIALS, workers=1)
        threaded = empirical_pattern(code, channel, TRIALS, workers=4)
        np.testing.assert_array_equal(serial.max_abs, threaded.max_abs)
        self.assertEqual(serial, threaded)

    def test_channel_invariance(self):
        for name in ('abba', 'silver', 'golden'):
            result = channel_invariance(builtin(name), [2, 4, 8], [1, 2, 3], trials=10)
            self.assertTrue(result['invariant'], name)
            self.assertEqual(result['zeros'], reference_pattern(name).zeros())

    def test_row_permutation_keeps_pattern(self):
        code = builtin('golden')
        channel = ChannelModel(n_r=2, seed=5)
        rows = list(np.random.default_rng(21).permutation(2 * channel.n_r * code.T))
        self.assertEqual(
            empirical_pattern(code, channel, TRIALS, row_permutation=rows),
            empirical_pattern(code, channel, TRIALS),
        )

    def test_bad_row_permutation(self):
        with self.assertRaises(DimensionMismatch):
            empirical_pattern(builtin('abba'), ChannelModel(n_r=2), TRIALS, row_permutation=[0, 1, 2])

    def test_symbol_ordering_changes_pattern(self):
        code = apply_ordering(builtin('abba'), [1, 3, 2, 4])
        pattern = empirical_pattern(code, ChannelModel(n_r=2), TRIALS)
        self.assertEqual(pattern.zeros(), [(1, 2), (1, 4), (2, 3), (3, 4)])


class PredictedPatternTests(SimpleTestCase):
    """Tests for the channel-free prediction of R's zeros"""

    def test_matches_reference(self):
        for name in ('abba', 'silver', 'golden'):
            self.assertEqual(predicted_pattern_theorem4(builtin(name)), reference_pattern(name), name)

    def test_contained_in_measurement(self):
        rng = np.random.default_rng(22)
        codes = [builtin(name) for name in ('abba', 'silver', 'golden')]
        codes += [random_code(rng, 2, 2, name=f'synthetic-{k}') for k in range(3)]
        for code in codes:
            predicted = predicted_pattern_theorem4(code)
            pattern = empirical_pattern(code, default_channel(code), TRIALS)
            self.assertTrue(predicted.issubset(pattern), code.name)

    def test_block_orthogonal_fits_recorded(self):
        self.assertIn([2, 4, 1], predicted_pattern_theorem4(builtin('silver')).stats['block_orthogonal_fits'])
        self.assertIn([2, 2, 2], predicted_pattern_theorem4(builtin('golden')).stats['block_orthogonal_fits'])

    def test_candidates(self):
        self.assertEqual(block_orthogonal_candidates(8), [(4, 2, 1), (2, 4, 1), (2, 2, 2)])
        self.assertEqual(block_orthogonal_candidates(4), [(2, 2, 1)])


class ClassificationTests(SimpleTestCase):
    """Tests for family classification and complexity accounting"""

    def test_abba_two_groups(self):
        code, pattern = measured('abba')
        report = classify(code, pattern)
        self.assertEqual(report.family, 'g_group')
        self.assertEqual(report.g, 2)
        self.assertEqual(report.witness.groups, [[1, 2], [3, 4]])
        self.assertIsNone(report.bo_params)
        self.assertEqual(report.fsd_complexity_exponent, 2)

    def test_abba_complexity_at_16qam(self):
        code, pattern = measured('abba')
        report = classify(code, pattern, q=4)
        self.assertEqual(report.complexity.exponent, 4)
        self.assertEqual(report.complexity.leaf_count, 32)
        self.assertEqual(report.complexity.exhaustive_exponent, 8)

    def test_silver_block_orthogonal(self):
        code, pattern = measured('silver')
        report = classify(code, pattern, q=2)
        self.assertEqual(report.family, 'block_orthogonal')
        self.assertEqual(report.bo_params, (2, 4, 1))
        self.assertEqual(report.layout.L, 4)
        self.assertEqual(report.witness.sizes, (1, 1, 1, 1))
        self.assertEqual(report.fsd_complexity_exponent, 5)
        self.assertEqual(report.complexity.node_bound, 158)

    def test_silver_at_16qam(self):
        code, pattern = measured('silver')
        self.assertEqual(classify(code, pattern, q=4).fsd_complexity_exponent, 10)

    def test_golden_block_orthogonal(self):
        code, pattern = measured('golden')
        report = classify(code, pattern, q=2)
        self.assertEqual(report.family, 'block_orthogonal')
        self.assertEqual(report.bo_params, (2, 2, 2))
        self.assertEqual(report.witness.sizes, (2, 2))
        self.assertEqual(report.fsd_complexity_exponent, 6)

    def test_unstructured_code(self):
        code = random_code(np.random.default_rng(23), 2, 2, paired=False)
        pattern = empirical_pattern(code, default_channel(code), TRIALS)
        self.assertEqual(pattern.zero_count, 0)
        for q in (2, 4, 6):
            report = classify(code, pattern, q=q)
            self.assertEqual(report.family, 'unstructured')
            self.assertEqual(report.fsd_complexity_exponent, q * code.kappa)

    def test_odd_q_rejected(self):
        code, pattern = measured('abba')
        report = classify(code, pattern)
        with self.assertRaises(ValueError):
            fsd_complexity(report, 3)

    def test_pattern_of_another_code_rejected(self):
        _, pattern = measured('abba')
        with self.assertRaises(DimensionMismatch):
            classify(builtin('silver'), pattern)

    def test_report_serializes(self):
        code, pattern = measured('golden')
        data = classify(code, pattern).to_dict()
        self.assertEqual(data['bo_params'], [2, 2, 2])
        self.assertEqual(data['decoding_layout']['partition']['sizes'], [2, 2])


class HrqfComparisonTests(SimpleTestCase):
    """HRQF only ever misses zeros, it never invents them"""

    def test_abba_agrees(self):
        code, pattern = measured('abba')
        self.assertEqual(compare_hrqf(code, pattern), [])

    def test_second_layer_missing(self):
        expected = {
            'silver': {(i, j) for i in range(5, 9) for j in range(i + 1, 9)},
            'golden': {(5, 7), (5, 8), (6, 7), (6, 8)},
        }
        for name, pairs in expected.items():
            code, pattern = measured(name)
            mismatches = compare_hrqf(code, pattern)
            self.assertEqual({m.direction for m in mismatches}, {'incomplete'})
            self.assertEqual({(m.i, m.j) for m in mismatches}, pairs)


class OrderingSearchTests(SimpleTestCase):
    """Tests for twin pruning and the ordering search"""

    def test_abba_twins(self):
        orthogonal = orthogonality_matrix(builtin('abba'))
        self.assertEqual(twin_classes(orthogonal), [[0, 1], [2, 3]])
        self.assertEqual(count_pruned_orderings(orthogonal), 6)
        orderings = list(pruned_orderings(orthogonal))
        self.assertEqual(len(set(orderings)), 6)
        self.assertEqual(orderings[0], (0, 1, 2, 3))

    def test_scrambled_abba_recovers(self):
        code = apply_ordering(builtin('abba'), [1, 3, 2, 4])
        result = ordering_search(code, ChannelModel(n_r=2), mode='exhaustive', trials=10)
        self.assertEqual(result.before_exponent, 3)
        self.assertEqual(result.after_exponent, 2)
        self.assertEqual(result.mode, 'exhaustive')
        self.assertEqual(result.candidates_evaluated, 6)
        self.assertEqual(result.report.family, 'g_group')

    def test_identity_keeps_exponent(self):
        result = ordering_search(builtin('abba'), ChannelModel(n_r=2), trials=10)
        self.assertEqual(result.before_exponent, result.after_exponent)

    def test_result_unpacks(self):
        ordering, report = ordering_search(builtin('abba'), ChannelModel(n_r=2), trials=10)
        self.assertEqual(len(ordering.perm), 4)
        self.assertEqual(report.fsd_complexity_exponent, 2)

    @override_settings(STBC_FSD_MAX_ORDERINGS=1)
    def test_overflow(self):
        with self.assertRaises(SearchOverflow):
            ordering_search(builtin('abba'), ChannelModel(n_r=2), mode='exhaustive', trials=10)

    @override_settings(STBC_FSD_MAX_ORDERINGS=1)
    def test_default_mode_does_not_fall_back(self):
        with self.assertRaises(SearchOverflow):
            ordering_search(builtin('abba'), ChannelModel(n_r=2), trials=10)

    @override_settings(STBC_FSD_MAX_ORDERINGS=1)
    def test_heuristic_ignores_limit(self):
        result = ordering_search(builtin('abba'), ChannelModel(n_r=2), mode='heuristic', trials=10)
        self.assertEqual(result.mode, 'heuristic')

    def test_ties_go_to_smallest_permutation(self):
        score = _Objective(builtin('abba'), 2, 'complexity')
        first, swapped = score.key((0, 1, 2, 3)), score.key((1, 0, 2, 3))
        self.assertEqual(first[:-1], swapped[:-1])
        self.assertLess(first, swapped)

    def test_twin_pruning_keeps_the_optimum(self):
        for code in (builtin('abba'), apply_ordering(builtin('abba'), [1, 3, 2, 4])):
            score = _Objective(code, 2, 'complexity')
            full = min(score.key(perm)[:-1] for perm in itertools.permutations(range(4)))
            pruned = min(score.key(perm)[:-1] for perm in pruned_orderings(score.orthogonal))
            self.assertEqual(full, pruned, code.name)

    def test_heuristic_on_larger_code(self):
        code = random_code(np.random.default_rng(24), 4, 2, kappa=8)
        result = ordering_search(code, default_channel(code), mode='heuristic', trials=5)
        self.assertTrue(all(b <= a for a, b in zip(result.trace, result.trace[1:])))
        self.assertLessEqual(result.after_exponent, result.before_exponent)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            ordering_search(builtin('abba'), ChannelModel(n_r=2), mode='auto', trials=10)
