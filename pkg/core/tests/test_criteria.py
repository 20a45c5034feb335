import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DimensionMismatch
from core.services.codes import StbcCode, builtin, generator_matrix
from core.services.criteria import (
    check_c1,
    check_c2,
    condition_map,
    hr_mutual_orthogonality,
    hrqf_matrix,
    hrqf_predicted_pattern,
    unsymmetrised_component_test,
    orthogonality_matrix,
    pair_verdict,
    predict_column_orthogonality,
    proof_terms,
    verdict_table,
)
from core.services.linalg import trace_form
from core.services.structure import equivalent_channel
from core.tests.utils import complex_gaussian, random_code, reference_pattern

# canonical Golden numbering -> position in the built-in ordering
GOLDEN_POSITION = {1: 1, 2: 3, 3: 2, 4: 4, 5: 5, 6: 7, 7: 6, 8: 8}


class TraceConditionTests(SimpleTestCase):
    """Tests for the component-wise trace conditions"""

    def test_abba_cross_pairs(self):
        code = builtin('abba')
        for i, j in [(1, 3), (1, 4), (2, 3), (2, 4)]:
            self.assertTrue(check_c1(code, i, j))
            self.assertTrue(predict_column_orthogonality(code, i, j))

    def test_abba_same_group(self):
        self.assertFalse(predict_column_orthogonality(builtin('abba'), 1, 2))

    def test_silver_listed_c1_pairs(self):
        code = builtin('silver')
        for i, j in [(1, 2), (1, 4), (2, 3), (3, 4), (5, 6), (7, 8)]:
            result = check_c1(code, i, j)
            self.assertTrue(result, f"c1 fails on ({i},{j}) with residual {result.residual}")

    def test_silver_listed_c2_pairs(self):
        code = builtin('silver')
        for i, j in [(1, 3), (2, 4), (5, 7), (5, 8), (6, 7), (6, 8)]:
            result = check_c2(code, i, j)
            self.assertTrue(result, f"c2 fails on ({i},{j}) with residual {result.residual}")

    def test_golden_listed_c2_pairs(self):
        code = builtin('golden')
        pairs = [(1, 2), (1, 4), (2, 3), (3, 4), (5, 6), (5, 8), (6, 7), (7, 8)]
        for a, b in pairs:
            i, j = sorted((GOLDEN_POSITION[a], GOLDEN_POSITION[b]))
            self.assertTrue(check_c2(code, i, j), f"c2 fails on canonical pair ({a},{b})")

    def test_golden_first_pair_in_canonical_order(self):
        self.assertTrue(check_c2(builtin('golden').canonical(), 1, 2))

    def test_same_index_rejected(self):
        with self.assertRaises(DimensionMismatch):
            check_c1(builtin('abba'), 2, 2)
        with self.assertRaises(DimensionMismatch):
            predict_column_orthogonality(builtin('abba'), 1, 1)

    def test_out_of_range(self):
        with self.assertRaises(DimensionMismatch):
            check_c2(builtin('abba'), 1, 5)

    def test_either_condition_is_not_enough(self):
        A_i = np.array([[1], [0]])
        A_j = np.array([[0], [1j]])
        code = StbcCode(name='counterexample', nt=2, T=1, kappa=1, weights=[A_i, A_j])
        verdict = pair_verdict(code, 1, 2)
        self.assertTrue(verdict.either_condition)
        self.assertFalse(verdict.predicted_column_orthogonality)
        H = np.array([[1 + 1j, 1 - 1j]])
        H_eq = equivalent_channel(code, H)
        self.assertGreater(abs(H_eq[:, 0] @ H_eq[:, 1]), 0.1)

    def test_orthogonality_matrix_matches_pairwise(self):
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            matrix = orthogonality_matrix(code)
            np.testing.assert_array_equal(matrix, matrix.T)
            for i in range(1, code.dim + 1):
                for j in range(i + 1, code.dim + 1):
                    self.assertEqual(matrix[i - 1, j - 1], predict_column_orthogonality(code, i, j))


class HurwitzRadonTests(SimpleTestCase):
    """Tests for HR mutual orthogonality and the HRQF matrix"""

    def test_abba_pair(self):
        self.assertTrue(hr_mutual_orthogonality(builtin('abba'), 1, 3))

    def test_zero_weight_is_orthogonal_to_everything(self):
        weights = [np.eye(2), np.zeros((2, 2)), np.array([[0, 1], [1, 0]]), np.array([[1, 0], [0, -1]])]
        code = StbcCode(name='with-zero', nt=2, T=2, kappa=2, weights=weights)
        for j in (1, 3, 4):
            self.assertTrue(hr_mutual_orthogonality(code, 2, j))

    def test_abba_hrqf_zeros(self):
        U = hrqf_matrix(builtin('abba'))
        for i, j in [(1, 3), (1, 4), (2, 3), (2, 4)]:
            self.assertLess(U[i - 1, j - 1], 1e-24)
        self.assertGreater(U[0, 1], 1.0)

    def test_hrqf_symmetric(self):
        for name in ('abba', 'silver', 'golden'):
            U = hrqf_matrix(builtin(name))
            np.testing.assert_allclose(U, U.T, atol=1e-14)
            self.assertTrue(np.all(U >= 0))

    def test_hr_matches_hrqf(self):
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            for v in verdict_table(code):
                self.assertEqual(v.hr_orthogonal, v.hrqf_value < 1e-20, f"{name} ({v.i},{v.j})")

    def test_silver_pair_5_7(self):
        code = builtin('silver')
        verdict = pair_verdict(code, 5, 7)
        # the symmetrised identity holds, only the unsymmetrised component test fails
        self.assertTrue(verdict.hr_orthogonal)
        self.assertLess(verdict.hrqf_value, 1e-20)
        self.assertFalse(verdict.component_test)
        C = code.weights[4] @ code.weights[6].conj().T
        self.assertAlmostEqual(trace_form(C[0, 1]), 6 / 7, places=12)
        self.assertAlmostEqual(unsymmetrised_component_test(code, 5, 7).residual, 12 / 7, places=12)

    def test_hr_equivalent_to_both_conditions(self):
        codes = [builtin(name) for name in ('abba', 'silver', 'golden')]
        rng = np.random.default_rng(11)
        codes += [random_code(rng, 2, 2) for _ in range(5)]
        for code in codes:
            for v in verdict_table(code):
                self.assertEqual(v.hr_orthogonal, v.both_conditions)

    def test_printed_component_test_implies_hr(self):
        for name in ('abba', 'silver', 'golden'):
            for v in verdict_table(builtin(name)):
                if v.component_test:
                    self.assertTrue(v.hr_orthogonal)

    def test_hrqf_pattern_abba(self):
        self.assertEqual(hrqf_predicted_pattern(builtin('abba')), reference_pattern('abba'))

    def test_hrqf_pattern_silver_first_block_only(self):
        pattern = hrqf_predicted_pattern(builtin('silver'))
        self.assertEqual(
            pattern.zeros(),
            [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        )


class SoundnessTests(SimpleTestCase):
    """Predicted orthogonal pairs are orthogonal for every channel"""

    def test_predicted_pairs_orthogonal_on_random_channels(self):
        rng = np.random.default_rng(12)
        codes = [builtin(name) for name in ('abba', 'silver', 'golden')]
        for k in range(50):
            nt, T = int(rng.choice([2, 3])), int(rng.choice([2, 3]))
            codes.append(random_code(rng, nt, T, kappa=int(rng.integers(1, nt * T + 1)), name=f'synthetic-{k}'))

        for code in codes:
            orthogonal = orthogonality_matrix(code)
            pairs = np.argwhere(np.triu(orthogonal, k=1))
            self.assertGreater(len(pairs), 0)
            G = generator_matrix(code)
            for trial in range(100):
                n_r = (1, 2, 4)[trial % 3]
                H_eq = equivalent_channel(code, complex_gaussian(rng, (n_r, code.nt)), G)
                norms = np.linalg.norm(H_eq, axis=0)
                for i, j in pairs:
                    cosine = abs(H_eq[:, i] @ H_eq[:, j]) / (norms[i] * norms[j])
                    self.assertLess(cosine, 1e-10, f"{code.name} ({i + 1},{j + 1})")

    def test_proof_terms_sum_to_inner_product(self):
        rng = np.random.default_rng(13)
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            G = generator_matrix(code)
            H = complex_gaussian(rng, (3, code.nt))
            H_eq = equivalent_channel(code, H, G)
            for i, j in [(1, 2), (1, 5 if code.dim > 4 else 3), (2, 4)]:
                a_terms, b_terms = proof_terms(code, i, j, H)
                self.assertEqual(len(a_terms), code.T)
                self.assertAlmostEqual(
                    float(a_terms.sum() + b_terms.sum()),
                    float(H_eq[:, i - 1] @ H_eq[:, j - 1]),
                    places=10,
                )


class ConditionMapTests(SimpleTestCase):

    def test_abba_map(self):
        rows = condition_map(builtin('abba'))
        self.assertEqual(len(rows), 4)
        self.assertEqual([row[k] for k, row in enumerate(rows)], ['#'] * 4)
        self.assertEqual(rows[0][2], 'B')
        self.assertEqual(rows[0][1], '2')
