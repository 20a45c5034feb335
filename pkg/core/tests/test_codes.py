import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import CodeSchemaError, DimensionMismatch, InvalidPermutation, UnknownCode
from core.services.codes import (
    GOLDEN_ORDERING,
    SymbolOrdering,
    apply_ordering,
    assemble_codeword,
    builtin,
    code_from_dict,
    code_to_dict,
    generator_matrix,
    golden_constants,
    load_code,
    save_code,
)
from core.services.linalg import numerical_rank, tilde_vec, vec
from core.tests.utils import complex_gaussian, fixture_path


class BuiltinCodeTests(SimpleTestCase):
    """Tests for the shipped ABBA, Silver and Golden codes"""

    def test_abba_weights(self):
        code = builtin('abba')
        np.testing.assert_array_equal(code.weights[0], np.eye(2))
        np.testing.assert_array_equal(code.weights[1], [[0, -1], [-1, 0]])
        np.testing.assert_array_equal(code.weights[2], [[0, 1j], [1j, 0]])
        np.testing.assert_array_equal(code.weights[3], 1j * np.eye(2))
        self.assertEqual(code.symbol_labels, ('x1', 'x2', 'x3', 'x4'))

    def test_silver_dimensions(self):
        code = builtin('silver')
        self.assertEqual((code.kappa, code.nt, code.T), (4, 2, 2))
        self.assertEqual(code.symbol_labels[:2], ('Re(s1)', 'Im(s1)'))

    def test_silver_u_constants(self):
        A5 = builtin('silver').weights[4]
        self.assertAlmostEqual(A5[0, 0], (1 + 1j) / math.sqrt(7), places=15)
        self.assertAlmostEqual(A5[1, 0], -(1 + 2j) / math.sqrt(7), places=15)

    def test_golden_full_rate(self):
        code = builtin('golden')
        self.assertEqual(code.rate, 2)
        self.assertTrue(code.is_full_rate)

    def test_golden_labels_follow_ordering(self):
        code = builtin('golden')
        self.assertEqual(
            code.symbol_labels,
            ('Re(s1)', 'Re(s2)', 'Im(s1)', 'Im(s2)', 'Re(s3)', 'Re(s4)', 'Im(s3)', 'Im(s4)'),
        )

    def test_golden_default_ordering(self):
        canonical = builtin('golden').canonical()
        reordered = apply_ordering(canonical, GOLDEN_ORDERING)
        self.assertEqual(reordered, builtin('golden'))

    def test_unknown_name(self):
        with self.assertRaises(UnknownCode):
            builtin('alamouti')

    def test_name_is_case_insensitive(self):
        self.assertEqual(builtin('ABBA'), builtin('abba'))


class CodewordTests(SimpleTestCase):
    """Tests for assemble_codeword and generator_matrix"""

    def test_abba_first_symbol(self):
        np.testing.assert_array_equal(assemble_codeword(builtin('abba'), np.array([1, 0])), np.eye(2))

    def test_zero_symbols(self):
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            X = assemble_codeword(code, np.zeros(code.kappa, dtype=complex))
            np.testing.assert_array_equal(X, np.zeros((code.nt, code.T)))

    def test_golden_first_symbol(self):
        _, _, alpha, alpha_bar = golden_constants()
        X = assemble_codeword(builtin('golden'), np.array([1, 0, 0, 0]))
        np.testing.assert_allclose(X, np.diag([alpha, alpha_bar]) / math.sqrt(5), atol=1e-15)

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            assemble_codeword(builtin('abba'), np.array([1, 0, 0]))

    def test_abba_first_generator_column(self):
        G = generator_matrix(builtin('abba'))
        np.testing.assert_array_equal(G[:, 0], [1, 0, 0, 0, 0, 0, 1, 0])
        self.assertEqual(numerical_rank(G), 4)

    def test_linear_dispersion_identity(self):
        rng = np.random.default_rng(10)
        for name in ('abba', 'silver', 'golden'):
            code = builtin(name)
            G = generator_matrix(code)
            for _ in range(100):
                s = complex_gaussian(rng, code.kappa)
                X = assemble_codeword(code, s)
                residual = tilde_vec(vec(X)) - G @ code.real_vector(s)
                self.assertLess(np.linalg.norm(residual), 1e-12)

    def test_real_vector_round_trip(self):
        code = builtin('golden')
        s = np.array([1 + 2j, -3 + 1j, 0.5j, 2])
        np.testing.assert_allclose(code.complex_symbols(code.real_vector(s)), s)


class OrderingTests(SimpleTestCase):
    """Tests for SymbolOrdering and apply_ordering"""

    def test_identity(self):
        code = builtin('silver')
        self.assertEqual(apply_ordering(code, SymbolOrdering.identity(8)), code)

    def test_abba_permutation(self):
        code = builtin('abba')
        reordered = apply_ordering(code, [3, 4, 1, 2])
        np.testing.assert_array_equal(reordered.weights, code.weights[[2, 3, 0, 1]])
        self.assertEqual(reordered.symbol_labels, ('x3', 'x4', 'x1', 'x2'))

    def test_generator_transforms_with_permutation_matrix(self):
        code = builtin('golden')
        ordering = SymbolOrdering((2, 5, 1, 8, 3, 7, 4, 6))
        G_new = generator_matrix(apply_ordering(code, ordering))
        np.testing.assert_array_equal(G_new, generator_matrix(code) @ ordering.matrix().T)

    def test_invalid_permutation(self):
        with self.assertRaises(InvalidPermutation):
            SymbolOrdering((1, 1, 2, 3))
        with self.assertRaises(InvalidPermutation):
            apply_ordering(builtin('abba'), [1, 2, 3])

    def test_codeword_unchanged_by_reordering(self):
        code = builtin('silver')
        s = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j])
        reordered = apply_ordering(code, [8, 7, 6, 5, 4, 3, 2, 1])
        np.testing.assert_allclose(assemble_codeword(reordered, s), assemble_codeword(code, s))


class CodeFileTests(SimpleTestCase):
    """Tests for the JSON code-definition format"""

    def test_save_then_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in ('abba', 'silver', 'golden'):
                code = builtin(name)
                path = save_code(code, Path(tmp) / f'{name}.json')
                self.assertEqual(load_code(path), code)

    def test_missing_weight_is_schema_error(self):
        with self.assertRaises(CodeSchemaError) as ctx:
            load_code(fixture_path('bad_code.json'))
        self.assertIn('schema', [e.code for e in ctx.exception.error_list])

    def test_dependent_weights_warn(self):
        with self.assertLogs('core.services.codes', level='WARNING'):
            code = load_code(fixture_path('dependent_code.json'))
        self.assertEqual(len(code.warnings), 1)
        self.assertIn('rank(G) = 3', code.warnings[0])

    def test_missing_file(self):
        with self.assertRaises(CodeSchemaError):
            load_code(fixture_path('does_not_exist.json'))

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.json'
            path.write_text('{"name": ')
            with self.assertRaises(CodeSchemaError):
                load_code(path)

    def test_non_finite_entry(self):
        data = code_to_dict(builtin('abba'))
        data['weights'][0][0][0] = [float('nan'), 0.0]
        with self.assertRaises(CodeSchemaError) as ctx:
            code_from_dict(data)
        self.assertIn('non_finite', [e.code for e in ctx.exception.error_list])

    def test_wrong_matrix_shape(self):
        data = code_to_dict(builtin('abba'))
        data['weights'][1] = data['weights'][1][:1]
        with self.assertRaises(CodeSchemaError) as ctx:
            code_from_dict(data)
        self.assertIn('dimension', [e.code for e in ctx.exception.error_list])

    def test_all_problems_reported(self):
        data = code_to_dict(builtin('abba'))
        data['symbol_labels'] = ['x1']
        data['ordering'] = [1, 1, 2, 3]
        with self.assertRaises(CodeSchemaError) as ctx:
            code_from_dict(data)
        self.assertEqual(len(ctx.exception.error_list), 2)

    def test_ordering_stored_one_based(self):
        data = code_to_dict(builtin('golden'))
        self.assertEqual(data['ordering'], list(GOLDEN_ORDERING))
        self.assertNotIn('ordering', code_to_dict(builtin('abba')))
        json.dumps(data)
