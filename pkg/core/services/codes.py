"""
Linear-dispersion code model: weight matrices, symbol orderings, codewords,
generator matrices, the built-in ABBA / Silver / Golden codes and the JSON
code-definition format.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError

from core.exceptions import (
    CodeSchemaError,
    DimensionMismatch,
    InvalidPermutation,
    UnknownCode,
)
from core.services.linalg import numerical_rank, tilde_vec, vec

logger = logging.getLogger(__name__)

LINEAR_INDEPENDENCE_TOLERANCE = 1e-10


def canonical_labels(kappa):
    labels = []
    for i in range(1, kappa + 1):
        labels.extend([f"Re(s{i})", f"Im(s{i})"])
    return tuple(labels)


@dataclass(frozen=True)
class SymbolOrdering:
    """
    Permutation of the real symbols. ``perm[k]`` (1-based) is the position in
    the current ordering that moves to position k.
    """
    perm: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise InvalidPermutation(f"Not a permutation of 1..{len(perm)}: {list(self.perm)}")
        object.__setattr__(self, 'perm', perm)

    @classmethod
    def identity(cls, size):
        return cls(tuple(range(1, size + 1)))

    @property
    def indices(self):
        """0-based form of ``perm``."""
        return [p - 1 for p in self.perm]

    def __len__(self):
        return len(self.perm)

    def is_identity(self):
        return self.perm == tuple(range(1, len(self.perm) + 1))

    def matrix(self):
        """P_s with P_s @ x reordering a real symbol vector."""
        size = len(self.perm)
        P = np.zeros((size, size))
        P[np.arange(size), self.indices] = 1.0
        return P


@dataclass(frozen=True, eq=False)
class StbcCode:
    """
    A code over ``kappa`` complex symbols sent from ``nt`` antennas in ``T``
    channel uses. ``weights[k]`` multiplies the real symbol whose canonical
    index (0-based, Re s1, Im s1, Re s2, ...) is ``ordering[k]``.
    """
    name: str
    nt: int
    T: int
    kappa: int
    weights: np.ndarray
    symbol_labels: tuple = ()
    ordering: tuple = ()
    description: str = ''
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        weights = np.array(self.weights, dtype=complex)
        expected = (2 * self.kappa, self.nt, self.T)
        if weights.shape != expected:
            raise DimensionMismatch(f"Weights have shape {weights.shape}, expected {expected}")
        weights.setflags(write=False)
        object.__setattr__(self, 'weights', weights)

        labels = tuple(self.symbol_labels) or canonical_labels(self.kappa)
        if len(labels) != 2 * self.kappa:
            raise DimensionMismatch(f"Expected {2 * self.kappa} symbol labels, got {len(labels)}")
        object.__setattr__(self, 'symbol_labels', labels)

        ordering = tuple(int(k) for k in self.ordering) or tuple(range(2 * self.kappa))
        if sorted(ordering) != list(range(2 * self.kappa)):
            raise InvalidPermutation(f"Invalid canonical ordering {list(ordering)}")
        object.__setattr__(self, 'ordering', ordering)
        object.__setattr__(self, 'warnings', tuple(self.warnings))

    @property
    def dim(self):
        """Number of real symbols, 2 * kappa."""
        return 2 * self.kappa

    @property
    def rate(self):
        return self.kappa / self.T

    @property
    def is_full_rate(self):
        return self.kappa == self.nt * self.T

    def real_vector(self, s):
        """Real symbol vector of complex symbols ``s`` in this code's ordering."""
        s = np.asarray(s)
        if s.shape != (self.kappa,):
            raise DimensionMismatch(f"Expected {self.kappa} complex symbols, got shape {s.shape}")
        return tilde_vec(s)[list(self.ordering)]

    def complex_symbols(self, x):
        """Inverse of :meth:`real_vector`."""
        x = np.asarray(x, dtype=float)
        canonical = np.empty(self.dim)
        canonical[list(self.ordering)] = x
        return canonical[0::2] + 1j * canonical[1::2]

    def canonical(self):
        """Same code with columns in Re s1, Im s1, Re s2, ... order."""
        order = np.argsort(self.ordering)
        return StbcCode(
            name=self.name,
            nt=self.nt,
            T=self.T,
            kappa=self.kappa,
            weights=self.weights[order],
            symbol_labels=tuple(self.symbol_labels[k] for k in order),
            ordering=tuple(range(self.dim)),
            description=self.description,
            warnings=self.warnings,
        )

    def __eq__(self, other):
        if not isinstance(other, StbcCode):
            return NotImplemented
        return (
            self.name == other.name
            and (self.nt, self.T, self.kappa) == (other.nt, other.T, other.kappa)
            and self.symbol_labels == other.symbol_labels
            and self.ordering == other.ordering
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = object.__hash__

    def __repr__(self):
        return f"StbcCode(name={self.name!r}, nt={self.nt}, T={self.T}, kappa={self.kappa})"


def assemble_codeword(code, s):
    """X = sum_k x_k A_k with x the ordered real symbol vector of ``s``."""
    x = code.real_vector(s)
    return np.tensordot(x, code.weights, axes=1)


def generator_matrix(code):
    """Real 2 nt T x 2 kappa matrix whose column k is tilde(vec(A_k))."""
    return np.column_stack([tilde_vec(vec(A)) for A in code.weights])


def apply_ordering(code, ordering, name=None):
    """
    Reorder the real symbols of ``code``; the generator becomes G P_s^t.

    Args:
        code: StbcCode
        ordering: SymbolOrdering or 1-based sequence
        name: optional name for the new code

    Returns:
        StbcCode: the reordered code
    """
    if not isinstance(ordering, SymbolOrdering):
        ordering = SymbolOrdering(tuple(ordering))
    if len(ordering) != code.dim:
        raise InvalidPermutation(f"Permutation of length {len(ordering)} for a code with {code.dim} real symbols")
    idx = ordering.indices
    return StbcCode(
        name=name or code.name,
        nt=code.nt,
        T=code.T,
        kappa=code.kappa,
        weights=code.weights[idx],
        symbol_labels=tuple(code.symbol_labels[k] for k in idx),
        ordering=tuple(code.ordering[k] for k in idx),
        description=code.description,
        warnings=code.warnings,
    )


# ---------------------------------------------------------------------------
# Built-in codes

def _abba():
    weights = [
        np.eye(2),
        np.array([[0, -1], [-1, 0]]),
        np.array([[0, 1j], [1j, 0]]),
        1j * np.eye(2),
    ]
    return StbcCode(
        name='abba', nt=2, T=2, kappa=2, weights=weights,
        symbol_labels=('x1', 'x2', 'x3', 'x4'),
        description='2x2 ABBA code, two groups of two real symbols',
    )


def _silver():
    sqrt7 = math.sqrt(7.0)
    U11 = (1 + 1j) / sqrt7
    U12 = (-1 + 2j) / sqrt7
    U21 = (1 + 2j) / sqrt7
    U22 = (1 - 1j) / sqrt7
    conj = np.conj
    weights = [
        np.eye(2),
        np.array([[1j, 0], [0, -1j]]),
        np.array([[0, -1], [1, 0]]),
        np.array([[0, 1j], [1j, 0]]),
        np.array([[U11, -conj(U21)], [-U21, -conj(U11)]]),
        np.array([[1j * U11, 1j * conj(U21)], [-1j * U21, 1j * conj(U11)]]),
        np.array([[U12, -conj(U22)], [-U22, -conj(U12)]]),
        np.array([[1j * U12, 1j * conj(U22)], [-1j * U22, 1j * conj(U12)]]),
    ]
    return StbcCode(
        name='silver', nt=2, T=2, kappa=4, weights=weights,
        description='Silver code, 2x2, four complex symbols',
    )


def golden_constants():
    """theta, theta_bar, alpha, alpha_bar of the Golden code."""
    sqrt5 = math.sqrt(5.0)
    theta = (1 + sqrt5) / 2
    theta_bar = (1 - sqrt5) / 2
    alpha = 1 + 1j - 1j * theta
    alpha_bar = 1 + 1j - 1j * theta_bar
    return theta, theta_bar, alpha, alpha_bar


def _golden_canonical():
    theta, theta_bar, alpha, alpha_bar = golden_constants()
    D1 = np.diag([alpha, alpha_bar])
    D2 = np.diag([alpha * theta, alpha_bar * theta_bar])
    e = np.array([[0, 1], [1j, 0]])
    scale = 1 / math.sqrt(5.0)
    weights = [D1, 1j * D1, D2, 1j * D2, D1 @ e, 1j * D1 @ e, D2 @ e, 1j * D2 @ e]
    return StbcCode(
        name='golden', nt=2, T=2, kappa=4,
        weights=[scale * A for A in weights],
        description='Golden code, 2x2, full rate and full diversity',
    )


GOLDEN_ORDERING = (1, 3, 2, 4, 5, 7, 6, 8)


def _golden():
    return apply_ordering(_golden_canonical(), GOLDEN_ORDERING)


BUILTIN_CODES = {
    'abba': _abba,
    'silver': _silver,
    'golden': _golden,
}


def builtin(name):
    """Return one of the shipped codes: abba, silver or golden."""
    try:
        factory = BUILTIN_CODES[name.lower()]
    except KeyError:
        raise UnknownCode(f"Unknown code '{name}'. Built-in codes: {', '.join(BUILTIN_CODES)}")
    return factory()


# ---------------------------------------------------------------------------
# JSON code definitions

def code_to_dict(code):
    """Serialise to the code-definition layout (row-major [re, im] pairs)."""
    data = {
        'name': code.name,
        'nt': code.nt,
        'T': code.T,
        'kappa': code.kappa,
        'symbol_labels': list(code.symbol_labels),
        'weights': [
            [[[float(z.real), float(z.imag)] for z in row] for row in A]
            for A in code.weights
        ],
    }
    if code.ordering != tuple(range(code.dim)):
        data['ordering'] = [k + 1 for k in code.ordering]
    if code.description:
        data['description'] = code.description
    return data


def _positive_int(data, key, errors):
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        errors.append(ValidationError(f"'{key}' must be a positive integer, got {value!r}", code='schema'))
        return None
    return value


def _parse_weights(raw, nt, T, dim, errors):
    if not isinstance(raw, list):
        errors.append(ValidationError("'weights' must be a list of matrices", code='schema'))
        return None
    if len(raw) != dim:
        errors.append(ValidationError(
            f"'weights' has {len(raw)} matrices, expected 2*kappa = {dim}", code='schema'))
        return None

    weights = np.zeros((dim, nt, T), dtype=complex)
    for k, matrix in enumerate(raw, start=1):
        if not isinstance(matrix, list) or len(matrix) != nt:
            errors.append(ValidationError(f"Weight {k}: expected {nt} rows", code='dimension'))
            continue
        for r, row in enumerate(matrix):
            if not isinstance(row, list) or len(row) != T:
                errors.append(ValidationError(f"Weight {k}, row {r + 1}: expected {T} entries", code='dimension'))
                continue
            for c, entry in enumerate(row):
                if (not isinstance(entry, list) or len(entry) != 2
                        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
                    errors.append(ValidationError(
                        f"Weight {k}, entry ({r + 1},{c + 1}): expected [re, im] numbers", code='schema'))
                    continue
                if not all(math.isfinite(v) for v in entry):
                    errors.append(ValidationError(
                        f"Weight {k}, entry ({r + 1},{c + 1}) is not finite", code='non_finite'))
                    continue
                weights[k - 1, r, c] = complex(entry[0], entry[1])
    return weights


def code_from_dict(data):
    """
    Build a code from its dictionary form, collecting every problem found.

    Raises:
        CodeSchemaError: with one message per violation
    """
    errors = []
    if not isinstance(data, dict):
        raise CodeSchemaError([ValidationError("Code definition must be a JSON object", code='schema')])

    name = data.get('name')
    if not isinstance(name, str) or not name:
        errors.append(ValidationError("'name' must be a non-empty string", code='schema'))
    nt = _positive_int(data, 'nt', errors)
    T = _positive_int(data, 'T', errors)
    kappa = _positive_int(data, 'kappa', errors)
    if None in (nt, T, kappa):
        raise CodeSchemaError(errors)
    dim = 2 * kappa

    labels = data.get('symbol_labels')
    if (not isinstance(labels, list) or len(labels) != dim
            or not all(isinstance(label, str) for label in labels)):
        errors.append(ValidationError(f"'symbol_labels' must list {dim} strings", code='schema'))

    ordering = data.get('ordering')
    if ordering is not None:
        if (not isinstance(ordering, list)
                or sorted(o for o in ordering if isinstance(o, int)) != list(range(1, dim + 1))):
            errors.append(ValidationError(f"'ordering' must be a permutation of 1..{dim}", code='schema'))

    description = data.get('description', '')
    if not isinstance(description, str):
        errors.append(ValidationError("'description' must be a string", code='schema'))

    weights = _parse_weights(data.get('weights'), nt, T, dim, errors)
    if errors:
        raise CodeSchemaError(errors)

    code = StbcCode(
        name=name, nt=nt, T=T, kappa=kappa, weights=weights,
        symbol_labels=tuple(labels),
        ordering=tuple(o - 1 for o in ordering) if ordering else (),
        description=description,
    )
    rank = numerical_rank(generator_matrix(code), tol=LINEAR_INDEPENDENCE_TOLERANCE)
    if rank < dim:
        message = f"Weight matrices are linearly dependent: rank(G) = {rank} < {dim}"
        logger.warning(f"Code '{name}': {message}")
        code = StbcCode(
            name=code.name, nt=nt, T=T, kappa=kappa, weights=code.weights,
            symbol_labels=code.symbol_labels, ordering=code.ordering,
            description=code.description, warnings=(message,),
        )
    return code


def load_code(path):
    """Read a code definition file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise CodeSchemaError([ValidationError(f"Code file not found: {path}", code='missing')])
    except json.JSONDecodeError as e:
        raise CodeSchemaError([ValidationError(f"Invalid JSON in {path}: {e}", code='schema')])
    return code_from_dict(data)


def save_code(code, path):
    path = Path(path)
    path.write_text(json.dumps(code_to_dict(code), indent=2) + '\n')
    logger.info(f"Saved code '{code.name}' to {path}")
    return path
