"""
Channel-free orthogonality criteria on pairs of weight matrices.

For weights A_i, A_j let C = A_i A_j^H. The columns i and j of the
equivalent channel satisfy, for every channel H with K = H^H H,

    <h_i, h_j> = sum_q K_qq c1_qq / 2
                 + sum_{q<p} (Re K_qp c1_qp - Im K_qp c2_qp) / 2

with c1_qp = Tr(C_qp + C_pq) (p >= q) and c2_qp = Tr(i (C_qp - C_pq))
(p > q). The columns are orthogonal for every channel exactly when all c1
and all c2 sums vanish, which is also the Hurwitz-Radon identity
A_i A_j^H + A_j A_i^H = 0 written component by component.

Pair indices in the public API are 1-based.
"""
import logging
from dataclasses import asdict, dataclass

import numpy as np

from core.exceptions import DimensionMismatch
from core.services.linalg import gram_matrix_M, trace_form
from core.services.patterns import ZeroPattern, propagate_orthogonality

logger = logging.getLogger(__name__)

# A condition sum is zero when |sum| <= ZERO_TOLERANCE * (sum of |summands|)
ZERO_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    residual: float
    scale: float

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class PairVerdict:
    i: int
    j: int
    cond_c1: bool
    cond_c2: bool
    c1_residual: float
    c2_residual: float
    hr_orthogonal: bool
    hrqf_value: float
    predicted_column_orthogonality: bool
    either_condition: bool
    component_test: bool

    @property
    def both_conditions(self):
        return self.cond_c1 and self.cond_c2

    def to_dict(self):
        data = asdict(self)
        data['both_conditions'] = self.both_conditions
        return data


def _pair(code, i, j):
    n = code.dim
    if not (1 <= i <= n and 1 <= j <= n):
        raise DimensionMismatch(f"Pair ({i}, {j}) out of range 1..{n}")
    if i == j:
        raise DimensionMismatch(f"Pair criteria need distinct indices, got ({i}, {j})")
    return code.weights[i - 1], code.weights[j - 1]


def _products(Ai, Aj):
    """C = A_i A_j^H and the matching magnitude bound S = |A_i| |A_j|^t."""
    return Ai @ Aj.conj().T, np.abs(Ai) @ np.abs(Aj).T


def _condition(values, scales):
    if values.size == 0:
        return ConditionResult(True, 0.0, 0.0)
    residual = float(np.max(np.abs(values)))
    holds = bool(np.all(np.abs(values) <= ZERO_TOLERANCE * scales))
    return ConditionResult(holds, residual, float(np.max(scales)))


def c1_sums(code, i, j):
    """c1_qp for q <= p, with the matching summand magnitudes."""
    C, S = _products(*_pair(code, i, j))
    q, p = np.triu_indices(code.nt)
    return trace_form(C[q, p] + C[p, q]), 2 * (S[q, p] + S[p, q])


def c2_sums(code, i, j):
    """c2_qp for q < p, with the matching summand magnitudes."""
    C, S = _products(*_pair(code, i, j))
    q, p = np.triu_indices(code.nt, k=1)
    return trace_form(1j * (C[q, p] - C[p, q])), 2 * (S[q, p] + S[p, q])


def check_c1(code, i, j):
    """First trace condition, including the diagonal terms q = p."""
    return _condition(*c1_sums(code, i, j))


def check_c2(code, i, j):
    """Second trace condition, strictly off-diagonal q < p."""
    return _condition(*c2_sums(code, i, j))


def predict_column_orthogonality(code, i, j):
    """
    True when columns i and j of H_eq are orthogonal for every channel,
    i.e. both trace conditions hold.
    """
    return bool(check_c1(code, i, j)) and bool(check_c2(code, i, j))


def hr_matrix(code, i, j):
    Ai, Aj = _pair(code, i, j)
    return Ai @ Aj.conj().T + Aj @ Ai.conj().T


def hr_mutual_orthogonality(code, i, j):
    """
    A_i A_j^H + A_j A_i^H == 0, checked on the matrix and cross-checked on
    its real and imaginary components, which are the c1 and c2 sums.
    """
    F = hr_matrix(code, i, j)
    _, S = _products(*_pair(code, i, j))
    matrix_route = bool(np.all(np.abs(F) <= ZERO_TOLERANCE * 2 * (S + S.T)))
    component_route = predict_column_orthogonality(code, i, j)
    if matrix_route != component_route:
        logger.error(
            f"HR check disagreement on {code.name} pair ({i},{j}): "
            f"matrix={matrix_route} components={component_route}"
        )
    return matrix_route


def unsymmetrised_component_test(code, i, j):
    """
    The stronger componentwise test Tr(C_pq) = Tr(i C_pq) = 0 for all
    p <= q, without symmetrisation. It is sufficient for HR orthogonality
    but not necessary; reported as a diagnostic only.
    """
    C, S = _products(*_pair(code, i, j))
    p, q = np.triu_indices(code.nt)
    values = np.concatenate([trace_form(C[p, q]), trace_form(1j * C[p, q])])
    scales = np.concatenate([2 * S[p, q], 2 * S[p, q]])
    return _condition(values, scales)


def hrqf_matrix(code):
    """U_ij = ||A_i A_j^H + A_j A_i^H||_F^2, diagonal included."""
    W = code.weights
    C = np.einsum('iqt,jpt->ijqp', W, W.conj())
    F = C + np.swapaxes(C, 0, 1)
    return np.sum(np.abs(F) ** 2, axis=(2, 3))


def pair_verdict(code, i, j, hrqf=None):
    c1 = check_c1(code, i, j)
    c2 = check_c2(code, i, j)
    U = hrqf_matrix(code) if hrqf is None else hrqf
    return PairVerdict(
        i=i,
        j=j,
        cond_c1=c1.holds,
        cond_c2=c2.holds,
        c1_residual=c1.residual,
        c2_residual=c2.residual,
        hr_orthogonal=hr_mutual_orthogonality(code, i, j),
        hrqf_value=float(U[i - 1, j - 1]),
        predicted_column_orthogonality=c1.holds and c2.holds,
        either_condition=c1.holds or c2.holds,
        component_test=unsymmetrised_component_test(code, i, j).holds,
    )


def verdict_table(code):
    """PairVerdicts for every i < j."""
    U = hrqf_matrix(code)
    return [
        pair_verdict(code, i, j, hrqf=U)
        for i in range(1, code.dim + 1)
        for j in range(i + 1, code.dim + 1)
    ]


def orthogonality_matrix(code):
    """Symmetric boolean matrix of predicted column orthogonality (diagonal False)."""
    n = code.dim
    W = code.weights
    A = np.abs(W)
    C = np.einsum('iqt,jpt->ijqp', W, W.conj())
    S = np.einsum('iqt,jpt->ijqp', A, A)
    q1, p1 = np.triu_indices(code.nt)
    q2, p2 = np.triu_indices(code.nt, k=1)

    c1 = trace_form(C[:, :, q1, p1] + C[:, :, p1, q1])
    s1 = 2 * (S[:, :, q1, p1] + S[:, :, p1, q1])
    c2 = trace_form(1j * (C[:, :, q2, p2] - C[:, :, p2, q2]))
    s2 = 2 * (S[:, :, q2, p2] + S[:, :, p2, q2])

    ok = np.all(np.abs(c1) <= ZERO_TOLERANCE * s1, axis=2)
    if q2.size:
        ok &= np.all(np.abs(c2) <= ZERO_TOLERANCE * s2, axis=2)
    ok[np.arange(n), np.arange(n)] = False
    return ok


def hr_orthogonality_matrix(code):
    n = code.dim
    ok = np.zeros((n, n), dtype=bool)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ok[i - 1, j - 1] = ok[j - 1, i - 1] = hr_mutual_orthogonality(code, i, j)
    return ok


def hrqf_predicted_pattern(code):
    """Zeros the HRQF criteria certify: U_ij = 0 pairs pushed through the Gram-Schmidt induction."""
    return ZeroPattern(propagate_orthogonality(hr_orthogonality_matrix(code)), source='hrqf')


def proof_terms(code, i, j, H):
    """
    Per-column decomposition of <h_i, h_j> for channel H.

    Returns:
        tuple: arrays (a_terms, b_terms) of length T whose total sum equals
        the inner product of columns i and j of H_eq
    """
    Ai, Aj = _pair(code, i, j)
    H = np.atleast_2d(H)
    if H.shape[1] != code.nt:
        raise DimensionMismatch(f"Channel has {H.shape[1]} columns, code has nt = {code.nt}")
    M = gram_matrix_M(H)
    nt = code.nt
    a_terms = np.zeros(code.T)
    b_terms = np.zeros(code.T)
    for l in range(code.T):
        a, b = Ai[:, l], Aj[:, l]
        for q in range(nt):
            a_terms[l] += 0.5 * M[2 * q, 2 * q] * trace_form(a[q] * np.conj(b[q]))
            for p in range(q + 1, nt):
                a_terms[l] += 0.5 * M[2 * q, 2 * p] * trace_form(
                    a[q] * np.conj(b[p]) + a[p] * np.conj(b[q]))
                b_terms[l] += 0.5 * M[2 * q, 2 * p + 1] * trace_form(
                    1j * (a[q] * np.conj(b[p]) - a[p] * np.conj(b[q])))
    return a_terms, b_terms


def condition_map(code):
    """
    2kappa x 2kappa characters: 'B' both conditions, '1' only c1, '2' only
    c2, '.' neither, '#' diagonal.
    """
    n = code.dim
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            if i == j:
                row.append('#')
                continue
            c1, c2 = check_c1(code, i, j).holds, check_c2(code, i, j).holds
            row.append('B' if c1 and c2 else '1' if c1 else '2' if c2 else '.')
        rows.append(''.join(row))
    return rows
