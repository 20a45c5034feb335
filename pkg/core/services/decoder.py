"""
Maximum-likelihood decoding of the real-valued model y = H_eq x + z:
an exhaustive oracle, a depth-first sphere decoder that follows the zero
structure of R, and a Monte Carlo harness.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from core.exceptions import CodebookTooLarge, DimensionMismatch
from core.services.codes import generator_matrix
from core.services.linalg import _require_finite, gram_schmidt_qr
from core.services.patterns import unstructured_layout
from core.services.structure import ChannelModel, default_channel, empirical_pattern, equivalent_channel

logger = logging.getLogger(__name__)

# cross-group entries of R above this (relative to ||R||_F) invalidate a layout
LAYOUT_TOLERANCE = 1e-8
ORACLE_CHUNK = 1 << 15


def gray_code(k):
    return k ^ (k >> 1)


@dataclass(frozen=True)
class Constellation:
    """
    Square 2^q-QAM seen per real dimension: 2^(q/2) odd-integer PAM levels
    scaled to unit average complex-symbol energy, Gray labelled.
    """
    q: int

    def __post_init__(self):
        if self.q < 2 or self.q % 2:
            raise ValueError(f"q must be a positive even number of bits, got {self.q}")

    @property
    def size(self):
        """Levels per real dimension."""
        return 2 ** (self.q // 2)

    @property
    def bits_per_dimension(self):
        return self.q // 2

    @property
    def scale(self):
        m = self.size
        return math.sqrt(3.0 / (2.0 * (m * m - 1)))

    @property
    def alphabet(self):
        m = self.size
        return self.scale * (2.0 * np.arange(m) - (m - 1))

    def labels(self):
        """Gray label bits per level, shape (size, bits_per_dimension)."""
        width = self.bits_per_dimension
        return np.array(
            [[(gray_code(k) >> (width - 1 - b)) & 1 for b in range(width)] for k in range(self.size)],
            dtype=np.uint8,
        )

    def indices(self, x):
        """Nearest level index per entry."""
        x = np.asarray(x, dtype=float)
        return np.argmin(np.abs(x[..., None] - self.alphabet), axis=-1)

    def __str__(self):
        return f"{2 ** self.q}-QAM"


@dataclass
class DecodeResult:
    s_hat: np.ndarray
    metric: float
    nodes_visited: int
    full_metric: float = None
    is_ml: bool = None
    layout: object = field(default=None, repr=False)

    def to_dict(self):
        return {
            's_hat': [float(v) for v in self.s_hat],
            'metric': self.metric,
            'full_metric': self.full_metric,
            'nodes_visited': self.nodes_visited,
            'is_ml': self.is_ml,
        }


def _prepare(y, H_eq):
    H_eq = np.asarray(_require_finite(H_eq), dtype=float)
    y = np.asarray(_require_finite(y), dtype=float).ravel()
    if y.shape[0] != H_eq.shape[0]:
        raise DimensionMismatch(f"y has {y.shape[0]} entries, H_eq has {H_eq.shape[0]} rows")
    return y, H_eq


def ml_oracle(y, H_eq, constellation):
    """
    Exact ML decision by evaluating ||y - H_eq x||^2 over the whole codebook.

    Raises:
        CodebookTooLarge: when 2^(q kappa) exceeds 2^STBC_FSD_ORACLE_MAX_BITS
    """
    y, H_eq = _prepare(y, H_eq)
    dim = H_eq.shape[1]
    bits = constellation.bits_per_dimension * dim
    limit = settings.STBC_FSD_ORACLE_MAX_BITS
    if bits > limit:
        raise CodebookTooLarge(bits, limit)

    alphabet = constellation.alphabet
    hypotheses = itertools.product(range(constellation.size), repeat=dim)
    best_metric = math.inf
    best = None
    evaluated = 0
    while True:
        chunk = np.array(list(itertools.islice(hypotheses, ORACLE_CHUNK)), dtype=int)
        if chunk.size == 0:
            break
        X = alphabet[chunk]
        metrics = np.sum((y[None, :] - X @ H_eq.T) ** 2, axis=1)
        evaluated += len(X)
        k = int(np.argmin(metrics))
        if metrics[k] < best_metric:
            best_metric = float(metrics[k])
            best = X[k].copy()

    Q, R = gram_schmidt_qr(H_eq)
    projected = float(np.sum((Q.T @ y - R @ best) ** 2))
    return DecodeResult(s_hat=best, metric=projected, nodes_visited=evaluated, full_metric=best_metric, is_ml=True)


class _DepthFirst:
    """Schnorr-Euchner enumeration over an upper-triangular system."""

    def __init__(self, alphabet):
        self.alphabet = alphabet
        self.nodes = 0

    def search(self, R, z, radius, leaf=None):
        """
        Smallest ||z - R x||^2 below ``radius``. ``leaf(x, metric, radius)``
        may extend a complete x and return (total, payload) or None.

        Returns:
            tuple: (metric, payload) or (radius, None) when nothing is inside
        """
        k = len(z)
        x = np.zeros(k)
        best = [radius, None]

        def complete(metric):
            if leaf is None:
                return metric, x.copy()
            return leaf(x, metric, best[0])

        if k == 0:
            found = complete(0.0)
            if found is not None and found[0] < best[0]:
                best[:] = found
            return tuple(best)

        def visit(level, partial):
            rhs = z[level] - R[level, level + 1:] @ x[level + 1:]
            increments = (rhs - R[level, level] * self.alphabet) ** 2
            self.nodes += len(increments)
            for idx in np.argsort(increments, kind='stable'):
                metric = partial + increments[idx]
                if metric >= best[0]:
                    break
                x[level] = self.alphabet[idx]
                if level == 0:
                    found = complete(metric)
                    if found is not None and found[0] < best[0]:
                        best[:] = found
                else:
                    visit(level - 1, metric)

        visit(k - 1, 0.0)
        return tuple(best)


def layout_fits(R, layout):
    """True when R's cross-group entries inside the first L symbols vanish."""
    scale = np.linalg.norm(R)
    for a, (start, stop) in enumerate(layout.partition.ranges()):
        for other_start, other_stop in layout.partition.ranges()[a + 1:]:
            if np.any(np.abs(R[start:stop, other_start:other_stop]) > LAYOUT_TOLERANCE * scale):
                return False
    return True


def sphere_decode(y, H_eq, constellation, pattern=None, layout=None):
    """
    Exact ML decision by depth-first search with an infinite initial radius.

    With a zero pattern the last 2kappa - L symbols are enumerated as an outer
    tree and, below each outer leaf, the independent groups of the first L
    symbols are searched separately, each inside the radius left over.

    Args:
        y: real received vector
        H_eq: real equivalent channel, full column rank
        constellation: Constellation
        pattern: optional ZeroPattern of R
        layout: optional DecodingLayout, overrides ``pattern``

    Returns:
        DecodeResult

    Raises:
        RankDeficient: when H_eq is not full column rank
    """
    y, H_eq = _prepare(y, H_eq)
    dim = H_eq.shape[1]
    Q, R = gram_schmidt_qr(H_eq)
    z = Q.T @ y

    if layout is None:
        layout = pattern.decoding_layout(constellation.q) if pattern is not None else unstructured_layout(dim)
    if layout.dim != dim:
        raise DimensionMismatch(f"Layout is for {layout.dim} symbols, H_eq has {dim} columns")
    if not layout_fits(R, layout):
        logger.warning("Zero pattern does not match this channel's R, decoding without structure")
        layout = unstructured_layout(dim)

    L = layout.L
    groups = layout.partition.ranges()
    engine = _DepthFirst(constellation.alphabet)

    def inner(x_outer, outer_metric, radius):
        b = z[:L] - R[:L, L:] @ x_outer
        running = outer_metric
        x = np.empty(dim)
        x[L:] = x_outer
        for start, stop in groups:
            metric, x_group = engine.search(R[start:stop, start:stop], b[start:stop], radius - running)
            if x_group is None:
                return None
            running += metric
            x[start:stop] = x_group
        return running, x

    metric, s_hat = engine.search(R[L:, L:], z[L:], math.inf, leaf=inner if L else None)
    metric = float(np.sum((z - R @ s_hat) ** 2))
    full_metric = float(np.sum((y - H_eq @ s_hat) ** 2))
    return DecodeResult(
        s_hat=s_hat,
        metric=metric,
        nodes_visited=engine.nodes,
        full_metric=full_metric,
        layout=layout,
    )


# ---------------------------------------------------------------------------
# Monte Carlo

def code_scale(code, G=None):
    """Factor bringing E||X||_F^2 to nt T for unit-energy symbols."""
    G = generator_matrix(code) if G is None else G
    return math.sqrt(code.nt * code.T / (np.sum(G ** 2) / 2.0))


def noise_level(code, snr_db):
    """Noise variance per real dimension for Es/N0 ``snr_db`` per receive antenna."""
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"SNR must be a number of dB or inf, got {snr_db}")
    if snr_db == math.inf:
        return 0.0
    return code.nt / (2.0 * 10 ** (snr_db / 10.0))


@dataclass
class _Outcome:
    bit_errors: int
    symbol_errors: int
    nodes: int
    agrees: bool = None


def _run_trial(code, constellation, channel, G, c, n0, layout, snr_index, trial, oracle):
    rng = np.random.default_rng([channel.seed, snr_index, trial])
    labels = constellation.labels()
    sent = rng.integers(constellation.size, size=code.dim)
    x = constellation.alphabet[sent]
    H_eq = c * equivalent_channel(code, channel.draw(code.nt, rng), G)
    y = H_eq @ x + math.sqrt(n0) * rng.standard_normal(H_eq.shape[0])

    result = sphere_decode(y, H_eq, constellation, layout=layout)
    decided = constellation.indices(result.s_hat)
    bit_errors = int(np.sum(labels[sent] != labels[decided]))

    wrong = decided != sent
    canonical = np.zeros(code.dim, dtype=bool)
    canonical[list(code.ordering)] = wrong
    symbol_errors = int(np.sum(canonical[0::2] | canonical[1::2]))

    agrees = None
    if oracle:
        agrees = bool(np.array_equal(ml_oracle(y, H_eq, constellation).s_hat, result.s_hat))
    return _Outcome(bit_errors, symbol_errors, result.nodes_visited, agrees)


def monte_carlo(code, constellation, snr_grid, trials, seed=None, n_r=None,
                structured=True, pattern=None, oracle_check=False, workers=None):
    """
    BER, SER and node statistics of sphere decoding over Rayleigh fading.

    Trial t at SNR index k draws symbols, channel and noise from the stream
    (seed, k, t); results do not depend on ``workers``.

    Args:
        code: StbcCode
        constellation: Constellation
        snr_grid: SNR values in dB (Es/N0 per receive antenna)
        trials: instances per SNR point
        seed: defaults to STBC_FSD_SEED
        n_r: receive antennas, defaults to max(nt, ceil(kappa / T))
        structured: decode with the code's measured zero pattern
        pattern: ZeroPattern to use instead of measuring one
        oracle_check: compare every decision with ml_oracle
        workers: thread count, defaults to STBC_FSD_THREADS

    Returns:
        list: one dict per SNR point
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    channel = default_channel(code, seed)
    if n_r is not None:
        channel = ChannelModel(n_r=n_r, seed=channel.seed)
    workers = settings.STBC_FSD_THREADS if workers is None else workers

    if structured:
        pattern = pattern if pattern is not None else empirical_pattern(code, channel)
        layout = pattern.decoding_layout(constellation.q)
    else:
        layout = unstructured_layout(code.dim)

    if oracle_check:
        bits = constellation.bits_per_dimension * code.dim
        if bits > settings.STBC_FSD_ORACLE_MAX_BITS:
            logger.warning(
                f"Skipping oracle check for {code.name}: 2^{bits} hypotheses "
                f"exceed 2^{settings.STBC_FSD_ORACLE_MAX_BITS}"
            )
            oracle_check = False

    G = generator_matrix(code)
    c = code_scale(code, G)
    rows = []
    for k, snr_db in enumerate(snr_grid):
        n0 = noise_level(code, snr_db)

        def run(trial):
            return _run_trial(code, constellation, channel, G, c, n0, layout, k, trial, oracle_check)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run, range(trials)))
        else:
            outcomes = [run(t) for t in range(trials)]

        nodes = np.array([o.nodes for o in outcomes])
        row = {
            'snr_db': float(snr_db),
            'ber': sum(o.bit_errors for o in outcomes) / (trials * code.dim * constellation.bits_per_dimension),
            'ser': sum(o.symbol_errors for o in outcomes) / (trials * code.kappa),
            'mean_nodes': float(nodes.mean()),
            'p95_nodes': float(np.percentile(nodes, 95)),
            'max_nodes': int(nodes.max()),
            'node_bound': layout.node_bound(constellation.q),
        }
        if oracle_check:
            row['oracle_agreement'] = sum(o.agrees for o in outcomes) / trials
        rows.append(row)
        logger.info(
            f"{code.name} {constellation} at {snr_db} dB: BER {row['ber']:.3e}, "
            f"mean nodes {row['mean_nodes']:.1f}"
        )
    return rows
