"""
Zero structure of R: measurement over random channels, channel-free
prediction, family classification, complexity accounting, comparison with
the HRQF prediction and symbol-ordering search.
"""
import heapq
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from core.exceptions import DependentWeights, DimensionMismatch, RankDeficient, SearchOverflow, UnderDetermined
from core.services.codes import LINEAR_INDEPENDENCE_TOLERANCE, SymbolOrdering, apply_ordering, generator_matrix
from core.services.criteria import hrqf_predicted_pattern, orthogonality_matrix
from core.services.linalg import check_realify, gram_schmidt_qr, numerical_rank
from core.services.patterns import (
    DecodingLayout,
    OrderedPartition,
    ZeroPattern,
    propagate_orthogonality,
    unstructured_layout,
)

logger = logging.getLogger(__name__)

# |R_ij| < STRUCTURAL_ZERO * ||R||_F in every trial marks a structural zero
STRUCTURAL_ZERO = 1e-9
MAX_REDRAWS = 10
KEPT_SAMPLES = 16
PROBE_SEED = 0x5EED
PROBE_CHANNELS = 3
EXHAUSTIVE_LIMIT = 12
SEARCH_MODES = ('exhaustive', 'heuristic')

FAMILIES = (
    'g_group',
    'fast_decodable',
    'fast_group_decodable',
    'block_orthogonal',
    'unstructured',
)


@dataclass(frozen=True)
class ChannelModel:
    """I.i.d. circularly-symmetric complex Gaussian entries, unit variance."""
    n_r: int
    seed: int = 42

    def __post_init__(self):
        if self.n_r < 1:
            raise DimensionMismatch(f"Need at least one receive antenna, got {self.n_r}")

    def rng(self, *index):
        """Independent stream for work item ``index``; schedule-independent."""
        return np.random.default_rng([self.seed, *index])

    def draw(self, nt, rng):
        shape = (self.n_r, nt)
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def default_channel(code, seed=None):
    """n_r = n_t, or the smallest n_r giving a square-or-tall H_eq."""
    n_r = max(code.nt, math.ceil(code.kappa / code.T))
    return ChannelModel(n_r=n_r, seed=settings.STBC_FSD_SEED if seed is None else seed)


def equivalent_channel(code, H, G=None):
    """
    H_eq = (I_T kron check(H)) G.

    Args:
        code: StbcCode
        H: complex n_r x n_t channel
        G: optional precomputed generator matrix

    Returns:
        numpy.ndarray: real 2 n_r T x 2 kappa matrix
    """
    H = np.atleast_2d(H)
    if H.shape[1] != code.nt:
        raise DimensionMismatch(f"Channel has {H.shape[1]} transmit columns, code has nt = {code.nt}")
    G = generator_matrix(code) if G is None else G
    return np.kron(np.eye(code.T), check_realify(H)) @ G


def _require_determined(code, n_r):
    rows = 2 * n_r * code.T
    if rows < code.dim:
        raise UnderDetermined(rows, code.dim)


def _measure_trial(code, channel, G, index, row_permutation):
    error = None
    for attempt in range(MAX_REDRAWS):
        H = channel.draw(code.nt, channel.rng(index, attempt))
        H_eq = equivalent_channel(code, H, G)
        if row_permutation is not None:
            H_eq = H_eq[row_permutation]
        try:
            _, R = gram_schmidt_qr(H_eq)
        except RankDeficient as e:
            logger.warning(f"Trial {index}: degenerate channel draw ({e}), redrawing")
            error = e
            continue
        return R, attempt
    logger.error(f"Trial {index}: no full-rank channel after {MAX_REDRAWS} draws")
    raise error


def empirical_pattern(code, channel, trials=None, row_permutation=None, workers=None):
    """
    Measure the zero structure of R over ``trials`` channel draws.

    An entry is a structural zero when |R_ij| < 1e-9 ||R||_F in all trials.
    Trial t uses the stream (seed, t, attempt), so the result does not
    depend on ``workers``.

    Args:
        code: StbcCode
        channel: ChannelModel
        trials: number of draws, defaults to STBC_FSD_TRIALS
        row_permutation: optional 0-based row order applied to H_eq
        workers: thread count, defaults to STBC_FSD_THREADS

    Returns:
        ZeroPattern: with max |R_ij| per entry and a few R samples

    Raises:
        UnderDetermined: when 2 n_r T < 2 kappa
        DependentWeights: when the weight matrices are linearly dependent
    """
    trials = settings.STBC_FSD_TRIALS if trials is None else trials
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    _require_determined(code, channel.n_r)
    if row_permutation is not None:
        row_permutation = list(row_permutation)
        if sorted(row_permutation) != list(range(2 * channel.n_r * code.T)):
            raise DimensionMismatch("Row permutation does not match the rows of H_eq")

    G = generator_matrix(code)
    rank = numerical_rank(G, tol=LINEAR_INDEPENDENCE_TOLERANCE)
    if rank < code.dim:
        raise DependentWeights(rank, code.dim)
    workers = settings.STBC_FSD_THREADS if workers is None else workers

    def run(index):
        return _measure_trial(code, channel, G, index, row_permutation)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]

    n = code.dim
    zero = np.ones((n, n), dtype=bool)
    max_abs = np.zeros((n, n))
    redraws = 0
    relatives = []
    for R, attempt in results:
        redraws += attempt
        relative = np.abs(R) / np.linalg.norm(R)
        relatives.append(relative)
        zero &= relative < STRUCTURAL_ZERO
        max_abs = np.maximum(max_abs, np.abs(R))
    mask = np.triu(zero, k=1)
    largest_zero = max((float(r[mask].max()) for r in relatives), default=0.0) if mask.any() else 0.0

    stats = {
        'trials': trials,
        'n_r': channel.n_r,
        'seed': channel.seed,
        'redraws': redraws,
        'largest_relative_zero': largest_zero,
    }
    logger.debug(f"Empirical pattern of {code.name}: {int(mask.sum())} zeros over {trials} trials")
    return ZeroPattern(
        mask,
        max_abs=max_abs,
        source='empirical',
        stats=stats,
        samples=[R for R, _ in results[:KEPT_SAMPLES]],
    )


def channel_invariance(code, nr_values, seeds, trials=None):
    """
    Measure the pattern for every (n_r, seed) combination.

    Returns:
        dict: ``invariant`` flag, the reference zero list and any deviating runs
    """
    reference = None
    deviations = []
    for n_r in nr_values:
        for seed in seeds:
            pattern = empirical_pattern(code, ChannelModel(n_r=n_r, seed=seed), trials)
            if reference is None:
                reference = pattern
            elif pattern != reference:
                deviations.append({'n_r': n_r, 'seed': seed, 'zeros': pattern.zeros()})
    return {
        'invariant': not deviations,
        'zeros': reference.zeros() if reference is not None else [],
        'deviations': deviations,
    }


# ---------------------------------------------------------------------------
# Block-orthogonal structure

def block_orthogonal_candidates(dim):
    """(Gamma, k, gamma) with Gamma k gamma = dim, Gamma >= 2, k >= 2; largest Gamma first, then largest k."""
    found = []
    for Gamma in range(dim, 1, -1):
        if dim % Gamma:
            continue
        layer = dim // Gamma
        for k in range(layer, 1, -1):
            if layer % k == 0:
                found.append((Gamma, k, layer // k))
    return found


def _layers(params):
    Gamma, k, gamma = params
    size = k * gamma
    return [(t * size, (t + 1) * size) for t in range(Gamma)]


def _sub_block_pairs(start, params):
    """(i, j) in one layer lying in different sub-blocks."""
    _, k, gamma = params
    pairs = []
    for a in range(k):
        for b in range(a + 1, k):
            for i in range(start + a * gamma, start + (a + 1) * gamma):
                for j in range(start + b * gamma, start + (b + 1) * gamma):
                    pairs.append((i, j))
    return pairs


def _block_diagonal(matrix, params):
    """True when off-sub-block entries of a layer-sized matrix are negligible."""
    _, k, gamma = params
    scale = np.linalg.norm(matrix)
    if scale == 0.0:
        return True
    mask = np.ones(matrix.shape, dtype=bool)
    for a in range(k):
        mask[a * gamma:(a + 1) * gamma, a * gamma:(a + 1) * gamma] = False
    return bool(np.all(np.abs(matrix[mask]) <= STRUCTURAL_ZERO * scale))


def _gram_schur_term(gram, layer):
    start, stop = layer
    before = gram[:start, :start]
    cross = gram[:start, start:stop]
    return cross.T @ np.linalg.solve(before, cross)


def probe_grams(code, count=PROBE_CHANNELS):
    """H_eq^t H_eq on fixed channel draws, used to certify value conditions."""
    channel = ChannelModel(n_r=max(code.nt, math.ceil(code.kappa / code.T)), seed=PROBE_SEED)
    G = generator_matrix(code)
    grams = []
    for index in range(count):
        H_eq = equivalent_channel(code, channel.draw(code.nt, channel.rng(index)), G)
        grams.append(H_eq.T @ H_eq)
    return grams


def _full_rank(gram):
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return False
    return True


def _predicted_mask(orthogonal, grams):
    """
    Pairwise induction, completed by every block-orthogonal layering whose
    conditions are certified: pairwise orthogonality across sub-blocks of a
    layer, E^t E block diagonal and full rank on the probe channels.
    """
    zero = propagate_orthogonality(orthogonal)
    n = zero.shape[0]
    fitted = []
    for params in block_orthogonal_candidates(n):
        layers = _layers(params)
        first = _sub_block_pairs(0, params)
        if not all(zero[i, j] for i, j in first):
            continue
        later = [_sub_block_pairs(start, params) for start, _ in layers[1:]]
        if not all(orthogonal[i, j] for pairs in later for i, j in pairs):
            continue
        if not all(_full_rank(gram) for gram in grams):
            continue
        if not all(_block_diagonal(_gram_schur_term(gram, layer), params)
                   for gram in grams for layer in layers[1:]):
            continue
        fitted.append(params)
    completed = zero.copy()
    for params in fitted:
        for start, _ in _layers(params)[1:]:
            for i, j in _sub_block_pairs(start, params):
                completed[i, j] = True
    return completed, fitted


def predicted_pattern_theorem4(code, grams=None):
    """
    Channel-free prediction of R's zeros from the trace conditions.

    Only zeros that follow from the conditions are marked, so the result is
    always contained in the measured pattern.
    """
    grams = probe_grams(code) if grams is None else grams
    mask, fitted = _predicted_mask(orthogonality_matrix(code), grams)
    return ZeroPattern(mask, source='predicted', stats={'block_orthogonal_fits': [list(p) for p in fitted]})


def fit_block_orthogonal(pattern):
    """
    First (Gamma, k, gamma) whose conditions hold on a measured pattern:
    block-diagonal layers, non-zero off-diagonal layer blocks, full-rank R
    and E^t E block diagonal on every kept sample.
    """
    if not pattern.samples:
        return None
    n = pattern.dim
    for params in block_orthogonal_candidates(n):
        layers = _layers(params)
        if not all(pattern.mask[i, j] for start, _ in layers for i, j in _sub_block_pairs(start, params)):
            continue
        if any(pattern.block_is_zero(layers[a], layers[b])
               for a in range(len(layers)) for b in range(a + 1, len(layers))):
            continue
        if not all(np.min(np.diag(R)) > STRUCTURAL_ZERO * np.linalg.norm(R) for R in pattern.samples):
            continue
        ok = True
        for R in pattern.samples:
            for start, stop in layers[1:]:
                E = R[:start, start:stop]
                if not _block_diagonal(E.T @ E, params):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return params
    return None


# ---------------------------------------------------------------------------
# Classification and complexity

@dataclass
class Complexity:
    q: int
    exponent: float
    leaf_count: int
    node_bound: int
    exhaustive_exponent: float

    def to_dict(self):
        return {
            'q': self.q,
            'exponent': self.exponent,
            'leaf_count': self.leaf_count,
            'node_bound': self.node_bound,
            'exhaustive_exponent': self.exhaustive_exponent,
        }


@dataclass(frozen=True)
class Mismatch:
    i: int
    j: int
    direction: str  # 'unsound' or 'incomplete'

    def to_dict(self):
        return {'i': self.i, 'j': self.j, 'direction': self.direction}


@dataclass
class ClassificationReport:
    code_name: str
    family: str
    witness: OrderedPartition
    layout: DecodingLayout
    group_partition: OrderedPartition
    fast_layouts: list = field(default_factory=list)
    sub_structures: list = field(default_factory=list)
    bo_params: tuple = None
    fsd_complexity_exponent: float = None
    complexity: Complexity = None
    hrqf_mismatches: list = field(default_factory=list)

    @property
    def g(self):
        return self.witness.g

    def to_dict(self):
        return {
            'code': self.code_name,
            'family': self.family,
            'witness': self.witness.to_dict(),
            'group_partition': self.group_partition.to_dict(),
            'decoding_layout': self.layout.to_dict(),
            'fast_layouts': [layout.to_dict() for layout in self.fast_layouts],
            'sub_structures': self.sub_structures,
            'bo_params': list(self.bo_params) if self.bo_params else None,
            'fsd_complexity_exponent': self.fsd_complexity_exponent,
            'complexity': self.complexity.to_dict() if self.complexity else None,
            'hrqf_mismatches': [m.to_dict() for m in self.hrqf_mismatches],
        }


def classify(code, empirical, q=2, hrqf=None):
    """
    Place the code in its decodability family from a measured pattern.

    Block-orthogonal wins when its conditions hold. Otherwise a top-level
    block-diagonal R gives g-group (fast-group when some group is itself
    fast decodable), and a block-diagonal leading block Delta gives fast.

    Args:
        code: StbcCode the pattern was measured on
        empirical: ZeroPattern from empirical_pattern
        q: bits per complex symbol for the complexity figures
        hrqf: optional precomputed HRQF pattern

    Returns:
        ClassificationReport
    """
    n = empirical.dim
    if n != code.dim:
        raise DimensionMismatch(f"Pattern has dim {n}, code has {code.dim} real symbols")

    group_partition = empirical.finest_partition()
    fast_layouts = [layout for layout in empirical.layouts() if layout.L < n]
    bo_params = fit_block_orthogonal(empirical)
    layout = empirical.decoding_layout(q)

    sub_structures = []
    if group_partition.g >= 2:
        for a, b in group_partition.ranges():
            sub = empirical.sub_pattern(a, b)
            inner = [s for s in sub.layouts() if s.L < b - a]
            if inner:
                best = sub.decoding_layout(q)
                sub_structures.append({'group': list(range(a + 1, b + 1)), 'layout': best.to_dict()})

    if bo_params:
        family = 'block_orthogonal'
        witness = layout.partition if layout.L < n else group_partition
    elif group_partition.g >= 2:
        family = 'fast_group_decodable' if sub_structures else 'g_group'
        witness = group_partition
    elif fast_layouts:
        family = 'fast_decodable'
        witness = layout.partition
    else:
        family = 'unstructured'
        witness = OrderedPartition((n,))

    report = ClassificationReport(
        code_name=code.name,
        family=family,
        witness=witness,
        layout=layout,
        group_partition=group_partition,
        fast_layouts=fast_layouts,
        sub_structures=sub_structures,
        bo_params=bo_params,
        hrqf_mismatches=compare_hrqf(code, empirical, hrqf=hrqf),
    )
    report.complexity = fsd_complexity(report, q, empirical)
    report.fsd_complexity_exponent = report.complexity.exponent
    logger.info(f"Classified {code.name} as {family} (exponent {report.fsd_complexity_exponent} at q={q})")
    return report


def fsd_complexity(report, q, pattern=None):
    """
    Worst-case complexity of sphere decoding with the reported structure.

    ``exponent`` is (q/2)(2kappa - L + max K_i); for fast-group codes each
    group contributes its own inner fast structure. ``node_bound`` is the
    worst-case count of the decoder that uses ``report.layout``.
    """
    if q < 2 or q % 2:
        raise ValueError(f"q must be a positive even number of bits, got {q}")
    layout = report.layout
    dim = layout.dim
    exhaustive = (q / 2) * dim

    if report.family == 'fast_group_decodable' and pattern is not None:
        units = []
        leaves = 0
        for a, b in report.group_partition.ranges():
            sub_layout = pattern.sub_pattern(a, b).decoding_layout(q)
            units.append(sub_layout.units)
            leaves += sub_layout.leaf_count(q)
        exponent = (q / 2) * max(units)
        leaf_count = leaves
    elif report.family == 'unstructured':
        exponent = exhaustive
        leaf_count = unstructured_layout(dim).leaf_count(q)
    else:
        exponent = layout.exponent(q)
        leaf_count = layout.leaf_count(q)

    return Complexity(
        q=q,
        exponent=exponent,
        leaf_count=leaf_count,
        node_bound=layout.node_bound(q),
        exhaustive_exponent=exhaustive,
    )


def compare_hrqf(code, empirical, hrqf=None):
    """
    Entries where the HRQF prediction and the measurement disagree:
    'unsound' when HRQF claims a zero that is not measured, 'incomplete'
    when a measured zero is missing from HRQF.
    """
    hrqf = hrqf_predicted_pattern(code) if hrqf is None else hrqf
    mismatches = []
    for i in range(empirical.dim):
        for j in range(i + 1, empirical.dim):
            if hrqf.mask[i, j] and not empirical.mask[i, j]:
                mismatches.append(Mismatch(i + 1, j + 1, 'unsound'))
            elif empirical.mask[i, j] and not hrqf.mask[i, j]:
                mismatches.append(Mismatch(i + 1, j + 1, 'incomplete'))
    return mismatches


# ---------------------------------------------------------------------------
# Ordering search

@dataclass
class OrderingSearchResult:
    ordering: SymbolOrdering
    report: ClassificationReport
    pattern: ZeroPattern
    before_exponent: float
    after_exponent: float
    mode: str
    candidates_evaluated: int
    trace: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.ordering, self.report))


def twin_classes(orthogonal):
    """
    Symbols whose orthogonality rows agree outside each other. Swapping two
    twins leaves the position-space orthogonality matrix unchanged.

    Twins are found from the weight-pair conditions alone. Pruning them
    assumes the block-orthogonal completion, which also reads the probe
    Gram matrices, treats two twins alike; a twin swap that changed only
    Gram norms would be missed by the exhaustive search.
    """
    n = orthogonal.shape[0]
    label = [-1] * n
    classes = []
    for i in range(n):
        if label[i] >= 0:
            continue
        label[i] = len(classes)
        members = [i]
        for j in range(i + 1, n):
            if label[j] >= 0:
                continue
            others = [k for k in range(n) if k not in (i, j)]
            if np.array_equal(orthogonal[i, others], orthogonal[j, others]):
                label[j] = label[i]
                members.append(j)
        classes.append(members)
    return classes


def _multiset_permutations(counts, prefix, length):
    if len(prefix) == length:
        yield tuple(prefix)
        return
    for label in sorted(counts):
        if counts[label] == 0:
            continue
        counts[label] -= 1
        prefix.append(label)
        yield from _multiset_permutations(counts, prefix, length)
        prefix.pop()
        counts[label] += 1


def pruned_orderings(orthogonal):
    """Orderings with twins kept in increasing order, lexicographically."""
    classes = twin_classes(orthogonal)
    counts = Counter({c: len(members) for c, members in enumerate(classes)})
    n = orthogonal.shape[0]
    for labels in _multiset_permutations(counts, [], n):
        cursor = [0] * len(classes)
        perm = []
        for label in labels:
            perm.append(classes[label][cursor[label]])
            cursor[label] += 1
        # twins taken in increasing order keep only the lexicographically smallest representative
        yield tuple(perm)


def count_pruned_orderings(orthogonal):
    classes = twin_classes(orthogonal)
    total = math.factorial(orthogonal.shape[0])
    for members in classes:
        total //= math.factorial(len(members))
    return total


class _Objective:
    """Channel-free score of an ordering from the predicted pattern."""

    def __init__(self, code, q, objective):
        if objective not in ('complexity', 'zeros'):
            raise ValueError(f"Unknown objective '{objective}'")
        self.q = q
        self.objective = objective
        self.orthogonal = orthogonality_matrix(code)
        self.grams = probe_grams(code)
        self.evaluated = 0

    def pattern(self, perm):
        idx = np.ix_(perm, perm)
        mask, _ = _predicted_mask(self.orthogonal[idx], [g[idx] for g in self.grams])
        return ZeroPattern(mask, source='predicted')

    def key(self, perm):
        self.evaluated += 1
        pattern = self.pattern(list(perm))
        layout = pattern.decoding_layout(self.q)
        if self.objective == 'zeros':
            return (-pattern.zero_count, layout.units, layout.node_bound(self.q), tuple(perm))
        return (layout.units, layout.node_bound(self.q), -pattern.zero_count, tuple(perm))


def _empirical_key(pattern, q, objective):
    layout = pattern.decoding_layout(q)
    if objective == 'zeros':
        return (-pattern.zero_count, layout.units, layout.node_bound(q))
    return (layout.units, layout.node_bound(q), -pattern.zero_count)


def _exhaustive(score, top):
    ranked = heapq.nsmallest(
        top,
        ((score.key(perm), perm) for perm in pruned_orderings(score.orthogonal)),
    )
    return [perm for _, perm in ranked], []


def _components(orthogonal, vertices):
    """Connected components of the non-orthogonality graph on ``vertices``."""
    remaining = set(vertices)
    comps = []
    while remaining:
        start = min(remaining)
        stack = [start]
        comp = {start}
        remaining.discard(start)
        while stack:
            v = stack.pop()
            for w in list(remaining):
                if not orthogonal[v, w]:
                    remaining.discard(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return sorted(comps, key=lambda c: (len(c), c[0]))


def _heuristic(score, n):
    """
    Group mutually orthogonal symbols first, then move the most coupled
    symbols to the outer tree one at a time, then improve by 2-swaps.
    The trace records the incumbent's objective after every step.
    """
    orthogonal = score.orthogonal
    outer = []
    inner = list(range(n))

    def build():
        order = [v for comp in _components(orthogonal, inner) for v in comp]
        return tuple(order + outer)

    best = build()
    best_key = score.key(best)
    trace = [best_key[0]]
    while len(inner) > 1:
        degree = {v: sum(1 for w in inner if w != v and not orthogonal[v, w]) for v in inner}
        v = max(inner, key=lambda u: (degree[u], -u))
        if degree[v] == 0:
            break
        inner.remove(v)
        outer.insert(0, v)
        candidate = build()
        key = score.key(candidate)
        if key < best_key:
            best, best_key = candidate, key
        trace.append(best_key[0])

    improved = True
    while improved:
        improved = False
        for a in range(n):
            for b in range(a + 1, n):
                candidate = list(best)
                candidate[a], candidate[b] = candidate[b], candidate[a]
                candidate = tuple(candidate)
                key = score.key(candidate)
                if key < best_key:
                    best, best_key = candidate, key
                    trace.append(best_key[0])
                    improved = True
    return [best], trace


def ordering_search(code, channel, objective='complexity', q=2, mode='exhaustive', top=5, trials=None):
    """
    Look for the real-symbol ordering with the lowest sphere-decoding
    complexity. Candidates are ranked on the channel-free prediction; the
    best ``top`` are then measured and ranked on their empirical patterns,
    ties going to the lexicographically smallest permutation.

    Args:
        code: StbcCode
        channel: ChannelModel for the empirical confirmation
        objective: 'complexity' or 'zeros'
        q: bits per complex symbol
        mode: 'exhaustive' or 'heuristic'
        top: candidates confirmed empirically
        trials: draws per confirmation

    Returns:
        OrderingSearchResult

    Raises:
        SearchOverflow: when an exhaustive search exceeds the limits
    """
    n = code.dim
    _require_determined(code, channel.n_r)
    score = _Objective(code, q, objective)
    limit = settings.STBC_FSD_MAX_ORDERINGS

    if mode not in SEARCH_MODES:
        raise ValueError(f"Unknown search mode '{mode}'")
    if mode == 'exhaustive':
        candidates = count_pruned_orderings(score.orthogonal)
        if n > EXHAUSTIVE_LIMIT or candidates > limit:
            raise SearchOverflow(candidates, limit)
        shortlist, trace = _exhaustive(score, top)
    else:
        shortlist, trace = _heuristic(score, n)

    before = empirical_pattern(code, channel, trials)
    before_report = classify(code, before, q)

    best = None
    for perm in shortlist:
        ordering = SymbolOrdering(tuple(p + 1 for p in perm))
        reordered = apply_ordering(code, ordering)
        pattern = empirical_pattern(reordered, channel, trials)
        key = (_empirical_key(pattern, q, objective), ordering.perm)
        if best is None or key < best[0]:
            best = (key, ordering, reordered, pattern)

    _, ordering, reordered, pattern = best
    report = classify(reordered, pattern, q)
    logger.info(
        f"Ordering search on {code.name} ({mode}, {score.evaluated} candidates): "
        f"exponent {before_report.fsd_complexity_exponent} -> {report.fsd_complexity_exponent}"
    )
    return OrderingSearchResult(
        ordering=ordering,
        report=report,
        pattern=pattern,
        before_exponent=before_report.fsd_complexity_exponent,
        after_exponent=report.fsd_complexity_exponent,
        mode=mode,
        candidates_evaluated=score.evaluated,
        trace=trace,
    )
