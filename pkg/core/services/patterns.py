"""
Zero patterns of the R factor, ordered partitions and the sphere-decoding
layouts they admit.
"""
from dataclasses import dataclass

import numpy as np


def propagate_orthogonality(orthogonal):
    """
    Zeros of R implied by pairwise column orthogonality.

    R[i, j] (i < j) vanishes when columns i and j are orthogonal and, for
    every k < i, R[k, i] or R[k, j] is already zero, since then
    <q_i, h_j> = (<h_i, h_j> - sum_k R[k, i] R[k, j]) / R[i, i] = 0.

    Args:
        orthogonal: symmetric boolean matrix of pairwise orthogonality

    Returns:
        numpy.ndarray: boolean mask, True at proven zeros (strict upper part)
    """
    orthogonal = np.asarray(orthogonal, dtype=bool)
    n = orthogonal.shape[0]
    zero = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if not orthogonal[i, j]:
                continue
            zero[i, j] = all(zero[k, i] or zero[k, j] for k in range(i))
    return zero


@dataclass(frozen=True)
class OrderedPartition:
    """Contiguous groups of sizes K_1..K_g covering symbols 1..L."""
    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 1 for s in sizes):
            raise ValueError(f"Empty group in partition {sizes}")
        object.__setattr__(self, 'sizes', sizes)

    @property
    def g(self):
        return len(self.sizes)

    @property
    def L(self):
        return sum(self.sizes)

    def ranges(self, offset=0):
        """0-based half-open index ranges of the groups."""
        out = []
        start = offset
        for size in self.sizes:
            out.append((start, start + size))
            start += size
        return out

    @property
    def groups(self):
        """1-based index lists."""
        return [list(range(a + 1, b + 1)) for a, b in self.ranges()]

    def to_dict(self):
        return {'L': self.L, 'g': self.g, 'sizes': list(self.sizes), 'groups': self.groups}


@dataclass(frozen=True)
class DecodingLayout:
    """
    How a depth-first decoder traverses R: the last ``dim - L`` symbols form
    an outer tree; below each outer leaf the first L symbols split into the
    independent groups of ``partition``.
    """
    dim: int
    partition: OrderedPartition

    @property
    def L(self):
        return self.partition.L

    @property
    def outer(self):
        return self.dim - self.L

    @property
    def units(self):
        """Real dimensions searched jointly in the worst case."""
        return self.outer + max(self.partition.sizes, default=0)

    def exponent(self, q):
        return (q / 2) * self.units

    def leaf_count(self, q):
        m = 2 ** (q // 2)
        inner = sum(m ** k for k in self.partition.sizes) if self.partition.sizes else 1
        return m ** self.outer * inner

    def node_bound(self, q):
        """Worst-case metric-increment evaluations of the depth-first search."""
        m = 2 ** (q // 2)
        outer = sum(m ** d for d in range(1, self.outer + 1))
        inner = sum(sum(m ** d for d in range(1, k + 1)) for k in self.partition.sizes)
        return outer + m ** self.outer * inner

    def to_dict(self, q=None):
        data = {'L': self.L, 'outer': self.outer, 'partition': self.partition.to_dict()}
        if q is not None:
            data.update({
                'exponent': self.exponent(q),
                'leaf_count': self.leaf_count(q),
                'node_bound': self.node_bound(q),
            })
        return data


def unstructured_layout(dim):
    return DecodingLayout(dim=dim, partition=OrderedPartition(()))


class ZeroPattern:
    """
    Structural zeros of an upper-triangular R. ``mask[i, j]`` is True when
    R[i, j] is zero for every channel; the diagonal and lower part are never
    marked.
    """

    def __init__(self, mask, max_abs=None, source='empirical', stats=None, samples=()):
        mask = np.triu(np.asarray(mask, dtype=bool), k=1)
        mask.setflags(write=False)
        self.mask = mask
        self.max_abs = None if max_abs is None else np.asarray(max_abs, dtype=float)
        self.source = source
        self.stats = dict(stats or {})
        # a few measured R factors, kept for checks that need values
        self.samples = tuple(samples)

    @classmethod
    def from_zeros(cls, dim, zeros, source='fixture'):
        """Build from 1-based (i, j) pairs."""
        mask = np.zeros((dim, dim), dtype=bool)
        for i, j in zeros:
            mask[i - 1, j - 1] = True
        return cls(mask, source=source)

    @property
    def dim(self):
        return self.mask.shape[0]

    def zeros(self):
        """Structural zeros as sorted 1-based (i, j) pairs."""
        rows, cols = np.nonzero(self.mask)
        return [(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)]

    @property
    def zero_count(self):
        return int(self.mask.sum())

    def issubset(self, other):
        return bool(np.all(~self.mask | other.mask))

    def __eq__(self, other):
        if not isinstance(other, ZeroPattern):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None

    def __repr__(self):
        return f"ZeroPattern(dim={self.dim}, zeros={self.zeros()}, source={self.source!r})"

    def sub_pattern(self, start, stop):
        return ZeroPattern(self.mask[start:stop, start:stop], source=self.source)

    def block_is_zero(self, rows, cols):
        (r0, r1), (c0, c1) = rows, cols
        return bool(np.all(self.mask[r0:r1, c0:c1]))

    def finest_partition(self, start=0, stop=None):
        """
        Finest contiguous partition of [start, stop) whose cross-group
        entries are all zero.
        """
        stop = self.dim if stop is None else stop
        sizes = []
        begin = start
        for cut in range(start + 1, stop):
            if np.all(self.mask[start:cut, cut:stop]):
                sizes.append(cut - begin)
                begin = cut
        sizes.append(stop - begin)
        return OrderedPartition(tuple(sizes))

    def layouts(self):
        """Every layout this pattern supports with at least two inner groups."""
        found = []
        for L in range(2, self.dim + 1):
            partition = self.finest_partition(0, L)
            if partition.g >= 2:
                found.append(DecodingLayout(dim=self.dim, partition=partition))
        return found

    def decoding_layout(self, q=2):
        """Layout minimising the complexity exponent, then the node bound."""
        best = unstructured_layout(self.dim)
        for layout in self.layouts():
            key = (layout.units, layout.node_bound(q))
            if key < (best.units, best.node_bound(q)):
                best = layout
        return best

    def to_dict(self):
        data = {'dim': self.dim, 'zeros': [list(z) for z in self.zeros()]}
        stats = dict(self.stats)
        if self.max_abs is not None:
            stats['max_abs'] = [[float(v) for v in row] for row in self.max_abs]
        data['stats'] = stats
        return data
