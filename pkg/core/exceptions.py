"""Error types raised by the analysis and decoding services."""
from django.core.exceptions import ValidationError


class StbcError(ValueError):
    """Base class for domain errors."""


class NonFiniteInput(StbcError):
    pass


class DimensionMismatch(StbcError):
    pass


class InvalidPermutation(StbcError):
    pass


class UnknownCode(StbcError):
    pass


class RankDeficient(StbcError):
    """Gram-Schmidt met a column with (numerically) no new direction."""

    def __init__(self, column, norm, reference):
        self.column = column
        self.norm = norm
        self.reference = reference
        super().__init__(
            f"Column {column + 1} is dependent on previous columns "
            f"(residual norm {norm:.3e}, column norm {reference:.3e})"
        )


class DependentWeights(StbcError):
    """The generator matrix is rank deficient, so R is singular for every channel."""

    def __init__(self, rank, dim):
        self.rank = rank
        self.dim = dim
        super().__init__(
            f"Weight matrices are linearly dependent: rank(G) = {rank} < {dim}, "
            f"R has no full-rank factorisation for any channel"
        )


class UnderDetermined(StbcError):
    """The equivalent channel has fewer rows than real symbols."""

    def __init__(self, rows, cols):
        self.rows = rows
        self.cols = cols
        super().__init__(
            f"Equivalent channel is {rows}x{cols}: need 2*nr*T >= 2*kappa "
            f"(increase the number of receive antennas)"
        )


class SearchOverflow(StbcError):
    def __init__(self, candidates, limit):
        self.candidates = candidates
        self.limit = limit
        super().__init__(
            f"Exhaustive ordering search needs {candidates} candidates "
            f"(limit {limit}); use heuristic mode"
        )


class CodebookTooLarge(StbcError):
    def __init__(self, bits, limit):
        self.bits = bits
        self.limit = limit
        super().__init__(
            f"ML oracle would enumerate 2^{bits} hypotheses (limit 2^{limit})"
        )


class CodeSchemaError(ValidationError):
    """A code definition file does not describe a valid code."""
