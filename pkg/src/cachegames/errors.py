"""Exception taxonomy shared across the package."""


class CacheGamesError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstance(CacheGamesError):
    """An instance (catalog / buffers / preferences / demands) violates its invariants."""


class RowNotStochastic(InvalidInstance):
    """A preference row was required to sum to 1 and does not."""


class BetaOutOfRange(InvalidInstance):
    """Mixture parameter outside [0, 1]."""


class CapacityOutOfRange(InvalidInstance):
    """Buffer capacity outside [0, N]."""


class NonIntegralChunkBudget(InvalidInstance):
    """b_k * G is not an integer, so the placement cannot be realized at chunk resolution."""


class InvalidPlacement(CacheGamesError):
    """A two-user placement violates its box/budget invariants beyond tolerance."""


class MisalignedPlacement(CacheGamesError):
    """A placement fraction is not a multiple of 1/G, so it cannot be materialized in chunks."""


class SupportTooLarge(CacheGamesError):
    """Exact expectation was requested over an unenumerable demand support."""


class TooLarge(CacheGamesError):
    """A brute-force oracle guard tripped (instance too big to enumerate)."""


class DecodingFailure(CacheGamesError):
    """A user could not recover all requested chunks from a delivery schedule."""


class SolverFailure(CacheGamesError):
    """The LP solver could not produce a usable answer."""


class NumericalFailure(SolverFailure):
    """The LP solver exceeded its iteration cap or reported numerical trouble."""
