## errors.py - Exception types shared by the library and the command line.
# Solver trouble is never raised: it travels as a status. These are for bad input.


class GlobOptError(Exception):
    """Base class for every error raised on purpose by this project."""


class DimensionMismatch(GlobOptError, ValueError):
    """Channels, precoders or per-user vectors disagree on K or M."""


class InvalidProblem(GlobOptError, ValueError):
    """A ProblemSpec (or one of its fields) breaks a construction invariant."""


class SchemeError(GlobOptError, ValueError):
    """A scheme restriction cannot be applied, e.g. NOMA2 with K != 2."""


class MalformedBox(GlobOptError, ValueError):
    """A box with lo > hi, negative SINR bounds or arguments outside [0, 2pi]."""


class ChannelFileError(GlobOptError, ValueError):
    """A channel file that does not follow the record format."""


class PlanError(GlobOptError, ValueError):
    """An experiment plan that fails validation."""
