"""Exception types shared across the package."""


class MSLabError(Exception):
    """Base class for all package errors."""


class ZeroProbabilityEvent(MSLabError):
    """Conditioning on an event of probability zero."""


class AlreadyFired(MSLabError):
    """A device port was queried more than once."""


class DoubleTick(MSLabError):
    """DELAY was ticked twice on the same bank."""


class InputAfterDelay(MSLabError):
    """An input was supplied to a device port after the DELAY tick pinned it."""


class SupportTooLarge(MSLabError):
    """Exact enumeration would exceed the configured support guard."""


class DuplicateBoxIndex(MSLabError):
    """An adaptive strategy tried to fire the same box twice."""


class LengthMismatch(MSLabError):
    """Bit-string argument has the wrong length."""


class SeedLengthMismatch(LengthMismatch):
    """Extractor seed length does not match n + out_len - 1."""


class SupportMismatch(MSLabError):
    """Two distributions do not share a support universe."""


class RankDeficient(MSLabError):
    """Could not build a parity-check matrix of full rank."""


class DistanceSearchTooLarge(MSLabError):
    """Exact minimum-distance search would be too expensive."""


class ExactModeTooLarge(MSLabError):
    """Exact enumeration mode requested beyond its size guard."""


class InterfaceMismatch(MSLabError):
    """A concrete protocol does not match the oracle signature it replaces."""


class RegisterMismatch(MSLabError):
    """End-state laws do not declare the same registers."""


class OracleProtocolViolation(MSLabError):
    """A simulator interacted with an ideal functionality out of order."""


class DegenerateParameters(MSLabError):
    """A statistical bound was requested with out-of-range parameters."""


class ConfigError(MSLabError):
    """Run configuration failed load-time validation."""
