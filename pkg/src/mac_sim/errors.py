"""Exception and warning types raised across the package."""


class MacSimError(Exception):
    """Base class for all errors raised by mac_sim."""


class OddDimension(MacSimError, ValueError):
    pass


class NotAntisymmetric(MacSimError, ValueError):
    pass


class SiteOutOfRange(MacSimError, IndexError):
    pass


class NullProjection(MacSimError):
    """A forced outcome has (numerically) zero probability on the current state."""

    def __init__(self, site, probability):
        super().__init__(f"outcome at site {site} has probability {probability:.3e}")
        self.site = site
        self.probability = probability


class EmptyInterval(MacSimError, ValueError):
    pass


class DuplicateIndex(MacSimError, ValueError):
    pass


class SameSite(MacSimError, ValueError):
    pass


class PurityDrift(MacSimError):
    def __init__(self, drift):
        super().__init__(f"pure-state covariance drifted: max|G^2 + 1| = {drift:.3e}")
        self.drift = drift


class Unphysical(MacSimError, ValueError):
    """Covariance has singular values beyond 1."""


class OddL(MacSimError, ValueError):
    pass


class BadParameter(MacSimError, ValueError):
    pass


class DimensionMismatch(MacSimError, ValueError):
    pass


class InsufficientPoints(MacSimError, ValueError):
    pass


class DensityOutOfRange(MacSimError, ValueError):
    pass


class BadXi0(MacSimError, ValueError):
    pass


class VertexOutOfRange(MacSimError, IndexError):
    pass


class TooLarge(MacSimError, ValueError):
    pass


class BadOrder(MacSimError, ValueError):
    pass


class NonConvergence(MacSimError, RuntimeError):
    pass


class ConfigInvalid(MacSimError, ValueError):
    """Run configuration rejected; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ParseError(ConfigInvalid):
    def __init__(self, key, message, line=None):
        where = f"line {line}: " if line is not None else ""
        MacSimError.__init__(self, f"{where}{key}: {message}")
        self.field = key
        self.line = line


class ValidationError(ConfigInvalid):
    pass


class DegenerateMode(UserWarning):
    """Two Bogoliubov roots have equal imaginary parts; the lower real part was kept."""


class FieldOutOfRange(UserWarning):
    """|h| > 1 has no logarithmic phase."""
