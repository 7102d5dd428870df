"""Exception hierarchy shared by all modeforge modules."""


class ModeforgeError(Exception):
    """Base class for every error raised by modeforge."""


class EquilibriumNotFoundError(ModeforgeError):
    pass


class ChainNotLinearError(ModeforgeError):
    pass


class RadialInstabilityError(ModeforgeError):
    pass


class ParticipationError(ModeforgeError, ValueError):
    """Participation matrix is not square/orthonormal."""


class KnobBoundsError(ModeforgeError, ValueError):
    pass


class UndersampledError(ModeforgeError, ValueError):
    pass


class UncoupledPairError(ModeforgeError, ValueError):
    pass


class TruncationError(ModeforgeError):
    """Fock truncation too small for the requested displacement or temperature."""


class ConfigError(ModeforgeError, ValueError):
    pass


class DesignInfeasibleError(ModeforgeError):
    """No gate time or tone index satisfies the design constraints."""


class FitError(ModeforgeError):
    pass
