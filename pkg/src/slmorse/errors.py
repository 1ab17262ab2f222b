"""Exception hierarchy shared by all modules."""


class SLMorseError(Exception):
    """Base class for every error raised by the package."""


# symplectic
class RankDeficient(SLMorseError):
    pass


class NotIsotropic(SLMorseError):
    pass


class DimensionMismatch(SLMorseError):
    pass


# indices
class InconsistentIndex(SLMorseError):
    """The two routes of a two-route identity disagree."""


class EmptyKernel(SLMorseError):
    """A crossing form was requested where the subspaces are transversal."""


class NonRegularCrossing(SLMorseError):
    def __init__(self, location, message=None):
        self.location = location
        super().__init__(message or f"non-regular crossing near tau={location:.12g}")


class DegenerateEndpoint(SLMorseError):
    pass


class UndersampledPath(SLMorseError):
    """Consecutive samples are too far apart to track crossings."""


# sturm
class SingularP(SLMorseError):
    pass


class NotHyperbolic(SLMorseError):
    pass


class HypothesisViolation(SLMorseError):
    pass


# flows
class NoDecay(SLMorseError):
    pass


class IntegratorFailure(SLMorseError):
    pass


class IsotropyLoss(SLMorseError):
    pass


# morse
class UnresolvedCluster(SLMorseError):
    pass


class PlateauFailure(SLMorseError):
    pass


class NotInBundle(SLMorseError):
    pass


class DegenerateSolution(SLMorseError):
    pass


# oracle
class UnstableCount(SLMorseError):
    def __init__(self, counts, message=None):
        self.counts = list(counts)
        super().__init__(message or f"negative counts differ across refinement levels: {self.counts}")


# waves
class NotEquilibrium(SLMorseError):
    pass


class NewtonDivergence(SLMorseError):
    pass


class PhaseConditionSingular(SLMorseError):
    pass


class TangentialZero(SLMorseError):
    pass


class ProblemFileError(SLMorseError):
    """Malformed problem or system file."""
