"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError` (CLI exit
code 2); failures that only show up while computing derive from
:class:`ComputationError` (CLI exit code 3).
"""


class SublinearDPError(Exception):
    """Base class for all package errors."""


class ValidationError(SublinearDPError, ValueError):
    pass


class ComputationError(SublinearDPError, RuntimeError):
    pass


# metric core
class InvalidMetric(ValidationError):
    pass


class InvalidPointRef(ValidationError, IndexError):
    pass


class EmptyDataset(ValidationError):
    pass


class EmptyCenterSet(ValidationError):
    pass


# privacy calculus
class InvalidPrivacySpec(ValidationError):
    pass


class InvalidSamplingProbability(ValidationError):
    pass


class ThresholdOutOfRange(ValidationError):
    pass


class NonzeroDeltaUnsupported(ValidationError):
    pass


# sample bounds
class InvalidBoundInputs(ValidationError):
    pass


class EtaTooLargeForNet(InvalidBoundInputs):
    pass


class ZeroOptimumCost(ValidationError):
    pass


# black boxes
class EmptyCandidateSet(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


# harness
class InvalidGeneratorSpec(ValidationError):
    pass


class EmptySample(ComputationError):
    pass


class InstanceTooLarge(ComputationError):
    pass


class ReportIOError(ComputationError, OSError):
    pass
