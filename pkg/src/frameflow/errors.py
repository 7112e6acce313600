"""Exception taxonomy.

Three families, matching the CLI exit codes: input/validation problems
(exit 1), numerical failures (exit 2) and enumeration size limits (exit 3).
"""


class FrameflowError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FrameflowError):
    """Bad input: wrong shape, invalid value, violated precondition."""


class ShapeMismatch(ValidationError):
    pass


class NonSquare(ValidationError):
    pass


class BadIndex(ValidationError):
    pass


class BadSizes(ValidationError):
    pass


class SignatureMismatch(ValidationError):
    pass


class OddAmbient(ValidationError):
    pass


class NotUnitaryFrame(ValidationError):
    pass


class NotProjector(ValidationError):
    pass


class WeightsNotStrict(ValidationError):
    pass


class Inconsistent(ValidationError):
    pass


class NotLinked(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class NonPositiveEigenvalue(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class NumericalError(FrameflowError):
    """A computation could not be completed at the requested accuracy."""


class RankDeficient(NumericalError):
    pass


class Singular(NumericalError):
    pass


class Divergence(NumericalError):
    pass


class NotSimpleSpectrum(NumericalError):
    pass


class SizeLimitError(FrameflowError):
    """An enumeration would exceed the configured budget."""


class SizeLimit(SizeLimitError):
    pass
