"""Exception hierarchy. Library code raises these; the CLI maps them to exit codes."""


class SflabError(Exception):
    """Base class for all sflab failures."""


class ChartMismatchError(SflabError):
    pass


class RankMismatchError(SflabError):
    pass


class GradeError(SflabError):
    """A form has components in grades the operation does not accept."""


class InsufficientSamplesError(SflabError):
    pass


class ParameterRangeError(SflabError):
    """A family parameter lies outside its interval."""


class NotMetricError(SflabError):
    """A connection value is not skew-Hermitian."""


class SmoothingError(SflabError):
    pass


class StructuralEquationError(SflabError):
    """dω + ω∧ω does not vanish for a supposed Maurer–Cartan form."""


class DimensionError(SflabError):
    pass


class TrustRegionError(SflabError):
    """Requested spectral window exceeds what the truncation resolves."""


class HermiticityError(SflabError):
    pass


class AmbiguousKernelError(SflabError):
    """An eigenvalue sits too close to the zero tolerance to decide the kernel dimension."""


class UncertifiedGapError(SflabError):
    """No spectral gap could be certified on some parameter interval."""


class FamilyKindError(SflabError):
    pass


class AsymptoticsError(SflabError):
    """A spectrum's tail does not follow the affine law the eta extrapolation assumes."""


class CalibrationError(SflabError):
    pass


class IsospectralityError(SflabError):
    pass


class NotPSDError(SflabError):
    pass


class QuadratureError(SflabError):
    pass
