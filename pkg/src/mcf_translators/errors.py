"""Exception hierarchy shared by all modules."""


class TranslatorError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TranslatorError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class NotBracketed(TranslatorError, ValueError):
    """The target value is not inside the image of the function on the bracket."""


class OutsideImage(NotBracketed):
    """Query outside the image of a branch antiderivative."""


class StepUnderflow(TranslatorError, ArithmeticError):
    """The step controller could not meet the tolerance above ``min_step``.

    The partial trajectory is kept in ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NonConvergence(TranslatorError, ArithmeticError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateProfile(DomainError):
    """Light-like data (|f'| == 1), which the classification discards."""


class ShootingFailure(TranslatorError, ArithmeticError):
    pass


class InversionFailure(TranslatorError, ArithmeticError):
    pass


class Unclassifiable(TranslatorError, ValueError):
    pass


class NotSpacelike(TranslatorError, ValueError):
    """Some node violates x1^2 |grad u|^2 < 1."""


class MarginCollapse(TranslatorError, ArithmeticError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainNotInvariant(TranslatorError, ValueError):
    pass
