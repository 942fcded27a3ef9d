"""Exception hierarchy. ``location`` points into the input document when known."""


class BBGKZError(Exception):
    def __init__(self, message: str, location: str | None = None):
        super().__init__(message)
        self.location = location

    def __str__(self):
        msg = super().__str__()
        return f"{self.location}: {msg}" if self.location else msg


class InputError(BBGKZError):
    pass


class NonSimplicial(InputError):
    pass


class NotCovering(InputError):
    pass


class NotProjective(InputError):
    pass


class BadGorenstein(InputError):
    pass


class NotGorenstein(BadGorenstein):
    pass


class SingularSimplex(BBGKZError):
    pass


class ZeroLeadingCoefficient(BBGKZError, ZeroDivisionError):
    pass


class PoleRemains(BBGKZError):
    pass


class DualityMismatch(BBGKZError):
    pass


class NonGenericDirection(BBGKZError):
    pass


class NonInteger(BBGKZError):
    pass


class NotABasis(BBGKZError):
    pass


class InteriorRequired(BBGKZError):
    pass


class MissingComponent(BBGKZError):
    pass


class SingularMatrix(BBGKZError):
    pass
