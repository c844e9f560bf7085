"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to (2 validation, 3 usage,
4 numeric guard).
"""


class QuasiLorentzError(Exception):
    exit_code = 2


class ValidationError(QuasiLorentzError):
    exit_code = 2


class UsageError(QuasiLorentzError):
    exit_code = 3


class NumericGuard(QuasiLorentzError):
    exit_code = 4


# lattice_core
class SingularBasis(ValidationError):
    pass


class UnsupportedField(ValidationError):
    pass


class NonPositiveIndex(ValidationError):
    pass


class BoxTooLarge(NumericGuard):
    pass


# cutproject
class SplitMismatch(ValidationError):
    pass


class NoLatticeInV(ValidationError):
    pass


class NotHalfSum(ValidationError):
    pass


class NonRegularGamma(ValidationError):
    pass


class EmptyRegion(ValidationError):
    pass


# lorentz
class InsideScatterer(ValidationError):
    def __init__(self, center, msg=None):
        self.center = center
        super().__init__(msg or f"initial point lies inside scatterer centred at {center}")


class NoHitWithinCap(QuasiLorentzError):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"no collision within path length {cap}")


class RetryExhausted(ValidationError):
    pass


class CapTooSmall(ValidationError):
    pass


class NotAScattererPoint(ValidationError):
    pass


# homspace / directions
class NearSingularDirection(NumericGuard):
    pass


class DiscTooLarge(ValidationError):
    pass


# io / cli
class ParseError(ValidationError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


class GridMismatch(ValidationError):
    pass


class FlowOverflow(NumericGuard):
    pass
