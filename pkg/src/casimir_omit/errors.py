"""Exception hierarchy.

Physics-domain failures (the mirror sticks to the sphere, the coupled
springs lose stability) are kept apart from numerical failures so callers
such as the command-line front end can map them to distinct exit codes.
"""


class OmitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(OmitError, ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(f"{d.field}: {d.message}" for d in self.diagnostics)
        super().__init__(msg or "invalid parameters")


class PhysicsDomainError(OmitError):
    """The requested configuration has no physical stable operating point."""


class NonPositiveSeparation(PhysicsDomainError, ValueError):
    pass


class AdhesionRegime(PhysicsDomainError):
    pass


class MirrorContact(PhysicsDomainError):
    pass


class UnstableCoupledMode(PhysicsDomainError):
    pass


class ModelHasNoAdhesion(OmitError, ValueError):
    pass


class NumericalError(OmitError):
    """A numerical procedure failed to deliver a trustworthy answer."""


class NoConvergence(NumericalError):
    pass


class DegenerateDenominator(NumericalError, ZeroDivisionError):
    pass


class IntegratorFailure(NumericalError):
    pass


class NonStationary(NumericalError):
    pass
