"""Exception and warning classes shared across pinchlab."""


class PinchlabError(Exception):
    pass


class PoleError(PinchlabError, ValueError):
    """Argument sits on a pole of a Gamma factor."""


class DomainError(PinchlabError, ValueError):
    pass


class NotHyperbolic(PinchlabError, ValueError):
    pass


class ConstructionError(PinchlabError):
    pass


class BudgetExceeded(PinchlabError):
    pass


class InsufficientData(PinchlabError):
    pass


class FitError(PinchlabError):
    pass


class ConfigError(PinchlabError):
    pass


class ConvergenceWarning(UserWarning):
    """A sum or product was evaluated outside its safe convergence regime."""


class RemovableSingularityWarning(UserWarning):
    pass
