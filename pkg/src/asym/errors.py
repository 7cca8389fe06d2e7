"""Exception types shared across the package."""


class AsymError(Exception):
    """Base class for all errors raised by this package."""


class ElementOutOfRange(AsymError, IndexError):
    pass


class EqualElements(AsymError, ValueError):
    pass


class VocabularyMismatch(AsymError, ValueError):
    pass


class CapExceeded(AsymError, ValueError):
    pass


class FormulaSyntaxError(AsymError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbol(AsymError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown symbol"


class ArityMismatch(AsymError, ValueError):
    pass


class UnboundVariable(AsymError, KeyError):
    def __str__(self):
        return f"unbound variable {self.args[0]!r}" if self.args else "unbound variable"


class InvalidSystem(AsymError, ValueError):
    """A Delta-system failed validation where a valid one was required."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid system")


class BaseSetsPresent(AsymError, ValueError):
    pass


class NotUnarySeparated(AsymError, ValueError):
    pass


class NotEquivalenceOnTarget(AsymError, ValueError):
    def __init__(self, params, witness):
        super().__init__(f"relation is not an equivalence on the target set for parameters {params}: {witness}")
        self.params = params
        self.witness = witness


class DependentSample(AsymError, RuntimeError):
    pass
