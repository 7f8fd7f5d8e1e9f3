"""Exception types shared across the package."""


class PartlabError(Exception):
    """Base class for all errors raised by partlab."""


class MalformedPartitionError(PartlabError, ValueError):
    """Blocks do not form a disjoint cover of the 2k points."""


class SizeMismatchError(PartlabError, ValueError):
    """Two operands live on a different number of columns."""


class CapacityError(PartlabError):
    """An enumeration or dense construction exceeds its configured cap."""


class SingularGramError(PartlabError, ArithmeticError):
    """The Gram matrix of a partition family is singular at this N."""


class MissingEntryError(PartlabError, KeyError):
    """A table lookup needed by a transform is absent."""

    def __str__(self):
        return Exception.__str__(self)


class BudgetError(PartlabError):
    """A computation would exceed the configured cost budget."""


class ConfigError(PartlabError, ValueError):
    """An experiment configuration failed validation."""
