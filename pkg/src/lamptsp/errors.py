"""Error taxonomy shared across modules.

The CLI maps these onto exit codes: configuration problems exit 2,
resource-budget problems exit 3.
"""


class ConfigurationError(ValueError):
    """Invalid distribution, spec, or CLI configuration."""


class DomainError(ValueError):
    """Input outside an operation's stated domain."""


class ResourceLimitError(RuntimeError):
    """A state/cardinality budget was exceeded."""


class UnsupportedOperationError(RuntimeError):
    """Operation requires structure the inputs lack (e.g. involutive lamps)."""
