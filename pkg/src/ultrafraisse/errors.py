"""Exception types that the CLI maps to distinct exit codes."""


class SchemaError(ValueError):
    """Input text does not match the expected JSON schema (exit 2)."""


class DepthError(ValueError):
    """A depth or capacity bound is too small for the request (exit 3)."""


class InputError(ValueError):
    """Structurally valid input violates a semantic precondition (exit 4)."""
