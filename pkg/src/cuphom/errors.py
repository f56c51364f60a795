"""Exception types shared by the library and the command line."""


class SchemaError(ValueError):
    """Input does not match the expected JSON shape (CLI exit 2)."""


class SemanticError(ValueError):
    """Well-formed input violating a mathematical precondition (CLI exit 3)."""


class RelationError(ValueError):
    """A hyperbox relation fails (CLI exit 4).

    ``violations`` holds the offending (epsilon, epsilon_prime) pairs.
    """

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)
