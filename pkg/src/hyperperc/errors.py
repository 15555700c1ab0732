"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An operation was called with arguments violating its contract."""


class InvalidCertificateError(ValueError):
    """A surround certificate is structurally malformed."""


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class FalsificationError(RuntimeError):
    """A deterministic audit that must hold by construction failed.

    Raised loudly: it means either an implementation bug or a genuine
    counterexample to a certified property, never a recoverable condition.
    """
