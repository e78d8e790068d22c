"""Exception types shared across the package."""


class MeshFormatError(ValueError):
    """Malformed mesh/spectrum/field file. Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AssemblyError(RuntimeError):
    """Mesh unsuitable for element assembly (degenerate cell, empty boundary, non-PD mass)."""
