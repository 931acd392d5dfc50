"""Exception hierarchy shared across the toolkit.

Every error carries a short machine-readable ``code`` so callers (and the
CLI exit-code mapping) can dispatch without parsing messages.
"""


class GeoprefError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1

    def __init__(self, message, code="error"):
        super().__init__(message)
        self.code = code


class ValidationError(GeoprefError):
    """Rejected input: dimension mismatch, broken invariant, bad value."""

    exit_code = 4

    def __init__(self, message, code="invalid_input"):
        super().__init__(message, code)


class SceneIOError(GeoprefError):
    """File-level failure: missing, unreadable, or unwritable artifacts."""

    exit_code = 3

    def __init__(self, message, code="io_error"):
        super().__init__(message, code)


class DegenerateGeometryError(GeoprefError):
    """Numerically degenerate configuration (zero baseline, collinear points)."""

    exit_code = 5

    def __init__(self, message, code="degenerate_geometry"):
        super().__init__(message, code)


class TrainingDivergedError(GeoprefError):
    """Non-finite loss during the toy alignment loop."""

    exit_code = 5

    def __init__(self, message, step=None):
        super().__init__(message, "training_diverged")
        self.step = step
