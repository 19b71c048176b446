"""Exception types shared across modules."""


class DegenerateDataError(ValueError):
    """Training data cannot support the requested fit (e.g. single class)."""


class ModelFormatError(ValueError):
    """A persisted model file is unreadable or structurally invalid."""


class ModelMismatchError(ValueError):
    """Model and feature dimensionalities disagree."""
