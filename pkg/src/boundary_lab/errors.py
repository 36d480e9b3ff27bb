"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by boundary_lab."""


class DomainError(LabError, ValueError):
    """Input outside the domain of an operation (unknown letter, model mismatch)."""


class ParameterError(LabError, ValueError):
    """A numerical parameter (t, p, q, r, ...) is outside its admissible range."""


class ResourceError(LabError):
    """A configured size cap would be exceeded."""

    def __init__(self, message, cap=None, value=None):
        super().__init__(message)
        self.cap = cap
        self.value = value


class RefinementRequired(LabError):
    """A cylinder is too coarse for the requested boundary quantity to be constant on it."""

    def __init__(self, message, min_depth):
        super().__init__(message)
        self.min_depth = min_depth


class CacheError(LabError):
    """A sphere cache file failed validation."""


class ConfigError(LabError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field is not None:
            where.append(f"field {self.field}")
        msg = super().__str__()
        return f"{', '.join(where)}: {msg}" if where else msg
