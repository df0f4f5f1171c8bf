"""Exception hierarchy shared by every module."""


class ToolkitError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class NoInverse(ToolkitError):
    pass


class DegenerateNodes(ToolkitError):
    pass


class FieldTooSmall(ToolkitError):
    pass


class ParseError(ToolkitError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ArityError(ToolkitError):
    pass


class ResourceLimit(ToolkitError):
    """A budget (variables, dimension, enumeration size) would be exceeded."""

    def __init__(self, message: str, wanted: int | None = None):
        self.wanted = wanted
        super().__init__(message)


class CompositionError(ToolkitError):
    pass


class PostselectionImpossible(ToolkitError):
    pass


class PolicyError(ToolkitError):
    pass
