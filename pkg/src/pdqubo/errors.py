"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class PdQuboError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(PdQuboError, ValueError):
    """Malformed input text. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class DomainError(PdQuboError, ValueError):
    """A value lies outside the mathematical domain of the object."""


class DimensionError(PdQuboError, ValueError):
    """An assignment or state has the wrong length."""


class ParameterError(PdQuboError, ValueError):
    """An algorithm parameter is out of range."""


class StructuralError(PdQuboError, ValueError):
    """Nodes, edges or matchings do not fit the graph they refer to."""


class SizeError(PdQuboError):
    """A problem exceeds an enumeration cap."""

    exit_code = 2
