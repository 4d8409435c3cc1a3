"""Exception hierarchy shared by every stage of the toolchain."""


class HlsError(Exception):
    """Base class for all diagnostics raised by hlsynth."""


class SourceError(HlsError):
    """An error that can be attributed to a position in BDL source text."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}" if line else message)


class LexError(SourceError):
    def __init__(self, line, column, char, message=None):
        self.char = char
        super().__init__(message or f"unexpected character {char!r}", line, column)


class ParseError(SourceError):
    def __init__(self, line, column, expected, found):
        self.expected = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected))
        super().__init__(f"expected one of {{{wanted}}}, found {found!r}", line, column)


class SemanticError(SourceError):
    pass


class WidthError(SourceError):
    def __init__(self, node, value, width):
        self.node = node
        self.value = value
        self.width = width
        super().__init__(
            f"constant {value} does not fit destination width {width}",
            getattr(node, "line", 0),
            getattr(node, "column", 0),
        )


class CycleError(HlsError):
    pass


class DeadlineError(HlsError):
    def __init__(self, deadline, critical_path):
        self.deadline = deadline
        self.critical_path = critical_path
        super().__init__(f"deadline {deadline} is shorter than the critical path ({critical_path})")


class AllocationError(HlsError):
    """A resource kind used by the design has no instances allocated."""

    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"no instances allocated for resource kind '{kind}'")


class InfeasibleBinding(HlsError):
    pass


class SizeError(HlsError):
    pass


class FanInError(HlsError):
    pass


class PlaFormatError(HlsError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InputError(HlsError):
    pass


class WatchdogError(HlsError):
    pass
