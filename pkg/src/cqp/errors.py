class CqpError(Exception):
    """Base class for all errors raised by this package."""


class CqpSyntaxError(CqpError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class CqpTypeError(CqpError):
    """Type or linearity violation."""


class CqpSemanticsError(CqpError):
    """Invalid operation on configurations or transition systems."""
