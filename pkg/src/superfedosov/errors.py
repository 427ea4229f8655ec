"""Exception hierarchy. Every error carries the CLI exit code it maps to."""


class FedosovError(Exception):
    """Base class for all engine errors."""

    code = "E_INTERNAL"
    exit_code = 1


class ParseError(FedosovError):
    code = "E_PARSE"
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: " if column is not None else f"line {line}: "
        super().__init__(where + message)


class ValidationError(FedosovError):
    code = "E_VALIDATION"
    exit_code = 3

    def __init__(self, check, indices=None, message=""):
        self.check = check
        self.indices = indices
        text = f"check {check} failed"
        if indices is not None:
            text += f" at {indices}"
        if message:
            text += f": {message}"
        super().__init__(text)


class DegenerateError(FedosovError):
    code = "E_DEGENERATE"
    exit_code = 4


class JetExhaustedError(FedosovError):
    code = "E_JET_EXHAUSTED"
    exit_code = 5


class HbarDivisionError(FedosovError):
    code = "E_HBAR_DIVISION"
    exit_code = 6


class NoConvergenceError(FedosovError):
    code = "E_NO_CONVERGENCE"
    exit_code = 6
