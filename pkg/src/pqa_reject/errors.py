"""Exception hierarchy shared by the library and the command line."""


class PQARejectError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class ValidationError(PQARejectError, ValueError):
    """A value or configuration violates a documented constraint."""

    exit_code = 1


class ConfigError(ValidationError):
    """One or more configuration problems, reported together."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(PQARejectError):
    """Input data could not be read or is inconsistent."""

    exit_code = 2


class ParseError(DataError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class IntegrityError(DataError):
    """A record references an identifier that does not exist."""


class InvariantError(PQARejectError):
    """An internal invariant was violated; indicates a bug."""

    exit_code = 3
