"""Exception hierarchy shared by every module."""


class StrucabsError(Exception):
    pass


class InvalidInputError(StrucabsError, ValueError):
    """Input data violates a documented precondition."""


class DomainError(StrucabsError, ValueError):
    """An operation was asked for something outside its domain."""


class HeightCapError(DomainError):
    pass


class DivergenceError(StrucabsError, ValueError):
    pass


class DegenerateClusterError(StrucabsError, ValueError):
    pass


class OptimizerError(StrucabsError, RuntimeError):
    pass


class ParseError(InvalidInputError):
    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")
