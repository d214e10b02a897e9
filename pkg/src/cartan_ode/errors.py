"""Exception types raised by the package."""


class DslSyntaxError(SyntaxError):
    """Malformed system text. Carries 1-based ``lineno`` and ``offset``."""

    def __init__(self, msg, lineno=None, offset=None, text=None):
        super().__init__(msg, (None, lineno, offset, text))
        self.msg = msg

    def __str__(self):
        if self.lineno is None:
            return self.msg
        return f"line {self.lineno}, column {self.offset}: {self.msg}"


class UnknownFunction(DslSyntaxError):
    pass


class IndexOutOfRange(ValueError):
    pass


class DimensionTooSmall(ValueError):
    pass


class DivisionByZeroExpr(ZeroDivisionError):
    pass


class EvalSingular(ArithmeticError):
    pass


class NotSymmetric(ValueError):
    pass


class StencilOutOfDomain(ArithmeticError):
    pass
