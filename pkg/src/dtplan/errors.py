class DomainError(Exception):
    """Base class for every error raised on behalf of a domain."""


class UnknownAttributeError(DomainError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"unknown attribute {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class DomainSyntaxError(DomainError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class DomainReferenceError(DomainError):
    def __init__(self, name: str, context: str = ""):
        msg = f"undeclared identifier {name!r}"
        if context:
            msg += f" (in {context})"
        super().__init__(msg)
        self.name = name


class DomainSchemaError(DomainError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ContractViolation(DomainError):
    """An operation was called outside its precondition."""


class UnsupportedConstruct(DomainError):
    """An abstraction step would leave the condition or effect language."""


class InfeasibleBoxError(DomainError):
    """Probability box with sum(lo) > 1 or sum(hi) < 1."""


class ModelError(DomainError):
    """The utility model has no applicable guard for some state."""
