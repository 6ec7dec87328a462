"""Exception hierarchy shared by every cegarkit module."""


class CegarKitError(Exception):
    """Base class for all errors raised by cegarkit."""


class ModelError(CegarKitError):
    """A concrete model violates one of its structural invariants."""


class ModelParseError(ModelError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class UnknownStateError(ModelError, KeyError):
    def __init__(self, state_id: str):
        super().__init__(f"unknown state id {state_id!r}")
        self.state_id = state_id

    def __str__(self) -> str:
        return self.args[0]


class AbstractionError(CegarKitError):
    pass


class CounterexampleError(CegarKitError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class PathFormatError(CegarKitError):
    pass


class PropertyError(CegarKitError):
    pass


class PartitionError(CegarKitError):
    """Raised when a D/B/I partition is requested at a non-failure position."""


class RefinementError(CegarKitError):
    """The split would leave the failure class in one piece."""


class GeneratorError(CegarKitError):
    pass
