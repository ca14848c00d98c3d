"""Exception types shared across the package."""


class TopogenError(Exception):
    """Base class for errors raised by topogen."""


class InputError(TopogenError, ValueError):
    """Bad user input: unreadable files, malformed values, invalid options."""


class DivergenceError(TopogenError, FloatingPointError):
    """Training produced a non-finite loss."""

    def __init__(self, step: int, loss_name: str, value: float):
        self.step = step
        self.loss_name = loss_name
        self.value = value
        super().__init__(f"{loss_name} became non-finite ({value}) at step {step}")
