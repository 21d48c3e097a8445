class TYError(Exception):
    """Base class for everything this package raises on purpose."""

    exit_code = 1


class ParseError(TYError, ValueError):
    """A group, form or range literal could not be read, or describes an ill-defined object."""

    exit_code = 2


class InconsistentInputError(TYError, ValueError):
    exit_code = 2


class DegenerateFormError(TYError, ValueError):
    """The operation needs a nondegenerate pairing (a bicharacter)."""

    exit_code = 3


class UnsupportedGroupError(TYError, ValueError):
    """The group order is outside what the requested method covers (e.g. p = 2 closed forms)."""

    exit_code = 4


class BoundExceededError(TYError, ValueError):
    exit_code = 5

    def __init__(self, what, size, bound):
        super().__init__(f"{what}: estimated size {size} exceeds the bound {bound}")
        self.what = what
        self.size = size
        self.bound = bound

    def __reduce__(self):
        return type(self), (self.what, self.size, self.bound)


class InternalConsistencyError(TYError, RuntimeError):
    """A guard that must never fire on valid input did fire."""

    exit_code = 70
