"""Exception hierarchy shared by every module."""


class ModsgError(Exception):
    """Base class for all library errors."""


class DomainError(ModsgError, ValueError):
    pass


class ValidationError(ModsgError, ValueError):
    pass


class PrecisionError(ModsgError):
    pass


class ConvergenceError(ModsgError):
    pass


class NonConvergenceError(ConvergenceError):
    pass


class SingularityError(ModsgError):
    pass


class PoleError(SingularityError):
    pass


class NearPoleError(SingularityError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SingularSystemError(ModsgError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ResonanceError(ModsgError):
    pass


class RootCountError(ModsgError):
    pass


class DegenerateRootError(ModsgError):
    pass


class BranchError(ModsgError):
    pass
