"""Exception hierarchy shared by all modules."""


class EPEError(Exception):
    """Base class for every error raised by the package."""


class NonHermitianError(EPEError, ValueError):
    def __init__(self, max_asymmetry: float):
        self.max_asymmetry = float(max_asymmetry)
        super().__init__(
            f"matrix is not Hermitian: max |H - H^dagger| = {self.max_asymmetry:.3e}"
        )


class BasisMismatchError(EPEError, ValueError):
    pass


class InvalidFamilyError(EPEError, ValueError):
    pass


class EnumerationCapError(EPEError):
    def __init__(self, n_paths: int, cap: int):
        self.n_paths = n_paths
        self.cap = cap
        super().__init__(
            f"{n_paths} fine-grained paths exceed the enumeration cap of {cap}; "
            "use the class-operator route (epe.histories) instead"
        )


class NonExhaustiveGroupingError(EPEError, ValueError):
    pass


class PictureError(EPEError, ValueError):
    pass


class ImpossiblePastError(EPEError):
    pass


class UnconditionedPastError(EPEError):
    pass


class NotRecordedError(EPEError):
    pass


class TypicalityUndefinedError(EPEError, ValueError):
    pass


class ScenarioError(EPEError, ValueError):
    """Scenario file failed validation; ``location`` is a JSON-pointer string."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location or '/'}: {message}")


class InvariantViolation(EPEError):
    pass
