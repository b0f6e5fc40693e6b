# Exception hierarchy shared by the library and the CLI.
# The CLI maps these onto exit codes: validation → 1, resource → 2, assertion → 3.


class NeedletError(Exception):
    """Base class for every error raised on purpose by this package."""


class ValidationFailure(NeedletError, ValueError):
    """An input failed a range or consistency check before any computation."""


class PyramidFormatError(ValidationFailure):
    """A pyramid file could not be parsed. `field` names the offending header field."""

    def __init__(self, message: str, field: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ResourceCapError(NeedletError, RuntimeError):
    """A requested grid or level would exceed the configured resource cap."""


class RateAssertionError(NeedletError, AssertionError):
    """A fitted convergence slope fell outside the requested tolerance."""
