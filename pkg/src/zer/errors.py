"""Exception hierarchy shared by every stage of the pipeline."""


class ZERError(Exception):
    """Base class. ``module`` and ``step`` are filled in by the RG driver."""

    module = "zer"

    def __init__(self, message, *, step=None):
        super().__init__(message)
        self.step = step


class ModelValidationError(ZERError, ValueError):
    module = "model_builder"


class DegenerateFermiLevelError(ZERError):
    module = "model_builder"

    def __init__(self, message, candidates, *, step=None):
        super().__init__(message, step=step)
        self.candidates = candidates


class SingularEntanglementError(ZERError):
    """Raised when a restricted mode is exactly filled or empty."""

    module = "gaussian_core"

    def __init__(self, message, modes, *, step=None):
        super().__init__(message, step=step)
        self.modes = modes


class NonUnitaryError(ZERError, ValueError):
    module = "gaussian_core"


class TranslationInvarianceError(ZERError):
    module = "distiller"


class EmptyBandGroupError(ZERError, ValueError):
    module = "wannier"


class WannierizationError(ZERError):
    module = "wannier"


class ZipperError(ZERError):
    module = "zipper"


class ResidualAbort(ZERError):
    module = "zipper"


class ConfigError(ZERError):
    module = "cli"

    def __init__(self, message, problems=(), *, step=None):
        super().__init__(message, step=step)
        self.problems = list(problems)
