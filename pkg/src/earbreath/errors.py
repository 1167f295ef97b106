"""Exception types raised across the package."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PipelineError, ValueError):
    """An argument is outside its documented domain."""


class AlignmentError(PipelineError):
    """Paired streams disagree in rate, length or block layout."""


class DivergenceError(PipelineError):
    """Adaptive filter weights became non-finite.

    Carries ``sample_index``, the global index of the first bad sample.
    """

    def __init__(self, sample_index: int):
        self.sample_index = sample_index
        super().__init__(f"adaptive filter diverged at sample {sample_index}")


class InsufficientDataError(PipelineError):
    """Signal is too short for the requested analysis."""


class DegenerateWindowError(PipelineError):
    """An analysis window carries no usable signal (zero norm / zero spectrum)."""


class FusionUnavailableError(PipelineError):
    """Binaural fusion requested with a missing channel."""


class UndefinedMetricError(PipelineError):
    """A metric is undefined for the given inputs (empty, zero variance, ...)."""


class FormatError(PipelineError):
    """A container file is malformed.

    Carries ``byte_offset`` of the offending structure when known.
    """

    def __init__(self, message: str, byte_offset: int | None = None):
        self.byte_offset = byte_offset
        if byte_offset is not None:
            message = f"{message} (at byte {byte_offset})"
        super().__init__(message)
