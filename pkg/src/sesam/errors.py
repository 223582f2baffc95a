"""Exception types shared across the toolkit."""


class SesamError(Exception):
    """Base class for all toolkit errors."""


class EmptyMask(SesamError):
    """Operation requires at least one foreground pixel."""


class EmptyWeakMask(SesamError):
    """Weak reference mask has no labeled pixels."""


class EmptyCandidate(SesamError):
    """Candidate mask has no foreground pixels."""


class DimensionMismatch(SesamError):
    """Rasters passed to one operation do not share dimensions."""


class MissingConfidence(SesamError):
    """Sampling strategy needs a confidence field that was not supplied."""


class UnknownImage(SesamError):
    """Oracle cannot resolve the requested image reference."""


class BackendUnavailable(SesamError):
    """Out-of-process oracle backend could not be reached."""


class MalformedResponse(SesamError):
    """Oracle response violates the wire protocol."""


class RunLengthOverflow(SesamError):
    """Run-length count exceeds the codec's integer bound."""


class LengthMismatch(SesamError):
    """Decoded run lengths do not cover width * height pixels."""


class OracleFailure(SesamError):
    """Oracle query failed inside the refinement pipeline."""

    def __init__(self, message: str, image_ref: str = ""):
        super().__init__(message)
        self.image_ref = image_ref


class UnknownKind(SesamError):
    """Annotation kind not present in the cost model."""


class ZeroFineBaseline(SesamError):
    """Weak-over-fine ratio is undefined for a zero fine baseline."""


class NoValidPixels(SesamError):
    """Evaluation region contains no ground-truth-labeled pixels."""


class ConfigError(SesamError):
    """Configuration violates an invariant (e.g. theta2 <= theta1)."""
