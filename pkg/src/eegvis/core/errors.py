"""Exception hierarchy shared by all eegvis modules."""


class EegVisError(Exception):
    """Base class for every error raised by eegvis."""


class FormatError(EegVisError):
    """Container manifest is missing or cannot be parsed."""


class IntegrityError(EegVisError):
    """Array file does not match the shape declared in the manifest."""


class UnsupportedDtypeError(EegVisError):
    """Manifest declares a dtype other than little-endian f32."""


class WriteError(EegVisError):
    """Writing an artifact to disk failed."""


class ConfigError(EegVisError, ValueError):
    """Settings are invalid or infeasible for the given data."""


class ShapeError(EegVisError, ValueError):
    """Tensor shapes do not match what a model or operation expects."""


class InvalidDataError(EegVisError, ValueError):
    """Input data violates a precondition (NaN/Inf values, empty batches)."""


class MiningError(EegVisError):
    """No valid triplets can be formed from a batch."""


class TrainingError(EegVisError):
    """Training diverged.

    Args:
        step: Optimisation step (or epoch) at which the failure was detected
        term: Name of the loss term that became non-finite
    """

    def __init__(self, step: int, term: str, value: float | None = None):
        self.step = step
        self.term = term
        self.value = value
        detail = f" (value {value})" if value is not None else ""
        super().__init__(f"Non-finite {term} at step {step}{detail}")


class InvalidClassifierError(EegVisError, ValueError):
    """Classifier output rows are not probability vectors."""


class DegenerateInputError(EegVisError, ValueError):
    """Input has no spread to project or cluster."""


class MissingArtifactError(EegVisError, FileNotFoundError):
    """A dataset, checkpoint or run file a command depends on does not exist."""
