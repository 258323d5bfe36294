"""Exception hierarchy shared across the package."""


class HybridMemNetError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(HybridMemNetError, ValueError):
    """Operand shapes are incompatible."""


class DomainError(HybridMemNetError, ValueError):
    """Input lies outside an operation's domain (e.g. empty softmax)."""


class PoolingError(DimensionError):
    """Max-over-time pooling received no time steps."""


class UsageError(HybridMemNetError, RuntimeError):
    """An API was called in a state it does not support."""


class OptimizerError(HybridMemNetError, RuntimeError):
    pass


class CheckpointError(HybridMemNetError, ValueError):
    pass


class PipelineError(HybridMemNetError, ValueError):
    pass


class CorpusParseError(PipelineError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PipelineError):
    pass


class LabelingError(PipelineError):
    pass


class EncoderError(DimensionError):
    pass


class DecoderError(DimensionError):
    pass


class TrainingError(HybridMemNetError, RuntimeError):
    pass


class EvaluationError(HybridMemNetError, ValueError):
    pass


class CompatibilityError(HybridMemNetError, ValueError):
    """Checkpoint and vocabulary (or config) do not belong together."""


class OracleError(HybridMemNetError, ValueError):
    pass
