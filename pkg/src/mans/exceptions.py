"""Exception types raised by the engine."""


class MansError(Exception):
    """Base class for all engine errors."""


class ParseError(MansError):
    """A dataset file line could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class DatasetError(MansError):
    """The loaded dataset violates a structural requirement."""


class FeatureFormatError(MansError):
    """A feature file is malformed or has unexpected dimensions."""


class UnknownEntityError(MansError):
    """A feature file names entities absent from the vocabulary."""

    def __init__(self, names):
        self.names = list(names)
        shown = ", ".join(self.names[:5])
        more = "" if len(self.names) <= 5 else f" (+{len(self.names) - 5} more)"
        super().__init__(f"unknown entities in feature file: {shown}{more}")


class CheckpointError(MansError):
    """A checkpoint file is malformed or inconsistent with the run."""


class CannotCorruptError(MansError):
    """Negative sampling is impossible (fewer than two entities)."""


class ProtocolError(MansError):
    """An evaluation routine was called with inconsistent inputs."""


class TrainingDivergedError(MansError):
    """A non-finite loss was observed during training."""

    def __init__(self, epoch, batch, triple):
        self.epoch = epoch
        self.batch = batch
        self.triple = triple
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch}, triple {tuple(triple)}"
        )


class ConfigError(MansError):
    """A run configuration failed validation."""
