"""Flat ``key = value`` run configuration shared by every CLI command.

The file format is deliberately primitive: one assignment per line,
``#`` comments, no sections. Unknown keys are rejected so typos fail
loudly instead of silently training with defaults.
"""

from dataclasses import dataclass, fields
from typing import Optional

from .exceptions import ConfigError
from .sampling import STRATEGIES, SamplerConfig
from .scoring import NORMS
from .training import TrainConfig

FINAL_EVALS = ("lp", "tc", "both", "none")


@dataclass
class RunConfig:
    train_path: str = ""
    valid_path: str = ""
    test_path: str = ""
    features_path: str = ""
    output_dir: str = ""
    embedding_dim: int = 128
    feature_dim: int = 4096
    sampler: str = "normal"
    beta1: float = 0.4
    beta2: float = 0.3
    k: int = 1
    epochs: int = 1000
    num_batches: Optional[int] = 400
    batch_size: Optional[int] = None
    margin: float = 4.0
    learning_rate: float = 0.01
    norm: str = "L1"
    seed: int = 0
    adam_decay1: float = 0.9
    adam_decay2: float = 0.999
    adam_eps: float = 1e-8
    renormalize: bool = True
    checkpoint_every: int = 0
    train_filled_features: bool = False
    filter_false_negatives: bool = False
    final_eval: str = "lp"

    def validate(self, require_output=True):
        for name in ("train_path", "valid_path", "test_path"):
            if not getattr(self, name):
                raise ConfigError(f"{name} is required")
        if require_output and not self.output_dir:
            raise ConfigError("output_dir is required")
        if self.sampler not in STRATEGIES:
            raise ConfigError(f"sampler must be one of {STRATEGIES}, got {self.sampler!r}")
        if not self.features_path and self.sampler != "normal":
            raise ConfigError(
                f"features_path is required for sampler {self.sampler!r}; "
                "without real features there is no visual modality to corrupt"
            )
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if (self.num_batches is None) == (self.batch_size is None):
            raise ConfigError("set exactly one of num_batches / batch_size")
        if self.margin <= 0:
            raise ConfigError(f"margin must be positive, got {self.margin}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.norm not in NORMS:
            raise ConfigError(f"norm must be one of {NORMS}, got {self.norm!r}")
        if self.embedding_dim <= 0 or self.feature_dim <= 0:
            raise ConfigError("embedding_dim and feature_dim must be positive")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0")
        if self.train_filled_features:
            raise ConfigError(
                "train_filled_features=true is not supported: pooled features are frozen"
            )
        if self.final_eval not in FINAL_EVALS:
            raise ConfigError(f"final_eval must be one of {FINAL_EVALS}")
        return self

    def train_config(self):
        return TrainConfig(
            embedding_dim=self.embedding_dim,
            margin=self.margin,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            num_batches=self.num_batches,
            batch_size=self.batch_size,
            norm=self.norm,
            seed=self.seed,
            sampler=SamplerConfig(
                strategy=self.sampler, beta1=self.beta1, beta2=self.beta2,
                k=self.k, epochs=self.epochs, seed=self.seed,
                filter_false_negatives=self.filter_false_negatives,
            ),
            adam_decay1=self.adam_decay1,
            adam_decay2=self.adam_decay2,
            adam_eps=self.adam_eps,
            renormalize=self.renormalize,
            checkpoint_every=self.checkpoint_every,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_OPTIONAL_INTS = {"num_batches", "batch_size"}
_BOOLS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _convert(key, raw):
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if key in _OPTIONAL_INTS:
        return None if raw.lower() in ("", "none") else int(raw)
    if ftype is bool or ftype == "bool":
        value = _BOOLS.get(raw.lower())
        if value is None:
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        return value
    if ftype is int or ftype == "int":
        return int(raw)
    if ftype is float or ftype == "float":
        return float(raw)
    return raw


def apply_assignments(config, assignments, source="config"):
    for key, raw in assignments:
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}: unknown key {key!r}")
        try:
            setattr(config, key, _convert(key, raw))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: bad value for {key}: {exc}") from exc
    return config


def parse_config_file(path, config=None):
    config = config or RunConfig()
    assignments = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, raw = stripped.split("=", 1)
            assignments.append((key.strip(), raw))
    return apply_assignments(config, assignments, source=str(path))


def write_effective_config(config, path):
    """Echo the fully resolved configuration, one key per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for f in fields(RunConfig):
            value = getattr(config, f.name)
            if value is None:
                value = "none"
            elif isinstance(value, bool):
                value = "true" if value else "false"
            fh.write(f"{f.name} = {value}\n")
