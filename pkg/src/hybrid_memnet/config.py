from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError

ENCODER_MODES = ("lstm", "blstm")


@dataclass
class TrainConfig:
    """Every hyperparameter of a run. Defaults reproduce the published setup."""

    word_dim: int = 150
    sent_dim: int = 300
    doc_dim: int = 750
    kernel_widths: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    hops: int = 2
    mlp_hidden: int = 256
    init_range: float = 0.05
    batch_size: int = 20
    learning_rate: float = 0.001
    beta1: float = 0.99
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 50
    patience: int | None = 5
    seed: int = 0
    encoder_mode: str = "blstm"
    use_memnet: bool = True
    gradient_clip_norm: float = 5.0
    max_vocab: int = 30000
    max_sent_tokens: int = 100
    max_doc_sentences: int = 64
    summary_sentences: int = 3
    summary_words: int = 75

    def __post_init__(self):
        self.kernel_widths = tuple(int(c) for c in self.kernel_widths)
        self.validate()

    def validate(self) -> None:
        dims = {
            "word_dim": self.word_dim,
            "sent_dim": self.sent_dim,
            "doc_dim": self.doc_dim,
            "hops": self.hops,
            "mlp_hidden": self.mlp_hidden,
            "batch_size": self.batch_size,
            "max_sent_tokens": self.max_sent_tokens,
            "max_doc_sentences": self.max_doc_sentences,
        }
        for name, value in dims.items():
            if int(value) <= 0:
                raise UsageError(f"{name} must be positive, got {value}")
        if not self.kernel_widths or min(self.kernel_widths) <= 0:
            raise UsageError(f"kernel widths must be positive, got {self.kernel_widths}")
        if len(set(self.kernel_widths)) != len(self.kernel_widths):
            raise UsageError(f"kernel widths must be distinct, got {self.kernel_widths}")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise UsageError(f"{name} must lie in (0, 1), got {value}")
        if self.encoder_mode not in ENCODER_MODES:
            raise UsageError(f"encoder_mode must be one of {ENCODER_MODES}, got {self.encoder_mode!r}")
        if self.encoder_mode == "blstm" and self.doc_dim % 2:
            raise UsageError(f"blstm splits doc_dim across two directions; {self.doc_dim} is odd")
        if self.learning_rate < 0 or self.init_range < 0 or self.epsilon <= 0:
            raise UsageError("learning_rate and init_range must be >= 0, epsilon > 0")
        if self.gradient_clip_norm <= 0:
            raise UsageError("gradient_clip_norm must be positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["kernel_widths"] = list(self.kernel_widths)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
