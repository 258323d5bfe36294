"""Hybrid MemNet: parameters, initialisation and the batched forward pass."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .decoder import DecoderParams, decode_batch
from .document_encoder import (
    LstmParams,
    MemNetParams,
    RecurrentParams,
    encode_recurrent_batch,
    fuse,
    memnet_encode_batch,
)
from .errors import CheckpointError, TrainingError
from .sentence_encoder import SentEncoderParams, encode_sentences
from .tensor import Tensor
from .text import PAD_ID


def param_shapes(config: TrainConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every learnable array, in a stable order."""
    d, m, h = config.word_dim, config.sent_dim, config.doc_dim
    shapes: dict[str, tuple[int, ...]] = {"embedding": (vocab_size, d)}
    for c in config.kernel_widths:
        shapes[f"conv{c}.weight"] = (m, c * d)
        shapes[f"conv{c}.bias"] = (m,)
    directions = ["fwd"] if config.encoder_mode == "lstm" else ["fwd", "bwd"]
    size = h // len(directions)
    for name in directions:
        shapes[f"enc.{name}.w_x"] = (4 * size, m)
        shapes[f"enc.{name}.w_h"] = (4 * size, size)
        shapes[f"enc.{name}.bias"] = (4 * size,)
    if config.use_memnet:
        shapes["mem.query"] = (h, h)
        for k in range(1, config.hops + 1):
            shapes[f"mem.hop{k}.A"] = (h, m)
            shapes[f"mem.hop{k}.C"] = (h, m)
    shapes["dec.init.weight"] = (h, h)
    shapes["dec.init.bias"] = (h,)
    shapes["dec.lstm.w_x"] = (4 * h, m)
    shapes["dec.lstm.w_h"] = (4 * h, h)
    shapes["dec.lstm.bias"] = (4 * h,)
    shapes["dec.mlp.w1"] = (config.mlp_hidden, 2 * h)
    shapes["dec.mlp.b1"] = (config.mlp_hidden,)
    shapes["dec.mlp.w2"] = (1, config.mlp_hidden)
    shapes["dec.mlp.b2"] = (1,)
    return shapes


@dataclass
class ModelParams:
    config: TrainConfig
    tensors: dict[str, Tensor]

    def __post_init__(self):
        lstm = lambda p: LstmParams(self[f"{p}.w_x"], self[f"{p}.w_h"], self[f"{p}.bias"])  # noqa: E731
        cfg = self.config
        self.sentence = SentEncoderParams(
            self["embedding"],
            {c: (self[f"conv{c}.weight"], self[f"conv{c}.bias"]) for c in cfg.kernel_widths},
        )
        self.encoder = RecurrentParams(
            lstm("enc.fwd"), lstm("enc.bwd") if cfg.encoder_mode == "blstm" else None
        )
        self.memnet = (
            MemNetParams(
                self["mem.query"],
                [(self[f"mem.hop{k}.A"], self[f"mem.hop{k}.C"]) for k in range(1, cfg.hops + 1)],
            )
            if cfg.use_memnet
            else None
        )
        self.decoder = DecoderParams(
            self["dec.init.weight"],
            self["dec.init.bias"],
            lstm("dec.lstm"),
            self["dec.mlp.w1"],
            self["dec.mlp.b1"],
            self["dec.mlp.w2"],
            self["dec.mlp.b2"],
        )

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self):
        return iter(self.tensors)

    def items(self):
        return self.tensors.items()

    @property
    def vocab_size(self) -> int:
        return self["embedding"].shape[0]

    def num_values(self) -> int:
        return int(np.sum([t.size for t in self.tensors.values()]))

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    @classmethod
    def from_arrays(cls, config: TrainConfig, arrays: dict[str, np.ndarray]) -> "ModelParams":
        vocab_size = arrays["embedding"].shape[0] if "embedding" in arrays else 0
        expected = param_shapes(config, vocab_size)
        if set(arrays) != set(expected):
            missing = sorted(set(expected) - set(arrays))
            extra = sorted(set(arrays) - set(expected))
            raise CheckpointError(f"parameter names do not match config: missing {missing}, unexpected {extra}")
        tensors = {}
        for name, shape in expected.items():
            array = np.asarray(arrays[name], dtype=np.float64)
            if array.shape != shape:
                raise CheckpointError(f"{name}: shape {array.shape}, config expects {shape}")
            tensors[name] = Tensor(array, requires_grad=True, name=name)
        return cls(config, tensors)

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None


def init_params(config: TrainConfig, vocab_size: int, seed: int | None = None) -> ModelParams:
    """Draw every value i.i.d. from U[-init_range, init_range]; the PAD row is zero."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    r = config.init_range
    arrays = {name: rng.uniform(-r, r, size=shape) for name, shape in param_shapes(config, vocab_size).items()}
    arrays["embedding"][PAD_ID] = 0.0
    return ModelParams.from_arrays(config, arrays)


@dataclass
class ForwardResult:
    scores: Tensor  # B x N extraction probabilities
    lengths: np.ndarray
    sentvecs: Tensor
    enc_states: Tensor
    d_prime: Tensor
    d_memnet: Tensor | None
    d_fused: Tensor
    attention: list[np.ndarray]

    @property
    def mask(self) -> np.ndarray:
        return np.arange(self.scores.shape[1])[None, :] < self.lengths[:, None]

    def doc_scores(self, b: int) -> np.ndarray:
        return self.scores.data[b, : self.lengths[b]].copy()


def pad_labels(labels: Sequence[Sequence[float]], steps: int) -> np.ndarray:
    out = np.zeros((len(labels), steps))
    for b, row in enumerate(labels):
        out[b, : len(row)] = row
    return out


def forward(params: ModelParams, docs: Sequence[Sequence[Sequence[int]]], teacher=None) -> ForwardResult:
    """Run the full network over a batch of token-id documents.

    ``teacher`` holds one label sequence per document for teacher forcing;
    ``None`` feeds back the model's own scores.
    """
    if not docs or any(len(d) == 0 for d in docs):
        raise TrainingError("every document needs at least one sentence")
    lengths = np.array([len(d) for d in docs])
    batch, steps = len(docs), int(lengths.max())
    flat = [s for d in docs for s in d]
    sentvecs = encode_sentences(flat, params.sentence)

    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    grid = np.zeros((batch, steps), dtype=np.intp)
    for b, (start, n) in enumerate(zip(starts, lengths)):
        grid[b, :n] = np.arange(start, start + n)
        grid[b, n:] = start
    grid_vecs = T.getitem(sentvecs, grid)

    enc_states, d_prime = encode_recurrent_batch(grid_vecs, lengths, params.encoder)
    mask = np.arange(steps)[None, :] < lengths[:, None]
    if params.memnet is not None:
        d_memnet, attention = memnet_encode_batch(grid_vecs, d_prime, mask, params.memnet)
        d_fused = fuse(d_prime, d_memnet)
    else:
        d_memnet, attention, d_fused = None, [], d_prime

    if teacher is not None:
        if len(teacher) != batch or any(len(y) != n for y, n in zip(teacher, lengths)):
            raise TrainingError("teacher labels must align with every document's sentences")
        teacher = pad_labels(teacher, steps)
    scores = decode_batch(grid_vecs, enc_states, d_fused, params.decoder, teacher)
    return ForwardResult(scores, lengths, grid_vecs, enc_states, d_prime, d_memnet, d_fused, attention)


def batch_loss(result: ForwardResult, labels: Sequence[Sequence[int]]) -> Tensor:
    """Mean over documents of each document's mean per-sentence cross-entropy."""
    lengths = result.lengths
    targets = pad_labels(labels, result.scores.shape[1])
    weights = result.mask / (lengths[:, None] * len(lengths))
    return T.binary_cross_entropy(result.scores, targets, weights)


def sentence_loss(scores: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean per-sentence binary cross-entropy of one document's scores."""
    if scores.ndim != 1 or scores.shape[0] != len(labels):
        raise TrainingError(f"{len(labels)} labels for scores of shape {scores.shape}")
    n = len(labels)
    return T.binary_cross_entropy(scores, np.asarray(labels, dtype=np.float64), np.full(n, 1.0 / n))


def predict(params: ModelParams, docs: Sequence[Sequence[Sequence[int]]]) -> list[np.ndarray]:
    """Inference-mode extraction probabilities for each document."""
    with T.no_grad():
        result = forward(params, docs)
    return [result.doc_scores(b) for b in range(len(docs))]


def save_model(path, params: ModelParams, vocab, **extra):
    """Write parameters, config and vocabulary (with its content hash) to one archive."""
    from .checkpoint import save_checkpoint

    if len(vocab) != params.vocab_size:
        raise CheckpointError(f"vocabulary has {len(vocab)} entries, embedding has {params.vocab_size} rows")
    meta = {
        "config": params.config.to_dict(),
        "vocab": vocab.itos,
        "vocab_hash": vocab.content_hash,
        **extra,
    }
    return save_checkpoint(path, params.to_arrays(), meta)


def load_model(path):
    """Inverse of :func:`save_model`; returns ``(params, vocab, meta)``."""
    from .checkpoint import load_checkpoint
    from .text import Vocabulary

    arrays, meta = load_checkpoint(path)
    try:
        config = TrainConfig.from_dict(meta["config"])
        vocab = Vocabulary(meta["vocab"])
    except KeyError as exc:
        raise CheckpointError(f"{path}: checkpoint metadata lacks {exc}") from None
    if vocab.content_hash != meta.get("vocab_hash"):
        raise CheckpointError(f"{path}: stored vocabulary does not match its hash")
    return ModelParams.from_arrays(config, arrays), vocab, meta
