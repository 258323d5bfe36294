"""Multi-width convolutional sentence encoder.

Each filter bank of width ``c`` slides over windows of ``c`` word vectors,
applies ``tanh(W x + b)``, and max-pools over time. The pooled vectors of
all widths are summed into one sentence vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .errors import EncoderError
from .tensor import Tensor
from .text import PAD_ID


@dataclass
class SentEncoderParams:
    embedding: Tensor
    filters: dict[int, tuple[Tensor, Tensor]]

    @property
    def widths(self) -> list[int]:
        return sorted(self.filters)

    @property
    def word_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def sent_dim(self) -> int:
        return self.filters[self.widths[0]][1].shape[0]


def pad_sentence(tokens: Sequence[int], min_len: int) -> list[int]:
    tokens = list(tokens)
    return tokens + [PAD_ID] * (min_len - len(tokens))


def encode_sentences(sentences: Sequence[Sequence[int]], params: SentEncoderParams) -> Tensor:
    """Encode many sentences at once; returns an ``S x sent_dim`` tensor."""
    if not sentences:
        raise EncoderError("no sentences to encode")
    if any(len(s) == 0 for s in sentences):
        raise EncoderError("cannot encode an empty sentence")
    min_len = max(params.widths)
    padded = [pad_sentence(s, min_len) for s in sentences]
    lengths = np.array([len(s) for s in padded])
    flat = np.concatenate([np.asarray(s, dtype=np.intp) for s in padded])
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    vocab = params.embedding.shape[0]
    if flat.min() < 0 or flat.max() >= vocab:
        raise EncoderError(f"token id outside the vocabulary of size {vocab}")

    total = None
    for c in params.widths:
        weight, bias = params.filters[c]
        counts = lengths - c + 1
        starts = np.concatenate([off + np.arange(k) for off, k in zip(offsets, counts)])
        ids = flat[starts[:, None] + np.arange(c)[None, :]]
        windows = T.reshape(T.getitem(params.embedding, ids), (len(starts), c * params.word_dim))
        features = T.tanh(T.add_bias(T.matmul(windows, T.transpose(weight)), bias))
        seg = np.concatenate([[0], np.cumsum(counts)[:-1]])
        pooled = T.segment_max(features, seg)
        total = pooled if total is None else T.add(total, pooled)
    return total


def encode_sentence(tokens: Sequence[int], params: SentEncoderParams) -> Tensor:
    """Sentence vector of shape ``(sent_dim,)`` for one token-id sequence."""
    return T.reshape(encode_sentences([tokens], params), (params.sent_dim,))
