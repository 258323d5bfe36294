"""Sequential sentence labeller.

The decoder LSTM starts from ``tanh(W_init d_f + b)`` and at step ``t``
reads the previous sentence vector scaled by the previous extraction
probability. Each step's state is concatenated with the encoder state of
the same sentence and scored by a one-hidden-layer tanh MLP and a sigmoid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .document_encoder import LstmParams, lstm_step
from .errors import DecoderError
from .tensor import Tensor


@dataclass
class DecoderParams:
    init_weight: Tensor
    init_bias: Tensor
    lstm: LstmParams
    mlp_w1: Tensor
    mlp_b1: Tensor
    mlp_w2: Tensor
    mlp_b2: Tensor


def _mlp(z: Tensor, params: DecoderParams) -> Tensor:
    hidden = T.tanh(T.add_bias(T.matmul(z, T.transpose(params.mlp_w1)), params.mlp_b1))
    return T.add_bias(T.matmul(hidden, T.transpose(params.mlp_w2)), params.mlp_b2)


def initial_state(d_f: Tensor, params: DecoderParams) -> Tensor:
    return T.tanh(T.add_bias(T.matmul(d_f, T.transpose(params.init_weight)), params.init_bias))


def decode_batch(
    sentvecs: Tensor,
    enc_states: Tensor,
    d_f: Tensor,
    params: DecoderParams,
    teacher=None,
) -> Tensor:
    """Score every sentence of a ``B x N`` batch; returns ``B x N`` probabilities.

    With ``teacher`` (a ``B x N`` array of previous-step signals, normally
    the gold labels) the decoder input at step ``t`` is
    ``teacher[:, t-1] * s_{t-1}``; otherwise the model's own previous score
    is fed back. Positions past a document's end only influence later
    positions, so padding needs no mask here.
    """
    batch, steps, width = sentvecs.shape
    size = params.lstm.hidden_size
    if enc_states.shape[:2] != (batch, steps):
        raise DecoderError(f"decoder: {steps} sentence vectors vs encoder states {enc_states.shape}")
    if d_f.shape != (batch, params.init_weight.shape[1]):
        raise DecoderError(f"decoder: document embedding {d_f.shape} vs init {params.init_weight.shape}")
    if params.mlp_w1.shape[1] != size + enc_states.shape[2]:
        raise DecoderError(f"decoder: MLP input {params.mlp_w1.shape[1]} != {size} + {enc_states.shape[2]}")
    h = initial_state(d_f, params)
    c = T.zeros((batch, size))
    w_x_t = T.transpose(params.lstm.w_x)
    w_h_t = T.transpose(params.lstm.w_h)
    every = slice(None)

    if teacher is not None:
        teacher = np.asarray(teacher, dtype=np.float64)
        if teacher.shape != (batch, steps):
            raise DecoderError(f"teacher signal {teacher.shape} vs {(batch, steps)} sentences")

    # Step by step even under teacher forcing: one big matmul over all steps
    # can round differently depending on N, which would break causality bitwise.
    scores = []
    x = T.zeros((batch, width))
    for t in range(steps):
        if t > 0:
            p_prev = scores[-1] if teacher is None else teacher[:, t - 1]
            x = T.scale_rows(T.getitem(sentvecs, (every, t - 1)), p_prev)
        pre = T.add_bias(T.matmul(x, w_x_t), params.lstm.bias)
        h, c = lstm_step(pre, h, c, w_h_t, size)
        z = T.concat([h, T.getitem(enc_states, (every, t))], axis=1)
        scores.append(T.sigmoid(T.reshape(_mlp(z, params), (batch,))))
    return T.stack(scores, axis=1)


def decode(
    sentvecs: Tensor,
    enc_states: Tensor,
    d_f: Tensor,
    params: DecoderParams,
    teacher_labels: Sequence[float] | None = None,
) -> Tensor:
    """Single-document decoding; returns the ``(N,)`` extraction probabilities."""
    if sentvecs.ndim != 2 or enc_states.ndim != 2 or sentvecs.shape[0] != enc_states.shape[0]:
        raise DecoderError(f"decoder: sentence vectors {sentvecs.shape} vs encoder states {enc_states.shape}")
    n = sentvecs.shape[0]
    if teacher_labels is not None:
        if len(teacher_labels) != n:
            raise DecoderError(f"{len(teacher_labels)} teacher labels for {n} sentences")
        teacher_labels = np.asarray(teacher_labels, dtype=np.float64)[None, :]
    scores = decode_batch(
        T.reshape(sentvecs, (1,) + sentvecs.shape),
        T.reshape(enc_states, (1,) + enc_states.shape),
        T.reshape(d_f, (1, d_f.shape[0])),
        params,
        teacher_labels,
    )
    return T.reshape(scores, (n,))
