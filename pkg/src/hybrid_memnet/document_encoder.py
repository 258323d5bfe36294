"""Recurrent (LSTM / BLSTM) and memory-network document encoders.

Batched entry points take ``B x N x dim`` tensors plus per-document lengths;
positions at or beyond a document's length are padding. Padding never
reaches a real output: recurrent states are held across padded steps and
padded memories get exactly zero attention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .errors import EncoderError
from .tensor import Tensor


@dataclass
class LstmParams:
    """Gate rows are stacked in the order input, forget, output, candidate."""

    w_x: Tensor
    w_h: Tensor
    bias: Tensor

    @property
    def hidden_size(self) -> int:
        return self.w_h.shape[1]

    @property
    def input_size(self) -> int:
        return self.w_x.shape[1]


@dataclass
class RecurrentParams:
    forward: LstmParams
    backward: LstmParams | None = None

    @property
    def mode(self) -> str:
        return "lstm" if self.backward is None else "blstm"

    @property
    def output_size(self) -> int:
        size = self.forward.hidden_size
        return size if self.backward is None else size + self.backward.hidden_size


@dataclass
class MemNetParams:
    query: Tensor
    hops: list[tuple[Tensor, Tensor]]  # (A, C) per hop


def lstm_step(pre_x: Tensor, h: Tensor, c: Tensor, w_h_t: Tensor, size: int) -> tuple[Tensor, Tensor]:
    gates = T.add(pre_x, T.matmul(h, w_h_t))
    all_rows = slice(None)
    sig = T.sigmoid(T.getitem(gates, (all_rows, slice(0, 3 * size))))
    cand = T.tanh(T.getitem(gates, (all_rows, slice(3 * size, 4 * size))))
    i = T.getitem(sig, (all_rows, slice(0, size)))
    f = T.getitem(sig, (all_rows, slice(size, 2 * size)))
    o = T.getitem(sig, (all_rows, slice(2 * size, 3 * size)))
    c_new = T.add(T.mul(f, c), T.mul(i, cand))
    h_new = T.mul(o, T.tanh(c_new))
    return h_new, c_new


def lstm_cell(x: Tensor, state: tuple[Tensor, Tensor], params: LstmParams) -> tuple[Tensor, Tensor]:
    """One LSTM step. ``x`` is ``(in,)`` or ``(B, in)``; state tensors match."""
    h, c = state
    vector = x.ndim == 1
    size = params.hidden_size
    if x.shape[-1] != params.input_size or h.shape[-1] != size or c.shape != h.shape:
        raise EncoderError(
            f"lstm_cell: input {x.shape}, state {h.shape}/{c.shape} vs params in={params.input_size} hidden={size}"
        )
    if vector:
        x, h, c = (T.reshape(t, (1, t.shape[0])) for t in (x, h, c))
    pre = T.add_bias(T.matmul(x, T.transpose(params.w_x)), params.bias)
    h, c = lstm_step(pre, h, c, T.transpose(params.w_h), size)
    if vector:
        h, c = T.reshape(h, (size,)), T.reshape(c, (size,))
    return h, c


def _reverse_index(lengths: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(steps)[None, :]
    n = lengths[:, None]
    rev = np.where(t < n, n - 1 - t, t)
    rows = np.broadcast_to(np.arange(len(lengths))[:, None], rev.shape)
    return rows, rev


def run_lstm(inputs: Tensor, lengths: Sequence[int], params: LstmParams, reverse: bool = False):
    """Run an LSTM over ``B x N x in`` inputs from zero state.

    Returns ``(states, final)``: ``B x N x H`` per-position hidden states
    (in original order) and the ``B x H`` state after each document's last
    processed sentence.
    """
    lengths = np.asarray(lengths)
    batch, steps, width = inputs.shape
    if width != params.input_size:
        raise EncoderError(f"LSTM input size {width} != {params.input_size}")
    size = params.hidden_size
    if reverse:
        index = _reverse_index(lengths, steps)
        inputs = T.getitem(inputs, index)
    flat = T.reshape(inputs, (batch * steps, width))
    pre = T.add_bias(T.matmul(flat, T.transpose(params.w_x)), params.bias)
    pre = T.reshape(pre, (batch, steps, 4 * size))
    w_h_t = T.transpose(params.w_h)
    h = T.zeros((batch, size))
    c = T.zeros((batch, size))
    outputs = []
    for t in range(steps):
        h_new, c_new = lstm_step(T.getitem(pre, (slice(None), t)), h, c, w_h_t, size)
        live = t < lengths
        if live.all():
            h, c = h_new, c_new
        else:
            h, c = T.blend(h_new, h, live), T.blend(c_new, c, live)
        outputs.append(h)
    states = T.stack(outputs, axis=1)
    if reverse:
        states = T.getitem(states, index)
    return states, h


def encode_recurrent_batch(sentvecs: Tensor, lengths: Sequence[int], params: RecurrentParams):
    """Returns ``(h, d_prime)`` with shapes ``B x N x doc_dim`` and ``B x doc_dim``."""
    states, final = run_lstm(sentvecs, lengths, params.forward)
    if params.backward is None:
        return states, final
    b_states, b_final = run_lstm(sentvecs, lengths, params.backward, reverse=True)
    return T.concat([states, b_states], axis=2), T.concat([final, b_final], axis=1)


def _as_matrix(sentvecs) -> Tensor:
    if isinstance(sentvecs, Tensor):
        if sentvecs.ndim != 2:
            raise EncoderError(f"expected N x dim sentence vectors, got {sentvecs.shape}")
        return sentvecs
    sentvecs = list(sentvecs)
    if not sentvecs:
        raise EncoderError("no sentence vectors")
    return T.stack(sentvecs, axis=0)


def encode_recurrent(sentvecs, params: RecurrentParams, mode: str | None = None):
    """Single-document recurrent encoding.

    Returns ``(h, d_prime)``: ``N x doc_dim`` encoder states and the
    ``doc_dim`` document vector.
    """
    if mode is not None and mode != params.mode:
        raise EncoderError(f"mode {mode!r} does not match {params.mode!r} parameters")
    s = _as_matrix(sentvecs)
    if s.shape[0] == 0:
        raise EncoderError("no sentence vectors")
    n, dim = s.shape
    states, final = encode_recurrent_batch(T.reshape(s, (1, n, dim)), [n], params)
    size = params.output_size
    return T.reshape(states, (n, size)), T.reshape(final, (size,))


def memnet_encode_batch(sentvecs: Tensor, d_prime: Tensor, mask, params: MemNetParams):
    """K-hop memory read. Returns ``(o_K, attention)``; attention is one ``B x N`` array per hop."""
    batch, steps, width = sentvecs.shape
    size = params.query.shape[0]
    if d_prime.shape != (batch, params.query.shape[1]):
        raise EncoderError(f"memnet: document vector {d_prime.shape} vs query {params.query.shape}")
    flat = T.reshape(sentvecs, (batch * steps, width))
    u = T.matmul(d_prime, T.transpose(params.query))
    attention = []
    out = None
    for a, c in params.hops:
        if a.shape != (size, width) or c.shape != (size, width):
            raise EncoderError(f"memnet: hop matrices {a.shape}/{c.shape}, expected {(size, width)}")
        memory = T.reshape(T.matmul(flat, T.transpose(a)), (batch, steps, size))
        output = T.reshape(T.matmul(flat, T.transpose(c)), (batch, steps, size))
        p = T.softmax(T.batched_dot(memory, u), mask=mask)
        attention.append(p.data)
        out = T.batched_weighted_sum(p, output)
        u = T.add(u, out)
    return out, attention


def memnet_encode(sentvecs, d_prime: Tensor, params: MemNetParams, return_attention: bool = False):
    s = _as_matrix(sentvecs)
    n, dim = s.shape
    out, attention = memnet_encode_batch(
        T.reshape(s, (1, n, dim)), T.reshape(d_prime, (1, d_prime.shape[0])), None, params
    )
    out = T.reshape(out, (out.shape[1],))
    if return_attention:
        return out, [p[0] for p in attention]
    return out


def fuse(d_prime: Tensor, d_double_prime: Tensor) -> Tensor:
    if d_prime.shape != d_double_prime.shape:
        raise EncoderError(f"fuse: {d_prime.shape} vs {d_double_prime.shape}")
    return T.add(d_prime, d_double_prime)
