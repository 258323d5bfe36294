"""Slow, independent reference implementations for verification.

Nothing here imports the tensor library or the model code: forward
fragments are re-derived with explicit Python loops over lists of floats,
n-gram statistics are recounted from scratch, and gradients come from
central differences. Inputs may be numpy arrays; they are converted to
nested lists first.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import OracleError

EXHAUSTIVE_LCS_LIMIT = 8


@dataclass(frozen=True)
class FiniteDiffConfig:
    step: float = 1e-5
    tolerance: float = 1e-4

    def __post_init__(self):
        if self.step <= 0 or self.tolerance <= 0:
            raise OracleError("finite-difference step and tolerance must be positive")


def relative_error(a, b) -> np.ndarray:
    """Elementwise ``|a - b| / max(1, |a|, |b|)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def max_relative_error(a, b) -> float:
    err = relative_error(a, b)
    return float(err.max()) if err.size else 0.0


def finite_diff_grad(fn: Callable, params, step: float = 1e-5, coords: Mapping[str, Sequence[int]] | None = None):
    """Central-difference gradient of scalar ``fn(params)``.

    ``params`` is an array or a dict of arrays, perturbed in place and
    restored. ``coords`` optionally restricts a dict entry to some flat
    indices (others are left as NaN).
    """
    single = not isinstance(params, Mapping)
    named = {"": params} if single else params
    grads = {}
    for name, array in named.items():
        flat = array.reshape(-1)
        grad = np.full(flat.shape, np.nan) if coords and name in coords else np.zeros(flat.shape)
        indices = coords[name] if coords and name in coords else range(flat.size)
        for i in indices:
            orig = flat[i]
            flat[i] = orig + step
            up = float(fn(params))
            flat[i] = orig - step
            down = float(fn(params))
            flat[i] = orig
            if not (math.isfinite(up) and math.isfinite(down)):
                raise OracleError(f"non-finite function value while perturbing {name or 'input'}[{i}]")
            grad[i] = (up - down) / (2 * step)
        grads[name] = grad.reshape(array.shape)
    return grads[""] if single else grads


# ---------------------------------------------------------------- sequences


def _is_subsequence(sub: Sequence, seq: Sequence) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def brute_force_lcs(a: Sequence, b: Sequence) -> int:
    """Longest common subsequence length by enumerating subsequences of ``a``."""
    if len(a) > EXHAUSTIVE_LCS_LIMIT:
        raise OracleError(f"exhaustive LCS is limited to {EXHAUSTIVE_LCS_LIMIT} tokens, got {len(a)}")
    for size in range(len(a), 0, -1):
        for combo in itertools.combinations(range(len(a)), size):
            if _is_subsequence([a[i] for i in combo], b):
                return size
    return 0


def _f1(matches: int, ref_total: int, cand_total: int) -> float:
    r = matches / ref_total if ref_total else 0.0
    p = matches / cand_total if cand_total else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def manual_rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> tuple[float, float, float]:
    """(recall, precision, f1) by direct n-gram counting against one reference."""
    grams = lambda toks: Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))  # noqa: E731
    cand, ref = grams(list(candidate)), grams(list(reference))
    matches = 0
    for g, c in cand.items():
        matches += min(c, ref.get(g, 0))
    rt, ct = sum(ref.values()), sum(cand.values())
    r = matches / rt if rt else 0.0
    p = matches / ct if ct else 0.0
    return r, p, _f1(matches, rt, ct)


def brute_force_rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> tuple[float, float, float]:
    lcs = brute_force_lcs(candidate, reference)
    r = lcs / len(reference) if reference else 0.0
    p = lcs / len(candidate) if candidate else 0.0
    return r, p, _f1(lcs, len(reference), len(candidate))


def exhaustive_oracle_labels(
    sentence_tokens: Sequence[Sequence[str]], reference: Sequence[str], budget: int = 3
) -> tuple[list[int], float]:
    """Best subset (size <= budget) under mean(ROUGE-1 F1, ROUGE-2 F1); ties keep the earliest found."""
    best, best_score = [], 0.0
    n = len(sentence_tokens)
    for size in range(1, min(budget, n) + 1):
        for combo in itertools.combinations(range(n), size):
            cand = [t for i in combo for t in sentence_tokens[i]]
            score = 0.5 * (manual_rouge_n(cand, reference, 1)[2] + manual_rouge_n(cand, reference, 2)[2])
            if score > best_score:
                best, best_score = list(combo), score
    labels = [0] * n
    for i in best:
        labels[i] = 1
    return labels, best_score


# ---------------------------------------------------------------- scalar network


def _lists(x):
    return np.asarray(x, dtype=float).tolist()


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _matvec(m, v):
    out = []
    for row in m:
        acc = 0.0
        for a, b in zip(row, v):
            acc += a * b
        out.append(acc)
    return out


def _vadd(*vs):
    return [math.fsum(parts) for parts in zip(*vs)]


def _dot(a, b) -> float:
    return math.fsum(x * y for x, y in zip(a, b))


def scalar_conv_sentence(params, tokens) -> list[float]:
    """``params``: ``embedding`` and ``filters`` ({width: (weight, bias)})."""
    emb = _lists(params["embedding"])
    filters = {int(c): (_lists(w), _lists(b)) for c, (w, b) in params["filters"].items()}
    if not tokens:
        raise OracleError("empty sentence")
    widest = max(filters)
    toks = list(tokens) + [0] * max(0, widest - len(tokens))
    total = None
    for c in sorted(filters):
        weight, bias = filters[c]
        pooled = None
        for start in range(len(toks) - c + 1):
            window = [v for t in toks[start : start + c] for v in emb[t]]
            feat = [math.tanh(z + bb) for z, bb in zip(_matvec(weight, window), bias)]
            pooled = feat if pooled is None else [max(p, f) for p, f in zip(pooled, feat)]
        total = pooled if total is None else [a + b for a, b in zip(total, pooled)]
    return total


def scalar_lstm_cell(params, x, h, c):
    """Gate order: input, forget, output, candidate."""
    w_x, w_h, bias = _lists(params["w_x"]), _lists(params["w_h"]), _lists(params["bias"])
    x, h, c = _lists(x), _lists(h), _lists(c)
    size = len(h)
    z = _vadd(_matvec(w_x, x), _matvec(w_h, h), bias)
    i = [_sigmoid(v) for v in z[:size]]
    f = [_sigmoid(v) for v in z[size : 2 * size]]
    o = [_sigmoid(v) for v in z[2 * size : 3 * size]]
    g = [math.tanh(v) for v in z[3 * size :]]
    c_new = [fj * cj + ij * gj for fj, cj, ij, gj in zip(f, c, i, g)]
    h_new = [oj * math.tanh(cj) for oj, cj in zip(o, c_new)]
    return h_new, c_new


def scalar_lstm_sequence(params, xs, reverse: bool = False):
    size = len(_lists(params["w_h"])[0])
    h, c = [0.0] * size, [0.0] * size
    order = range(len(xs) - 1, -1, -1) if reverse else range(len(xs))
    states = [None] * len(xs)
    for t in order:
        h, c = scalar_lstm_cell(params, xs[t], h, c)
        states[t] = h
    return states, h


def scalar_recurrent(params, xs):
    """``params``: ``forward`` and optional ``backward`` LSTM parameter dicts."""
    xs = [_lists(x) for x in xs]
    fwd, final = scalar_lstm_sequence(params["forward"], xs)
    if params.get("backward") is None:
        return fwd, final
    bwd, b_final = scalar_lstm_sequence(params["backward"], xs, reverse=True)
    return [f + b for f, b in zip(fwd, bwd)], final + b_final


def scalar_memnet(params, sentvecs, d_prime):
    """Returns ``(o_K, [attention per hop])``."""
    query = _lists(params["query"])
    sentvecs = [_lists(s) for s in sentvecs]
    u = _matvec(query, _lists(d_prime))
    attention, out = [], None
    for a, c in params["hops"]:
        a, c = _lists(a), _lists(c)
        memories = [_matvec(a, s) for s in sentvecs]
        outputs = [_matvec(c, s) for s in sentvecs]
        logits = [_dot(u, m) for m in memories]
        top = max(logits)
        exps = [math.exp(z - top) for z in logits]
        total = math.fsum(exps)
        p = [e / total for e in exps]
        out = [math.fsum(p[i] * outputs[i][j] for i in range(len(p))) for j in range(len(u))]
        u = [a_ + b_ for a_, b_ in zip(u, out)]
        attention.append(p)
    return out, attention


def scalar_decoder(params, sentvecs, enc_states, d_f, teacher=None):
    """Per-sentence probabilities; ``teacher`` replaces fed-back scores when given."""
    sentvecs = [_lists(s) for s in sentvecs]
    enc_states = [_lists(h) for h in enc_states]
    init_w, init_b = _lists(params["init_weight"]), _lists(params["init_bias"])
    w1, b1 = _lists(params["mlp_w1"]), _lists(params["mlp_b1"])
    w2, b2 = _lists(params["mlp_w2"]), _lists(params["mlp_b2"])
    h = [math.tanh(z + b) for z, b in zip(_matvec(init_w, _lists(d_f)), init_b)]
    c = [0.0] * len(h)
    prev_p, prev_s = 1.0, [0.0] * len(sentvecs[0])
    scores = []
    for t in range(len(sentvecs)):
        x = [prev_p * v for v in prev_s]
        h, c = scalar_lstm_cell(params["lstm"], x, h, c)
        z = h + enc_states[t]
        hidden = [math.tanh(v + b) for v, b in zip(_matvec(w1, z), b1)]
        logit = _matvec(w2, hidden)[0] + b2[0]
        score = _sigmoid(logit)
        scores.append(score)
        prev_p = float(teacher[t]) if teacher is not None else score
        prev_s = sentvecs[t]
    return scores


def scalar_loss(probs, labels, eps: float = 1e-7) -> float:
    terms = []
    for p, y in zip(_lists(probs), labels):
        p = min(max(p, eps), 1.0 - eps)
        terms.append(-(y * math.log(p) + (1 - y) * math.log(1.0 - p)))
    return math.fsum(terms) / len(terms)


FRAGMENTS = {
    "conv_sentence": lambda p, inp: scalar_conv_sentence(p, inp["tokens"]),
    "lstm_cell": lambda p, inp: scalar_lstm_cell(p, inp["x"], inp["h"], inp["c"]),
    "recurrent": lambda p, inp: scalar_recurrent(p, inp["sentvecs"]),
    "memnet": lambda p, inp: scalar_memnet(p, inp["sentvecs"], inp["d_prime"]),
    "decoder": lambda p, inp: scalar_decoder(p, inp["sentvecs"], inp["enc_states"], inp["d_f"], inp.get("teacher")),
    "loss": lambda p, inp: scalar_loss(inp["probs"], inp["labels"]),
}


def scalar_forward(fragment: str, params, inputs):
    """Dispatch to a loop-based reference of one model fragment."""
    try:
        fn = FRAGMENTS[fragment]
    except KeyError:
        raise OracleError(f"unknown fragment {fragment!r}; known: {sorted(FRAGMENTS)}") from None
    return fn(params, inputs)
