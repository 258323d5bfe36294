"""Dense float64 tensors with define-by-run reverse-mode differentiation.

Every operation returns a new :class:`Tensor`. When at least one input
requires a gradient, the output remembers its parents and a closure that
maps the output gradient to one gradient per parent. :meth:`Tensor.backward`
walks that record in reverse topological order.

The graph is rebuilt on every forward pass, which keeps variable-length
documents trivial to handle.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import DimensionError, DomainError, PoolingError, UsageError

DTYPE = np.float64

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (forward-only evaluation)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.array(data, dtype=DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable | None = None
        self._op = "leaf"

    @classmethod
    def _wrap(cls, array: np.ndarray, requires_grad: bool) -> "Tensor":
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = requires_grad
        out.grad = None
        out.name = None
        out._parents = ()
        out._backward = None
        out._op = "leaf"
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise UsageError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data, False)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag}, op={self._op})"

    def __getitem__(self, key) -> "Tensor":
        return getitem(self, key)

    def __add__(self, other) -> "Tensor":
        return add(self, _as_tensor(other, self))

    def __sub__(self, other) -> "Tensor":
        return sub(self, _as_tensor(other, self))

    def __mul__(self, other) -> "Tensor":
        return mul(self, _as_tensor(other, self))

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    def backward(self) -> None:
        """Populate ``grad`` on every reachable leaf that requires one.

        Leaf gradients accumulate (``+=``) across calls until reset with
        :meth:`zero_grad`.
        """
        if self.data.size != 1:
            raise UsageError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise UsageError("backward() on a tensor that does not require grad")
        order = _topological_order(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.grad is None:
                    node.grad = g.copy()
                else:
                    node.grad += g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg


def _as_tensor(value, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.broadcast_to(np.asarray(value, dtype=DTYPE), like.shape))


def tensor(data, requires_grad: bool = False, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def zeros(shape, requires_grad: bool = False) -> Tensor:
    return Tensor._wrap(np.zeros(shape, dtype=DTYPE), requires_grad)


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


@dataclass(frozen=True)
class GraphNode:
    op: str
    inputs: tuple[int, ...]
    output: int


@dataclass(frozen=True)
class Graph:
    """Ordered record of the primitive operations that produced a tensor.

    Node ids are positions in ``nodes``; leaves appear as ``op == "leaf"``.
    """

    nodes: tuple[GraphNode, ...]

    @classmethod
    def trace(cls, root: Tensor) -> "Graph":
        order = _topological_order(root)
        index = {id(t): i for i, t in enumerate(order)}
        nodes = tuple(
            GraphNode(t._op, tuple(index[id(p)] for p in t._parents if id(p) in index), i)
            for i, t in enumerate(order)
        )
        return cls(nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward, op: str) -> Tensor:
    needs = _grad_enabled and any(p.requires_grad for p in parents)
    out = Tensor._wrap(data, needs)
    if needs:
        out._parents = parents
        out._backward = backward
        out._op = op
    return out


def _check_same(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# ---------------------------------------------------------------- arithmetic


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same(a, b, "add")
    return _node(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same(a, b, "sub")
    return _node(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same(a, b, "mul")
    ad, bd = a.data, b.data
    return _node(ad * bd, (a, b), lambda g: (g * bd, g * ad), "mul")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return _node(y, (x,), lambda g: (g * (1.0 - y * y),), "tanh")


def sigmoid(x: Tensor) -> Tensor:
    y = expit(x.data)
    return _node(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


_ELEMENTWISE = {"tanh": tanh, "sigmoid": sigmoid, "add": add, "mul": mul, "sub": sub}


def elementwise(kind: str, *inputs: Tensor) -> Tensor:
    try:
        fn = _ELEMENTWISE[kind]
    except KeyError:
        raise DomainError(f"unknown elementwise kind {kind!r}") from None
    return fn(*inputs)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    ad, bd = a.data, b.data

    def backward(g):
        return (g @ bd.T if a.requires_grad else None, ad.T @ g if b.requires_grad else None)

    return _node(ad @ bd, (a, b), backward, "matmul")


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got {x.shape}")
    return _node(x.data.T, (x,), lambda g: (g.T,), "transpose")


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """``x + bias`` with ``bias`` broadcast along every leading axis."""
    if bias.ndim != 1 or x.shape[-1:] != bias.shape:
        raise DimensionError(f"add_bias: {x.shape} vs bias {bias.shape}")
    lead = tuple(range(x.ndim - 1))
    return _node(x.data + bias.data, (x, bias), lambda g: (g, g.sum(axis=lead)), "add_bias")


def scale_rows(x: Tensor, scale) -> Tensor:
    """Multiply row ``i`` of a matrix by ``scale[i]``.

    ``scale`` may be a tensor (differentiable) or a plain array.
    """
    s = scale if isinstance(scale, Tensor) else Tensor._wrap(np.asarray(scale, dtype=DTYPE), False)
    if x.ndim != 2 or s.shape != (x.shape[0],):
        raise DimensionError(f"scale_rows: {x.shape} vs scale {s.shape}")
    xd, sd = x.data, s.data
    return _node(
        xd * sd[:, None],
        (x, s),
        lambda g: (g * sd[:, None], (g * xd).sum(axis=1)),
        "scale_rows",
    )


def blend(new: Tensor, old: Tensor, mask) -> Tensor:
    """Row-wise select: row ``i`` comes from ``new`` where ``mask[i]`` else ``old``."""
    _check_same(new, old, "blend")
    m = np.asarray(mask, dtype=bool)
    if m.shape != new.shape[:1]:
        raise DimensionError(f"blend: mask {m.shape} vs rows {new.shape}")
    sel = m.reshape((-1,) + (1,) * (new.ndim - 1))
    zero = np.zeros((), dtype=DTYPE)
    return _node(
        np.where(sel, new.data, old.data),
        (new, old),
        lambda g: (np.where(sel, g, zero), np.where(sel, zero, g)),
        "blend",
    )


def sum(x: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = x.shape
    return _node(np.asarray(x.data.sum()), (x,), lambda g: (np.broadcast_to(g, shape).copy(),), "sum")


# ---------------------------------------------------------------- shape ops


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    old = x.shape
    return _node(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),), "reshape")


def getitem(x: Tensor, key) -> Tensor:
    """Basic or advanced indexing; repeated indices accumulate in backward."""
    shape = x.shape
    parts = key if isinstance(key, tuple) else (key,)
    basic = all(isinstance(k, (int, np.integer, slice)) for k in parts)

    def backward(g):
        full = np.zeros(shape, dtype=DTYPE)
        if basic:
            full[key] = g
        else:
            np.add.at(full, key, g)
        return (full,)

    return _node(np.array(x.data[key]), (x,), backward, "getitem")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    if not tensors:
        raise DimensionError("concat of nothing")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"concat: {[t.shape for t in tensors]}: {exc}") from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _node(data, tensors, lambda g: tuple(np.split(g, bounds, axis=axis)), "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    if not tensors:
        raise DimensionError("stack of nothing")
    try:
        data = np.stack([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"stack: {[t.shape for t in tensors]}: {exc}") from None
    n = len(tensors)

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(n))

    return _node(data, tensors, backward, "stack")


# ---------------------------------------------------------------- reductions


def softmax(z: Tensor, mask=None) -> Tensor:
    """Softmax over the last axis, stabilised by max subtraction.

    Entries where ``mask`` is false get probability exactly zero; each row
    needs at least one unmasked entry.
    """
    if z.size == 0 or z.shape[-1] == 0:
        raise DomainError("softmax of an empty vector")
    x = z.data
    if mask is None:
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
    else:
        m = np.asarray(mask, dtype=bool)
        if m.shape != x.shape:
            raise DimensionError(f"softmax: mask {m.shape} vs input {x.shape}")
        if not m.any(axis=-1).all():
            raise DomainError("softmax row with every entry masked")
        top = np.where(m, x, -np.inf).max(axis=-1, keepdims=True)
        e = np.where(m, np.exp(np.where(m, x - top, 0.0)), 0.0)
    p = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (p * (g - (g * p).sum(axis=-1, keepdims=True)),)

    return _node(p, (z,), backward, "softmax")


def max_over_time(f: Tensor) -> Tensor:
    """Row-wise maximum of an ``m x T`` feature map.

    The gradient goes to the first column attaining the maximum.
    """
    if f.ndim != 2:
        raise DimensionError(f"max_over_time expects m x T, got {f.shape}")
    if f.shape[1] == 0:
        raise PoolingError("max_over_time over zero columns; pad the sentence to the widest filter")
    cols = np.argmax(f.data, axis=1)
    rows = np.arange(f.shape[0])
    shape = f.shape

    def backward(g):
        full = np.zeros(shape, dtype=DTYPE)
        full[rows, cols] = g
        return (full,)

    return _node(f.data[rows, cols], (f,), backward, "max_over_time")


def segment_max(x: Tensor, starts: Sequence[int]) -> Tensor:
    """Column-wise max over contiguous row segments of ``x``.

    Segment ``k`` spans rows ``starts[k]:starts[k+1]`` (the last runs to the
    end). Ties route the gradient to the first row, like
    :func:`max_over_time`.
    """
    starts = np.asarray(starts, dtype=np.intp)
    if x.ndim != 2 or starts.ndim != 1 or starts.size == 0:
        raise DimensionError(f"segment_max: bad input {x.shape} / starts {starts.shape}")
    ends = np.append(starts[1:], x.shape[0])
    if starts[0] != 0 or np.any(ends <= starts):
        raise PoolingError("segment_max: every segment needs at least one row")
    xd = x.data
    top = np.maximum.reduceat(xd, starts, axis=0)
    segment = np.repeat(np.arange(starts.size), ends - starts)
    rows = np.arange(x.shape[0])[:, None]
    hits = np.where(xd == top[segment], rows, x.shape[0])
    argmax = np.minimum.reduceat(hits, starts, axis=0)
    cols = np.arange(x.shape[1])
    shape = x.shape

    def backward(g):
        full = np.zeros(shape, dtype=DTYPE)
        full[argmax, cols[None, :]] = g
        return (full,)

    return _node(top, (x,), backward, "segment_max")


def batched_dot(memory: Tensor, query: Tensor) -> Tensor:
    """``out[b, i] = memory[b, i, :] . query[b, :]``."""
    if memory.ndim != 3 or query.ndim != 2 or memory.shape[::2] != query.shape:
        raise DimensionError(f"batched_dot: {memory.shape} vs {query.shape}")
    md, qd = memory.data, query.data

    def backward(g):
        return (g[:, :, None] * qd[:, None, :], np.einsum("bn,bnd->bd", g, md))

    return _node(np.einsum("bnd,bd->bn", md, qd), (memory, query), backward, "batched_dot")


def batched_weighted_sum(weights: Tensor, values: Tensor) -> Tensor:
    """``out[b, :] = sum_i weights[b, i] * values[b, i, :]``."""
    if values.ndim != 3 or weights.shape != values.shape[:2]:
        raise DimensionError(f"batched_weighted_sum: {weights.shape} vs {values.shape}")
    wd, vd = weights.data, values.data

    def backward(g):
        return (np.einsum("bnd,bd->bn", vd, g), wd[:, :, None] * g[:, None, :])

    return _node(
        np.einsum("bn,bnd->bd", wd, vd), (weights, values), backward, "batched_weighted_sum"
    )


def binary_cross_entropy(probs: Tensor, labels, weights, eps: float = 1e-7) -> Tensor:
    """Weighted sum of ``-[y ln p + (1 - y) ln(1 - p)]`` with ``p`` clamped to ``[eps, 1 - eps]``.

    The clamp has zero derivative outside the interval.
    """
    y = np.asarray(labels, dtype=DTYPE)
    w = np.asarray(weights, dtype=DTYPE)
    if y.shape != probs.shape or w.shape != probs.shape:
        raise DimensionError(f"binary_cross_entropy: {probs.shape} vs {y.shape} / {w.shape}")
    p = probs.data
    pc = np.clip(p, eps, 1.0 - eps)
    value = -(w * (y * np.log(pc) + (1.0 - y) * np.log1p(-pc))).sum()
    inside = (p >= eps) & (p <= 1.0 - eps)

    def backward(g):
        return (g * np.where(inside, -w * (y / pc - (1.0 - y) / (1.0 - pc)), 0.0),)

    return _node(np.asarray(value), (probs,), backward, "binary_cross_entropy")


def parameters_grad_norm(params: Iterable[Tensor]) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.dot(p.grad.ravel(), p.grad.ravel()))
    return float(np.sqrt(total))
