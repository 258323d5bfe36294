import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybrid_memnet import tensor as T
from hybrid_memnet.errors import DimensionError, DomainError, PoolingError, UsageError
from hybrid_memnet.tensor import Graph, Tensor, no_grad
from hybrid_memnet.testkit import finite_diff_grad

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def leaf(x):
    return Tensor(np.asarray(x, dtype=float), requires_grad=True)


# --- matmul


def test_matmul_identity():
    a = Tensor(np.eye(2))
    b = Tensor([[1, 2], [3, 4]])
    np.testing.assert_array_equal(T.matmul(a, b).data, [[1, 2], [3, 4]])


def test_matmul_row_times_column():
    assert T.matmul(Tensor([[1, 2]]), Tensor([[3], [4]])).data.tolist() == [[11.0]]


def test_matmul_gradient_matches_finite_differences():
    a, b = leaf([[1, 1]]), Tensor([[2], [5]])
    T.sum(T.matmul(a, b)).backward()
    numeric = finite_diff_grad(lambda x: (x @ b.data).sum(), np.array([[1.0, 1.0]]))
    np.testing.assert_allclose(a.grad, [[2, 5]], atol=1e-12)
    np.testing.assert_allclose(numeric, [[2, 5]], atol=1e-8)


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
        T.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


# --- elementwise


def test_elementwise_examples():
    assert T.elementwise("tanh", Tensor([0, 0])).data.tolist() == [0, 0]
    assert T.elementwise("sigmoid", Tensor([0])).data.tolist() == [0.5]
    assert T.elementwise("add", Tensor([1, 2]), Tensor([3, 4])).data.tolist() == [4, 6]
    assert T.elementwise("mul", Tensor([1, 2]), Tensor([3, 4])).data.tolist() == [3, 8]


def test_elementwise_shape_mismatch():
    with pytest.raises(DimensionError):
        T.elementwise("add", Tensor([1, 2]), Tensor([1, 2, 3]))


def test_elementwise_unknown_kind():
    with pytest.raises(DomainError):
        T.elementwise("relu", Tensor([1.0]))


def test_tanh_and_sigmoid_derivatives():
    x = leaf([0.3, -1.2])
    T.sum(T.tanh(x)).backward()
    np.testing.assert_allclose(x.grad, 1 - np.tanh(x.data) ** 2)
    y = leaf([0.3, -1.2])
    T.sum(T.sigmoid(y)).backward()
    s = 1 / (1 + np.exp(-y.data))
    np.testing.assert_allclose(y.grad, s * (1 - s))


# --- softmax


@pytest.mark.parametrize("c", [-3.0, 0.0, 2.5, 1e4])
def test_softmax_uniform(c):
    np.testing.assert_allclose(T.softmax(Tensor([c] * 4)).data, [0.25] * 4, atol=1e-15)


def test_softmax_log_values():
    np.testing.assert_allclose(T.softmax(Tensor([math.log(1), math.log(3)])).data, [0.25, 0.75], atol=1e-15)


def test_softmax_no_overflow():
    p = T.softmax(Tensor([1000.0, 1000.0])).data
    assert np.all(np.isfinite(p))
    np.testing.assert_array_equal(p, [0.5, 0.5])


def test_softmax_empty_is_domain_error():
    with pytest.raises(DomainError):
        T.softmax(Tensor(np.zeros(0)))


def test_softmax_fully_masked_row():
    with pytest.raises(DomainError):
        T.softmax(Tensor([[1.0, 2.0]]), mask=[[False, False]])


def test_softmax_mask_gives_exact_zeros():
    p = T.softmax(Tensor([[1.0, 5.0, 2.0]]), mask=[[True, False, True]]).data
    assert p[0, 1] == 0.0
    assert abs(p.sum() - 1) < 1e-15


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_softmax_sums_to_one_and_is_shift_invariant(z, c):
    p = T.softmax(Tensor(z)).data
    assert np.all(p > 0)
    assert abs(p.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(T.softmax(Tensor(z + c)).data, p, atol=1e-9, rtol=0)


def test_softmax_jacobian():
    z = leaf([0.2, -0.4, 1.0])
    w = np.array([0.5, -1.0, 2.0])
    T.sum(T.mul(T.softmax(z), Tensor(w))).backward()
    p = T.softmax(Tensor(z.data)).data
    jac = np.diag(p) - np.outer(p, p)
    np.testing.assert_allclose(z.grad, jac @ w, atol=1e-15)


# --- pooling


def test_max_over_time_values():
    assert T.max_over_time(Tensor([[1, 5, 3], [2, 2, 2]])).data.tolist() == [5, 2]


def test_max_over_time_single_column():
    assert T.max_over_time(Tensor([[4.0], [-1.0]])).data.tolist() == [4.0, -1.0]


def test_max_over_time_gradient():
    f = leaf([[1, 5, 3]])
    T.sum(T.max_over_time(f)).backward()
    assert f.grad.tolist() == [[0, 1, 0]]
    numeric = finite_diff_grad(lambda x: x.max(axis=1).sum(), np.array([[1.0, 5.0, 3.0]]))
    np.testing.assert_allclose(numeric, [[0, 1, 0]], atol=1e-8)


def test_max_over_time_tie_goes_to_first():
    f = leaf([[2, 2, 2]])
    T.sum(T.max_over_time(f)).backward()
    assert f.grad.tolist() == [[1, 0, 0]]


def test_max_over_time_zero_columns():
    with pytest.raises(PoolingError, match="pad"):
        T.max_over_time(Tensor(np.zeros((3, 0))))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=st.integers(-3, 3).map(float)))
def test_max_over_time_gradient_is_one_hot_per_row(f):
    x = leaf(f)
    T.sum(T.max_over_time(x)).backward()
    assert set(np.unique(x.grad)) <= {0.0, 1.0}
    np.testing.assert_array_equal(x.grad.sum(axis=1), 1.0)
    np.testing.assert_array_equal(x.grad.argmax(axis=1), f.argmax(axis=1))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=5), st.integers(0, 2**31))
def test_segment_max_equals_per_segment_max_over_time(sizes, seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(-2, 3, size=(sum(sizes), 3)).astype(float)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    seg = leaf(x)
    T.sum(T.segment_max(seg, starts)).backward()
    for s, n in zip(starts, sizes):
        block = leaf(x[s : s + n].T)
        T.sum(T.max_over_time(block)).backward()
        np.testing.assert_array_equal(seg.grad[s : s + n], block.grad.T)


# --- backward


def test_backward_sum():
    x = leaf([1, 2, 3])
    T.sum(x).backward()
    assert x.grad.tolist() == [1, 1, 1]


def test_backward_square():
    x = leaf([2.0])
    T.sum(T.mul(x, x)).backward()
    assert x.grad.tolist() == [4.0]
    np.testing.assert_allclose(finite_diff_grad(lambda v: (v * v).sum(), np.array([2.0])), [4.0], atol=1e-8)


def test_backward_fan_out():
    x = leaf([1.0])
    T.sum(T.add(x, x)).backward()
    assert x.grad.tolist() == [2.0]


def test_backward_non_scalar_is_usage_error():
    with pytest.raises(UsageError):
        T.tanh(leaf([1.0, 2.0])).backward()


def test_backward_without_grad_is_usage_error():
    with pytest.raises(UsageError):
        T.sum(Tensor([1.0])).backward()


def test_gradients_accumulate_until_reset():
    x = leaf([1.0, 2.0])
    T.sum(x).backward()
    T.sum(x).backward()
    assert x.grad.tolist() == [2.0, 2.0]
    x.zero_grad()
    assert x.grad is None


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 3, elements=finite), arrays(np.float64, 3, elements=finite))
def test_two_consumers_sum_their_gradients(xv, w):
    x = leaf(xv)
    T.add(T.sum(T.mul(T.tanh(x), Tensor(w))), T.sum(T.mul(x, x))).backward()
    both = x.grad.copy()
    a, b = leaf(xv), leaf(xv)
    T.sum(T.mul(T.tanh(a), Tensor(w))).backward()
    T.sum(T.mul(b, b)).backward()
    np.testing.assert_allclose(both, a.grad + b.grad, rtol=1e-14, atol=1e-14)


def test_no_grad_records_nothing():
    x = leaf([1.0])
    with no_grad():
        y = T.tanh(x)
    assert not y.requires_grad and y.is_leaf


# --- graph


def test_graph_is_topological_and_visits_each_node_once():
    x = leaf([[1.0, 2.0]])
    w = leaf([[1.0], [0.5]])
    h = T.tanh(T.matmul(x, w))
    loss = T.sum(T.add(h, h))
    graph = Graph.trace(loss)
    outputs = [node.output for node in graph.nodes]
    assert len(set(outputs)) == len(outputs)
    position = {out: i for i, out in enumerate(outputs)}
    for i, node in enumerate(graph.nodes):
        assert all(position[j] < i for j in node.inputs)
    assert [n.op for n in graph.nodes][-1] == "sum"
    assert {n.op for n in graph.nodes} >= {"leaf", "matmul", "tanh", "add", "sum"}


# --- invariants


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 3), elements=finite), arrays(np.float64, (3, 2), elements=finite))
def test_operations_are_deterministic(a, b):
    first = T.tanh(T.matmul(Tensor(a), Tensor(b))).data
    second = T.tanh(T.matmul(Tensor(a), Tensor(b))).data
    assert first.tobytes() == second.tobytes()


def test_outputs_finite_on_extreme_inputs():
    x = leaf([-800.0, 0.0, 800.0])
    y = T.sum(T.add(T.sigmoid(x), T.tanh(x)))
    y.backward()
    assert np.all(np.isfinite(y.data)) and np.all(np.isfinite(x.grad))


def test_getitem_repeated_indices_accumulate():
    x = leaf([1.0, 2.0, 3.0])
    T.sum(T.getitem(x, [0, 0, 2])).backward()
    assert x.grad.tolist() == [2.0, 0.0, 1.0]


def test_binary_cross_entropy_clamps():
    p = leaf([1.0, 0.0])
    loss = T.binary_cross_entropy(p, [1.0, 0.0], [0.5, 0.5])
    loss.backward()
    assert loss.item() == pytest.approx(-math.log(1 - 1e-7), rel=1e-9)
    assert p.grad.tolist() == [0.0, 0.0]


def test_blend_and_scale_rows_shapes():
    with pytest.raises(DimensionError):
        T.blend(Tensor(np.ones((2, 2))), Tensor(np.ones((2, 2))), [True])
    with pytest.raises(DimensionError):
        T.scale_rows(Tensor(np.ones((2, 2))), [1.0, 2.0, 3.0])
