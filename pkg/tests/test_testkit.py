import numpy as np
import pytest

from hybrid_memnet.errors import OracleError
from hybrid_memnet.testkit import (
    FiniteDiffConfig,
    brute_force_lcs,
    exhaustive_oracle_labels,
    finite_diff_grad,
    max_relative_error,
    relative_error,
    scalar_forward,
    scalar_loss,
)


def test_sum_of_squares():
    grad = finite_diff_grad(lambda x: float(np.sum(x**2)), np.array([1.0, 2.0]))
    np.testing.assert_allclose(grad, [2.0, 4.0], atol=1e-6)


def test_constant_and_linear_functions():
    x = np.array([0.3, -1.0, 4.0])
    np.testing.assert_array_equal(finite_diff_grad(lambda v: 7.0, x), [0.0, 0.0, 0.0])
    c = np.array([1.5, -2.0, 0.25])
    np.testing.assert_allclose(finite_diff_grad(lambda v: float(c @ v), x), c, atol=1e-9)


def test_params_are_restored_and_coords_limit_work():
    params = {"a": np.array([1.0, 2.0, 3.0]), "b": np.array([[0.5]])}
    before = {k: v.copy() for k, v in params.items()}
    grad = finite_diff_grad(lambda p: float(np.sum(p["a"] ** 2) + p["b"].sum()), params, coords={"a": [1]})
    assert all(np.array_equal(params[k], before[k]) for k in params)
    assert np.isnan(grad["a"][0]) and grad["a"][1] == pytest.approx(4.0, abs=1e-6)
    assert grad["b"][0, 0] == pytest.approx(1.0, abs=1e-9)


def test_non_finite_evaluation_is_oracle_error():
    with pytest.raises(OracleError):
        finite_diff_grad(lambda x: float("inf") if x[0] < 0 else float(x[0]), np.array([0.0]))


def test_comparison_rule():
    assert relative_error(1e-8, 0.0) == pytest.approx(1e-8)
    assert relative_error(200.0, 100.0) == pytest.approx(0.5)
    assert max_relative_error([], []) == 0.0


def test_finite_diff_config_validation():
    cfg = FiniteDiffConfig()
    assert (cfg.step, cfg.tolerance) == (1e-5, 1e-4)
    with pytest.raises(OracleError):
        FiniteDiffConfig(step=0.0)
    with pytest.raises(OracleError):
        FiniteDiffConfig(tolerance=-1.0)


def test_brute_force_lcs_examples():
    assert brute_force_lcs(list("abcd"), list("abcd")) == 4
    assert brute_force_lcs(list("ab"), list("xy")) == 0
    assert brute_force_lcs("a b c d".split(), "a c d b".split()) == 3
    assert brute_force_lcs([], list("abc")) == 0
    with pytest.raises(OracleError):
        brute_force_lcs(list("abcdefghi"), list("a"))


def test_unknown_fragment():
    with pytest.raises(OracleError, match="unknown fragment"):
        scalar_forward("attention_v2", {}, {})


def test_zero_weight_lstm_cell_on_both_paths():
    from hybrid_memnet.document_encoder import LstmParams, lstm_cell
    from hybrid_memnet.tensor import Tensor

    zero = {"w_x": np.zeros((8, 3)), "w_h": np.zeros((8, 2)), "bias": np.zeros(8)}
    x, h, c = np.array([0.4, -1.0, 2.0]), np.zeros(2), np.zeros(2)
    oh, oc = scalar_forward("lstm_cell", zero, {"x": x, "h": h, "c": c})
    fh, fc = lstm_cell(Tensor(x), (Tensor(h), Tensor(c)), LstmParams(*(Tensor(v) for v in zero.values())))
    assert list(oh) == list(oc) == [0.0, 0.0]
    assert fh.data.tolist() == fc.data.tolist() == [0.0, 0.0]


def test_single_hop_two_sentence_memnet():
    rng = np.random.default_rng(0)
    params = {"query": rng.uniform(-1, 1, (2, 2)), "hops": [(rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, (2, 2)))]}
    s, d = rng.uniform(-1, 1, (2, 2)), rng.uniform(-1, 1, 2)
    out, attention = scalar_forward("memnet", params, {"sentvecs": s, "d_prime": d})
    # the same hop written out with numpy
    u = params["query"] @ d
    a, c = params["hops"][0]
    logits = (s @ a.T) @ u
    p = np.exp(logits - logits.max())
    p /= p.sum()
    np.testing.assert_allclose(attention[0], p, atol=1e-15)
    np.testing.assert_allclose(out, p @ (s @ c.T), atol=1e-15)


def test_scalar_loss_clamps():
    assert scalar_loss([0.5], [1]) == pytest.approx(np.log(2))
    assert np.isfinite(scalar_loss([0.0], [1]))


def test_exhaustive_labels_pick_the_best_subset():
    sentences = [["a", "b"], ["c"], ["a", "b", "c"]]
    labels, best = exhaustive_oracle_labels(sentences, ["a", "b", "c"])
    assert labels == [0, 0, 1]
    assert best == pytest.approx(1.0)
