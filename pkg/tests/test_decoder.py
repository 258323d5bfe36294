import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_memnet import tensor as T
from hybrid_memnet.decoder import DecoderParams, decode, decode_batch
from hybrid_memnet.document_encoder import LstmParams
from hybrid_memnet.errors import DecoderError
from hybrid_memnet.tensor import Tensor
from hybrid_memnet.testkit import scalar_forward

from toy import GRAD_TOL, gradient_error

SENT, STATE, DOC, HIDDEN = 2, 2, 2, 3


def make_params(rng, sent=SENT, state=STATE, doc=DOC, hidden=HIDDEN, enc=STATE, scale=1.0):
    u = lambda *shape: Tensor(rng.uniform(-scale, scale, shape))  # noqa: E731
    return DecoderParams(
        u(state, doc),
        u(state),
        LstmParams(u(4 * state, sent), u(4 * state, state), u(4 * state)),
        u(hidden, state + enc),
        u(hidden),
        u(1, hidden),
        u(1),
    )


def oracle_view(p: DecoderParams) -> dict:
    return {
        "init_weight": p.init_weight.data,
        "init_bias": p.init_bias.data,
        "lstm": {"w_x": p.lstm.w_x.data, "w_h": p.lstm.w_h.data, "bias": p.lstm.bias.data},
        "mlp_w1": p.mlp_w1.data,
        "mlp_b1": p.mlp_b1.data,
        "mlp_w2": p.mlp_w2.data,
        "mlp_b2": p.mlp_b2.data,
    }


def inputs(rng, n, sent=SENT, enc=STATE, doc=DOC, scale=1.0):
    return (rng.uniform(-scale, scale, (n, sent)), rng.uniform(-scale, scale, (n, enc)), rng.uniform(-scale, scale, doc))


def test_zero_mlp_gives_one_half_everywhere():
    rng = np.random.default_rng(0)
    p = make_params(rng)
    for t in (p.mlp_w1, p.mlp_b1, p.mlp_w2, p.mlp_b2):
        t.data[...] = 0.0
    s, h, d = inputs(rng, 4)
    assert decode(Tensor(s), Tensor(h), Tensor(d), p).data.tolist() == [0.5] * 4
    assert decode(Tensor(s), Tensor(h), Tensor(d), p, [1, 0, 1, 1]).data.tolist() == [0.5] * 4


def test_all_zero_teacher_means_zero_input_after_first_step():
    # with zero input the step depends only on the previous state, so any
    # change to the sentence vectors must leave the scores untouched
    rng = np.random.default_rng(1)
    p = make_params(rng)
    s, h, d = inputs(rng, 5)
    a = decode(Tensor(s), Tensor(h), Tensor(d), p, [0] * 5).data
    b = decode(Tensor(rng.uniform(-9, 9, s.shape)), Tensor(h), Tensor(d), p, [0] * 5).data
    np.testing.assert_array_equal(a, b)


def test_two_sentence_inference_matches_scalar_unroll():
    rng = np.random.default_rng(2)
    p = make_params(rng)
    s, h, d = inputs(rng, 2)
    out = decode(Tensor(s), Tensor(h), Tensor(d), p).data
    ref = scalar_forward("decoder", oracle_view(p), {"sentvecs": s, "enc_states": h, "d_f": d})
    np.testing.assert_allclose(out, ref, atol=1e-12, rtol=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 6), st.booleans())
def test_random_documents_match_scalar_unroll(seed, n, forced):
    rng = np.random.default_rng(seed)
    p = make_params(rng, sent=3, state=4, doc=3, enc=5)
    s, h, d = inputs(rng, n, sent=3, enc=5, doc=3)
    teacher = list(rng.integers(0, 2, n)) if forced else None
    out = decode(Tensor(s), Tensor(h), Tensor(d), p, teacher).data
    ref = scalar_forward("decoder", oracle_view(p), {"sentvecs": s, "enc_states": h, "d_f": d, "teacher": teacher})
    np.testing.assert_allclose(out, ref, atol=1e-12, rtol=0)


def test_first_step_ignores_the_first_sentence_vector():
    rng = np.random.default_rng(3)
    p = make_params(rng)
    s, h, d = inputs(rng, 3)
    a = decode(Tensor(s), Tensor(h), Tensor(d), p).data
    s[0] += 5.0
    b = decode(Tensor(s), Tensor(h), Tensor(d), p).data
    assert a[0] == b[0] and a[1] != b[1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 7))
def test_teacher_forced_scores_are_causal(seed, n):
    rng = np.random.default_rng(seed)
    p = make_params(rng, sent=3, state=4, doc=3, enc=5)
    s, h, d = inputs(rng, n, sent=3, enc=5, doc=3)
    labels = list(rng.integers(0, 2, n))
    full = decode(Tensor(s), Tensor(h), Tensor(d), p, labels).data
    for t in range(1, n + 1):
        cut = decode(Tensor(s[:t]), Tensor(h[:t]), Tensor(d), p, labels[:t]).data
        assert cut.tobytes() == full[:t].tobytes()


def test_batched_decoding_matches_single_documents():
    rng = np.random.default_rng(4)
    p = make_params(rng)
    docs = [inputs(rng, n) for n in (3, 1)]
    s = np.zeros((2, 3, SENT))
    h = np.zeros((2, 3, STATE))
    for b, (sv, hv, _) in enumerate(docs):
        s[b, : len(sv)], h[b, : len(hv)] = sv, hv
    d = np.stack([doc[2] for doc in docs])
    batch = decode_batch(Tensor(s), Tensor(h), Tensor(d), p).data
    for b, (sv, hv, dv) in enumerate(docs):
        single = decode(Tensor(sv), Tensor(hv), Tensor(dv), p).data
        np.testing.assert_allclose(batch[b, : len(sv)], single, atol=1e-15, rtol=0)


@pytest.mark.parametrize("scale", [1e3, -1e3])
def test_scores_stay_in_open_interval_under_large_inputs(scale):
    rng = np.random.default_rng(5)
    p = make_params(rng)
    s, h, d = inputs(rng, 6)
    for teacher in (None, [1, 0, 1, 0, 1, 1]):
        out = decode(Tensor(s * scale), Tensor(h * scale), Tensor(d * scale), p, teacher).data
        assert np.all(np.isfinite(out))
        assert np.all((out > 0) & (out < 1))


def test_length_mismatches_are_decoder_errors():
    rng = np.random.default_rng(6)
    p = make_params(rng)
    s, h, d = inputs(rng, 3)
    with pytest.raises(DecoderError):
        decode(Tensor(s), Tensor(h[:2]), Tensor(d), p)
    with pytest.raises(DecoderError):
        decode(Tensor(s), Tensor(h), Tensor(d), p, [1, 0])
    with pytest.raises(DecoderError):
        decode(Tensor(s), Tensor(h), Tensor(np.zeros(5)), p)


def test_mlp_width_must_cover_both_states():
    rng = np.random.default_rng(7)
    p = make_params(rng, enc=3)
    s, h, d = inputs(rng, 2)
    with pytest.raises(DecoderError):
        decode(Tensor(s), Tensor(h), Tensor(d), p)


def test_teacher_forced_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    p = make_params(rng, sent=3, state=3, doc=2, enc=3)
    s, h, d = inputs(rng, 3, sent=3, enc=3, doc=2)
    labels = [1, 0, 1]
    arrays = {
        "s": s,
        "h": h,
        "d": d,
        "init_weight": p.init_weight.data,
        "w_x": p.lstm.w_x.data,
        "w_h": p.lstm.w_h.data,
        "mlp_w1": p.mlp_w1.data,
    }

    def build(t):
        params = DecoderParams(
            t["init_weight"], p.init_bias, LstmParams(t["w_x"], t["w_h"], p.lstm.bias), t["mlp_w1"], p.mlp_b1, p.mlp_w2, p.mlp_b2
        )
        scores = decode(t["s"], t["h"], t["d"], params, labels)
        return T.binary_cross_entropy(scores, np.array(labels, float), np.full(3, 1 / 3))

    assert gradient_error(build, arrays) < GRAD_TOL
