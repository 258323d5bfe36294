import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_memnet.errors import DomainError, OracleError
from hybrid_memnet.rouge import lcs_length, rouge_l, rouge_l_multi, rouge_n, rouge_scores
from hybrid_memnet.testkit import brute_force_lcs, brute_force_rouge_l, manual_rouge_n

tokens = st.lists(st.sampled_from("abcde"), max_size=8)


def test_identical_is_perfect():
    r = rouge_n("the cat sat".split(), ["the cat sat".split()], 1)
    assert (r.recall, r.precision, r.f1) == (1.0, 1.0, 1.0)
    assert rouge_l(list("abcd"), list("abcd")).f1 == 1.0


def test_unigram_example():
    r = rouge_n("the cat sat".split(), ["the cat".split()], 1)
    assert r.recall == 1.0
    assert r.precision == pytest.approx(2 / 3)
    assert (r.recall, r.precision, r.f1) == pytest.approx(manual_rouge_n("the cat sat".split(), "the cat".split(), 1))


def test_disjoint_vocabularies():
    for n in (1, 2):
        r = rouge_n(["a", "b"], [["c", "d"]], n)
        assert (r.recall, r.precision, r.f1) == (0.0, 0.0, 0.0)


def test_rouge_n_domain():
    with pytest.raises(DomainError):
        rouge_n(["a"], [["a"]], 3)


def test_multi_reference_union_keeps_max_counts():
    # union of {a:1, b:1} and {a:2} is {a:2, b:1}; candidate a a a b matches 3 of 3
    r = rouge_n(list("aaab"), [list("ab"), list("aa")], 1)
    assert r.recall == 1.0
    assert r.precision == 0.75


def test_rouge_l_example():
    r = rouge_l("a b c d".split(), "a c d b".split())
    assert lcs_length("a b c d".split(), "a c d b".split()) == 3
    assert r.recall == r.precision == 0.75
    assert brute_force_lcs("a b c d".split(), "a c d b".split()) == 3


def test_rouge_l_empty_candidate():
    r = rouge_l([], ["a"])
    assert (r.recall, r.precision, r.f1) == (0.0, 0.0, 0.0)


def test_rouge_l_multi_takes_best_f1():
    best = rouge_l_multi(list("abc"), [list("xyz"), list("abd"), list("abc")])
    assert best.f1 == 1.0
    assert rouge_l_multi(list("abc"), []).f1 == 0.0


def test_rouge_scores_bundle():
    s = rouge_scores("a b c".split(), ["a b".split()])
    assert set(s.as_dict()) == {"rouge1", "rouge2", "rougeL"}
    assert s.rouge2.recall == 1.0


@settings(max_examples=300)
@given(tokens, tokens)
def test_rouge_l_matches_brute_force(a, b):
    fast = rouge_l(a, b)
    assert (fast.recall, fast.precision, fast.f1) == pytest.approx(brute_force_rouge_l(a, b), abs=1e-12)


@settings(max_examples=300)
@given(tokens, tokens, st.sampled_from([1, 2]))
def test_rouge_n_matches_manual_counts(a, b, n):
    r = rouge_n(a, [b], n)
    assert (r.recall, r.precision, r.f1) == pytest.approx(manual_rouge_n(a, b, n), abs=1e-12)


@settings(max_examples=300)
@given(tokens, tokens, st.sampled_from([1, 2]))
def test_recall_precision_swap(c, r, n):
    assert rouge_n(c, [r], n).recall == rouge_n(r, [c], n).precision
    assert rouge_l(c, r).recall == rouge_l(r, c).precision
    if len(c) == len(r):
        assert rouge_l(c, r).f1 == pytest.approx(rouge_l(r, c).f1)
        assert rouge_n(c, [r], n).f1 == pytest.approx(rouge_n(r, [c], n).f1)


@settings(max_examples=200)
@given(tokens, tokens)
def test_scores_are_bounded(a, b):
    for triple in rouge_scores(a, [b]).as_dict().values():
        assert all(0.0 <= v <= 1.0 for v in triple.values())


def test_brute_force_lcs_bound():
    with pytest.raises(OracleError):
        brute_force_lcs(list("abcdefghi"), list("abc"))
    assert brute_force_lcs(list("abcd"), list("abcd")) == 4
    assert brute_force_lcs(list("ab"), list("cd")) == 0
