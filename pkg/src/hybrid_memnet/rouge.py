"""Exact ROUGE-1/2/L over token lists."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .errors import DomainError


@dataclass(frozen=True)
class RougeTriple:
    recall: float
    precision: float
    f1: float

    @classmethod
    def from_counts(cls, matches: float, ref_total: float, cand_total: float) -> "RougeTriple":
        r = matches / ref_total if ref_total else 0.0
        p = matches / cand_total if cand_total else 0.0
        return cls(r, p, f1_score(p, r))

    def get(self, measure: str) -> float:
        return getattr(self, measure)


ZERO = RougeTriple(0.0, 0.0, 0.0)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class RougeScores:
    rouge1: RougeTriple
    rouge2: RougeTriple
    rougeL: RougeTriple

    def as_dict(self) -> dict:
        return asdict(self)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], references: Iterable[Sequence[str]], n: int) -> RougeTriple:
    """Clipped n-gram overlap against the multiset union of ``references``.

    The union keeps, for each n-gram, its largest count in any reference.
    """
    if n not in (1, 2):
        raise DomainError(f"rouge_n supports n in {{1, 2}}, got {n}")
    ref_counts: Counter = Counter()
    for ref in references:
        ref_counts |= ngrams(ref, n)
    cand_counts = ngrams(candidate, n)
    matches = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    return RougeTriple.from_counts(matches, sum(ref_counts.values()), sum(cand_counts.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeTriple:
    lcs = lcs_length(candidate, reference)
    return RougeTriple.from_counts(lcs, len(reference), len(candidate))


def rouge_l_multi(candidate: Sequence[str], references: Iterable[Sequence[str]]) -> RougeTriple:
    """Best-F1 ROUGE-L over several references."""
    best = ZERO
    for ref in references:
        score = rouge_l(candidate, ref)
        if score.f1 > best.f1:
            best = score
    return best


def rouge_scores(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> RougeScores:
    return RougeScores(
        rouge_n(candidate, references, 1),
        rouge_n(candidate, references, 2),
        rouge_l_multi(candidate, references),
    )
