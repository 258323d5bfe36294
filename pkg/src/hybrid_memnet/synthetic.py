"""Seeded synthetic news-like corpora with planted summary sentences.

Every document has a topic word. The planted (salient) sentences all
mention it, so it repeats across the document; other sentences are filler
and may carry a distractor topic word that appears only once. The
highlights copy the planted sentences verbatim, in document order, so the
greedy ROUGE oracle recovers exactly the planted set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .text import Corpus, Document

FILLER = (
    "the a of to in and for on with at by from said was were has have had is are "
    "city week report local people group team plan year month day time service "
    "market school road water power health board court police fire park station "
    "house office center council budget project program study data record number "
    "level rate price cost share deal talk meeting statement official member staff "
    "family child student worker driver owner resident visitor leader expert source "
    "morning evening area region county district state nation world"
).split()

TOPICS = (
    "election storm strike merger vaccine flood trial launch drought scandal "
    "festival outbreak earthquake protest verdict wildfire"
).split()


@dataclass(frozen=True)
class SyntheticSpec:
    min_sentences: int = 6
    max_sentences: int = 10
    min_words: int = 6
    max_words: int = 11
    min_salient: int = 2
    max_salient: int = 3
    distractor_rate: float = 0.5


def _sentence(rng: np.random.Generator, spec: SyntheticSpec, topic: str | None) -> str:
    n = int(rng.integers(spec.min_words, spec.max_words + 1))
    words = list(rng.choice(FILLER, size=n))
    if topic is not None:
        words.insert(int(rng.integers(0, n + 1)), topic)
    return " ".join(words) + " ."


def make_document(rng: np.random.Generator, doc_id: str, spec: SyntheticSpec = SyntheticSpec()):
    """Returns ``(document, planted_labels)``."""
    n = int(rng.integers(spec.min_sentences, spec.max_sentences + 1))
    k = int(rng.integers(spec.min_salient, spec.max_salient + 1))
    topic, *others = rng.permutation(TOPICS)
    salient = set(int(i) for i in rng.choice(n, size=k, replace=False))
    distractors = iter(others)
    sentences, labels = [], []
    for i in range(n):
        if i in salient:
            sentences.append(_sentence(rng, spec, topic))
            labels.append(1)
        else:
            extra = next(distractors) if rng.random() < spec.distractor_rate else None
            sentences.append(_sentence(rng, spec, extra))
            labels.append(0)
    highlights = [s for s, y in zip(sentences, labels) if y]
    return Document(doc_id, sentences, highlights), labels


def make_corpus(n_docs: int, seed: int, split: str = "train", spec: SyntheticSpec = SyntheticSpec()):
    """Returns ``(corpus, planted_labels)`` with unlabeled documents."""
    rng = np.random.default_rng(seed)
    docs, planted = [], []
    for i in range(n_docs):
        doc, labels = make_document(rng, f"{split}-{i:04d}", spec)
        docs.append(doc)
        planted.append(labels)
    return Corpus(docs, split), planted
