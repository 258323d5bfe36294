"""Tokenisation, vocabulary, corpus I/O and extractive oracle labels."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

from .errors import CorpusParseError, LabelingError, PipelineError, ValidationError
from .rouge import rouge_n

PAD, UNK = "<pad>", "<unk>"
PAD_ID, UNK_ID = 0, 1

MAX_SENT_TOKENS = 100
MAX_DOC_SENTENCES = 64
ORACLE_BUDGET = 3

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word runs and single punctuation marks.

    >>> tokenize("The cat sat.")
    ['the', 'cat', 'sat', '.']
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Document:
    id: str
    raw_sentences: list[str]
    highlights: list[str] = field(default_factory=list)
    labels: list[int] | None = None

    def __post_init__(self):
        self._tokens: list[list[str]] | None = None

    @property
    def tokens(self) -> list[list[str]]:
        if self._tokens is None:
            self._tokens = [tokenize(s) for s in self.raw_sentences]
        return self._tokens

    @property
    def highlight_tokens(self) -> list[str]:
        return [t for h in self.highlights for t in tokenize(h)]

    def __len__(self) -> int:
        return len(self.raw_sentences)

    def with_labels(self, labels: Sequence[int]) -> "Document":
        return replace(self, labels=list(labels))

    def validate(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError(f"document id must be a non-empty string, got {self.id!r}")
        if not self.raw_sentences:
            raise ValidationError(f"document {self.id}: no sentences")
        for i, toks in enumerate(self.tokens):
            if not toks:
                raise ValidationError(f"document {self.id}: sentence {i} has no tokens")
        if self.labels is not None:
            if len(self.labels) != len(self.raw_sentences):
                raise ValidationError(
                    f"document {self.id}: {len(self.labels)} labels for {len(self.raw_sentences)} sentences"
                )
            if any(y not in (0, 1) for y in self.labels):
                raise ValidationError(f"document {self.id}: labels must be 0 or 1")

    def to_record(self) -> dict:
        record = {"id": self.id, "sentences": self.raw_sentences, "highlights": self.highlights}
        if self.labels is not None:
            record["labels"] = self.labels
        return record


@dataclass
class Corpus:
    documents: list[Document]
    split: str = "train"

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r} in {self.split} split")
            seen.add(doc.id)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)

    def __getitem__(self, i) -> Document:
        return self.documents[i]

    @property
    def is_labeled(self) -> bool:
        return all(d.labels is not None for d in self.documents)


def load_corpus(path, split: str = "train") -> Corpus:
    """Read a JSON-lines corpus; blank lines are ignored."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", lineno) from None
            docs.append(_parse_record(record, lineno))
    try:
        return Corpus(docs, split)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _parse_record(record, lineno: int) -> Document:
    if not isinstance(record, dict):
        raise CorpusParseError("record must be a JSON object", lineno)
    for key in ("id", "sentences"):
        if key not in record:
            raise CorpusParseError(f"missing field {key!r}", lineno)
    sentences = record["sentences"]
    highlights = record.get("highlights", [])
    if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
        raise CorpusParseError("'sentences' must be an array of strings", lineno)
    if not isinstance(highlights, list) or not all(isinstance(s, str) for s in highlights):
        raise CorpusParseError("'highlights' must be an array of strings", lineno)
    labels = record.get("labels")
    if labels is not None and (not isinstance(labels, list) or not all(type(y) is int for y in labels)):
        raise CorpusParseError("'labels' must be an array of 0/1 integers", lineno)
    doc = Document(str(record["id"]), list(sentences), list(highlights), labels)
    try:
        doc.validate()
    except ValidationError as exc:
        raise CorpusParseError(str(exc), lineno) from None
    return doc


def save_corpus(corpus: Corpus | Sequence[Document], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps(doc.to_record(), ensure_ascii=False) + "\n")
    return path


class Vocabulary:
    """Token <-> id map with ``0 = PAD`` and ``1 = UNK``; unseen tokens map to UNK."""

    def __init__(self, tokens: Sequence[str]):
        tokens = list(tokens)
        if tokens[:2] != [PAD, UNK]:
            raise PipelineError("vocabulary must start with the PAD and UNK entries")
        if len(set(tokens)) != len(tokens):
            raise PipelineError("vocabulary entries must be unique")
        self.itos = tokens
        self.stoi = {t: i for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def id(self, token: str) -> int:
        return self.stoi.get(token, UNK_ID)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.stoi.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    def encode_document(
        self, doc: Document, max_sent_tokens: int = MAX_SENT_TOKENS, max_sentences: int = MAX_DOC_SENTENCES
    ) -> list[list[int]]:
        return [self.encode(toks[:max_sent_tokens]) for toks in doc.tokens[:max_sentences]]

    @property
    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.itos, ensure_ascii=False).encode("utf-8")).hexdigest()

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.itos, ensure_ascii=False, indent=0) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))


def build_vocab(corpus: Corpus | Sequence[Document], max_size: int = 30000) -> Vocabulary:
    """Keep the most frequent article tokens; ties go to the lexicographically smaller token."""
    if max_size <= 2:
        raise PipelineError(f"max_size must exceed the 2 reserved entries, got {max_size}")
    docs = list(corpus)
    if not docs:
        raise PipelineError("cannot build a vocabulary from an empty corpus")
    counts = Counter(t for doc in docs for sent in doc.tokens for t in sent)
    counts.pop(PAD, None)
    counts.pop(UNK, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([PAD, UNK] + [t for t, _ in ranked[: max_size - 2]])


def oracle_objective(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Mean of ROUGE-1 F1 and ROUGE-2 F1."""
    refs = [reference]
    return 0.5 * (rouge_n(candidate, refs, 1).f1 + rouge_n(candidate, refs, 2).f1)


def _selection_tokens(doc: Document, selected) -> list[str]:
    return [t for i in sorted(selected) for t in doc.tokens[i]]


def greedy_oracle(doc: Document, budget: int = ORACLE_BUDGET) -> tuple[list[int], list[float]]:
    """Greedy sentence selection; returns chosen indices and the score after each pick."""
    if not doc.highlights:
        raise LabelingError(f"document {doc.id}: no highlights to derive labels from")
    reference = doc.highlight_tokens
    selected: list[int] = []
    trace: list[float] = []
    best = 0.0
    while len(selected) < budget:
        pick, pick_score = None, best
        for i in range(len(doc)):
            if i in selected:
                continue
            score = oracle_objective(_selection_tokens(doc, selected + [i]), reference)
            if score > pick_score:
                pick, pick_score = i, score
        if pick is None:
            break
        selected.append(pick)
        best = pick_score
        trace.append(best)
    return selected, trace


def derive_labels(doc: Document, budget: int = ORACLE_BUDGET) -> list[int]:
    """Binary extraction labels from the greedy ROUGE oracle against the highlights."""
    selected, _ = greedy_oracle(doc, budget)
    labels = [0] * len(doc)
    for i in selected:
        labels[i] = 1
    return labels


def label_corpus(corpus: Corpus, budget: int = ORACLE_BUDGET) -> Corpus:
    return Corpus([d.with_labels(derive_labels(d, budget)) for d in corpus], corpus.split)
