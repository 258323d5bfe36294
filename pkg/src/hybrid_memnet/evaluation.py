"""Summary extraction, the LEAD baseline and corpus-level ROUGE tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EvaluationError
from .rouge import RougeScores, RougeTriple, rouge_scores
from .text import Corpus, Document, tokenize

MAX_SENTENCES = 3
MAX_WORDS = 75

# Function words dropped when stopword removal is switched on.
STOPWORDS = frozenset(
    """a about above after again against all am an and any are as at be because been before being
    below between both but by can could did do does doing down during each few for from further had
    has have having he her here hers herself him himself his how i if in into is it its itself just
    me more most my myself no nor not now of off on once only or other our ours ourselves out over
    own same she should so some such than that the their theirs them themselves then there these they
    this those through to too under until up very was we were what when where which while who whom why
    will with would you your yours yourself yourselves""".split()
)


@dataclass(frozen=True)
class Summary:
    indices: tuple[int, ...]
    text: str
    word_count: int

    def to_record(self, doc_id: str) -> dict:
        return {"id": doc_id, "indices": list(self.indices), "text": self.text}


def _words(sentence: str) -> list[str]:
    return sentence.split()


def extract_summary(
    doc: Document | Sequence[str],
    scores: Sequence[float],
    max_sentences: int = MAX_SENTENCES,
    max_words: int = MAX_WORDS,
) -> Summary:
    """Pick the highest-scoring sentences under a sentence and word budget.

    Sentences are visited by descending score (earlier first on ties) and
    skipped when they would overflow ``max_words``. A top sentence that is
    longer than the budget on its own is truncated to ``max_words`` words.
    The summary lists sentences in document order.
    """
    sentences = doc.raw_sentences if isinstance(doc, Document) else list(doc)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (len(sentences),):
        raise EvaluationError(f"{scores.size} scores for {len(sentences)} sentences")
    order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    chosen: list[int] = []
    used = 0
    for i in order:
        if len(chosen) == max_sentences:
            break
        n = len(_words(sentences[i]))
        if not chosen and n > max_words:
            text = " ".join(_words(sentences[i])[:max_words])
            return Summary((i,), text, max_words)
        if used + n <= max_words:
            chosen.append(i)
            used += n
    chosen.sort()
    return Summary(tuple(chosen), " ".join(sentences[i] for i in chosen), used)


def lead_baseline(
    doc: Document | Sequence[str], max_sentences: int = MAX_SENTENCES, max_words: int = MAX_WORDS
) -> Summary:
    """The leading ``max_sentences`` sentences under the same word budget."""
    sentences = doc.raw_sentences if isinstance(doc, Document) else list(doc)
    lead = sentences[:max_sentences]
    return extract_summary(lead, -np.arange(len(lead), dtype=np.float64), max_sentences, max_words)


@dataclass(frozen=True)
class RougeOptions:
    stem: bool = False
    remove_stopwords: bool = False
    measure: str = "f1"

    def __post_init__(self):
        if self.measure not in ("recall", "precision", "f1"):
            raise EvaluationError(f"unknown ROUGE measure {self.measure!r}")

    def prepare(self, tokens: Sequence[str]) -> list[str]:
        out = list(tokens)
        if self.remove_stopwords:
            out = [t for t in out if t not in STOPWORDS]
        if self.stem:
            stemmer = _porter()
            out = [stemmer.stem(t) for t in out]
        return out

    def describe(self) -> str:
        on = lambda flag: "on" if flag else "off"  # noqa: E731
        return f"measure={self.measure} stemming={on(self.stem)} stopwords_removed={on(self.remove_stopwords)}"


_STEMMER = None


def _porter():
    global _STEMMER
    if _STEMMER is None:
        try:
            from nltk.stem.porter import PorterStemmer
        except ImportError as exc:
            raise EvaluationError("stemming needs nltk: pip install 'artifact[stem]'") from exc
        _STEMMER = PorterStemmer()
    return _STEMMER


def score_summary(text: str, highlights: Sequence[str], options: RougeOptions = RougeOptions()) -> RougeScores:
    """ROUGE of a summary against one reference formed by all highlights."""
    candidate = options.prepare(tokenize(text))
    reference = options.prepare([t for h in highlights for t in tokenize(h)])
    return rouge_scores(candidate, [reference])


def mean_scores(scores: Sequence[RougeScores]) -> RougeScores:
    def avg(metric: str) -> RougeTriple:
        triples = [getattr(s, metric) for s in scores]
        return RougeTriple(*(float(np.mean([getattr(t, k) for t in triples])) for k in ("recall", "precision", "f1")))

    return RougeScores(avg("rouge1"), avg("rouge2"), avg("rougeL"))


@dataclass
class CorpusEvaluation:
    system: str
    options: RougeOptions
    per_document: list[tuple[str, RougeScores]] = field(default_factory=list)

    @property
    def mean(self) -> RougeScores:
        return mean_scores([s for _, s in self.per_document])

    def percentages(self) -> tuple[float, float, float]:
        m, k = self.mean, self.options.measure
        return tuple(100.0 * getattr(m, name).get(k) for name in ("rouge1", "rouge2", "rougeL"))

    def row(self, delimiter: str = "\t") -> str:
        return delimiter.join([self.system] + [f"{v:.1f}" for v in self.percentages()])

    def records(self) -> list[dict]:
        return [{"id": doc_id, "system": self.system, **s.as_dict()} for doc_id, s in self.per_document]


TABLE_COLUMNS = ("system", "ROUGE-1", "ROUGE-2", "ROUGE-L")


def format_table(evaluations: Sequence[CorpusEvaluation], delimiter: str = "\t") -> str:
    """Percentages with one decimal, preceded by a comment line naming the ROUGE settings."""
    if not evaluations:
        raise EvaluationError("nothing to tabulate")
    settings = {e.options for e in evaluations}
    if len(settings) != 1:
        raise EvaluationError("all rows of a table must share ROUGE settings")
    lines = [f"# rouge {evaluations[0].options.describe()}", delimiter.join(TABLE_COLUMNS)]
    lines += [e.row(delimiter) for e in evaluations]
    return "\n".join(lines) + "\n"


def write_records(evaluation: CorpusEvaluation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in evaluation.records():
            fh.write(json.dumps(record, sort_keys=True) + "\n")


Summarizer = Callable[[Document], Summary]


def evaluate_corpus(
    corpus: Corpus | Sequence[Document],
    summarizer: Summarizer | Mapping[str, Summary],
    system: str = "model",
    options: RougeOptions = RougeOptions(),
) -> CorpusEvaluation:
    """Macro-averaged ROUGE of a summarizer (callable or id -> summary map) over a corpus."""
    result = CorpusEvaluation(system, options)
    for doc in corpus:
        if not doc.highlights:
            raise EvaluationError(f"document {doc.id} has no highlights to evaluate against")
        if callable(summarizer):
            summary = summarizer(doc)
        else:
            try:
                summary = summarizer[doc.id]
            except KeyError:
                raise EvaluationError(f"no summary for document {doc.id}") from None
        result.per_document.append((doc.id, score_summary(summary.text, doc.highlights, options)))
    if not result.per_document:
        raise EvaluationError("cannot evaluate an empty corpus")
    return result


def summarize_corpus(params, vocab, corpus: Corpus | Sequence[Document], batch_size: int = 20) -> dict[str, Summary]:
    """Model summaries for every document, keyed by id."""
    from .model import predict

    cfg = params.config
    docs = list(corpus)
    out: dict[str, Summary] = {}
    for start in range(0, len(docs), batch_size):
        chunk = docs[start : start + batch_size]
        ids = [vocab.encode_document(d, cfg.max_sent_tokens, cfg.max_doc_sentences) for d in chunk]
        for doc, scores in zip(chunk, predict(params, ids)):
            kept = doc.raw_sentences[: len(scores)]
            out[doc.id] = extract_summary(kept, scores, cfg.summary_sentences, cfg.summary_words)
    return out
