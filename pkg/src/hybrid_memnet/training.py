"""Minibatch training with teacher forcing, Adam and global-norm clipping."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .errors import TrainingError
from .model import ModelParams, batch_loss, forward, init_params, save_model, sentence_loss
from .optim import Adam, clip_grad_norm
from .text import PAD_ID, Corpus, Document, Vocabulary

log = logging.getLogger(__name__)

__all__ = [
    "EpochRecord",
    "TrainReport",
    "encode_corpus",
    "evaluate_loss",
    "init_params",
    "loss",
    "train",
]


def loss(scores, labels: Sequence[int]) -> T.Tensor:
    """Mean binary cross-entropy of one document's scores (tensor or array)."""
    if not isinstance(scores, T.Tensor):
        scores = T.Tensor(np.asarray(scores, dtype=np.float64))
    return sentence_loss(scores, labels)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_loss: float | None
    seconds: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_valid_loss: float | None = None
    checkpoint_path: str | None = None
    stopped_early: bool = False
    params: ModelParams | None = field(default=None, repr=False)

    @property
    def train_losses(self) -> list[float]:
        return [e.train_loss for e in self.epochs]

    @property
    def valid_losses(self) -> list[float | None]:
        return [e.valid_loss for e in self.epochs]

    def to_dict(self) -> dict:
        return {
            "epochs": [vars(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_valid_loss": self.best_valid_loss,
            "checkpoint_path": self.checkpoint_path,
            "stopped_early": self.stopped_early,
        }


def encode_corpus(
    corpus: Corpus | Sequence[Document], vocab: Vocabulary, config: TrainConfig, require_labels: bool = True
) -> tuple[list[list[list[int]]], list[list[int]] | None]:
    """Token ids (truncated per config) and matching labels for every document."""
    docs, labels = [], []
    for doc in corpus:
        ids = vocab.encode_document(doc, config.max_sent_tokens, config.max_doc_sentences)
        docs.append(ids)
        if doc.labels is None:
            if require_labels:
                raise TrainingError(f"document {doc.id} has no labels; run label derivation first")
        else:
            labels.append(list(doc.labels[: len(ids)]))
    return docs, (labels if len(labels) == len(docs) else None)


def evaluate_loss(
    params: ModelParams, docs: Sequence, labels: Sequence[Sequence[int]], batch_size: int = 20
) -> float:
    """Teacher-forced mean per-document loss, without building a graph."""
    total = 0.0
    with T.no_grad():
        for start in range(0, len(docs), batch_size):
            chunk = slice(start, start + batch_size)
            result = forward(params, docs[chunk], teacher=labels[chunk])
            total += batch_loss(result, labels[chunk]).item() * len(docs[chunk])
    return total / len(docs)


def train(
    corpus: Corpus | Sequence[Document],
    config: TrainConfig,
    vocab: Vocabulary,
    valid: Corpus | Sequence[Document] | None = None,
    checkpoint_path=None,
    params: ModelParams | None = None,
) -> TrainReport:
    """Fit a model; keeps (and optionally checkpoints) the best-validation parameters.

    Without a validation corpus the final parameters are kept and no early
    stopping happens.
    """
    docs, labels = encode_corpus(corpus, vocab, config)
    ids = [d.id for d in corpus]
    if not docs:
        raise TrainingError("empty training corpus")
    if valid is not None:
        valid_docs, valid_labels = encode_corpus(valid, vocab, config)
    if params is None:
        params = init_params(config, len(vocab), config.seed)
    elif params.vocab_size != len(vocab):
        raise TrainingError("initial parameters do not match the vocabulary size")
    opt = Adam(params.tensors, config.learning_rate, config.beta1, config.beta2, config.epsilon)
    rng = np.random.default_rng([config.seed, 1])
    report = TrainReport(checkpoint_path=str(checkpoint_path) if checkpoint_path else None)
    best_arrays = None
    since_best = 0

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(len(docs))
        running = 0.0
        for b, start in enumerate(range(0, len(docs), config.batch_size)):
            batch = order[start : start + config.batch_size]
            result = forward(params, [docs[i] for i in batch], teacher=[labels[i] for i in batch])
            value = batch_loss(result, [labels[i] for i in batch])
            if not math.isfinite(value.item()):
                raise TrainingError(
                    f"non-finite loss in epoch {epoch}, batch {b} (documents {[ids[i] for i in batch]})"
                )
            value.backward()
            params["embedding"].grad[PAD_ID] = 0.0
            clip_grad_norm(params.tensors.values(), config.gradient_clip_norm)
            opt.step()
            opt.zero_grad()
            running += value.item() * len(batch)
        train_loss = running / len(docs)

        valid_loss = None
        if valid is not None:
            valid_loss = evaluate_loss(params, valid_docs, valid_labels, config.batch_size)
            if report.best_valid_loss is None or valid_loss < report.best_valid_loss:
                report.best_valid_loss, report.best_epoch = valid_loss, epoch
                best_arrays = params.to_arrays()
                since_best = 0
                if checkpoint_path:
                    save_model(checkpoint_path, params, vocab, epoch=epoch, valid_loss=valid_loss)
            else:
                since_best += 1
        report.epochs.append(EpochRecord(epoch, train_loss, valid_loss, time.perf_counter() - started))
        log.info("epoch %d train %.6f valid %s", epoch, train_loss, valid_loss)
        if config.patience is not None and valid is not None and since_best >= config.patience:
            report.stopped_early = True
            break

    if best_arrays is None:
        report.best_epoch = len(report.epochs)
        if checkpoint_path:
            save_model(checkpoint_path, params, vocab, epoch=report.best_epoch, valid_loss=None)
    else:
        for name, array in best_arrays.items():
            params[name].data[...] = array
    report.params = params
    if checkpoint_path:
        report.checkpoint_path = str(Path(checkpoint_path))
    return report
