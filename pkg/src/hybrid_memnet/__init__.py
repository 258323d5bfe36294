"""Extractive summarisation with a convolutional sentence encoder, a
bidirectional LSTM plus multi-hop memory network document encoder, and a
sequential sentence-labelling decoder, built on a small numpy autodiff core.
"""

from .config import TrainConfig
from .errors import HybridMemNetError
from .evaluation import RougeOptions, evaluate_corpus, extract_summary, format_table, lead_baseline
from .model import ModelParams, forward, init_params, load_model, predict, save_model
from .rouge import rouge_l, rouge_n, rouge_scores
from .tensor import Tensor, no_grad
from .text import Corpus, Document, Vocabulary, build_vocab, derive_labels, load_corpus, save_corpus, tokenize
from .training import TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Document",
    "HybridMemNetError",
    "ModelParams",
    "RougeOptions",
    "Tensor",
    "TrainConfig",
    "TrainReport",
    "Vocabulary",
    "build_vocab",
    "derive_labels",
    "evaluate_corpus",
    "extract_summary",
    "format_table",
    "forward",
    "init_params",
    "lead_baseline",
    "load_corpus",
    "load_model",
    "no_grad",
    "predict",
    "rouge_l",
    "rouge_n",
    "rouge_scores",
    "save_corpus",
    "save_model",
    "tokenize",
    "train",
]
