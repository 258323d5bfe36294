"""Train a small model on the planted synthetic corpus and look inside.

Every synthetic document hides a few "salient" sentences that reuse the
highlight's words; the rest are filler or topical distractors. A small
model memorises the training set, and the memory network's attention can
be read off after a forward pass.

    python3 demos/03_train_synthetic.py      # about 15 seconds
"""

import numpy as np

from hybrid_memnet import TrainConfig, build_vocab, forward, predict, train
from hybrid_memnet.synthetic import make_corpus
from hybrid_memnet.tensor import no_grad
from hybrid_memnet.text import label_corpus

corpus, planted = make_corpus(20, seed=0)
corpus = label_corpus(corpus)
print("labels recovered from highlights:", [d.labels for d in corpus] == planted)

vocab = build_vocab(corpus)
cfg = TrainConfig(word_dim=32, sent_dim=64, doc_dim=128, max_epochs=150, seed=0)
report = train(corpus, cfg, vocab)
for e in report.epochs[::25] + report.epochs[-1:]:
    print(f"epoch {e.epoch:>4}  loss {e.train_loss:.5f}")

docs = [vocab.encode_document(d) for d in corpus]
hits = sum(int(np.array_equal(p > 0.5, np.array(d.labels) == 1)) for p, d in zip(predict(report.params, docs), corpus))
print(f"documents labelled exactly: {hits}/{len(corpus)}")

with no_grad():
    result = forward(report.params, docs[:1])
n = result.lengths[0]
print("sentence      ", " ".join(f"{i:>6}" for i in range(n)))
print("gold label    ", " ".join(f"{y:>6}" for y in corpus[0].labels))
for k, att in enumerate(result.attention, 1):
    print(f"hop {k} attention", " ".join(f"{a:6.3f}" for a in att[0, :n]))
