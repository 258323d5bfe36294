"""Backprop through a small network, checked against central differences.

Builds the full model at toy sizes, computes the teacher-forced loss on one
random document, and compares a handful of analytic partial derivatives
with finite differences.

    python3 demos/01_gradcheck.py
"""

import numpy as np

from hybrid_memnet import TrainConfig, forward, init_params, no_grad
from hybrid_memnet.model import batch_loss
from hybrid_memnet.testkit import relative_error

cfg = TrainConfig(word_dim=4, sent_dim=6, doc_dim=8, mlp_hidden=5, init_range=0.5)
params = init_params(cfg, vocab_size=12, seed=0)
rng = np.random.default_rng(0)
doc = [list(rng.integers(1, 12, size=5)), list(rng.integers(1, 12, size=3))]
labels = [[1, 0]]

value = batch_loss(forward(params, [doc], teacher=labels), labels)
value.backward()
print(f"loss {value.item():.6f}")


def loss_now() -> float:
    with no_grad():
        return batch_loss(forward(params, [doc], teacher=labels), labels).item()


h = 1e-5
print(f"{'parameter':<18}{'index':>7}{'backprop':>14}{'numeric':>14}{'rel.err':>10}")
for name in ("conv3.weight", "enc.fwd.w_h", "mem.hop2.A", "dec.mlp.w1"):
    t = params[name]
    flat = t.data.reshape(-1)
    i = int(rng.integers(flat.size))
    orig = flat[i]
    flat[i] = orig + h
    up = loss_now()
    flat[i] = orig - h
    down = loss_now()
    flat[i] = orig
    numeric = (up - down) / (2 * h)
    analytic = t.grad.reshape(-1)[i]
    print(f"{name:<18}{i:>7}{analytic:>14.8f}{numeric:>14.8f}{float(relative_error(analytic, numeric)):>10.1e}")
