"""Reference implementations used only as test oracles.

Everything here is written with plain Python loops and does not call into
``enose.nn``, so agreement with the library is a meaningful check.
"""
import math

import numpy as np


def ref_sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x)) if x >= 0 else math.exp(x) / (1.0 + math.exp(x))


def ref_forward(w1, b1, w2, b2, x):
    hidden = [ref_sigmoid(sum(w1[j][i] * x[i] for i in range(len(x))) + b1[j]) for j in range(len(b1))]
    out = [ref_sigmoid(sum(w2[k][j] * hidden[j] for j in range(len(hidden))) + b2[k]) for k in range(len(b2))]
    return out, hidden


def ref_error(w1, b1, w2, b2, x, t):
    out, _ = ref_forward(w1, b1, w2, b2, x)
    return 0.5 * sum((o - tk) ** 2 for o, tk in zip(out, t))


def finite_difference(net, x, t, h=1e-5):
    """Central differences of the per-sample error for every weight and bias."""
    params = [p.copy() for p in net.params()]
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = ref_error(*params, x, t)
            p[idx] = old - h
            down = ref_error(*params, x, t)
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def relative_error(a, b, floor=1e-6):
    # the floor keeps components that are zero up to rounding from dominating
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def vanilla_gd(net, inputs, targets, lr, epochs, order_seed):
    """Per-sample gradient descent without momentum, explicit loops.

    Visits samples in the same per-epoch order as ``enose.nn.train_arrays``.
    """
    w1, b1, w2, b2 = (p.tolist() for p in net.params())
    rng = np.random.default_rng([order_seed, 1])
    for _ in range(epochs):
        for i in rng.permutation(len(inputs)):
            x, t = inputs[i], targets[i]
            o, h = ref_forward(w1, b1, w2, b2, x)
            d_out = [(o[k] - t[k]) * o[k] * (1 - o[k]) for k in range(len(o))]
            d_hid = [sum(w2[k][j] * d_out[k] for k in range(len(o))) * h[j] * (1 - h[j]) for j in range(len(h))]
            for k in range(len(o)):
                for j in range(len(h)):
                    w2[k][j] -= lr * d_out[k] * h[j]
                b2[k] -= lr * d_out[k]
            for j in range(len(h)):
                for m in range(len(x)):
                    w1[j][m] -= lr * d_hid[j] * x[m]
                b1[j] -= lr * d_hid[j]
    return [np.array(p) for p in (w1, b1, w2, b2)]


class SingleLayerPerceptron:
    """Linear baseline: one layer of log-sigmoid units, delta rule with momentum."""

    def __init__(self, n_in=7, n_out=5, seed=0, half_range=0.5):
        rng = np.random.default_rng(seed)
        self.w = rng.uniform(-half_range, half_range, (n_out, n_in))
        self.b = rng.uniform(-half_range, half_range, n_out)
        self._rng = np.random.default_rng([seed, 1])

    def outputs(self, x):
        return 1.0 / (1.0 + np.exp(-(np.asarray(x) @ self.w.T + self.b)))

    def fit(self, inputs, targets, lr=0.01, momentum=0.9, epochs=1000):
        vw = np.zeros_like(self.w)
        vb = np.zeros_like(self.b)
        for _ in range(epochs):
            for i in self._rng.permutation(len(inputs)):
                o = self.outputs(inputs[i])
                delta = (o - targets[i]) * o * (1 - o)
                vw = momentum * vw - lr * np.outer(delta, inputs[i])
                vb = momentum * vb - lr * delta
                self.w += vw
                self.b += vb
        return self

    def predict(self, inputs):
        return np.argmax(self.outputs(inputs), axis=1)
