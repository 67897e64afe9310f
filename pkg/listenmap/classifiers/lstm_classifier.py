from collections import OrderedDict

from scipy.special import expit

from .classifier_base import *
from .classifier_base import np
from .feedforward_classifier import FeedforwardClassifier


class LSTMClassifier(FeedforwardClassifier):
    """Single-layer LSTM over the weeks of a window; its final hidden state
    feeds the dense ReLU head of the feedforward classifier.

    Gates are stacked in the order input, forget, output, candidate. Input
    and recurrent weights are uniform in +-1/sqrt(lstm_units) and the forget
    gate bias starts at 1.
    """
    kind = ModelKind.LSTM

    @property
    def penalized(self):
        return ('lstm_W', 'lstm_U') + FeedforwardClassifier.penalized.fget(self)

    def init_params(self, rng):
        n_weeks, n_features = self.input_shape
        H = self.config.lstm_units
        limit = 1.0 / np.sqrt(H)
        params = OrderedDict()
        params['lstm_W'] = rng.uniform(-limit, limit, size=(n_features, 4 * H))
        params['lstm_U'] = rng.uniform(-limit, limit, size=(H, 4 * H))
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        params['lstm_b'] = b
        params.update(self.init_head(rng, H))
        return params

    def forward(self, params, X):
        n, n_weeks, _ = X.shape
        H = self.config.lstm_units
        h = np.zeros((n, H))
        c = np.zeros((n, H))
        steps = []
        for t in range(n_weeks):
            a = X[:, t] @ params['lstm_W'] + h @ params['lstm_U'] + params['lstm_b']
            i = expit(a[:, :H])
            f = expit(a[:, H:2 * H])
            o = expit(a[:, 2 * H:3 * H])
            g = np.tanh(a[:, 3 * H:])
            c_prev, h_prev = c, h
            c = f * c_prev + i * g
            tanh_c = np.tanh(c)
            h = o * tanh_c
            steps.append((X[:, t], h_prev, c_prev, i, f, o, g, tanh_c))
        logits, activations = self.head_forward(params, h)
        return logits, (steps, activations)

    def backward(self, params, cache, dlogits):
        steps, activations = cache
        grads, dh = self.head_backward(params, activations, dlogits)
        dW = np.zeros_like(params['lstm_W'])
        dU = np.zeros_like(params['lstm_U'])
        db = np.zeros_like(params['lstm_b'])
        dc = np.zeros_like(dh)
        for x, h_prev, c_prev, i, f, o, g, tanh_c in reversed(steps):
            do = dh * tanh_c
            dc = dc + dh * o * (1 - tanh_c ** 2)
            da = np.concatenate([dc * g * i * (1 - i),
                                 dc * c_prev * f * (1 - f),
                                 do * o * (1 - o),
                                 dc * i * (1 - g ** 2)], axis=1)
            dW += x.T @ da
            dU += h_prev.T @ da
            db += da.sum(axis=0)
            dh = da @ params['lstm_U'].T
            dc = dc * f
        grads['lstm_W'], grads['lstm_U'], grads['lstm_b'] = dW, dU, db
        return OrderedDict((k, grads[k]) for k in params)


__all__ = ['LSTMClassifier']
