from collections import OrderedDict

from .classifier_base import *
from .classifier_base import np


class FeedforwardClassifier(ClassifierBase):
    """Fully connected network: n_hidden_layers ReLU layers of hidden_units
    each and a single logit output.

    The dense stack is also the head of the recurrent classifier, which
    feeds it the last hidden state instead of the flattened window.
    """
    kind = ModelKind.FeedforwardNN

    @property
    def penalized(self):
        return tuple('W%d' % i for i in range(1, self.config.n_hidden_layers + 1)) + ('W_out',)

    def n_inputs(self):
        return int(np.prod(self.input_shape))

    def init_head(self, rng, n_in):
        params = OrderedDict()
        for i in range(1, self.config.n_hidden_layers + 1):
            params['W%d' % i] = init_dense(rng, n_in, self.config.hidden_units)
            params['b%d' % i] = np.zeros(self.config.hidden_units)
            n_in = self.config.hidden_units
        params['W_out'] = init_dense(rng, n_in, 1, gain=1.0)
        params['b_out'] = np.zeros(1)
        return params

    def head_forward(self, params, H):
        activations = [H]
        for i in range(1, self.config.n_hidden_layers + 1):
            H = np.maximum(H @ params['W%d' % i] + params['b%d' % i], 0.0)
            activations.append(H)
        logits = (H @ params['W_out'] + params['b_out'])[:, 0]
        return logits, activations

    def head_backward(self, params, activations, dlogits):
        "Gradients of the head and of the loss with respect to its input"
        grads = OrderedDict()
        d = dlogits[:, None]
        grads['W_out'] = activations[-1].T @ d
        grads['b_out'] = d.sum(axis=0)
        dH = d @ params['W_out'].T
        for i in range(self.config.n_hidden_layers, 0, -1):
            dA = dH * (activations[i] > 0)
            grads['W%d' % i] = activations[i - 1].T @ dA
            grads['b%d' % i] = dA.sum(axis=0)
            dH = dA @ params['W%d' % i].T
        return grads, dH

    def init_params(self, rng):
        return self.init_head(rng, self.n_inputs())

    def forward(self, params, X):
        return self.head_forward(params, X)

    def backward(self, params, cache, dlogits):
        grads, _ = self.head_backward(params, cache, dlogits)
        return OrderedDict((k, grads[k]) for k in params)


__all__ = ['FeedforwardClassifier']
