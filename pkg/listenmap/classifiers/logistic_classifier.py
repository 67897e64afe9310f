from collections import OrderedDict

from .classifier_base import *
from .classifier_base import np


class LogisticClassifier(ClassifierBase):
    """Logistic regression on the flattened window."""
    kind = ModelKind.LogisticRegression
    penalized = ('W',)

    def init_params(self, rng):
        n_in = int(np.prod(self.input_shape))
        return OrderedDict([('W', init_dense(rng, n_in, 1, gain=1.0)),
                            ('b', np.zeros(1))])

    def forward(self, params, X):
        return (X @ params['W'] + params['b'])[:, 0], X

    def backward(self, params, cache, dlogits):
        X = cache
        d = dlogits[:, None]
        return OrderedDict([('W', X.T @ d), ('b', d.sum(axis=0))])


__all__ = ['LogisticClassifier']
