from collections import OrderedDict

from listenmap import functions
from .classifier_base import *


def score_random(n, seed):
    "n scores uniform in [0, 1), the same for the same seed"
    return functions.substream(seed, 'random_scores').random(n)


class RandomClassifier(ClassifierBase):
    """Baseline without parameters: scores are drawn from the seeded
    stream, independent of the features."""
    kind = ModelKind.Random

    def fit(self, X, y, target=None, feature_set=(), stats=None):
        X = self.prepare(X)
        self.prepare_labels(y, len(X))
        return ModelArtifact(self.kind, OrderedDict(), self.input_shape, self.config,
                             feature_set, target, stats)

    def score(self, artifact, X):
        X = self.prepare(X)
        return score_random(len(X), artifact.seed)


__all__ = ['RandomClassifier', 'score_random']
