from .classifier_base import *
from .random_classifier import *
from .logistic_classifier import *
from .feedforward_classifier import *
from .lstm_classifier import *
from listenmap.records import DataError

classifier_classes = {ModelKind.Random: RandomClassifier,
                      ModelKind.LogisticRegression: LogisticClassifier,
                      ModelKind.FeedforwardNN: FeedforwardClassifier,
                      ModelKind.LSTM: LSTMClassifier}


def get_classifier(kind, config=None, input_shape=None, show_progress=False):
    "Untrained classifier of the given kind"
    return classifier_classes[ModelKind(kind)](config, input_shape, show_progress)


def score(artifact, X, feature_set=None):
    """
    Scores in (0, 1) of a trained artifact for the rows of X.

    X is a window array or a Dataset. X is flattened for the non-sequential
    kinds; the shape must match the one the artifact was trained on, and the
    feature set (taken from a Dataset, or given) must be the artifact's.
    """
    if hasattr(X, 'spec'):
        feature_set = X.spec.feature_set
        X = X.features(not artifact.kind.sequential)
    if feature_set is not None and tuple(feature_set) != artifact.feature_set:
        raise DataError('artifact was trained on feature set %s, not %s'
                        % ('+'.join(artifact.feature_set), '+'.join(feature_set)))
    classifier = get_classifier(artifact.kind, artifact.train_config, artifact.input_shape)
    return classifier.score(artifact, X)
