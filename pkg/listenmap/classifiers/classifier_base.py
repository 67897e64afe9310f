import io
import json
from collections import OrderedDict
from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional

from scipy.special import log_expit
from tqdm import tqdm

import listenmap
from listenmap import functions
from listenmap.data import parameter_data
from listenmap.records import DataError

np = listenmap.np
logger = listenmap.logger.getChild('classifiers')


class ModelKind(Enum):
    Random = 'random'
    LogisticRegression = 'logistic_regression'
    FeedforwardNN = 'feedforward_nn'
    LSTM = 'lstm'

    @property
    def sequential(self):
        "True if the model reads (n, weeks, F) sequences instead of flat rows"
        return self is ModelKind.LSTM

    @property
    def trainable(self):
        return self is not ModelKind.Random


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 50
    batch_size: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    l2_penalty: float = 0.0
    early_stop_patience: Optional[int] = None
    validation_fraction: float = 0.1
    positive_class_weight: Optional[float] = None
    hidden_units: int = 128
    n_hidden_layers: int = 3
    lstm_units: int = 128

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError('epochs must be >= 0')
        if self.learning_rate <= 0:
            raise ValueError('learning_rate must be > 0')
        if self.batch_size < 1:
            raise ValueError('batch_size must be >= 1')
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or self.epsilon <= 0:
            raise ValueError('Adam needs 0 <= beta1, beta2 < 1 and epsilon > 0')
        if self.l2_penalty < 0:
            raise ValueError('l2_penalty must be >= 0')
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError('early_stop_patience must be >= 1 or null')
        if not 0 <= self.validation_fraction < 1:
            raise ValueError('validation_fraction must lie in [0, 1)')
        if self.positive_class_weight is not None and self.positive_class_weight <= 0:
            raise ValueError('positive_class_weight must be > 0')
        if self.hidden_units < 1 or self.n_hidden_layers < 0 or self.lstm_units < 1:
            raise ValueError('layer sizes must be positive')

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class ModelArtifact:
    """A trained classifier: kind, named parameter arrays in manifest order,
    standardization statistics, training config and provenance.

    save(prefix) writes <prefix>.json (manifest) and <prefix>.bin, the
    parameters as little-endian float64, concatenated in manifest order,
    each in C order.
    """
    def __init__(self, kind, params, input_shape, train_config, feature_set=(),
                 target=None, stats=None, history=()):
        self.kind = ModelKind(kind)
        self.params = OrderedDict((k, np.asarray(v, dtype=float)) for k, v in params.items())
        self.input_shape = tuple(int(d) for d in input_shape)
        self.train_config = train_config
        self.feature_set = tuple(feature_set)
        self.target = target
        self.stats = stats
        self.history = [float(x) for x in history]

    @property
    def seed(self):
        return self.train_config.seed

    @property
    def shapes(self):
        return [(name, list(p.shape)) for name, p in self.params.items()]

    @property
    def weights(self):
        "All parameters as one flat vector in manifest order"
        if not self.params:
            return np.zeros(0)
        return np.concatenate([p.ravel(order='C') for p in self.params.values()])

    def manifest(self):
        return {'kind': self.kind.value,
                'target': self.target,
                'feature_set': list(self.feature_set),
                'input_shape': list(self.input_shape),
                'parameters': [{'name': n, 'shape': s} for n, s in self.shapes],
                'n_weights': int(self.weights.size),
                'byte_order': 'little',
                'dtype': 'float64',
                'seed': self.seed,
                'train_config': self.train_config.to_dict(),
                'standardization': self.stats.to_dict() if self.stats is not None else None,
                'history': self.history}

    def save(self, prefix):
        with io.open(prefix + '.json', 'w', encoding='utf-8', newline='\n') as f:
            f.write(json.dumps(self.manifest(), indent=2, sort_keys=True) + '\n')
        with io.open(prefix + '.bin', 'wb') as f:
            f.write(self.weights.astype('<f8').tobytes(order='C'))
        return prefix

    @classmethod
    def load(cls, prefix):
        from listenmap.featurizers.featurizer_base import StandardizationStats
        with io.open(prefix + '.json', 'r', encoding='utf-8') as f:
            manifest = json.load(f)
        with io.open(prefix + '.bin', 'rb') as f:
            blob = np.frombuffer(f.read(), dtype='<f8').astype(float)
        sizes = [int(np.prod(p['shape'], dtype=int)) for p in manifest['parameters']]
        if sum(sizes) != blob.size or blob.size != manifest['n_weights']:
            raise DataError('artifact %s holds %d weights but its manifest lists %d'
                            % (prefix, blob.size, sum(sizes)))
        params = OrderedDict()
        offset = 0
        for p, size in zip(manifest['parameters'], sizes):
            params[p['name']] = blob[offset:offset + size].reshape(p['shape'])
            offset += size
        stats = manifest.get('standardization')
        return cls(manifest['kind'], params, manifest['input_shape'],
                   TrainConfig(**manifest['train_config']), manifest['feature_set'],
                   manifest['target'], StandardizationStats.from_dict(stats) if stats else None,
                   manifest.get('history', ()))


def init_dense(rng, fan_in, fan_out, gain=6.0):
    "Uniform in +-sqrt(gain / fan_in); gain 6 suits ReLU layers, 1 the output layer"
    limit = np.sqrt(gain / fan_in)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def binary_cross_entropy(logits, y, sample_weight=None):
    """
    Mean (weighted) log-loss of clamped logits and its gradient with respect
    to the logits. The gradient is zero where the clamp is active.
    """
    limit = parameter_data.logit_clamp
    z = functions.clamp_logits(logits, limit)
    losses = -(y * log_expit(z) + (1 - y) * log_expit(-z))
    dz = functions.sigmoid(z, limit) - y
    if sample_weight is not None:
        losses = losses * sample_weight
        dz = dz * sample_weight
    dz = dz * ((logits > -limit) & (logits < limit))
    n = max(len(y), 1)
    return float(losses.sum() / n), dz / n


class ClassifierBase:
    """Shared training loop for the gradient-trained classifiers.

    A functional derived classifier class must contain the methods:

    init_params(rng): return an OrderedDict of named parameter arrays.
    forward(params, X): return (logits, cache).
    backward(params, cache, dlogits): return the gradients, keyed like params.

    Derived classes set kind and penalized (the parameter names the l2
    penalty applies to).
    """
    kind = None
    penalized = ()

    def __init__(self, config=None, input_shape=None, show_progress=False):
        self.config = config or TrainConfig()
        self.input_shape = tuple(input_shape) if input_shape is not None else None
        self.show_progress = show_progress

    #Input handling

    def prepare(self, X):
        "Check features and bring them to the shape this model reads"
        X = np.asarray(X, dtype=float)
        if not np.all(np.isfinite(X)):
            raise DataError('features contain NaN or Inf')
        if self.kind.sequential:
            if X.ndim != 3:
                raise DataError('%s expects (n, weeks, features) input, got shape %s'
                                % (self.kind.value, X.shape))
        elif X.ndim == 3:
            X = X.reshape(len(X), -1)
        elif X.ndim != 2:
            raise DataError('%s expects (n, features) input, got shape %s'
                            % (self.kind.value, X.shape))
        if self.input_shape is None:
            self.input_shape = X.shape[1:]
        elif X.shape[1:] != self.input_shape:
            raise DataError('%s expects input shape %s, got %s'
                            % (self.kind.value, self.input_shape, X.shape[1:]))
        return X

    @staticmethod
    def prepare_labels(y, n):
        y = np.asarray(y, dtype=float).ravel()
        if y.shape != (n,):
            raise DataError('expected %d labels, got %d' % (n, y.size))
        if not np.all((y == 0) | (y == 1)):
            raise DataError('labels must be 0 or 1')
        return y

    #Loss and gradient

    def sample_weight(self, y):
        if self.config.positive_class_weight is None:
            return None
        return np.where(y == 1, self.config.positive_class_weight, 1.0)

    def loss(self, params, X, y):
        logits, _ = self.forward(params, X)
        value, _ = binary_cross_entropy(logits, y, self.sample_weight(y))
        return value + self.penalty(params)

    def penalty(self, params):
        if not self.config.l2_penalty:
            return 0.0
        return 0.5 * self.config.l2_penalty * sum(float(np.sum(params[k] ** 2))
                                                  for k in self.penalized)

    def loss_and_grad(self, params, X, y):
        logits, cache = self.forward(params, X)
        value, dlogits = binary_cross_entropy(logits, y, self.sample_weight(y))
        grads = self.backward(params, cache, dlogits)
        if self.config.l2_penalty:
            for k in self.penalized:
                grads[k] = grads[k] + self.config.l2_penalty * params[k]
        return value + self.penalty(params), grads

    #Flat parameter views (gradient checks)

    @staticmethod
    def flatten(params):
        return np.concatenate([p.ravel() for p in params.values()])

    @staticmethod
    def unflatten(vector, like):
        params = OrderedDict()
        offset = 0
        for name, p in like.items():
            params[name] = np.asarray(vector[offset:offset + p.size]).reshape(p.shape)
            offset += p.size
        return params

    #Training

    def fit(self, X, y, target=None, feature_set=(), stats=None):
        """
        Train with mini-batch Adam and return a ModelArtifact.

        Rows are reshuffled every epoch by a generator seeded from the
        config. With early_stop_patience set, a seeded validation_fraction of
        the rows is held out and the parameters with the lowest held-out
        loss are kept.
        """
        X = self.prepare(X)
        y = self.prepare_labels(y, len(X))
        if len(X) == 0:
            raise DataError('cannot train on zero windows')
        cfg = self.config
        params = self.init_params(functions.substream(cfg.seed, 'init'))
        shuffle_rng = functions.substream(cfg.seed, 'shuffle')

        X_val = y_val = None
        if cfg.early_stop_patience is not None and cfg.validation_fraction > 0:
            order = functions.substream(cfg.seed, 'validation').permutation(len(X))
            n_val = functions.round_half_up(cfg.validation_fraction * len(X))
            if 0 < n_val < len(X):
                val, fit_rows = np.sort(order[:n_val]), np.sort(order[n_val:])
                X_val, y_val = X[val], y[val]
                X, y = X[fit_rows], y[fit_rows]

        m = OrderedDict((k, np.zeros_like(v)) for k, v in params.items())
        v = OrderedDict((k, np.zeros_like(p)) for k, p in params.items())
        step = 0
        history = []
        best_loss, best_params, stale = np.inf, params, 0
        epochs = tqdm(range(cfg.epochs), desc=self.kind.value, leave=False,
                      disable=not self.show_progress)
        for epoch in epochs:
            order = shuffle_rng.permutation(len(X))
            epoch_loss = 0.0
            for start in range(0, len(X), cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                value, grads = self.loss_and_grad(params, X[batch], y[batch])
                epoch_loss += value * len(batch)
                step += 1
                for k in params:
                    m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * grads[k]
                    v[k] = cfg.beta2 * v[k] + (1 - cfg.beta2) * grads[k] ** 2
                    m_hat = m[k] / (1 - cfg.beta1 ** step)
                    v_hat = v[k] / (1 - cfg.beta2 ** step)
                    params[k] = params[k] - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
            history.append(epoch_loss / len(X))
            epochs.set_postfix(loss='%.4f' % history[-1])

            if X_val is not None:
                val_loss = self.loss(params, X_val, y_val)
                if val_loss < best_loss:
                    best_loss, best_params, stale = val_loss, OrderedDict(params), 0
                else:
                    stale += 1
                    if stale >= cfg.early_stop_patience:
                        logger.debug('%s: early stop after epoch %d', self.kind.value, epoch + 1)
                        params = best_params
                        break
        if X_val is not None and best_params is not params and np.isfinite(best_loss):
            params = best_params
        return ModelArtifact(self.kind, params, self.input_shape, cfg, feature_set,
                             target, stats, history)

    #Scoring

    def score(self, artifact, X):
        "Scores strictly inside (0, 1) for the rows of X"
        X = self.prepare(X)
        logits, _ = self.forward(artifact.params, X)
        return functions.sigmoid(logits)


def numerical_gradient(classifier, X, y, params, h=1e-5):
    """
    Central finite-difference gradient of the classifier loss with respect
    to every parameter, flattened in parameter order.

    :param classifier: Classifier whose loss is differentiated.
    :type classifier: ClassifierBase

    :param params: Point at which to differentiate.
    :type params: OrderedDict
    """
    X = classifier.prepare(X)
    y = classifier.prepare_labels(y, len(X))

    def f(vector):
        return classifier.loss(classifier.unflatten(vector, params), X, y)

    return functions.numerical_gradient(f, classifier.flatten(params), h)


def gradient_check(classifier, X, y, params=None, h=1e-5, seed=0):
    """
    Max relative error between analytic and finite-difference gradients.

    Parameters default to a fresh initialization from the given seed.
    """
    X = classifier.prepare(X)
    y = classifier.prepare_labels(y, len(X))
    if params is None:
        params = classifier.init_params(functions.substream(seed, 'gradient_check'))
    _, grads = classifier.loss_and_grad(params, X, y)
    analytic = classifier.flatten(grads)
    numeric = numerical_gradient(classifier, X, y, params, h)
    return functions.max_relative_error(analytic, numeric)


__all__ = ['ModelKind', 'TrainConfig', 'ModelArtifact', 'ClassifierBase',
           'init_dense', 'binary_cross_entropy', 'numerical_gradient',
           'gradient_check']
