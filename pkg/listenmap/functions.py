import hashlib
import json
import math

import numpy as np
from scipy.special import expit

from listenmap.data import parameter_data


def canonical_json(value):
    "Deterministic JSON text for hashing and manifests"
    return json.dumps(value, sort_keys=True, ensure_ascii=True, separators=(',', ':'))


def config_hash(value):
    """
    SHA-256 hex digest of the canonical JSON form of a configuration.

    :param value: JSON-serialisable configuration.

    :type value: dict
    """
    return hashlib.sha256(canonical_json(value).encode('utf-8')).hexdigest()


def label_key(label):
    "Map a seed label (int or str) onto a 32-bit spawn key"
    if isinstance(label, (int, np.integer)):
        return int(label)
    digest = hashlib.sha256(str(label).encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def seed_sequence(seed, *labels):
    """
    SeedSequence for the sub-stream named by labels under a global seed.

    Every random stream in the package is derived this way: entropy is the
    global seed and spawn_key is the tuple of label keys, so streams never
    depend on how many draws another stream made.

    :param seed: Global 64-bit seed.

    :type seed: int

    :param labels: Stage names and ordinals identifying the stream.

    :type labels: str or int
    """
    return np.random.SeedSequence(entropy=int(seed),
                                  spawn_key=tuple(label_key(l) for l in labels))


def substream(seed, *labels):
    "PCG64 generator for the named sub-stream"
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *labels)))


def derive_seed(seed, *labels):
    "64-bit integer seed for the named sub-stream"
    state = seed_sequence(seed, *labels).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def modal_index(values, n_values=None):
    """
    Most frequent non-negative integer in values, ties broken toward the
    smaller value. Returns None for an empty input.

    :param values: Observed indices (None entries are ignored).

    :type values: iterable

    :param n_values: Optional number of admissible values.

    :type n_values: int, optional
    """
    observed = [int(v) for v in values if v is not None]
    if not observed:
        return None
    counts = np.bincount(observed, minlength=n_values or 0)
    return int(np.argmax(counts))


def largest_remainder(total, weights):
    """
    Split an integer total proportionally to weights so that the parts sum
    exactly to total (largest remainder method, ties to the earlier entry).

    :param total: Integer to split.

    :type total: int

    :param weights: Non-negative weights.

    :type weights: list
    """
    weights = np.asarray(weights, dtype=float)
    if total < 0 or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError('Cannot split %r by weights %r' % (total, list(weights)))
    exact = total * weights / weights.sum()
    parts = np.floor(exact).astype(int)
    remainder = exact - parts
    order = np.argsort(-remainder, kind='stable')
    for idx in order[:total - parts.sum()]:
        parts[idx] += 1
    return [int(p) for p in parts]


def round_half_up(x):
    return int(math.floor(x + 0.5))


def clamp_logits(z, limit=parameter_data.logit_clamp):
    return np.clip(z, -limit, limit)


def sigmoid(z, limit=parameter_data.logit_clamp):
    "Sigmoid of clamped logits; always strictly inside (0, 1)"
    return expit(clamp_logits(z, limit))


def numerical_gradient(f, x, h=1e-5):
    """
    Central finite-difference gradient of a scalar function.

    :param f: Function of a flat parameter vector returning a float.

    :type f: callable

    :param x: Point at which to differentiate.

    :type x: numpy.ndarray

    :param h: Step size.

    :type h: float, optional
    """
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        grad[j] = (f(xp) - f(xm)) / (2 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-6):
    "max |a - n| / max(|a| + |n|, floor)"
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
