"""Probabilistic predictors over discretized outputs.

Selection treats a model as a black box: anything that maps a feature
vector to a categorical distribution over output bins plugs in.  The
built-ins cover the cases the test harness needs: a label-frequency
histogram, a nearest-centroid soft classifier, a likelihood classifier
that backs off to uniform far from the data, a fixed-means oracle, and
a uniform dummy.

A predictor that has never been fit predicts the uniform distribution,
which lets the harness bootstrap its first iteration before any
retraining event has happened.
"""
from abc import ABC, abstractmethod

import numpy as np

from .errors import EmptyTrainingSet, PredictorDimensionMismatch
from .samples import Sample

__all__ = [
    "Predictor",
    "HistogramPredictor",
    "CentroidPredictor",
    "LikelihoodPredictor",
    "OraclePredictor",
    "UniformPredictor",
    "logscore",
    "with_losses",
]

LOGSCORE_FLOOR = 1e-12


def logscore(prediction, output_bin: int) -> float:
    """Log-score of a prediction in bits: ``log2 p(output_bin)``.

    Probabilities are floored at ``1e-12`` so a confident miss costs a
    large but finite penalty (about -39.86 bits) instead of -inf.
    """
    prediction = np.asarray(prediction, dtype=float)
    return float(np.log2(max(prediction[output_bin], LOGSCORE_FLOOR)))


class Predictor(ABC):
    """Interface between selection and whatever model serves predictions."""

    n_bins: int

    @abstractmethod
    def fit(self, samples: list[Sample]) -> "Predictor":
        """Return a new predictor trained on ``samples``."""

    @abstractmethod
    def predict(self, features: np.ndarray) -> np.ndarray:
        """Distribution over the ``n_bins`` output bins for one input."""

    def predict_many(self, features: np.ndarray) -> np.ndarray:
        """Row-wise :meth:`predict`; overridden where vectorization pays."""
        return np.stack([self.predict(f) for f in features])

    def loss(self, sample: Sample) -> float:
        """Negative log-score of the sample's true bin, in bits."""
        return -logscore(self.predict(sample.features), sample.output_bin)

    def _uniform(self) -> np.ndarray:
        return np.full(self.n_bins, 1.0 / self.n_bins)


class UniformPredictor(Predictor):
    """Predicts the uniform distribution regardless of input."""

    def __init__(self, n_bins: int):
        self.n_bins = n_bins

    def fit(self, samples):
        return self

    def predict(self, features):
        return self._uniform()

    def predict_many(self, features):
        return np.full((len(features), self.n_bins), 1.0 / self.n_bins)


class HistogramPredictor(Predictor):
    """Ignores features, predicts add-one smoothed label frequencies.

    With counts ``c_k`` over ``n`` training samples the prediction is
    ``(c_k + 1) / (n + n_bins)`` for every input, so no bin is ever
    assigned zero mass.
    """

    def __init__(self, n_bins: int, frequencies: np.ndarray | None = None):
        self.n_bins = n_bins
        self._frequencies = frequencies

    def fit(self, samples):
        if not samples:
            raise EmptyTrainingSet("histogram predictor needs at least one sample")
        counts = np.bincount(
            [s.output_bin for s in samples], minlength=self.n_bins
        ).astype(float)
        return HistogramPredictor(self.n_bins, (counts + 1.0) / (counts.sum() + self.n_bins))

    def predict(self, features):
        if self._frequencies is None:
            return self._uniform()
        return self._frequencies.copy()

    def predict_many(self, features):
        return np.tile(self.predict(None), (len(features), 1))


def _class_means(samples: list[Sample], n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean feature vector per output bin plus a seen-bin mask."""
    if not samples:
        raise EmptyTrainingSet("predictor needs at least one training sample")
    dim = samples[0].features.shape[0]
    sums = np.zeros((n_bins, dim))
    counts = np.zeros(n_bins)
    for s in samples:
        if s.features.shape[0] != dim:
            raise PredictorDimensionMismatch(
                f"feature dim {s.features.shape[0]} != {dim} within one training set"
            )
        sums[s.output_bin] += s.features
        counts[s.output_bin] += 1
    seen = counts > 0
    means = np.zeros_like(sums)
    means[seen] = sums[seen] / counts[seen, None]
    return means, seen


def _squared_distances(features: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, rows of ``features`` x ``centers``."""
    sq = (
        (features * features).sum(axis=1)[:, None]
        - 2.0 * features @ centers.T
        + (centers * centers).sum(axis=1)[None, :]
    )
    return np.maximum(sq, 0.0)


class CentroidPredictor(Predictor):
    """Soft nearest-centroid classifier.

    Stores the mean feature vector of every label seen during training
    and predicts ``softmax(-d_k^2 / softness)`` over those labels, where
    ``d_k`` is the distance to centroid ``k``.  Bins absent from the
    training set get zero mass and the rest is renormalized.
    """

    def __init__(self, n_bins: int, softness: float = 1.0,
                 centroids: np.ndarray | None = None,
                 seen: np.ndarray | None = None):
        if softness <= 0:
            raise ValueError(f"softness must be positive, got {softness}")
        self.n_bins = n_bins
        self.softness = softness
        self._centroids = centroids  # (n_bins, n_features), rows for unseen bins unused
        self._seen = seen            # boolean mask of trained bins

    def fit(self, samples):
        if not samples:
            raise EmptyTrainingSet("centroid predictor needs at least one sample")
        centroids, seen = _class_means(samples, self.n_bins)
        return CentroidPredictor(self.n_bins, self.softness, centroids, seen)

    def predict(self, features):
        return self.predict_many(np.asarray(features, dtype=float)[None, :])[0]

    def predict_many(self, features):
        features = np.asarray(features, dtype=float)
        if self._centroids is None:
            return np.full((len(features), self.n_bins), 1.0 / self.n_bins)
        if features.shape[1] != self._centroids.shape[1]:
            raise PredictorDimensionMismatch(
                f"got {features.shape[1]}-dim features, centroids are "
                f"{self._centroids.shape[1]}-dim"
            )
        logits = -_squared_distances(features, self._centroids[self._seen]) / self.softness
        logits -= logits.max(axis=1, keepdims=True)
        weights = np.exp(logits)
        weights /= weights.sum(axis=1, keepdims=True)
        out = np.zeros((len(features), self.n_bins))
        out[:, self._seen] = weights
        return out


class LikelihoodPredictor(Predictor):
    """Gaussian-likelihood classifier with a uniform background floor.

    Like :class:`CentroidPredictor` it stores per-label mean feature
    vectors, but it scores a query by the unnormalized likelihood
    ``exp(-d_k^2 / (2 scale^2))`` and adds a constant ``background``
    mass to every bin before normalizing.  Near a class mean the
    likelihood dwarfs the floor and predictions are sharp; far from all
    means the floor dominates and the prediction approaches uniform over
    all bins, unseen ones included.

    The softmax form cares only about distance differences, so it stays
    confident arbitrarily far from the training data.  This form instead
    reports ignorance off the training manifold, which is usually the
    honest answer for junk inputs.
    """

    def __init__(self, n_bins: int, scale: float = 1.0, background: float = 1e-12,
                 centroids: np.ndarray | None = None,
                 seen: np.ndarray | None = None):
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        if background <= 0:
            raise ValueError(f"background must be positive, got {background}")
        self.n_bins = n_bins
        self.scale = scale
        self.background = background
        self._centroids = centroids
        self._seen = seen

    def fit(self, samples):
        if not samples:
            raise EmptyTrainingSet("likelihood predictor needs at least one sample")
        centroids, seen = _class_means(samples, self.n_bins)
        return LikelihoodPredictor(
            self.n_bins, self.scale, self.background, centroids, seen
        )

    def predict(self, features):
        return self.predict_many(np.asarray(features, dtype=float)[None, :])[0]

    def predict_many(self, features):
        features = np.asarray(features, dtype=float)
        if self._centroids is None:
            return np.full((len(features), self.n_bins), 1.0 / self.n_bins)
        if features.shape[1] != self._centroids.shape[1]:
            raise PredictorDimensionMismatch(
                f"got {features.shape[1]}-dim features, centroids are "
                f"{self._centroids.shape[1]}-dim"
            )
        sq = _squared_distances(features, self._centroids[self._seen])
        # Likelihoods underflow to zero a few hundred scale lengths out;
        # the background floor keeps every row a valid distribution.
        with np.errstate(under="ignore"):
            scores = np.exp(-sq / (2.0 * self.scale * self.scale))
        out = np.full((len(features), self.n_bins), self.background)
        out[:, self._seen] += scores
        out /= out.sum(axis=1, keepdims=True)
        return out


class OraclePredictor(Predictor):
    """Point mass on the class whose configured mean is nearest.

    Built from the generator's own class means, so on well-separated
    synthetic workloads its mode is the true bin for essentially every
    sample.  ``fit`` is a no-op: there is nothing left to learn.
    """

    def __init__(self, class_means: np.ndarray, n_bins: int | None = None):
        self.class_means = np.asarray(class_means, dtype=float)
        if self.class_means.ndim != 2 or self.class_means.shape[0] == 0:
            raise ValueError(
                f"class_means must be (n_classes, n_features), got {self.class_means.shape}"
            )
        self.n_bins = n_bins if n_bins is not None else self.class_means.shape[0]
        if self.n_bins < self.class_means.shape[0]:
            raise ValueError("n_bins smaller than the number of class means")

    def fit(self, samples):
        return self

    def predict(self, features):
        return self.predict_many(np.asarray(features, dtype=float)[None, :])[0]

    def predict_many(self, features):
        features = np.asarray(features, dtype=float)
        if features.shape[1] != self.class_means.shape[1]:
            raise PredictorDimensionMismatch(
                f"got {features.shape[1]}-dim features, means are "
                f"{self.class_means.shape[1]}-dim"
            )
        sq = (
            (features * features).sum(axis=1)[:, None]
            - 2.0 * features @ self.class_means.T
            + (self.class_means * self.class_means).sum(axis=1)[None, :]
        )
        out = np.zeros((len(features), self.n_bins))
        out[np.arange(len(features)), sq.argmin(axis=1)] = 1.0
        return out


def with_losses(samples: list[Sample], predictor: Predictor) -> list[Sample]:
    """Score every sample's loss under ``predictor`` in one pass."""
    if not samples:
        return []
    predictions = predictor.predict_many(np.stack([s.features for s in samples]))
    bins = np.array([s.output_bin for s in samples])
    picked = predictions[np.arange(len(samples)), bins]
    losses = -np.log2(np.maximum(picked, LOGSCORE_FLOOR))
    return [s.with_loss(float(l)) for s, l in zip(samples, losses)]
