"""Core data model: samples, batches, the replay memory, and record I/O.

Categorical distributions are plain 1-D ``numpy`` arrays that sum to one.
No wrapper class is used; :func:`validate_distribution` checks the
contract where one is needed.
"""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BinOutOfRange,
    EmptyInput,
    LengthMismatch,
    NegativeProbability,
    NonNormalizedPrediction,
)

__all__ = [
    "Sample",
    "Batch",
    "ReplayMemory",
    "StrategyConfig",
    "mixture",
    "validate_distribution",
    "validate_sample",
    "read_samples",
    "write_samples",
]

_NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, slots=True, eq=False)
class Sample:
    """One observed instance flowing through the stream.

    Attributes
    ----------
    features : ndarray
        Raw feature vector, shape ``(n_features,)``.
    output_bin : int
        Discretized true output, in ``[0, k_out)``.
    prediction : ndarray
        Probabilistic model output over prediction bins.  Overwritten at
        ingestion by the current model (see ``batching.bbdr``).
    arrival_index : int
        Position in the stream; unique, monotone, and used as the sample
        identifier everywhere else.
    raw_output : float
        Continuous output before binning.  Equals ``float(output_bin)``
        for plain classification streams.
    loss : float or None
        Model loss, filled by a predictor pass; ``None`` until then.
    stalled : bool
        Degraded-experience flag used by one of the scalar baselines.
    workload : int
        Generator class the sample was drawn from, ``-1`` when unknown.
        Evaluation bookkeeping only; selection never reads it.
    noise : bool
        True for injected corruption.  Same rule: invisible to selection.
    """

    features: np.ndarray
    output_bin: int
    prediction: np.ndarray
    arrival_index: int
    raw_output: float = float("nan")
    loss: float | None = None
    stalled: bool = False
    workload: int = -1
    noise: bool = False

    def with_prediction(self, prediction: np.ndarray) -> "Sample":
        return replace(self, prediction=prediction)

    def with_loss(self, loss: float) -> "Sample":
        return replace(self, loss=loss)


@dataclass(eq=False)
class Batch:
    """A group of samples summarised by two categorical distributions.

    ``pred_dist`` is the mixture of member predictions, ``out_dist`` the
    normalized histogram of member output bins.  ``density_pred`` and
    ``density_out`` are filled in by the selection loop; they start as
    NaN and are bookkeeping, not part of the batch identity.
    """

    sample_ids: np.ndarray
    pred_dist: np.ndarray
    out_dist: np.ndarray
    mean_features: np.ndarray
    density_pred: float = float("nan")
    density_out: float = float("nan")

    @property
    def size(self) -> int:
        return int(self.sample_ids.shape[0])


@dataclass(eq=False)
class ReplayMemory:
    """Bounded sample store a selection strategy maintains.

    ``batches`` is the batch view produced by the most recent selection
    pass; per-sample strategies rebuild it for bookkeeping.  The batches
    recorded at the last retraining event keep their distributions even
    after later discards drop some of their members, which is exactly
    what the coverage comparison needs.
    """

    capacity: int
    batches: list[Batch] = field(default_factory=list)
    samples: dict[int, Sample] = field(default_factory=dict)
    last_train_batches: list[Batch] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    def sorted_samples(self) -> list[Sample]:
        """Members in arrival order, the canonical pool ordering."""
        return sorted(self.samples.values(), key=lambda s: s.arrival_index)

    def replace_contents(self, batches: list[Batch], samples: list[Sample]) -> None:
        if sum(b.size for b in batches) != len(samples):
            raise LengthMismatch(
                f"batches cover {sum(b.size for b in batches)} samples, "
                f"store would hold {len(samples)}"
            )
        self.batches = batches
        self.samples = {s.arrival_index: s for s in samples}

    def class_counts(self, n_classes: int, by: str = "workload") -> np.ndarray:
        """Histogram of members over ``workload`` tags or ``output_bin``."""
        counts = np.zeros(n_classes, dtype=np.int64)
        for s in self.samples.values():
            label = s.workload if by == "workload" else s.output_bin
            if 0 <= label < n_classes:
                counts[label] += 1
        return counts

    def noise_fraction(self) -> float:
        if not self.samples:
            return 0.0
        flagged = sum(1 for s in self.samples.values() if s.noise)
        return flagged / len(self.samples)


@dataclass(frozen=True)
class StrategyConfig:
    """Knobs shared by every selection strategy.

    Defaults follow the operating point used throughout: bandwidth 0.1,
    temperature 0.01, retraining threshold 0.1.  Capacity and batch size
    are deployment-scale choices and have no safe default.
    """

    capacity: int
    batch_size: int
    bandwidth: float = 0.1
    temperature: float = 0.01
    threshold: float = 0.1
    seed: int = 0
    k_pred: int = 21
    k_out: int = 21

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if self.batch_size <= 0:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.batch_size > self.capacity:
            raise ValueError(
                f"batch_size {self.batch_size} exceeds capacity {self.capacity}; "
                "whole-batch discards could never terminate"
            )
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be nonnegative, got {self.temperature}")
        if not 0 <= self.threshold <= 1:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.k_pred <= 0 or self.k_out <= 0:
            raise ValueError(
                f"bin counts must be positive, got k_pred={self.k_pred} k_out={self.k_out}"
            )


# Distribution helpers ----------------------------------------------------


def validate_distribution(probs: np.ndarray, size: int | None = None) -> np.ndarray:
    """Check that ``probs`` is a categorical distribution.

    Parameters
    ----------
    probs : array_like
        Candidate probability vector.
    size : int, optional
        Required number of bins.

    Returns
    -------
    ndarray
        The validated vector as a float array.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise EmptyInput(f"expected a nonempty 1-D probability vector, got shape {probs.shape}")
    if size is not None and probs.size != size:
        raise LengthMismatch(f"expected {size} bins, got {probs.size}")
    if np.any(probs < 0):
        raise NegativeProbability(f"negative probability entries: min is {probs.min()}")
    total = probs.sum()
    if abs(total - 1.0) > _NORMALIZATION_TOL:
        raise NonNormalizedPrediction(f"probabilities sum to {total!r}, expected 1 within 1e-9")
    return probs


def validate_sample(sample: Sample, k_pred: int, k_out: int) -> Sample:
    """Raise if ``sample`` violates the data-model contract, else return it."""
    validate_distribution(sample.prediction, k_pred)
    if not 0 <= sample.output_bin < k_out:
        raise BinOutOfRange(
            f"output_bin {sample.output_bin} outside [0, {k_out}) "
            f"for sample {sample.arrival_index}"
        )
    return sample


def mixture(predictions) -> np.ndarray:
    """Average a collection of categorical distributions.

    The mean of normalized vectors is normalized, so the result is a
    valid distribution whenever the inputs are.

    Parameters
    ----------
    predictions : sequence of ndarray
        Distributions of identical length.

    Returns
    -------
    ndarray
        Elementwise mean.
    """
    rows = [np.asarray(p, dtype=float) for p in predictions]
    if not rows:
        raise EmptyInput("mixture of zero distributions is undefined")
    length = rows[0].size
    if any(r.size != length for r in rows):
        raise LengthMismatch(f"distribution lengths differ: {sorted({r.size for r in rows})}")
    return np.mean(rows, axis=0)


# Sample records ----------------------------------------------------------
#
# One JSON object per line.  Fixed fields: features, output_bin,
# raw_output, prediction, stalled.  Extra fields (loss, workload, noise)
# are written only when informative and ignored by readers that do not
# know them; arrival_index is the line number, never serialized.


def write_samples(path, samples) -> None:
    """Write samples as newline-delimited records, one per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            record = {
                "features": [float(v) for v in s.features],
                "output_bin": int(s.output_bin),
                "raw_output": float(s.raw_output),
                "prediction": [float(v) for v in s.prediction],
                "stalled": int(s.stalled),
            }
            if s.loss is not None:
                record["loss"] = float(s.loss)
            if s.workload >= 0:
                record["workload"] = int(s.workload)
            if s.noise:
                record["noise"] = 1
            fh.write(json.dumps(record) + "\n")


def read_samples(path, k_pred: int | None = None, k_out: int | None = None) -> list[Sample]:
    """Parse a sample-record file back into :class:`Sample` objects.

    Arrival indices are assigned from line order.  Unknown fields are
    ignored; a missing mandatory field raises ``ValueError`` naming the
    offending line.  When ``k_pred``/``k_out`` are given each record is
    validated on the way in.
    """
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                sample = Sample(
                    features=np.asarray(record["features"], dtype=float),
                    output_bin=int(record["output_bin"]),
                    prediction=np.asarray(record["prediction"], dtype=float),
                    arrival_index=len(out),
                    raw_output=float(record["raw_output"]),
                    loss=float(record["loss"]) if "loss" in record else None,
                    stalled=bool(record.get("stalled", 0)),
                    workload=int(record.get("workload", -1)),
                    noise=bool(record.get("noise", 0)),
                )
            except (KeyError, json.JSONDecodeError, TypeError) as err:
                raise ValueError(f"bad sample record on line {lineno + 1}: {err}") from err
            if k_pred is not None and k_out is not None:
                validate_sample(sample, k_pred, k_out)
            out.append(sample)
    return out
