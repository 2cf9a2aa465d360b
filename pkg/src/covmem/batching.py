"""Turning a sample pool into comparable batches.

Ingestion first replaces every raw sample with the pair (prediction,
output): the model's probabilistic output is a low-dimensional, task-
aware summary of the features, so two samples the model treats alike
end up looking alike.  Samples are then sorted by output bin, then by
prediction mode and mode probability, and chunked into groups of ``b``.
Chunks never span output bins; a leftover chunk at the end of an output
group simply stays undersized.
"""
import numpy as np

from .errors import EmptyInput
from .samples import Batch, Sample

__all__ = ["mode_and_confidence", "bbdr", "batch_samples"]


def mode_and_confidence(prediction) -> tuple[int, float]:
    """Mode bin of a categorical distribution and its probability.

    Ties resolve to the lowest bin index.
    """
    prediction = np.asarray(prediction, dtype=float)
    if prediction.size == 0:
        raise EmptyInput("empty prediction vector")
    mode = int(prediction.argmax())
    return mode, float(prediction[mode])


def bbdr(samples: list[Sample], predictor) -> list[Sample]:
    """Black-box dimensionality reduction: re-predict incoming samples.

    Every sample's ``prediction`` field is overwritten with the current
    predictor's output on its features, collapsing the raw feature space
    to the model's view of it.  Samples already resident in memory keep
    the predictions they were admitted with; only pass new arrivals
    through here.

    Returns new :class:`Sample` objects; inputs are not mutated.
    """
    if not samples:
        return []
    predictions = predictor.predict_many(np.stack([s.features for s in samples]))
    return [s.with_prediction(p) for s, p in zip(samples, predictions)]


def batch_samples(samples: list[Sample], batch_size: int, k_out: int) -> list[Batch]:
    """Group a sample pool into homogeneous batches of size ``batch_size``.

    Parameters
    ----------
    samples : list of Sample
    batch_size : int
        Target members per batch.  The final chunk of each output group
        may be smaller; chunks are never merged across output bins.
    k_out : int
        Number of output bins, fixing the length of each ``out_dist``.

    Returns
    -------
    list of Batch
        In sort order.  Each batch carries the mixture of its members'
        predictions, the histogram of their output bins (a point mass,
        given the grouping), and the mean feature vector.
    """
    if not samples:
        raise EmptyInput("cannot batch an empty pool")
    if batch_size <= 0:
        raise ValueError(f"batch_size must be positive, got {batch_size}")

    out_bins = np.array([s.output_bin for s in samples], dtype=np.int64)
    arrival = np.array([s.arrival_index for s in samples], dtype=np.int64)
    predictions = np.stack([s.prediction for s in samples])
    features = np.stack([s.features for s in samples])
    modes = predictions.argmax(axis=1)
    mode_probs = predictions[np.arange(len(samples)), modes]

    # last lexsort key is the primary one
    order = np.lexsort((arrival, mode_probs, modes, out_bins))
    out_sorted = out_bins[order]

    # chunk starts: every batch_size positions within each output run
    run_starts = np.flatnonzero(np.diff(out_sorted)) + 1
    run_bounds = np.concatenate(([0], run_starts, [len(samples)]))
    starts = np.concatenate(
        [np.arange(a, b, batch_size) for a, b in zip(run_bounds[:-1], run_bounds[1:])]
    )
    stops = np.concatenate((starts[1:], [len(samples)]))

    pred_sums = np.add.reduceat(predictions[order], starts, axis=0)
    feat_sums = np.add.reduceat(features[order], starts, axis=0)
    sizes = (stops - starts).astype(float)

    batches = []
    arrival_sorted = arrival[order]
    for i, (a, b) in enumerate(zip(starts, stops)):
        out_dist = np.zeros(k_out)
        out_dist[out_sorted[a]] = 1.0
        batches.append(
            Batch(
                sample_ids=arrival_sorted[a:b].copy(),
                pred_dist=pred_sums[i] / sizes[i],
                out_dist=out_dist,
                mean_features=feat_sums[i] / sizes[i],
            )
        )
    return batches
