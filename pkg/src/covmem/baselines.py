"""Selection strategies: the coverage maximizer and its baselines.

Every strategy exposes the same call: fold a chunk of new samples into
a bounded :class:`~covmem.samples.ReplayMemory` and report what it kept
and whether to retrain.  The baselines answer "retrain" unconditionally
(they have no drift signal of their own) and report an RCI of 1.0, so a
harness wired for strategy-decided retraining degrades to retraining on
schedule, which is how such memories are normally run.

Available kinds:

``memento``            coverage maximization over distribution distances
``memento_euclidean``  same loop, feature-average euclidean distances
``random``             streaming reservoir, uniform over the full history
``fifo``               keep the most recent ``capacity`` samples
``priority_*``         softmax discards over one scalar per sample
``lars``               decayed reservoir admission + loss-aware eviction
``qbc``                keep the samples a model committee disagrees on
"""
from abc import ABC, abstractmethod

import numpy as np

from . import selection
from .batching import batch_samples, bbdr
from .errors import (
    EmptyCommittee,
    EmptyInput,
    MissingScores,
    NegativeTemperature,
    NotClassification,
)
from .predictors import Predictor, with_losses
from .samples import ReplayMemory, Sample, StrategyConfig

__all__ = ["SelectionStrategy", "CoverageStrategy", "RandomStrategy", "FifoStrategy",
           "PriorityStrategy", "LarsStrategy", "QbcStrategy", "make_strategy",
           "STRATEGY_KINDS"]


class SelectionStrategy(ABC):
    """One policy for maintaining a bounded replay memory."""

    @abstractmethod
    def select(self, memory: ReplayMemory, new_samples: list[Sample],
               cfg: StrategyConfig, predictor, rng: np.random.Generator
               ) -> selection.SelectionOutcome:
        """Update ``memory`` with ``new_samples``; return what happened."""

    def on_retrain(self, train_samples: list[Sample], rng: np.random.Generator) -> None:
        """Hook the harness calls after each retraining event."""


def _finish(memory: ReplayMemory, kept: list[Sample], cfg: StrategyConfig
            ) -> selection.SelectionOutcome:
    """Store survivors, rebuild the batch view, report an always-retrain outcome."""
    batches = batch_samples(kept, cfg.batch_size, cfg.k_out) if kept else []
    memory.replace_contents(batches, kept)
    memory.last_train_batches = list(batches)
    kept_ids = np.array(sorted(s.arrival_index for s in kept), dtype=np.int64)
    return selection.SelectionOutcome(kept_ids, [], True, 1.0)


class CoverageStrategy(SelectionStrategy):
    """Density-based coverage maximization (see :mod:`covmem.selection`)."""

    def __init__(self, pred_metric: str = "jsd"):
        if pred_metric not in ("jsd", "euclidean"):
            raise ValueError(f"unknown pred_metric {pred_metric!r}")
        self.pred_metric = pred_metric

    def select(self, memory, new_samples, cfg, predictor, rng):
        return selection.select(memory, new_samples, cfg, predictor, rng,
                                pred_metric=self.pred_metric)


class RandomStrategy(SelectionStrategy):
    """Classic streaming reservoir: a uniform sample of the whole history.

    Each arrival with stream position ``n`` (its arrival index plus one)
    enters a full memory with probability ``capacity / n``, replacing a
    uniformly chosen resident.  New samples therefore get less and less
    likely to stick over time, which is what makes this baseline slow to
    pick up late pattern changes.
    """

    def select(self, memory, new_samples, cfg, predictor, rng):
        store = memory.sorted_samples()
        incoming = bbdr(new_samples, predictor) if predictor is not None else new_samples
        for s in sorted(incoming, key=lambda x: x.arrival_index):
            if len(store) < cfg.capacity:
                store.append(s)
                continue
            slot = int(rng.integers(0, s.arrival_index + 1))
            if slot < cfg.capacity:
                store[slot] = s
        return _finish(memory, store, cfg)


class FifoStrategy(SelectionStrategy):
    """Keep the ``capacity`` most recent samples, nothing else."""

    def select(self, memory, new_samples, cfg, predictor, rng):
        incoming = bbdr(new_samples, predictor) if predictor is not None else new_samples
        pool = memory.sorted_samples() + sorted(incoming, key=lambda s: s.arrival_index)
        return _finish(memory, pool[-cfg.capacity:], cfg)


# scalar-priority strategies ----------------------------------------------
#
# Each variant reduces a sample to one number and discards by softmax
# over the signed score (sign chosen so "likely to discard" is high).
# Scores marked dynamic are refreshed after every discard.

_PRIORITY_KINDS = ("loss", "confidence", "label_count", "stalled")


class PriorityStrategy(SelectionStrategy):
    """Per-sample softmax discards over one scalar score.

    ``loss``         discard low-loss samples (the model knows them)
    ``confidence``   discard high-confidence samples
    ``label_count``  discard from overrepresented labels (dynamic)
    ``stalled``      discard samples whose session did not stall
    """

    def __init__(self, score: str):
        if score not in _PRIORITY_KINDS:
            raise ValueError(f"unknown priority score {score!r}, expected one of {_PRIORITY_KINDS}")
        self.score = score

    def _signed_scores(self, pool: list[Sample]) -> np.ndarray:
        if self.score == "loss":
            if any(s.loss is None for s in pool):
                raise MissingScores("loss-priority needs every sample scored; "
                                    "run a predictor pass first")
            return -np.array([s.loss for s in pool])
        if self.score == "confidence":
            return np.array([s.prediction.max() for s in pool])
        if self.score == "stalled":
            return np.array([0.0 if s.stalled else 1.0 for s in pool])
        raise AssertionError(self.score)

    def select(self, memory, new_samples, cfg, predictor, rng):
        incoming = new_samples
        if predictor is not None:
            incoming = bbdr(new_samples, predictor)
            if self.score == "loss":
                incoming = with_losses(incoming, predictor)
        pool = memory.sorted_samples() + sorted(incoming, key=lambda s: s.arrival_index)
        excess = len(pool) - cfg.capacity
        if excess <= 0:
            return _finish(memory, pool, cfg)

        alive = np.ones(len(pool), dtype=bool)
        if self.score == "label_count":
            labels = np.array([s.output_bin for s in pool])
            counts = np.bincount(labels, minlength=cfg.k_out)
            for _ in range(excess):
                signed = counts[labels[alive]].astype(float)
                j = _draw_discard(signed, cfg.temperature, rng)
                victim = np.flatnonzero(alive)[j]
                counts[labels[victim]] -= 1
                alive[victim] = False
        else:
            signed = self._signed_scores(pool)
            for _ in range(excess):
                j = _draw_discard(signed[alive], cfg.temperature, rng)
                alive[np.flatnonzero(alive)[j]] = False
        return _finish(memory, [s for s, a in zip(pool, alive) if a], cfg)


def _draw_discard(signed: np.ndarray, temperature: float, rng) -> int:
    """Softmax draw over signed scores; T=0 is argmax with low-index ties."""
    if temperature < 0:
        raise NegativeTemperature(f"temperature must be nonnegative, got {temperature}")
    if temperature == 0.0:
        return int(signed.argmax())
    logits = (signed - signed.max()) / temperature
    probs = np.exp(logits)
    probs /= probs.sum()
    return selection.draw_index(probs, rng)


class LarsStrategy(SelectionStrategy):
    """Loss-aware reservoir with decayed admission, for classification.

    Admission: a sample at stream position ``n`` enters with probability
    ``min(1, C/n) * 0.5 ** (max(0, n - C) / C)``, a reservoir rate that
    additionally halves every ``C`` samples once the memory has filled.
    Eviction: drop the lowest-loss sample of the most frequent label, so
    easy samples from dominant classes leave first.
    """

    def __init__(self, task: str = "classification"):
        self.task = task

    def select(self, memory, new_samples, cfg, predictor, rng):
        if self.task != "classification":
            raise NotClassification(
                f"loss-aware reservoir needs class labels, got task {self.task!r}"
            )
        incoming = new_samples
        if predictor is not None:
            incoming = with_losses(bbdr(new_samples, predictor), predictor)
        if any(s.loss is None for s in incoming):
            raise MissingScores("eviction ranks by loss; samples arrived unscored "
                                "and no predictor was given")
        store = memory.sorted_samples()
        capacity = cfg.capacity
        for s in sorted(incoming, key=lambda x: x.arrival_index):
            n = s.arrival_index + 1
            admit_p = min(1.0, capacity / n) * 0.5 ** (max(0, n - capacity) / capacity)
            if len(store) >= capacity and rng.random() >= admit_p:
                continue
            if len(store) >= capacity:
                store[self._victim(store, cfg.k_out)] = s
            else:
                store.append(s)
        return _finish(memory, store, cfg)

    @staticmethod
    def _victim(store: list[Sample], k_out: int) -> int:
        counts = np.bincount([s.output_bin for s in store], minlength=k_out)
        label = int(counts.argmax())
        candidates = [(s.loss, s.arrival_index, i)
                      for i, s in enumerate(store) if s.output_bin == label]
        return min(candidates)[2]


class QbcStrategy(SelectionStrategy):
    """Query by committee: keep the samples the committee is unsure about.

    Scores each pool sample with the entropy of the committee's soft
    vote (the mean of member predictions) and keeps the top ``capacity``
    by entropy, breaking ties by arrival index.  ``vote="member_mean"``
    averages member entropies instead, which ignores disagreement
    between confident members.

    The committee is refreshed on every retraining event: each member is
    refit on a bootstrap resample of the memory, so members stay
    diverse even when they share an architecture.
    """

    def __init__(self, base_predictor: Predictor, committee_size: int = 5,
                 vote: str = "soft"):
        if committee_size < 1:
            raise EmptyCommittee(f"committee needs at least one member, got {committee_size}")
        if vote not in ("soft", "member_mean"):
            raise ValueError(f"unknown vote {vote!r}, expected 'soft' or 'member_mean'")
        self.committee: list[Predictor] = [base_predictor for _ in range(committee_size)]
        self._base = base_predictor
        self.vote = vote

    def on_retrain(self, train_samples, rng):
        if not train_samples:
            return
        refreshed = []
        for _ in self.committee:
            picks = rng.integers(0, len(train_samples), size=len(train_samples))
            refreshed.append(self._base.fit([train_samples[i] for i in picks]))
        self.committee = refreshed

    def _entropies(self, features: np.ndarray) -> np.ndarray:
        if not self.committee:
            raise EmptyCommittee("committee is empty")
        member_preds = [m.predict_many(features) for m in self.committee]
        if self.vote == "soft":
            mean = np.mean(member_preds, axis=0)
            return _entropy_bits(mean)
        return np.mean([_entropy_bits(p) for p in member_preds], axis=0)

    def select(self, memory, new_samples, cfg, predictor, rng):
        incoming = bbdr(new_samples, predictor) if predictor is not None else new_samples
        pool = memory.sorted_samples() + sorted(incoming, key=lambda s: s.arrival_index)
        if not pool:
            raise EmptyInput("nothing to select from")
        if len(pool) <= cfg.capacity:
            return _finish(memory, pool, cfg)
        entropies = self._entropies(np.stack([s.features for s in pool]))
        arrival = np.array([s.arrival_index for s in pool])
        order = np.lexsort((arrival, -entropies))
        keep = np.sort(order[:cfg.capacity])
        return _finish(memory, [pool[i] for i in keep], cfg)


def _entropy_bits(rows: np.ndarray) -> np.ndarray:
    safe = np.where(rows > 0, rows, 1.0)
    return -(safe * np.log2(safe)).sum(axis=-1)


STRATEGY_KINDS = (
    "memento", "memento_euclidean", "random", "fifo",
    "priority_loss", "priority_confidence", "priority_label_count", "priority_stalled",
    "lars", "qbc",
)


def make_strategy(kind: str, *, base_predictor: Predictor | None = None,
                  committee_size: int = 5, vote: str = "soft",
                  task: str = "classification") -> SelectionStrategy:
    """Build a strategy by kind name.

    ``qbc`` requires ``base_predictor`` (the committee template); the
    other kinds ignore the keyword arguments they do not use.
    """
    if kind == "memento":
        return CoverageStrategy("jsd")
    if kind == "memento_euclidean":
        return CoverageStrategy("euclidean")
    if kind == "random":
        return RandomStrategy()
    if kind == "fifo":
        return FifoStrategy()
    if kind.startswith("priority_"):
        return PriorityStrategy(kind.removeprefix("priority_"))
    if kind == "lars":
        return LarsStrategy(task)
    if kind == "qbc":
        if base_predictor is None:
            raise EmptyCommittee("qbc needs a base predictor to build its committee from")
        return QbcStrategy(base_predictor, committee_size, vote)
    raise ValueError(f"unknown strategy kind {kind!r}, expected one of {STRATEGY_KINDS}")
