"""Online caching policies.

Batch policies follow a strict decide -> pay -> observe protocol per
slot: decide() commits a cache decision before the slot's requests are
seen, the caller charges the true cost against that decision, and only
then does observe() reveal the batch (possibly through a sampling
estimator). LRU is the odd one out: it updates per event and its misses
are counted inside process_slot.

All policies work on 0-based file indices.
"""

from collections import OrderedDict
import math

import numpy as np

from .core import (
    CatalogConfig,
    InvalidInputError,
    RequestBatch,
    TieBreak,
    accumulate,
    cost,
    oracle_minimize,
    total_counts,
)
from .estimators import BoundParams, EstimatorSpec, estimate


def compute_eta(bounds: BoundParams, horizon: int) -> float:
    """Perturbation scale sqrt(cost_bound * l1_bound * horizon / diameter).

    This is the scale that balances the perturbation penalty against the
    switching cost in the regret analysis; regret under it is bounded by
    metrics.regret_bound. Requires a positive diameter (a cache that
    holds everything, or nothing, has no decision to make).
    """
    if horizon < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {horizon}")
    if bounds.diameter <= 0:
        raise InvalidInputError("diameter must be positive to set a perturbation scale")
    return math.sqrt(bounds.cost_bound * bounds.l1_bound * horizon / bounds.diameter)


class FollowTheLeader:
    """Cache the top-capacity files by accumulated true counts.

    Equivalent to LFU over the whole history. With the default
    most-recent tie-break, files tied on counts are ranked by how
    recently they were requested, which requires the caller to pass the
    slot's event sequence to observe(); without events the tie-break
    degrades to lowest-index.
    """

    def __init__(self, catalog: CatalogConfig, tiebreak: TieBreak = TieBreak.MOST_RECENT):
        self._cache_size = catalog.cache_size
        self._tiebreak = tiebreak
        self._totals = np.zeros(catalog.n_files, dtype=np.float64)
        self._stamps = np.full(catalog.n_files, -1, dtype=np.int64)
        self._clock = 0

    @property
    def totals(self) -> np.ndarray:
        return self._totals

    def decide(self) -> np.ndarray:
        return oracle_minimize(
            self._totals, self._cache_size, self._tiebreak, recency=self._stamps
        )

    def observe(self, batch: RequestBatch, events=None) -> None:
        self._totals = accumulate(self._totals, batch.dense())
        if events is not None:
            ev = np.asarray(events, dtype=np.int64)
            # duplicate indices: numpy keeps the last write, i.e. the
            # latest occurrence in the slot, which is exactly the stamp
            # we want
            self._stamps[ev] = np.arange(self._clock, self._clock + ev.size)
            self._clock += ev.size


class PerturbedLeader:
    """Follow-the-perturbed-leader over (possibly estimated) counts.

    Each decide() draws a fresh uniform [0, eta] perturbation per file,
    adds it to the accumulated estimates, and takes the oracle decision.
    observe() feeds the batch through the configured estimator and
    accumulates the estimate. With the exact estimator this is classical
    FPL; with eta = 0 it degenerates to follow-the-leader with
    lowest-index ties.
    """

    def __init__(
        self,
        catalog: CatalogConfig,
        eta: float,
        estimator: EstimatorSpec,
        noise_rng: np.random.Generator,
        sample_rng: np.random.Generator | None = None,
        tiebreak: TieBreak = TieBreak.LOWEST_INDEX,
    ):
        if eta < 0 or not math.isfinite(eta):
            raise InvalidInputError(f"eta must be finite and >= 0, got {eta}")
        self._n = catalog.n_files
        self._cache_size = catalog.cache_size
        self._eta = eta
        self._estimator = estimator
        self._noise_rng = noise_rng
        self._sample_rng = sample_rng
        self._tiebreak = tiebreak
        self._totals = np.zeros(catalog.n_files, dtype=np.float64)

    @property
    def totals(self) -> np.ndarray:
        """Accumulated estimates seen so far (read-only by convention)."""
        return self._totals

    def decide(self) -> np.ndarray:
        noise = self._noise_rng.uniform(0.0, self._eta, self._n)
        return oracle_minimize(self._totals + noise, self._cache_size, self._tiebreak)

    def observe(self, batch: RequestBatch, events=None) -> None:
        est = estimate(self._estimator, batch, self._sample_rng)
        self._totals = accumulate(self._totals, est)


class LeastRecentlyUsed:
    """Classical per-event LRU.

    Starts warm with files 0..cache_size-1 resident (pass
    warm_start=False for a cold cache). process_slot replays one slot's
    events in order and returns the misses incurred; every miss admits
    the file and evicts the least recently used one.
    """

    def __init__(self, catalog: CatalogConfig, warm_start: bool = True):
        self._capacity = catalog.cache_size
        self._cache: OrderedDict[int, None] = OrderedDict()
        if warm_start:
            for f in range(catalog.cache_size):
                self._cache[f] = None

    def process_slot(self, events) -> int:
        cache = self._cache
        capacity = self._capacity
        misses = 0
        for f in np.asarray(events).tolist():
            if f in cache:
                cache.move_to_end(f)
            else:
                misses += 1
                cache[f] = None
                if len(cache) > capacity:
                    cache.popitem(last=False)
        return misses


def static_opt_decision(
    batches, cache_size: int, tiebreak: TieBreak = TieBreak.LOWEST_INDEX
) -> np.ndarray:
    """Best fixed decision in hindsight: cache the top files by total count."""
    totals = total_counts(batches)
    return oracle_minimize(totals.astype(np.float64), cache_size, tiebreak)


def replay_static(batches, missing) -> np.ndarray:
    """Per-slot costs of holding one fixed decision across all batches."""
    return np.array([cost(b, missing) for b in batches], dtype=np.int64)
