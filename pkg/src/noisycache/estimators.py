"""Request-count estimators.

A policy never has to see the true batch counts r. It sees an estimate
r_hat produced by one of three estimators, each unbiased (E[r_hat] = r):

- exact: r_hat = r (the degenerate, fully observed case);
- fixed subsample: keep exactly `subsample` of the batch's events,
  chosen uniformly without replacement, count per file, and rescale by
  batch_size / subsample. The per-file kept counts follow a multivariate
  hypergeometric law over the batch's count vector, which is how the
  draw is implemented (no event materialization);
- bernoulli: keep each event independently with probability `rate` and
  rescale by 1 / rate, i.e. a binomial thinning of each file's count.

The bound parameters below feed the perturbation-scale and regret-bound
formulas: the fixed subsample keeps estimate l1 mass at exactly
batch_size, while bernoulli thinning can concentrate up to
batch_size / rate on a single file.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CatalogConfig, InvalidInputError, RequestBatch


class EstimatorKind(Enum):
    EXACT = "exact"
    FIXED_SUBSAMPLE = "fixed"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run and its parameters.

    batch_size is the number of events per batch the estimator expects;
    subsample applies to FIXED_SUBSAMPLE (events kept per batch) and
    rate to BERNOULLI (per-event keep probability).
    """

    kind: EstimatorKind
    batch_size: int
    subsample: int | None = None
    rate: float | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        if self.kind is EstimatorKind.FIXED_SUBSAMPLE:
            if self.subsample is None or not 1 <= self.subsample <= self.batch_size:
                raise InvalidInputError(
                    f"subsample must be in [1, {self.batch_size}], got {self.subsample}"
                )
            if self.rate is not None:
                raise InvalidInputError("rate does not apply to the fixed subsampler")
        elif self.kind is EstimatorKind.BERNOULLI:
            if self.rate is None or not 0.0 < self.rate <= 1.0:
                raise InvalidInputError(
                    f"rate must be in (0, 1], got {self.rate}"
                )
            if self.subsample is not None:
                raise InvalidInputError("subsample does not apply to bernoulli")
        else:
            if self.subsample is not None or self.rate is not None:
                raise InvalidInputError("exact estimation takes no parameters")

    @classmethod
    def exact(cls, batch_size: int) -> "EstimatorSpec":
        return cls(EstimatorKind.EXACT, batch_size)

    @classmethod
    def fixed_subsample(cls, subsample: int, batch_size: int) -> "EstimatorSpec":
        return cls(EstimatorKind.FIXED_SUBSAMPLE, batch_size, subsample=subsample)

    @classmethod
    def bernoulli(cls, rate: float, batch_size: int) -> "EstimatorSpec":
        return cls(EstimatorKind.BERNOULLI, batch_size, rate=rate)


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the perturbation-scale and regret-bound formulas.

    cost_bound: upper bound on a single slot's estimated cost;
    l1_bound: upper bound on the l1 norm of a single estimate;
    diameter: l1 diameter of the decision set, 2 * min(C, N - C).
    """

    cost_bound: float
    l1_bound: float
    diameter: int


def estimate(
    spec: EstimatorSpec, batch: RequestBatch, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Draw one estimate of the batch's count vector (dense float64).

    The sampling estimators consume `rng`; the exact estimator ignores
    it. Estimates are nonnegative, supported on the batch's files, and
    unbiased.
    """
    if batch.total != spec.batch_size:
        raise InvalidInputError(
            f"batch holds {batch.total} events, estimator expects {spec.batch_size}"
        )
    out = np.zeros(batch.n_files, dtype=np.float64)
    if spec.kind is EstimatorKind.EXACT:
        out[batch.ids] = batch.counts
        return out
    if rng is None:
        raise InvalidInputError(f"{spec.kind.value} estimation requires an rng")
    if spec.kind is EstimatorKind.FIXED_SUBSAMPLE:
        kept = rng.multivariate_hypergeometric(batch.counts, spec.subsample)
        out[batch.ids] = kept * (spec.batch_size / spec.subsample)
    else:
        kept = rng.binomial(batch.counts, spec.rate)
        out[batch.ids] = kept / spec.rate
    return out


def bound_params(spec: EstimatorSpec, catalog: CatalogConfig) -> BoundParams:
    """Bound parameters for this estimator on this problem geometry."""
    if spec.batch_size != catalog.batch_size:
        raise InvalidInputError(
            f"estimator batch size {spec.batch_size} does not match "
            f"catalog batch size {catalog.batch_size}"
        )
    diameter = 2 * min(catalog.cache_size, catalog.n_files - catalog.cache_size)
    if spec.kind is EstimatorKind.BERNOULLI:
        mass = catalog.batch_size / spec.rate
    else:
        mass = float(catalog.batch_size)
    return BoundParams(cost_bound=mass, l1_bound=mass, diameter=diameter)
