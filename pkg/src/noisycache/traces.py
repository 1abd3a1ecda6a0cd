"""Request trace generation, file I/O, and batching.

A trace is an ordered sequence of 1-based file ids over a catalog of
n_files. Traces come from three sources: a Zipf sampler, a round-robin
generator, or a text file (one id per line). batch_trace slices a trace
into fixed-size request batches, converting to the 0-based index space
the rest of the package works in.
"""

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, RequestBatch


class TraceParseError(ValueError):
    """Raised when a trace file cannot be parsed; message carries line numbers."""


@dataclass(frozen=True)
class Trace:
    """An ordered request sequence. events holds 1-based ids in [1, n_files]."""

    events: np.ndarray
    n_files: int

    def __post_init__(self):
        events = np.asarray(self.events, dtype=np.int64)
        object.__setattr__(self, "events", events)
        if events.ndim != 1 or events.size < 1:
            raise InvalidInputError("events must be a non-empty 1-d sequence")
        if self.n_files < 1:
            raise InvalidInputError(f"n_files must be >= 1, got {self.n_files}")
        if events.min() < 1 or events.max() > self.n_files:
            raise InvalidInputError("event ids must lie in [1, n_files]")


@dataclass(frozen=True)
class ZipfConfig:
    """I.i.d. Zipf(alpha) requests: P(file i) proportional to i**-alpha.

    seed may be left None; the engine then derives one from its seed
    plan before generating.
    """

    n_files: int
    alpha: float
    total_requests: int
    seed: int | None = None

    def __post_init__(self):
        if self.n_files < 1:
            raise InvalidInputError("n_files must be >= 1")
        if self.alpha < 0:
            raise InvalidInputError("alpha must be >= 0")
        if self.total_requests < 1:
            raise InvalidInputError("total_requests must be >= 1")


@dataclass(frozen=True)
class RoundRobinConfig:
    """Deterministic cycle 1, 2, ..., n_files, 1, 2, ..."""

    n_files: int
    total_requests: int

    def __post_init__(self):
        if self.n_files < 1:
            raise InvalidInputError("n_files must be >= 1")
        if self.total_requests < 1:
            raise InvalidInputError("total_requests must be >= 1")


@dataclass(frozen=True)
class TraceFileConfig:
    """A trace loaded from disk; see read_trace_file for the format."""

    path: str
    remap: bool = True
    n_files: int | None = None


def generate_zipf(config: ZipfConfig) -> Trace:
    """Sample an i.i.d. Zipf trace, deterministic for a given seed."""
    if config.seed is None:
        raise InvalidInputError("ZipfConfig.seed is unresolved")
    ranks = np.arange(1, config.n_files + 1, dtype=np.float64)
    weights = ranks ** -config.alpha
    cdf = np.cumsum(weights / weights.sum())
    rng = np.random.default_rng(config.seed)
    draws = np.searchsorted(cdf, rng.random(config.total_requests))
    # guard the cdf[-1] < 1.0 rounding corner
    events = np.minimum(draws, config.n_files - 1) + 1
    return Trace(events=events, n_files=config.n_files)


def generate_round_robin(config: RoundRobinConfig) -> Trace:
    events = np.arange(config.total_requests, dtype=np.int64) % config.n_files + 1
    return Trace(events=events, n_files=config.n_files)


def _dense_remap(events: np.ndarray) -> tuple[np.ndarray, int]:
    # relabel ids 1..K in order of first appearance
    uniq, first_pos, inverse = np.unique(
        events, return_index=True, return_inverse=True
    )
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first_pos)] = np.arange(1, uniq.size + 1)
    return rank[inverse], int(uniq.size)


def read_trace_file(path: str, remap: bool = True, n_files: int | None = None) -> Trace:
    """Parse a trace file into a Trace.

    Format: one request per line, the file id as a positive integer.
    Blank lines and lines starting with '#' are skipped. A second
    comma-separated field (e.g. a timestamp) is tolerated and ignored.

    With remap=True (default) ids are relabeled densely 1..K in order of
    first appearance and the catalog size is K. With remap=False the ids
    are kept as-is and n_files must be supplied.
    """
    raw = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            field = text.split(",", 1)[0].strip()
            try:
                value = int(field)
            except ValueError:
                raise TraceParseError(
                    f"{path}:{lineno}: expected an integer file id, got {field!r}"
                ) from None
            if value < 1:
                raise TraceParseError(
                    f"{path}:{lineno}: file ids must be positive, got {value}"
                )
            raw.append(value)
    if not raw:
        raise TraceParseError(f"{path}: no request events found")
    events = np.asarray(raw, dtype=np.int64)
    if remap:
        events, catalog = _dense_remap(events)
        return Trace(events=events, n_files=catalog)
    if n_files is None:
        raise InvalidInputError("n_files is required when remap=False")
    if events.max() > n_files:
        raise TraceParseError(
            f"{path}: id {int(events.max())} exceeds declared catalog size {n_files}"
        )
    return Trace(events=events, n_files=n_files)


def write_trace_file(path: str, trace: Trace) -> None:
    """Write a trace in the format read_trace_file accepts."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(map(str, trace.events.tolist())))
        fh.write("\n")


def batch_trace(trace: Trace, batch_size: int) -> list[RequestBatch]:
    """Slice a trace into consecutive batches of exactly batch_size requests.

    A trailing partial batch is discarded, so the horizon is
    len(events) // batch_size. Raises if the trace is shorter than one
    batch.
    """
    if batch_size < 1:
        raise InvalidInputError("batch_size must be >= 1")
    horizon = trace.events.size // batch_size
    if horizon == 0:
        raise InvalidInputError(
            f"trace has {trace.events.size} events, shorter than one "
            f"batch of {batch_size}"
        )
    indexed = trace.events - 1
    batches = []
    for t in range(horizon):
        window = indexed[t * batch_size : (t + 1) * batch_size]
        ids, counts = np.unique(window, return_counts=True)
        batches.append(RequestBatch(ids=ids, counts=counts, n_files=trace.n_files))
    return batches
