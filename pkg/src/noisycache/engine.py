"""Experiment engine: seeding, policy runs, aggregation, and sweeps.

One experiment = one trace, a set of policies, and M runs per stochastic
policy. Seeding follows a fixed derivation so that every run is
reproducible and, crucially, so that run r of ANY perturbed-leader
policy draws the same noise sequence: policies under the same run index
are compared with common random numbers.

Deterministic policies (lru, ftl, opt) run once; their single series
stands in for all runs, so their decile bands have zero width.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import os

import numpy as np

from .core import (
    CatalogConfig,
    InvalidInputError,
    TieBreak,
    cost,
    oracle_minimize,
    total_counts,
)
from .estimators import EstimatorSpec, bound_params
from .metrics import (
    RegretReport,
    RunSeries,
    average_miss_ratio,
    decile_band,
    empirical_regret,
    regret_bound,
)
from .policies import (
    FollowTheLeader,
    LeastRecentlyUsed,
    PerturbedLeader,
    compute_eta,
    replay_static,
    static_opt_decision,
)
from .traces import (
    RoundRobinConfig,
    Trace,
    TraceFileConfig,
    ZipfConfig,
    batch_trace,
    generate_round_robin,
    generate_zipf,
    read_trace_file,
)

POLICY_KINDS = ("lru", "ftl", "fpl", "nfpl-fix", "nfpl-var", "opt")
_SAMPLED_KINDS = ("fpl", "nfpl-fix", "nfpl-var")
WORKERS_ENV = "NOISYCACHE_WORKERS"


@dataclass(frozen=True)
class PolicySpec:
    """Declarative description of one policy row in an experiment.

    kind is one of POLICY_KINDS. rate is the sampling rate for the
    nfpl variants (for nfpl-fix it means subsample = rate * batch_size
    unless subsample is given explicitly). eta_override replaces the
    computed perturbation scale for the perturbed-leader kinds.
    """

    name: str
    kind: str
    rate: float | None = None
    subsample: int | None = None
    tiebreak: TieBreak | None = None
    eta_override: float | None = None

    def __post_init__(self):
        if not self.name:
            raise InvalidInputError("policy name must be non-empty")
        if self.kind not in POLICY_KINDS:
            raise InvalidInputError(
                f"unknown policy kind {self.kind!r}, expected one of {POLICY_KINDS}"
            )
        if self.kind == "nfpl-var":
            if self.rate is None:
                raise InvalidInputError("nfpl-var requires a sampling rate")
            if self.subsample is not None:
                raise InvalidInputError("subsample does not apply to nfpl-var")
        elif self.kind == "nfpl-fix":
            if self.rate is None and self.subsample is None:
                raise InvalidInputError("nfpl-fix requires rate or subsample")
        else:
            if self.rate is not None or self.subsample is not None:
                raise InvalidInputError(f"{self.kind} takes no sampling parameters")
        if self.rate is not None and not 0.0 < self.rate <= 1.0:
            raise InvalidInputError(f"rate must be in (0, 1], got {self.rate}")
        if self.subsample is not None and self.subsample < 1:
            raise InvalidInputError("subsample must be >= 1")
        if self.eta_override is not None:
            if self.kind not in _SAMPLED_KINDS:
                raise InvalidInputError(f"eta does not apply to {self.kind}")
            if self.eta_override < 0:
                raise InvalidInputError("eta must be >= 0")
        if self.tiebreak is not None and self.kind == "lru":
            raise InvalidInputError("lru has no tie-break rule")

    @property
    def stochastic(self) -> bool:
        return self.kind in _SAMPLED_KINDS

    def resolved_tiebreak(self) -> TieBreak:
        if self.tiebreak is not None:
            return self.tiebreak
        return TieBreak.MOST_RECENT if self.kind == "ftl" else TieBreak.LOWEST_INDEX

    def estimator_spec(self, batch_size: int) -> EstimatorSpec | None:
        if self.kind == "fpl":
            return EstimatorSpec.exact(batch_size)
        if self.kind == "nfpl-fix":
            if self.subsample is not None:
                b = self.subsample
            else:
                b = max(1, min(batch_size, round(self.rate * batch_size)))
            return EstimatorSpec.fixed_subsample(b, batch_size)
        if self.kind == "nfpl-var":
            return EstimatorSpec.bernoulli(self.rate, batch_size)
        return None


@dataclass(frozen=True)
class SeedPlan:
    """Per-(run, stream) RNG derivation from one base seed.

    stream(run, stream_id) spawns an independent generator keyed by the
    run index and a stream id: NOISE for decision perturbations,
    SAMPLING for estimator draws, TRACE for trace generation. The trace
    stream ignores the run index (one trace per experiment), and the
    noise stream depends only on the run index, never on the policy, so
    equal-run comparisons share randomness.
    """

    base_seed: int

    NOISE = 0
    SAMPLING = 1
    TRACE = 2

    def stream(self, run: int, stream_id: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.base_seed, spawn_key=(run, stream_id))
        return np.random.default_rng(seq)

    def derived_trace_seed(self) -> int:
        seq = np.random.SeedSequence(self.base_seed, spawn_key=(0, self.TRACE))
        return int(seq.generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs besides the outputs' location."""

    trace: ZipfConfig | RoundRobinConfig | TraceFileConfig | Trace
    cache_size: int
    batch_size: int
    policies: tuple[PolicySpec, ...] = ()
    runs: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.cache_size < 1:
            raise InvalidInputError("cache_size must be >= 1")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be >= 1")
        if self.runs < 1:
            raise InvalidInputError("runs must be >= 1")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise InvalidInputError("policy names must be unique")


@dataclass
class PolicyReport:
    """Aggregated results for one policy across its runs."""

    spec: PolicySpec
    eta: float | None
    mean: np.ndarray
    d1: np.ndarray
    d9: np.ndarray
    cum_cost: float
    regret: RegretReport
    runs: list[RunSeries]

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_d1(self) -> float:
        return float(self.d1[-1])

    @property
    def final_d9(self) -> float:
        return float(self.d9[-1])


@dataclass
class ExperimentReport:
    """One experiment's full results."""

    catalog: CatalogConfig
    trace_source: object
    request_totals: np.ndarray
    opt_decision: np.ndarray
    opt_cost: int
    policies: list[PolicyReport]

    def policy(self, name: str) -> PolicyReport:
        for rep in self.policies:
            if rep.spec.name == name:
                return rep
        raise KeyError(name)


def _resolve_trace(source, plan: SeedPlan):
    """Materialize a trace and return (resolved source config, trace)."""
    if isinstance(source, Trace):
        return None, source
    if isinstance(source, ZipfConfig):
        if source.seed is None:
            source = replace(source, seed=plan.derived_trace_seed())
        return source, generate_zipf(source)
    if isinstance(source, RoundRobinConfig):
        return source, generate_round_robin(source)
    if isinstance(source, TraceFileConfig):
        return source, read_trace_file(source.path, source.remap, source.n_files)
    raise InvalidInputError(f"unknown trace source type {type(source).__name__}")


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise InvalidInputError(
            f"{WORKERS_ENV} must be a positive integer, got {raw!r}"
        ) from None
    if workers < 1:
        raise InvalidInputError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def run_policy(
    spec: PolicySpec,
    catalog: CatalogConfig,
    batches,
    events,
    plan: SeedPlan,
    run: int = 0,
    eta: float | None = None,
    estimator: EstimatorSpec | None = None,
    record_decisions: bool = False,
) -> RunSeries:
    """Execute one run of one policy over a batched trace.

    events is the 0-based event sequence truncated to the batched
    horizon; only lru and ftl consult it. eta and estimator, when None,
    are derived from the policy spec (they are parameters so run_experiment can
    compute them once per policy rather than once per run).
    """
    horizon = len(batches)
    if horizon != catalog.horizon:
        raise InvalidInputError("batch count does not match catalog horizon")
    batch_size = catalog.batch_size
    costs = np.zeros(horizon, dtype=np.int64)
    decisions = (
        np.zeros((horizon, catalog.n_files), dtype=np.int8)
        if record_decisions
        else None
    )
    estimate_totals = None

    if spec.kind == "lru":
        if events is None:
            raise InvalidInputError("lru needs the event sequence")
        policy = LeastRecentlyUsed(catalog)
        for t in range(horizon):
            costs[t] = policy.process_slot(events[t * batch_size : (t + 1) * batch_size])
    elif spec.kind == "opt":
        best = static_opt_decision(batches, catalog.cache_size, spec.resolved_tiebreak())
        costs = replay_static(batches, best)
        if record_decisions:
            decisions[:] = best
    elif spec.kind == "ftl":
        if events is None:
            raise InvalidInputError("ftl needs the event sequence")
        policy = FollowTheLeader(catalog, spec.resolved_tiebreak())
        for t, batch in enumerate(batches):
            x = policy.decide()
            costs[t] = cost(batch, x)
            policy.observe(batch, events[t * batch_size : (t + 1) * batch_size])
            if record_decisions:
                decisions[t] = x
    else:
        if estimator is None:
            estimator = spec.estimator_spec(batch_size)
        if eta is None:
            eta = (
                spec.eta_override
                if spec.eta_override is not None
                else compute_eta(bound_params(estimator, catalog), horizon)
            )
        policy = PerturbedLeader(
            catalog,
            eta,
            estimator,
            noise_rng=plan.stream(run, SeedPlan.NOISE),
            sample_rng=plan.stream(run, SeedPlan.SAMPLING),
            tiebreak=spec.resolved_tiebreak(),
        )
        for t, batch in enumerate(batches):
            x = policy.decide()
            costs[t] = cost(batch, x)
            policy.observe(batch)
            if record_decisions:
                decisions[t] = x
        estimate_totals = policy.totals.copy()

    return RunSeries(
        policy=spec.name,
        run=run,
        costs=costs,
        estimate_totals=estimate_totals,
        decisions=decisions,
    )


def _run_many(spec, catalog, batches, events, plan, n_runs, eta, estimator, record):
    def one(run):
        return run_policy(
            spec,
            catalog,
            batches,
            events,
            plan,
            run=run,
            eta=eta,
            estimator=estimator,
            record_decisions=record,
        )

    workers = _worker_count()
    if workers > 1 and n_runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(n_runs)))
    return [one(run) for run in range(n_runs)]


def _aggregate(spec, eta, series, batch_size, optimum, bound):
    ratios = np.stack([average_miss_ratio(s.costs, batch_size) for s in series])
    mean, d1, d9 = decile_band(ratios)
    cum = float(np.mean([float(s.costs.sum()) for s in series]))
    return PolicyReport(
        spec=spec,
        eta=eta,
        mean=mean,
        d1=d1,
        d9=d9,
        cum_cost=cum,
        regret=empirical_regret(cum, optimum, bound),
        runs=list(series),
    )


def run_experiment(
    config: ExperimentConfig, record_decisions: bool = False
) -> ExperimentReport:
    """Run every configured policy on one shared trace and aggregate."""
    if not config.policies:
        raise InvalidInputError("at least one policy is required")
    plan = SeedPlan(config.base_seed)
    source, trace = _resolve_trace(config.trace, plan)
    batches = batch_trace(trace, config.batch_size)
    horizon = len(batches)
    catalog = CatalogConfig(trace.n_files, config.cache_size, config.batch_size, horizon)
    events = trace.events[: horizon * config.batch_size] - 1
    totals = total_counts(batches)
    opt_decision = oracle_minimize(totals.astype(np.float64), config.cache_size)
    optimum = int(totals @ opt_decision)

    reports = []
    for spec in config.policies:
        est = spec.estimator_spec(config.batch_size)
        if est is not None:
            eta = (
                spec.eta_override
                if spec.eta_override is not None
                else compute_eta(bound_params(est, catalog), horizon)
            )
            bound = regret_bound(bound_params(est, catalog), horizon)
        else:
            eta = None
            bound = None
        n_runs = config.runs if spec.stochastic else 1
        series = _run_many(
            spec, catalog, batches, events, plan, n_runs, eta, est, record_decisions
        )
        reports.append(
            _aggregate(spec, eta, series, config.batch_size, optimum, bound)
        )

    return ExperimentReport(
        catalog=catalog,
        trace_source=source,
        request_totals=totals,
        opt_decision=opt_decision,
        opt_cost=optimum,
        policies=reports,
    )


@dataclass
class SweepCell:
    """Final-slot band for one (variant, rate, cache size) sweep cell."""

    variant: str
    rate: float
    cache_size: int
    eta: float
    final_mean: float
    final_d1: float
    final_d9: float
    runs: list[RunSeries]


@dataclass
class SweepReport:
    trace_source: object
    n_files: int
    horizon: int
    cells: list[SweepCell]


def run_sweep(
    config: ExperimentConfig,
    rates,
    variants=("fix", "var"),
    cache_sizes=None,
) -> SweepReport:
    """Sweep sampling rates for both estimator variants on one trace.

    The perturbation scale is pinned per cache size to the exact-estimate
    value (the rate-independent choice), so cells differ only in what the
    estimator samples; this is the scale the fixed subsampler would pick
    for itself at any rate. Cells are emitted cache size by cache size,
    variants in the order given, rates in the order given, with
    config.runs runs each.
    """
    rates = tuple(float(r) for r in rates)
    if not rates:
        raise InvalidInputError("at least one sampling rate is required")
    for r in rates:
        if not 0.0 < r <= 1.0:
            raise InvalidInputError(f"sampling rates must be in (0, 1], got {r}")
    variants = tuple(variants)
    if not variants:
        raise InvalidInputError("at least one variant is required")
    for v in variants:
        if v not in ("fix", "var"):
            raise InvalidInputError(f"unknown variant {v!r}, expected 'fix' or 'var'")
    if len(set(variants)) != len(variants):
        raise InvalidInputError("duplicate variants in sweep")

    plan = SeedPlan(config.base_seed)
    source, trace = _resolve_trace(config.trace, plan)
    batches = batch_trace(trace, config.batch_size)
    horizon = len(batches)
    sizes = tuple(cache_sizes) if cache_sizes else (config.cache_size,)

    cells = []
    for size in sizes:
        catalog = CatalogConfig(trace.n_files, size, config.batch_size, horizon)
        pinned_eta = compute_eta(
            bound_params(EstimatorSpec.exact(config.batch_size), catalog), horizon
        )
        for variant in variants:
            kind = "nfpl-fix" if variant == "fix" else "nfpl-var"
            for rate in rates:
                spec = PolicySpec(
                    name=f"nfpl-{variant}-r{rate:g}-c{size}",
                    kind=kind,
                    rate=rate,
                    eta_override=pinned_eta,
                )
                est = spec.estimator_spec(config.batch_size)
                series = _run_many(
                    spec, catalog, batches, None, plan, config.runs,
                    pinned_eta, est, False,
                )
                ratios = np.stack(
                    [average_miss_ratio(s.costs, config.batch_size) for s in series]
                )
                mean, d1, d9 = decile_band(ratios)
                cells.append(
                    SweepCell(
                        variant=variant,
                        rate=rate,
                        cache_size=size,
                        eta=pinned_eta,
                        final_mean=float(mean[-1]),
                        final_d1=float(d1[-1]),
                        final_d9=float(d9[-1]),
                        runs=list(series),
                    )
                )
    return SweepReport(
        trace_source=source, n_files=trace.n_files, horizon=horizon, cells=cells
    )
