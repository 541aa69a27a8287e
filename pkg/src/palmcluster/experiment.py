"""End-to-end experiment: thresholds, Palm replicates, counting, aggregation."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from .constants import CharacteristicKind, threshold, window_geometry
from .estimator import ClusterStats, ExceedanceRecord, count_cluster, estimate
from .exceptions import GuardViolation, WindowTooSmall
from .geometry import Rect
from .palm import palm_sample
from .samplers import Rng

log = logging.getLogger(__name__)

THREADS_ENV = "PALMCLUSTER_THREADS"


@dataclass
class ExperimentConfig:
    characteristic: CharacteristicKind = CharacteristicKind.INRADIUS_LARGE
    d: int = 2
    log_rho: float = 100.0
    tau: float = 1.0
    epsilon: float = 0.01
    replicates: int = 10000
    subsamples: int = 100
    k_max: int = 9
    seed: int = 20240101
    window_mode: str = "full"
    a: float = 4.0
    # Full-window padding is max(guard_floor, guard_factor * v0).
    guard_floor: float = 10.0
    guard_factor: float = 8.0
    # Local window half-side is max(local_floor, local_factor * v0), clipped to the full window.
    local_floor: float = 20.0
    local_factor: float = 25.0
    max_attempts: int = 3
    boundary_margin: float = 0.0
    out_dir: str | None = None
    emit_svg: bool = False

    def __post_init__(self):
        self.characteristic = CharacteristicKind.parse(self.characteristic)
        if self.d != 2:
            raise ValueError("only d = 2 is simulated")
        if self.window_mode not in ("full", "local"):
            raise ValueError(f"window_mode must be 'full' or 'local', got {self.window_mode!r}")
        if self.replicates < 1 or self.subsamples < 1:
            raise ValueError("replicates and subsamples must be positive")
        if self.replicates % self.subsamples:
            raise ValueError(
                f"replicates ({self.replicates}) must be a multiple of subsamples ({self.subsamples})"
            )
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["characteristic"] = self.characteristic.value
        return out


@dataclass(frozen=True)
class ExperimentPlan:
    """Quantities derived once from a config and shared by every replicate."""

    kind: CharacteristicKind
    v0: float
    q_window: Rect
    log_rho: float
    seed: int
    window_mode: str
    pad: float
    local_half: float
    max_attempts: int
    boundary_margin: float

    def simulation_window(self, attempt: int) -> Rect:
        full = self.q_window.pad(self.pad * 2**attempt)
        if self.window_mode == "full":
            return full
        local = Rect.centered(self.local_half * 2**attempt)
        return local.intersect(full)

    def scan_window(self, attempt: int) -> Rect:
        """Part of the scanning window where counts are certified.

        An exceedance cell always has an empty disk of radius ``v0`` within
        ``2 v0`` of its nucleus, so nuclei at least that far inside the
        simulation window are decided by simulated points. In full mode this
        is the whole scanning window; in local mode the outer strip is left
        out, which is the local-window approximation.
        """
        inner = self.simulation_window(attempt).pad(-2.0 * self.v0)
        return self.q_window.intersect(inner)


def plan_experiment(config: ExperimentConfig) -> ExperimentPlan:
    kind = config.characteristic
    v0 = threshold(kind, config.d, config.log_rho, config.tau, a=config.a)
    geom = window_geometry(config.log_rho, config.epsilon, config.d)
    return ExperimentPlan(
        kind=kind,
        v0=v0,
        q_window=Rect.centered(geom.q_half),
        log_rho=config.log_rho,
        seed=config.seed,
        window_mode=config.window_mode,
        pad=max(config.guard_floor, config.guard_factor * v0),
        local_half=max(config.local_floor, config.local_factor * v0),
        max_attempts=config.max_attempts,
        boundary_margin=config.boundary_margin,
    )


def simulate_replicate(plan: ExperimentPlan, index: int) -> ExceedanceRecord:
    """One Palm replicate; retried on a fresh substream with a doubled window on guard failure."""
    stream = Rng(plan.seed, index)
    last = None
    for attempt in range(plan.max_attempts):
        window = plan.simulation_window(attempt)
        try:
            sample = palm_sample(plan.kind, plan.v0, window, stream.generator(attempt))
            rec = count_cluster(
                sample,
                plan.v0,
                plan.scan_window(attempt),
                window,
                boundary_margin=plan.boundary_margin,
                replicate=index,
            )
        except (GuardViolation, WindowTooSmall) as exc:
            log.debug("replicate %d attempt %d: %s", index, attempt, exc)
            last = exc
            continue
        rec.retries = attempt
        return rec
    raise type(last)(f"replicate {index}: {last} (after {plan.max_attempts} attempts)")


def _run_chunk(args) -> list[ExceedanceRecord]:
    plan, lo, hi = args
    return [simulate_replicate(plan, i) for i in range(lo, hi)]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def simulate_records(plan: ExperimentPlan, n: int, threads: int = 1, start: int = 0) -> list[ExceedanceRecord]:
    """Replicates ``start .. start+n-1``, in index order whatever the worker count."""
    if threads <= 1 or n < 2:
        return _run_chunk((plan, start, start + n))
    n_chunks = min(n, 4 * threads)
    edges = np.linspace(start, start + n, n_chunks + 1).astype(int)
    jobs = [(plan, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        out = []
        for chunk in pool.map(_run_chunk, jobs):
            out.extend(chunk)
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    plan: ExperimentPlan
    stats: ClusterStats
    records: list[ExceedanceRecord] = field(repr=False)
    wall_time: float = 0.0

    @property
    def guard_retries(self) -> dict[str, int]:
        retries = [r.retries for r in self.records]
        return {
            "replicates_retried": int(sum(1 for r in retries if r > 0)),
            "total_retries": int(sum(retries)),
        }


def run(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Run the experiment and, when ``config.out_dir`` is set, write the reports."""
    threads = default_threads() if threads is None else threads
    t0 = time.perf_counter()
    plan = plan_experiment(config)
    log.info(
        "%s: v0=%.6g, scanning window side %.4g, %d replicates (%s window)",
        plan.kind.value,
        plan.v0,
        plan.q_window.width,
        config.replicates,
        config.window_mode,
    )
    records = simulate_records(plan, config.replicates, threads)
    stats = estimate(records, config.k_max, config.subsamples)
    result = ExperimentResult(config, plan, stats, records, time.perf_counter() - t0)
    if config.out_dir is not None:
        from .report import emit_reports

        emit_reports(result, Path(config.out_dir), svg=config.emit_svg)
    return result


class PalmClusterSimulator(BaseEstimator):
    """Parameter container producing Palm cluster sizes for one characteristic.

    ``sample(n)`` returns an integer array of cluster sizes, ready for
    :class:`~palmcluster.estimator.ExtremalIndexEstimator`.
    """

    def __init__(
        self,
        characteristic="inradius-large",
        log_rho=100.0,
        tau=1.0,
        epsilon=0.01,
        a=4.0,
        window_mode="full",
        seed=0,
        n_jobs=1,
    ):
        self.characteristic = characteristic
        self.log_rho = log_rho
        self.tau = tau
        self.epsilon = epsilon
        self.a = a
        self.window_mode = window_mode
        self.seed = seed
        self.n_jobs = n_jobs

    def _config(self, n: int) -> ExperimentConfig:
        return ExperimentConfig(
            characteristic=self.characteristic,
            log_rho=self.log_rho,
            tau=self.tau,
            epsilon=self.epsilon,
            a=self.a,
            window_mode=self.window_mode,
            seed=self.seed,
            replicates=n,
            subsamples=1,
        )

    def sample_records(self, n: int, start: int = 0) -> list[ExceedanceRecord]:
        plan = plan_experiment(self._config(max(n, 1)))
        return simulate_records(plan, n, self.n_jobs, start=start)

    def sample(self, n: int, start: int = 0) -> np.ndarray:
        return np.array([r.cluster_size for r in self.sample_records(n, start)], dtype=np.int64)


def with_mode(config: ExperimentConfig, mode: str) -> ExperimentConfig:
    return replace(config, window_mode=mode)


def monte_carlo_se(sizes) -> float:
    """Standard error of the mean of ``1/k``."""
    inv = 1.0 / np.asarray(sizes, dtype=float)
    if len(inv) < 2:
        return math.inf
    return float(inv.std(ddof=1) / math.sqrt(len(inv)))
