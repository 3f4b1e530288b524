"""
Monte-Carlo runner.

An ExperimentConfig sweeps one axis (IRS size, user distance, cluster layout,
grouping scheme or phase resolution) and averages every requested algorithm
over channel realizations. Each realization is an independent task with its
own derived seeds, so tasks can run in a process pool; results are consumed
in task order and rows are sorted before emission, which keeps the CSV output
byte-identical between serial and parallel runs.
"""
import csv
import dataclasses
import json
import logging
import math
import multiprocessing
import os
import time
from contextlib import suppress
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import filelock
import numpy as np

import irswpcn
from irswpcn.baselines import BaselineKind, BaselineTag, run_baseline, throughput_of
from irswpcn.bca import BcaConfig, optimize
from irswpcn.checksum import build_identifier, derive_seed
from irswpcn.grouping import GroupingScheme, group_users
from irswpcn.model import SystemParams, draw_distances, generate_channels
from irswpcn.sdp import SolverError

logger = logging.getLogger(__name__)

PROPOSED = "proposed"
SWEEPS = ("n", "distance", "clusters", "grouping", "bits")
# Sweeps whose points are compared on the same realizations.
PAIRED_SWEEPS = ("distance", "clusters", "grouping", "bits")
CSV_COLUMNS = (
    "sweep_name",
    "sweep_value",
    "algorithm",
    "mean_bits_per_hz",
    "stderr",
    "n_ok",
    "n_failed",
    "wall_time_s",
)
COLUMN_UNITS = {
    "sweep_value": "per sweep: elements, meters, users per cluster, scheme, bits",
    "mean_bits_per_hz": "bit/s/Hz",
    "stderr": "bit/s/Hz",
    "n_ok": "realizations",
    "n_failed": "realizations",
    "wall_time_s": "seconds per realization",
}
ALL_ALGORITHMS = (
    PROPOSED,
    "optimized-no-ta",
    "random-with-ta",
    "random-no-ta",
    "same-irs-with-ta",
    "upper-bound",
    "discrete-phase-1",
    "discrete-phase-2",
    "discrete-phase-3",
)
# Failures of these are counted against the realization, anything else is a bug.
EXPECTED_FAILURES = (SolverError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class ExperimentConfig:
    base: SystemParams
    sweep_name: str
    sweep_values: Tuple
    realizations: int = 20
    base_seed: int = 0
    algorithms: Tuple[str, ...] = (PROPOSED,)
    output_path: Optional[str] = None
    # Grouping applied to every realization unless the sweep is over schemes.
    grouping: Optional[str] = None
    # Redraw user distances uniformly in [low, high] per realization.
    distance_range: Optional[Tuple[float, float]] = None
    bca: BcaConfig = field(default_factory=BcaConfig)
    parallel: int = 1
    name: str = "experiment"
    # Start the proposed algorithm from the best baseline of the realization.
    paired_init: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.sweep_name not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep_name!r}, expected {SWEEPS}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if not self.algorithms:
            raise ValueError("no algorithms requested")
        if self.parallel < 1:
            raise ValueError(f"parallel must be >= 1, got {self.parallel}")
        if self.distance_range is not None:
            low, high = self.distance_range
            if not 0 < low <= high:
                raise ValueError(f"bad distance range {self.distance_range}")
        for value in self.sweep_values:
            self.point(value)
        for name in self.algorithms:
            _algorithm_kind(name, self.sweep_name)

    def point(self, value):
        """(SystemParams, grouping name, bit count) of one sweep value."""
        params, grouping, bits = self.base, self.grouping, None
        if self.sweep_name == "n":
            params = params.replace(N=int(value))
        elif self.sweep_name == "distance":
            params = params.replace(d_user=float(value))
        elif self.sweep_name == "clusters":
            params = params.replace(clusters=tuple(int(m) for m in value))
        elif self.sweep_name == "grouping":
            grouping = GroupingScheme.parse(value).name
        else:
            bits = int(value)
            if bits < 1:
                raise ValueError(f"bit counts must be >= 1, got {bits}")
        return params, grouping, bits

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["base"] = dataclasses.asdict(self.base)
        return json.loads(json.dumps(d, default=str))


@dataclass(frozen=True)
class ResultRow:
    sweep_name: str
    sweep_value: str
    algorithm: str
    mean_throughput: float
    std_error: float
    n_ok: int
    n_failed: int
    wall_time_s: float = 0.0

    @property
    def realizations(self):
        return self.n_ok + self.n_failed


@dataclass(frozen=True)
class RealizationOutcome:
    sweep_index: int
    realization: int
    throughput: Dict[str, float]
    seconds: Dict[str, float]
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


def _algorithm_kind(name, sweep_name=None):
    """None for the proposed algorithm, else the BaselineKind."""
    if name == PROPOSED:
        return None
    if name == BaselineTag.DISCRETE_PHASE.value:
        if sweep_name != "bits":
            raise ValueError("'discrete-phase' without a bit count needs a bits sweep")
        return BaselineKind(BaselineTag.DISCRETE_PHASE, 1)
    kind = BaselineKind.parse(name)
    if sweep_name == "bits" and kind.tag is BaselineTag.DISCRETE_PHASE:
        raise ValueError(
            f"{name!r} fixes its bit count; a bits sweep takes 'discrete-phase'"
        )
    return kind


def format_value(value):
    if isinstance(value, (list, tuple)):
        return "-".join(str(v) for v in value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def realization_seeds(config, sweep_index, realization):
    """
    Seeds of one task. Sweeps that keep N share them across sweep points, so
    every point of a realization sees the same small-scale fading.
    """
    if config.sweep_name in PAIRED_SWEEPS:
        parts = (config.base_seed, "paired", realization)
    else:
        parts = (config.base_seed, sweep_index, realization)
    return {
        purpose: derive_seed(*parts, purpose)
        for purpose in ("channels", "init", "grouping", "distances")
    }


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


def run_realization(config: ExperimentConfig, sweep_index, realization):
    """
    Every requested algorithm on one channel realization. Baselines run first;
    the proposed algorithm then starts from the best baseline solution (when
    `paired_init`), and the discrete-phase and upper-bound results are derived
    from the proposed solution.
    """
    seeds = realization_seeds(config, sweep_index, realization)
    params, grouping, bits = config.point(config.sweep_values[sweep_index])
    bca = dataclasses.replace(config.bca, init_seed=seeds["init"])
    throughput, seconds = {}, {}
    try:
        if config.distance_range is not None:
            low, high = config.distance_range
            params = draw_distances(params, low, high, seeds["distances"])
        chans = generate_channels(params, seeds["channels"])
        if grouping is not None:
            scheme = GroupingScheme.parse(grouping, seed=seeds["grouping"])
            assignment = group_users(chans, scheme, params.K, params.clusters)
            chans = chans.regroup(assignment)

        kinds = {
            name: _algorithm_kind(name, config.sweep_name)
            for name in config.algorithms
        }
        if bits is not None:
            kinds = {
                name: BaselineKind(BaselineTag.DISCRETE_PHASE, bits)
                if kind is not None and kind.tag is BaselineTag.DISCRETE_PHASE
                else kind
                for name, kind in kinds.items()
            }
        derived = {BaselineTag.DISCRETE_PHASE, BaselineTag.UPPER_BOUND}
        solutions = []
        for name, kind in kinds.items():
            if kind is None or kind.tag in derived:
                continue
            result, seconds[name] = _timed(run_baseline, kind, params, chans, bca)
            throughput[name] = throughput_of(result)
            solutions.append(result)

        proposed = None
        if len(throughput) < len(kinds):
            initial = None
            if config.paired_init and solutions:
                initial = max(solutions, key=lambda s: s.throughput)
            (proposed, _), elapsed = _timed(optimize, params, chans, bca, initial)
            if PROPOSED in kinds:
                throughput[PROPOSED] = proposed.throughput
                seconds[PROPOSED] = elapsed

        for name, kind in kinds.items():
            if kind is not None and kind.tag in derived:
                result, seconds[name] = _timed(
                    run_baseline, kind, params, chans, bca, proposed
                )
                throughput[name] = throughput_of(result)
    except EXPECTED_FAILURES as e:
        logger.warning(
            f"realization {realization} of sweep point {sweep_index} excluded: "
            f"{type(e).__name__}: {e}"
        )
        return RealizationOutcome(
            sweep_index, realization, {}, {}, f"{type(e).__name__}: {e}"
        )
    return RealizationOutcome(sweep_index, realization, throughput, seconds)


def _run_task(task):
    config, sweep_index, realization, settings = task
    irswpcn.settings.update(settings)
    return run_realization(config, sweep_index, realization)


def run_realizations(config: ExperimentConfig) -> List[RealizationOutcome]:
    tasks = [
        (config, i, r, dict(irswpcn.settings))
        for i in range(len(config.sweep_values))
        for r in range(config.realizations)
    ]
    logger.info(
        f"{config.name}: {len(tasks)} realizations over "
        f"{len(config.sweep_values)} {config.sweep_name} values"
    )
    if config.parallel > 1:
        with multiprocessing.Pool(config.parallel) as pool:
            # imap keeps task order, so aggregation never depends on scheduling
            return list(pool.imap(_run_task, tasks))
    return [_run_task(task) for task in tasks]


def aggregate(config: ExperimentConfig, outcomes) -> List[ResultRow]:
    record_wall_time = irswpcn.settings["record_wall_time"]
    rows = []
    for i, value in enumerate(config.sweep_values):
        point = [o for o in outcomes if o.sweep_index == i]
        ok = [o for o in point if o.ok]
        n_failed = len(point) - len(ok)
        for name in sorted(config.algorithms):
            values = np.array([o.throughput[name] for o in ok], dtype=float)
            mean = float(np.mean(values)) if values.size else 0.0
            stderr = (
                float(np.std(values, ddof=1) / math.sqrt(values.size))
                if values.size > 1
                else 0.0
            )
            wall = 0.0
            if record_wall_time and ok:
                wall = float(np.mean([o.seconds[name] for o in ok]))
            rows.append(
                ResultRow(
                    sweep_name=config.sweep_name,
                    sweep_value=format_value(value),
                    algorithm=name,
                    mean_throughput=mean,
                    std_error=stderr,
                    n_ok=len(ok),
                    n_failed=n_failed,
                    wall_time_s=wall,
                )
            )
    return rows


def run_monte_carlo(config: ExperimentConfig) -> List[ResultRow]:
    start = time.perf_counter()
    outcomes = run_realizations(config)
    rows = aggregate(config, outcomes)
    elapsed = time.perf_counter() - start
    failed = sum(not o.ok for o in outcomes)
    logger.info(
        f"{config.name}: done in {elapsed:.1f}s, {failed} of {len(outcomes)} "
        "realizations excluded"
    )
    if config.output_path:
        emit(config, rows, elapsed)
    return rows


def write_rows(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.sweep_name,
                row.sweep_value,
                row.algorithm,
                f"{row.mean_throughput:.12g}",
                f"{row.std_error:.12g}",
                row.n_ok,
                row.n_failed,
                f"{row.wall_time_s:.12g}",
            ]
        )


def write_csv(rows, path):
    with open(path, "w", newline="") as f:
        write_rows(rows, f)


def metadata_path(csv_path):
    return os.path.splitext(csv_path)[0] + ".meta.json"


def emit(config: ExperimentConfig, rows, elapsed):
    """Write the CSV and its metadata sidecar under a file lock."""
    path = os.path.abspath(config.output_path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    lock_path = path + irswpcn.settings["lock_suffix"]
    meta = dict(
        config=config.to_dict(),
        columns=COLUMN_UNITS,
        distance_policy=(
            "redrawn per realization from the derived 'distances' seed"
            if config.distance_range is not None
            else "fixed by the system parameters"
        ),
        seed_derivation=(
            "md5(json([base_seed, 'paired', realization, purpose]))"
            if config.sweep_name in PAIRED_SWEEPS
            else "md5(json([base_seed, sweep_index, realization, purpose]))"
        ),
        elapsed_s=elapsed,
        version=irswpcn.__version__,
        build_identifier=build_identifier(),
    )
    with filelock.FileLock(lock_path, timeout=irswpcn.settings["lock_timeout"]):
        write_csv(rows, path)
        with open(metadata_path(path), "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
    with suppress(OSError):
        os.remove(lock_path)
    logger.info(f"wrote {len(rows)} rows to {path}")


def _desk_base(**overrides):
    fields = dict(N=8, clusters=(2, 2, 2))
    fields.update(overrides)
    return SystemParams.evaluation_defaults(**fields)


def presets(name, n_list=None, **options) -> List[ExperimentConfig]:
    """
    Desk-scale versions of the evaluation figures. `options` override any
    ExperimentConfig field (realizations, base_seed, algorithms, parallel,
    output_path); output_path is treated as a directory.
    """
    n_list = tuple(n_list or (4, 8, 16))
    out_dir = options.pop("output_path", None)
    algorithms = options.pop("algorithms", None)

    def config(tag, base, sweep_name, values, default_algorithms, **fields):
        output = os.path.join(out_dir, f"{tag}.csv") if out_dir else None
        fields.update(options)
        return ExperimentConfig(
            base=base,
            sweep_name=sweep_name,
            sweep_values=values,
            algorithms=tuple(algorithms or default_algorithms),
            output_path=output,
            name=tag,
            **fields,
        )

    if name == "fig2a":
        return [
            config(name, _desk_base(), "n", n_list, ALL_ALGORITHMS, grouping="random")
        ]
    if name == "fig2b":
        values = (2.5, 5.0, 7.5, 10.0)
        return [
            config(
                name,
                _desk_base(),
                "distance",
                values,
                ALL_ALGORITHMS,
                grouping="random",
            )
        ]
    if name == "fig2c":
        return [
            config(
                f"{name}-n{n}",
                _desk_base(N=n),
                "grouping",
                ("lcsd", "random", "scsd"),
                (PROPOSED,),
                distance_range=(5.0, 15.0),
            )
            for n in n_list
        ]
    if name == "fig2d":
        setups = ((1,) * 6, (2, 2, 2), (6,))
        return [
            config(
                f"{name}-n{n}",
                _desk_base(N=n),
                "clusters",
                setups,
                (PROPOSED,),
                grouping="random",
            )
            for n in n_list
        ]
    if name == "bits":
        return [
            config(name, _desk_base(), "bits", (1, 2, 3), (PROPOSED, "discrete-phase"))
        ]
    raise ValueError(f"unknown preset {name!r}, expected one of {PRESETS}")


PRESETS = ("fig2a", "fig2b", "fig2c", "fig2d", "bits")
