"""Sweep execution: schedules in, per-point records and CSV tables out.

The engine guarantees that a configuration point (axis1, axis2) evaluated
under the same shared config yields the same record no matter which sweep it
appears in: composite schedules, plain grids and contour branches all route
through the same family adapters, whose caches are keyed by configuration
alone. That is what lets a composite curve be checked against the
concatenation of its single-axis grids bit for bit.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dataset import Dataset
from ..errors import ScheduleError
from ..tableio import write_csv
from .families import FAMILY_RUNNERS, PointEval
from .schedule import AXES, AXIS2_INIT, SweepConfig, SweepSchedule, composite_schedule

SWEEP_HEADER = [
    "point_index",
    "axis1_name",
    "axis1_value",
    "axis2_name",
    "axis2_value",
    "raw_params",
    "train_mse",
    "test_mse",
    "test_zero_one",
    "p_train",
    "p_test",
    "seed",
]

THREADS_ENV = "SMOOTHERLAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else SMOOTHERLAB_THREADS, else cores."""
    if threads is not None:
        if threads < 1:
            raise ScheduleError(f"threads must be >= 1, got {threads}")
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ScheduleError(f"{THREADS_ENV}={env!r} is not an integer") from None
        if value < 1:
            raise ScheduleError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _pool_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------- records


@dataclass
class SweepRecord:
    point_index: int
    axis1_name: str
    axis1_value: int
    axis2_name: str
    axis2_value: int
    raw_params: int
    train_mse: float
    test_mse: float
    test_zero_one: float
    p_train: float
    p_test: float
    seed: int
    wall_time: float = 0.0  # kept in memory only, not serialized

    def row(self) -> list:
        return [getattr(self, name) for name in SWEEP_HEADER]


@dataclass
class SweepResult:
    family: str
    schedule: SweepSchedule
    records: list[SweepRecord] = field(default_factory=list)

    @property
    def test_mse(self) -> np.ndarray:
        return np.array([r.test_mse for r in self.records])

    @property
    def train_mse(self) -> np.ndarray:
        return np.array([r.train_mse for r in self.records])

    @property
    def p_test(self) -> np.ndarray:
        return np.array([r.p_test for r in self.records])

    @property
    def p_train(self) -> np.ndarray:
        return np.array([r.p_train for r in self.records])

    def write_csv(self, path) -> None:
        write_csv(path, SWEEP_HEADER, [r.row() for r in self.records])


def _record(i, names, state, seed, ev: PointEval, wall) -> SweepRecord:
    return SweepRecord(
        point_index=i,
        axis1_name=names[0],
        axis1_value=state[0],
        axis2_name=names[1],
        axis2_value=state[1],
        raw_params=ev.raw_params,
        train_mse=ev.train_mse,
        test_mse=ev.test_mse,
        test_zero_one=ev.test_zero_one,
        p_train=ev.p_train,
        p_test=ev.p_test,
        seed=seed,
        wall_time=wall,
    )


# --------------------------------------------------------------------------- running


def _build_family(schedule: SweepSchedule, train: Dataset, test: Dataset, states):
    runner = FAMILY_RUNNERS[schedule.family]
    return runner(train, test, schedule.shared, states)


def _run_states(family, states, threads):
    """Prefit (possibly in parallel), then evaluate each state."""
    tasks = family.prefit_tasks()
    if tasks:
        for key, value in _pool_map(lambda t: t(), tasks, threads):
            family.store(key, value)

    def one(state):
        start = time.perf_counter()
        ev = family.evaluate(*state)
        return ev, time.perf_counter() - start

    if family.parallel_points:
        return _pool_map(one, states, threads)
    return [one(state) for state in states]


def run_sweep(
    schedule: SweepSchedule,
    train: Dataset,
    test: Dataset,
    threads: int | None = None,
) -> SweepResult:
    """Evaluate a composite schedule point by point, in schedule order."""
    schedule.validate()
    threads = resolve_threads(threads)
    states = schedule.expand()
    family = _build_family(schedule, train, test, states)
    names = AXES[schedule.family]
    seed = schedule.shared.base_seed
    result = SweepResult(family=schedule.family, schedule=schedule)
    for i, (state, (ev, wall)) in enumerate(
        zip(states, _run_states(family, states, threads))
    ):
        result.records.append(_record(i, names, state, seed, ev, wall))
    return result


def run_grid(
    family: str,
    axis1_values,
    axis2_values,
    train: Dataset,
    test: Dataset,
    shared: SweepConfig | None = None,
    threads: int | None = None,
) -> SweepResult:
    """Full cross product of the two axes, axis1-major point order."""
    shared = shared if shared is not None else SweepConfig()
    if not len(axis1_values) or not len(axis2_values):
        raise ScheduleError("grid axes must both be non-empty")
    names = AXES[family]
    # A grid is not expressible as one composite walk, so build the state
    # list directly and push the values through a schedule for validation.
    states = [(int(a1), int(a2)) for a1 in axis1_values for a2 in axis2_values]
    probe = SweepSchedule(
        family=family,
        points=[(names[0], a1) for a1 in axis1_values]
        + [(names[1], a2) for a2 in axis2_values],
        shared=shared,
    )
    probe.validate()
    threads = resolve_threads(threads)
    runner = FAMILY_RUNNERS[family]
    fam = runner(train, test, shared, states)
    result = SweepResult(family=family, schedule=probe)
    for i, (state, (ev, wall)) in enumerate(
        zip(states, _run_states(fam, states, threads))
    ):
        result.records.append(_record(i, names, state, shared.base_seed, ev, wall))
    return result


# --------------------------------------------------------------------------- composite studies


def peak_move(
    family: str,
    switch_values,
    train: Dataset,
    test: Dataset,
    shared: SweepConfig | None = None,
    axis1_grid=None,
    axis2_values=None,
    threads: int | None = None,
) -> list[SweepResult]:
    """One composite sweep per switch point.

    Each sweep walks axis 1 up to its switch value, then continues along
    axis 2 with axis 1 pinned, so the interpolation peak sits wherever the
    switch was placed.
    """
    shared = shared if shared is not None else SweepConfig()
    if axis1_grid is None or axis2_values is None:
        raise ScheduleError("peak_move needs explicit axis1_grid and axis2_values")
    results = []
    for switch in switch_values:
        axis1_leg = [v for v in axis1_grid if v < switch] + [int(switch)]
        schedule = composite_schedule(family, axis1_leg, list(axis2_values), shared=shared)
        results.append(run_sweep(schedule, train, test, threads=threads))
    return results


def multiple_descent(
    schedule: SweepSchedule,
    train: Dataset,
    test: Dataset,
    threads: int | None = None,
) -> SweepResult:
    """Run a schedule that alternates axes more than once.

    Requires at least two switch points; each return to the first axis sets
    up another ascent toward interpolation, hence another peak.
    """
    schedule.validate()
    if len(schedule.switch_indices()) < 2:
        raise ScheduleError(
            "multiple descent needs a schedule with at least two axis switches"
        )
    return run_sweep(schedule, train, test, threads=threads)


@dataclass
class BranchRecord:
    branch: str
    record: SweepRecord

    def row(self) -> list:
        return [self.branch] + self.record.row()


@dataclass
class BackToUResult:
    family: str
    records: list[BranchRecord] = field(default_factory=list)

    def branch(self, name: str) -> list[SweepRecord]:
        return [br.record for br in self.records if br.branch == name]

    def branch_names(self) -> list[str]:
        seen = []
        for br in self.records:
            if br.branch not in seen:
                seen.append(br.branch)
        return seen

    def write_csv(self, path) -> None:
        write_csv(path, ["branch"] + SWEEP_HEADER, [br.row() for br in self.records])


def back_to_u(
    family: str,
    train: Dataset,
    test: Dataset,
    axis1_values,
    axis2_values,
    shared: SweepConfig | None = None,
    threads: int | None = None,
) -> BackToUResult:
    """Composite sweep plus constant-axis-2 contours.

    Branch "axis1" is the first leg of the composite walk, branch "axis2" the
    second. For every axis-2 value visited, a contour branch re-walks the
    axis-1 grid with axis 2 held fixed; overlaying the contours recovers a
    family of classical U-shaped curves through the composite picture.
    """
    shared = shared if shared is not None else SweepConfig()
    axis1_values = [int(v) for v in axis1_values]
    axis2_values = [int(v) for v in axis2_values]
    names = AXES[family]
    a2_init = AXIS2_INIT[family]
    a1_top = axis1_values[-1]

    labeled: list[tuple[str, tuple[int, int]]] = []
    for a1 in axis1_values:
        labeled.append(("axis1", (a1, a2_init)))
    for a2 in axis2_values:
        labeled.append(("axis2", (a1_top, a2)))
    for a2 in axis2_values:
        name = f"contour_{names[1]}={a2}"
        for a1 in axis1_values:
            labeled.append((name, (a1, a2)))

    probe = composite_schedule(family, axis1_values, axis2_values, shared=shared)
    probe.validate()
    threads = resolve_threads(threads)
    states = [state for _, state in labeled]
    fam = FAMILY_RUNNERS[family](train, test, shared, states)
    result = BackToUResult(family=family)
    evals = _run_states(fam, states, threads)
    index_in_branch: dict[str, int] = {}
    for (branch, state), (ev, wall) in zip(labeled, evals):
        i = index_in_branch.get(branch, 0)
        index_in_branch[branch] = i + 1
        result.records.append(
            BranchRecord(branch, _record(i, names, state, shared.base_seed, ev, wall))
        )
    return result


# --------------------------------------------------------------------------- noise band


def median_curve(curves) -> np.ndarray:
    """Pointwise median across per-seed sweep curves (rows = seeds)."""
    stacked = np.asarray(curves, dtype=float)
    if stacked.ndim != 2:
        raise ScheduleError(f"expected a 2-d stack of curves, got {stacked.shape}")
    return np.median(stacked, axis=0)


def seed_standard_error(curves) -> np.ndarray:
    stacked = np.asarray(curves, dtype=float)
    k = stacked.shape[0]
    if k < 2:
        return np.zeros(stacked.shape[1])
    return np.std(stacked, axis=0, ddof=1) / np.sqrt(k)


def increase_violations(
    values, standard_errors=None, rel_tol: float = 0.02
) -> list[int]:
    """Indices i where values[i] rises above values[i-1] beyond the noise band.

    A step counts as a violation only when the increase exceeds rel_tol of the
    previous value *and* (when per-point standard errors are supplied) one
    standard error of the larger point. Small wobbles within either band are
    treated as seed noise.
    """
    values = np.asarray(values, dtype=float)
    out = []
    for i in range(1, values.size):
        step = values[i] - values[i - 1]
        if step <= 0:
            continue
        beyond_rel = step > rel_tol * abs(values[i - 1])
        beyond_se = True
        if standard_errors is not None:
            beyond_se = step > float(np.asarray(standard_errors)[i])
        if beyond_rel and beyond_se:
            out.append(i)
    return out


def replicated_sweep(
    schedule: SweepSchedule,
    train: Dataset,
    test: Dataset,
    seeds,
    threads: int | None = None,
) -> list[SweepResult]:
    """The same schedule under several base seeds (for noise-band medians)."""
    return [
        run_sweep(schedule.with_seed(int(s)), train, test, threads=threads)
        for s in seeds
    ]
