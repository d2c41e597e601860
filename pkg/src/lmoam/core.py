"""Shared optimizer primitives.

Bounds handling, individuals and populations, the problem interface,
evaluation accounting, and seeded random streams. Every stochastic
operation in this package receives an explicit `numpy.random.Generator`
created by `make_rng`, and every problem evaluation flows through an
`EvaluationCounter` so budget bookkeeping is exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

Array = np.ndarray


class ContractViolation(ValueError):
    """An operation was called outside its documented preconditions."""


class ConfigurationError(ValueError):
    """A problem, run, or experiment configuration is invalid."""


class BudgetExhausted(RuntimeError):
    """More evaluations were requested than the run budget allows."""

    def __init__(self, requested: int, available: int) -> None:
        super().__init__(
            f"requested {requested} evaluations but only {available} remain"
        )
        self.requested = requested
        self.available = available


def make_rng(seed: int) -> np.random.Generator:
    """Seeded random stream for one run.

    PCG64 produces the same draw sequence for the same seed on every
    platform, which the reproducibility tests rely on.
    """
    return np.random.Generator(np.random.PCG64(int(seed)))


def as_rng(rng_or_seed: np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return make_rng(rng_or_seed)


@dataclass
class Bounds:
    """Per-variable box constraints with lower[i] < upper[i] everywhere."""

    lower: Array
    upper: Array

    def __post_init__(self) -> None:
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ContractViolation("lower and upper must be 1-D and equal length")
        if not np.all(self.lower < self.upper):
            raise ContractViolation("every lower bound must be strictly below its upper bound")

    @property
    def d(self) -> int:
        return self.lower.size


def clamp(x: Array, bounds: Bounds) -> Array:
    """Project a decision vector componentwise into the box.

    In-bounds components pass through bit-unchanged, so clamping is
    idempotent and identity attention survives a clamp exactly.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != bounds.d:
        raise ContractViolation("vector length does not match bounds dimension")
    return np.clip(x, bounds.lower, bounds.upper)


def dominates(a: Array, b: Array) -> bool:
    """Pareto dominance for minimization: a no worse everywhere, better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractViolation("objective vectors must have equal length")
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass
class Individual:
    """A decision vector plus cached evaluation and selection metadata.

    `objective is None` marks an unevaluated individual; rank and crowding
    are only meaningful relative to the population they were computed in.
    """

    decision: Array
    objective: Array | None = None
    rank: int | None = None
    crowding: float | None = None

    def __post_init__(self) -> None:
        self.decision = np.asarray(self.decision, dtype=float)

    @property
    def evaluated(self) -> bool:
        return self.objective is not None


class Population:
    """An ordered multiset of individuals sharing one problem's bounds."""

    def __init__(self, individuals: Iterable[Individual], bounds: Bounds) -> None:
        self.individuals = list(individuals)
        self.bounds = bounds

    @classmethod
    def random(cls, n: int, bounds: Bounds, rng: np.random.Generator) -> "Population":
        span = bounds.upper - bounds.lower
        decisions = bounds.lower + rng.random((n, bounds.d)) * span
        return cls([Individual(x) for x in decisions], bounds)

    def __len__(self) -> int:
        return len(self.individuals)

    def __iter__(self) -> Iterator[Individual]:
        return iter(self.individuals)

    def __getitem__(self, i: int) -> Individual:
        return self.individuals[i]

    def decisions(self) -> Array:
        return np.stack([ind.decision for ind in self.individuals])

    def objectives(self) -> Array:
        if any(not ind.evaluated for ind in self.individuals):
            raise ContractViolation("population contains unevaluated individuals")
        return np.stack([ind.objective for ind in self.individuals])


class Problem:
    """Box-bounded minimization problem.

    Subclasses set `name`, `m`, `d`, `bounds` and override at least one of
    `evaluate` / `evaluate_batch` (each default delegates to the other).
    Evaluation must be pure: identical input, identical output.
    """

    name: str
    m: int
    d: int
    bounds: Bounds

    def evaluate(self, x: Array) -> Array:
        return self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0]

    def evaluate_batch(self, decisions: Array) -> Array:
        decisions = np.asarray(decisions, dtype=float)
        return np.stack([self.evaluate(row) for row in decisions])


@dataclass
class EvaluationCounter:
    """Budget ledger for one run; the only way evaluations are accounted."""

    total: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.total - self.used

    def consume(self, count: int) -> None:
        if count > self.remaining:
            raise BudgetExhausted(count, self.remaining)
        self.used += count


def evaluate_population(pop: Population, problem: Problem, counter: EvaluationCounter) -> int:
    """Evaluate every unevaluated individual, charging the counter exactly.

    Refuses up front (raising BudgetExhausted) when the remaining budget
    cannot cover all pending individuals; already-evaluated individuals are
    never re-evaluated. Returns the number of fresh evaluations.
    """
    pending = [i for i, ind in enumerate(pop) if not ind.evaluated]
    if not pending:
        return 0
    counter.consume(len(pending))
    decisions = np.stack([pop[i].decision for i in pending])
    objectives = problem.evaluate_batch(decisions)
    for row, i in enumerate(pending):
        pop[i].objective = np.array(objectives[row], dtype=float)
    return len(pending)


class Evaluator:
    """Single gate through which all of a run's evaluations flow.

    Nothing else may call `problem.evaluate`, so the counter's total is the
    run's exact evaluation count.
    """

    def __init__(self, problem: Problem, counter: EvaluationCounter) -> None:
        self.problem = problem
        self.counter = counter

    def evaluate(self, pop: Population) -> int:
        return evaluate_population(pop, self.problem, self.counter)


@dataclass
class Checkpoint:
    evaluations: int
    igd: float
    elapsed_ms: float


@dataclass
class RunRecord:
    """Append-only log of per-run checkpoints plus the final ledger total."""

    checkpoints: list[Checkpoint] = field(default_factory=list)
    total_evaluations: int = 0


class CheckpointLogger:
    """Appends RunRecord rows as the evaluation count crosses boundaries.

    A row lands at every multiple of `interval` up to `budget`, plus one
    final row at exact budget exhaustion when the budget is not itself a
    multiple, so a fully consumed run yields ceil(budget / interval) rows.
    All boundaries crossed by a single batch share that batch's indicator
    value. Wall time is monotonic-clock milliseconds since construction.
    """

    def __init__(
        self,
        record: RunRecord,
        interval: int,
        budget: int,
        metric: Callable[[Array], float] | None = None,
    ) -> None:
        if interval < 1:
            raise ConfigurationError("checkpoint interval must be >= 1")
        self.record = record
        self.interval = int(interval)
        self.budget = int(budget)
        self.metric = metric
        self.front: Array | None = None
        self._start = time.monotonic()
        self._logged_through = 0

    def commit(self, used: int) -> None:
        targets = []
        t = (self._logged_through // self.interval + 1) * self.interval
        while t <= min(used, self.budget):
            targets.append(t)
            t += self.interval
        if used >= self.budget and self._logged_through < self.budget:
            if not targets or targets[-1] != self.budget:
                targets.append(self.budget)
        if not targets:
            return
        value = float("nan")
        if self.metric is not None and self.front is not None:
            value = float(self.metric(self.front))
        elapsed = (time.monotonic() - self._start) * 1000.0
        for t in targets:
            self.record.checkpoints.append(Checkpoint(t, value, elapsed))
        self._logged_through = targets[-1]
