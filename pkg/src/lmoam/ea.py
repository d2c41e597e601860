"""NSGA-II primitives.

Fast nondominated sorting, crowding distance, binary tournament, simulated
binary crossover, polynomial mutation, and (rank, crowding) survival
truncation, shared by the attention-guided optimizer, its inner query
search, and the plain NSGA-II baseline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    Array,
    Bounds,
    CheckpointLogger,
    ConfigurationError,
    ContractViolation,
    EvaluationCounter,
    Evaluator,
    Individual,
    Population,
    Problem,
    RunRecord,
    as_rng,
)

_SBX_EPS = 1e-14


@dataclass(frozen=True)
class VariationConfig:
    """Real-coded variation operator settings.

    `mutation_probability=None` means the field-standard 1/d, resolved
    against the decision-space dimension at the call site.
    """

    crossover_probability: float = 1.0
    crossover_distribution_index: float = 20.0
    mutation_probability: float | None = None
    mutation_distribution_index: float = 20.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ContractViolation("crossover probability must be in [0, 1]")
        if self.crossover_distribution_index <= 0:
            raise ContractViolation("crossover distribution index must be positive")
        if self.mutation_probability is not None and not 0.0 <= self.mutation_probability <= 1.0:
            raise ContractViolation("mutation probability must be in [0, 1]")
        if self.mutation_distribution_index <= 0:
            raise ContractViolation("mutation distribution index must be positive")

    def resolved_mutation_probability(self, d: int) -> float:
        return 1.0 / d if self.mutation_probability is None else self.mutation_probability


@dataclass
class FrontPartition:
    """Population indices partitioned into nondominated fronts, best first."""

    fronts: list[Array]

    def rank_of(self) -> Array:
        n = sum(len(f) for f in self.fronts)
        rank = np.empty(n, dtype=int)
        for r, front in enumerate(self.fronts):
            rank[front] = r
        return rank


def _domination_matrix(objectives: Array) -> Array:
    """dom[i, j] is True when row i Pareto-dominates row j."""
    n = len(objectives)
    dom = np.zeros((n, n), dtype=bool)
    chunk = max(1, int(4_000_000 // max(n, 1)))
    for s in range(0, n, chunk):
        block = objectives[s : s + chunk, None, :]
        le = (block <= objectives[None, :, :]).all(-1)
        lt = (block < objectives[None, :, :]).any(-1)
        dom[s : s + chunk] = le & lt
    return dom


def nondominated_sort(objectives: Array) -> FrontPartition:
    """Partition objective vectors into ranked nondominated fronts.

    Front 0 is the nondominated set of the whole input; every member of a
    later front is dominated by at least one member of the previous front.
    """
    objectives = np.asarray(objectives, dtype=float)
    if objectives.ndim != 2 or objectives.shape[0] == 0:
        raise ContractViolation("nondominated_sort needs a nonempty 2-D objective array")
    dom = _domination_matrix(objectives)
    count = dom.sum(axis=0).astype(np.int64)
    fronts: list[Array] = []
    current = np.flatnonzero(count == 0)
    while current.size:
        fronts.append(current)
        count[current] = -1
        count -= dom[current].sum(axis=0)
        current = np.flatnonzero(count == 0)
    return FrontPartition(fronts)


def nondominated_mask(objectives: Array) -> Array:
    """Boolean mask of rows not dominated by any other row.

    Lexicographic-sweep formulation: a dominating row always sorts before
    the row it dominates, so each row only needs checking against the
    archive built so far. Scales to tens of thousands of rows.
    """
    objectives = np.asarray(objectives, dtype=float)
    n, m = objectives.shape
    order = np.lexsort(objectives.T[::-1])
    ordered = objectives[order]
    keep = np.zeros(n, dtype=bool)
    archive = np.empty((n, m))
    size = 0
    for row_idx in range(n):
        row = ordered[row_idx]
        if size:
            live = archive[:size]
            dominated = ((live <= row).all(1) & (live < row).any(1)).any()
            if dominated:
                continue
        keep[order[row_idx]] = True
        archive[size] = row
        size += 1
    return keep


def crowding_distance(front_objectives: Array) -> Array:
    """NSGA-II crowding distance for one front.

    Per-objective boundary individuals get +inf; interior ones accumulate
    normalized neighbor gaps; a zero-range objective contributes nothing.
    """
    objs = np.asarray(front_objectives, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ContractViolation("crowding_distance needs a nonempty 2-D objective array")
    n = objs.shape[0]
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for j in range(objs.shape[1]):
        order = np.argsort(objs[:, j], kind="stable")
        lo = objs[order[0], j]
        hi = objs[order[-1], j]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if hi > lo:
            gaps = (objs[order[2:], j] - objs[order[:-2], j]) / (hi - lo)
            dist[order[1:-1]] += gaps
    return dist


def sbx_batch(
    parents1: Array,
    parents2: Array,
    cfg: VariationConfig,
    bounds: Bounds,
    rng: np.random.Generator,
) -> tuple[Array, Array]:
    """Bounded simulated binary crossover over paired parent rows."""
    p1 = np.asarray(parents1, dtype=float)
    p2 = np.asarray(parents2, dtype=float)
    if p1.shape != p2.shape:
        raise ContractViolation("parent batches must have matching shapes")
    n, d = p1.shape
    c1 = p1.copy()
    c2 = p2.copy()
    # Draw everything up front so the stream advance depends only on shape.
    do_pair = rng.random(n) <= cfg.crossover_probability
    do_var = rng.random((n, d)) <= 0.5
    u = rng.random((n, d))
    swap = rng.random((n, d)) <= 0.5

    lo = np.minimum(p1, p2)
    hi = np.maximum(p1, p2)
    diff = hi - lo
    active = do_pair[:, None] & do_var & (diff > _SBX_EPS)
    safe_diff = np.where(active, diff, 1.0)
    eta = cfg.crossover_distribution_index
    exponent = 1.0 / (eta + 1.0)

    def _betaq(beta: Array) -> Array:
        alpha = 2.0 - beta ** -(eta + 1.0)
        return np.where(
            u <= 1.0 / alpha,
            (u * alpha) ** exponent,
            (1.0 / (2.0 - u * alpha)) ** exponent,
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        beta_lo = 1.0 + 2.0 * (lo - bounds.lower) / safe_diff
        beta_hi = 1.0 + 2.0 * (bounds.upper - hi) / safe_diff
        child_lo = 0.5 * ((lo + hi) - _betaq(np.maximum(beta_lo, 1.0)) * diff)
        child_hi = 0.5 * ((lo + hi) + _betaq(np.maximum(beta_hi, 1.0)) * diff)
    child_lo = np.clip(child_lo, bounds.lower, bounds.upper)
    child_hi = np.clip(child_hi, bounds.lower, bounds.upper)

    first = np.where(swap, child_hi, child_lo)
    second = np.where(swap, child_lo, child_hi)
    c1[active] = first[active]
    c2[active] = second[active]
    return c1, c2


def sbx_crossover(
    parent1: Array,
    parent2: Array,
    cfg: VariationConfig,
    bounds: Bounds,
    rng: np.random.Generator,
) -> tuple[Array, Array]:
    """Single-pair convenience wrapper around `sbx_batch`."""
    c1, c2 = sbx_batch(
        np.asarray(parent1, dtype=float)[None, :],
        np.asarray(parent2, dtype=float)[None, :],
        cfg,
        bounds,
        rng,
    )
    return c1[0], c2[0]


def mutation_batch(
    decisions: Array,
    cfg: VariationConfig,
    bounds: Bounds,
    rng: np.random.Generator,
) -> Array:
    """Bounded polynomial mutation applied per variable with probability pm."""
    x = np.array(decisions, dtype=float)
    n, d = x.shape
    pm = cfg.resolved_mutation_probability(d)
    do = rng.random((n, d)) <= pm
    r = rng.random((n, d))
    if not do.any():
        return x
    span = bounds.upper - bounds.lower
    delta1 = (x - bounds.lower) / span
    delta2 = (bounds.upper - x) / span
    eta = cfg.mutation_distribution_index
    power = 1.0 / (eta + 1.0)
    lower_branch = r <= 0.5
    val_lo = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - delta1) ** (eta + 1.0)
    val_hi = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - delta2) ** (eta + 1.0)
    deltaq = np.where(lower_branch, val_lo**power - 1.0, 1.0 - val_hi**power)
    mutated = np.clip(x + deltaq * span, bounds.lower, bounds.upper)
    x[do] = mutated[do]
    return x


def polynomial_mutation(
    x: Array,
    cfg: VariationConfig,
    bounds: Bounds,
    rng: np.random.Generator,
) -> Array:
    """Single-vector convenience wrapper around `mutation_batch`."""
    return mutation_batch(np.asarray(x, dtype=float)[None, :], cfg, bounds, rng)[0]


def tournament_indices(
    rank: Array, crowding: Array, count: int, rng: np.random.Generator
) -> Array:
    """Binary tournament winners on (rank asc, crowding desc); ties keep the first draw."""
    n = len(rank)
    a = rng.integers(0, n, size=count)
    b = rng.integers(0, n, size=count)
    b_wins = (rank[b] < rank[a]) | ((rank[b] == rank[a]) & (crowding[b] > crowding[a]))
    return np.where(b_wins, b, a)


def _fronts_for_selection(objectives: Array, target: int | None) -> list[Array]:
    """Ranked fronts, stopping early once `target` indices are covered.

    Small inputs take the exact matrix sort; large merges peel fronts with
    the sweep filter, which avoids the quadratic domination matrix.
    """
    n = len(objectives)
    if target is None or n <= 1500:
        return nondominated_sort(objectives).fronts
    fronts: list[Array] = []
    remaining = np.arange(n)
    covered = 0
    while covered < target and remaining.size:
        mask = nondominated_mask(objectives[remaining])
        front = remaining[mask]
        fronts.append(front)
        covered += front.size
        remaining = remaining[~mask]
    return fronts


def survival_split(objectives: Array, target: int) -> tuple[list[tuple[Array, Array, Array]], int]:
    """Plan a (rank, crowding) truncation to `target` rows.

    Returns per-front tuples (front indices, crowding values, positions
    kept within the front) plus the number of rows actually selected.
    """
    fronts = _fronts_for_selection(objectives, target)
    plan = []
    taken = 0
    for front in fronts:
        crowd = crowding_distance(objectives[front])
        room = target - taken
        if room <= 0:
            break
        if front.size <= room:
            keep = np.arange(front.size)
        else:
            keep = np.argsort(-crowd, kind="stable")[:room]
        plan.append((front, crowd, keep))
        taken += keep.size
        if taken >= target:
            break
    return plan, taken


def survival_indices(objectives: Array, target: int) -> Array:
    """Row indices surviving (rank, crowding) truncation to `target`."""
    plan, _ = survival_split(np.asarray(objectives, dtype=float), target)
    return np.concatenate([front[keep] for front, _, keep in plan]) if plan else np.array([], dtype=int)


def assign_rank_and_crowding(pop: Population) -> None:
    """Populate rank and crowding fields for every individual in place."""
    objectives = pop.objectives()
    partition = nondominated_sort(objectives)
    for r, front in enumerate(partition.fronts):
        crowd = crowding_distance(objectives[front])
        for pos, i in enumerate(front):
            pop[i].rank = r
            pop[i].crowding = float(crowd[pos])


def environmental_selection(pop: Population, target_size: int) -> Population:
    """(rank, crowding) lexicographic truncation to `target_size` survivors.

    Survivors carry rank and crowding computed in the merged population. A
    population already at or below the target is returned unchanged (with a
    warning when strictly smaller).
    """
    if len(pop) < target_size:
        warnings.warn(
            f"population of {len(pop)} is smaller than target {target_size}; returning unchanged",
            stacklevel=2,
        )
        assign_rank_and_crowding(pop)
        return pop
    objectives = pop.objectives()
    plan, _ = survival_split(objectives, target_size)
    survivors = []
    for r, (front, crowd, keep) in enumerate(plan):
        for pos in keep:
            ind = pop[int(front[pos])]
            ind.rank = r
            ind.crowding = float(crowd[pos])
            survivors.append(ind)
    return Population(survivors, pop.bounds)


def first_front_objectives(pop: Population) -> Array:
    """Objective matrix of the population's nondominated front."""
    objectives = pop.objectives()
    return objectives[nondominated_mask(objectives)]


def make_offspring(
    pop: Population,
    count: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
) -> list[Individual]:
    """Binary tournament + SBX + polynomial mutation, yielding `count` children."""
    if any(ind.rank is None or ind.crowding is None for ind in pop):
        assign_rank_and_crowding(pop)
    rank = np.array([ind.rank for ind in pop])
    crowd = np.array([ind.crowding for ind in pop])
    decisions = pop.decisions()
    pairs = (count + 1) // 2
    winners = tournament_indices(rank, crowd, 2 * pairs, rng)
    c1, c2 = sbx_batch(decisions[winners[0::2]], decisions[winners[1::2]], cfg, pop.bounds, rng)
    children = np.empty((2 * pairs, decisions.shape[1]))
    children[0::2] = c1
    children[1::2] = c2
    children = mutation_batch(children[:count], cfg, pop.bounds, rng)
    return [Individual(x) for x in children]


def run_generations(
    pop: Population,
    n: int,
    evaluator: Evaluator,
    tranche: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
    logger: CheckpointLogger | None = None,
) -> Population:
    """Generational loop spending exactly `tranche` evaluations.

    The final batch shrinks to whatever is left so the tranche is consumed
    to zero; survival always truncates back to n. Checkpoints are committed
    after each survival step so logged rows describe a selected population.
    """
    remaining = tranche
    while remaining > 0:
        batch = min(n, remaining)
        offspring = make_offspring(pop, batch, cfg, rng)
        pop = Population(pop.individuals + offspring, pop.bounds)
        evaluator.evaluate(pop)
        pop = environmental_selection(pop, n)
        if logger is not None:
            logger.front = first_front_objectives(pop)
            logger.commit(evaluator.counter.used)
        remaining -= batch
    return pop


def nsga2_run(
    problem: Problem,
    n: int,
    budget: int,
    rng: np.random.Generator | int,
    cfg: VariationConfig | None = None,
    checkpoint_interval: int = 1000,
    metric=None,
) -> tuple[Population, RunRecord]:
    """Standard generational NSGA-II until the evaluation budget is spent.

    `metric`, when given, maps a nondominated-front objective matrix to an
    indicator value logged at every checkpoint boundary.
    """
    if n < 2 or n % 2 != 0:
        raise ContractViolation("population size must be even and at least 2")
    if budget < n:
        raise ConfigurationError(f"budget {budget} cannot cover the initial population of {n}")
    rng = as_rng(rng)
    cfg = cfg or VariationConfig()
    counter = EvaluationCounter(budget)
    record = RunRecord()
    logger = CheckpointLogger(record, checkpoint_interval, budget, metric)
    evaluator = Evaluator(problem, counter)

    pop = Population.random(n, problem.bounds, rng)
    evaluator.evaluate(pop)
    logger.front = first_front_objectives(pop)
    logger.commit(counter.used)

    pop = run_generations(pop, n, evaluator, counter.remaining, cfg, rng, logger)
    record.total_evaluations = counter.used
    return pop, record
