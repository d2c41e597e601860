"""The attention-guided optimizer's outer loop and inner query search.

Each outer pass selects a value individual, buckets variables by variance,
seeds queries from donor individuals, then alternates two equally sized
evaluation tranches: an inner evolutionary search over query weights
(every query evaluation spawns one steered solution) and a conventional
generational pass over the merged population.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import (
    KeyMatrix,
    Query,
    apply_attention_batch,
    build_key,
    init_queries,
    select_value,
    variance_vector,
)
from .core import (
    Array,
    Bounds,
    CheckpointLogger,
    ConfigurationError,
    EvaluationCounter,
    Evaluator,
    Individual,
    Population,
    Problem,
    RunRecord,
    make_rng,
)
from .ea import (
    VariationConfig,
    assign_rank_and_crowding,
    crowding_distance,
    environmental_selection,
    first_front_objectives,
    mutation_batch,
    nondominated_sort,
    run_generations,
    sbx_batch,
    tournament_indices,
)


@dataclass
class LmoamConfig:
    """Run settings; the defaults match the benchmark protocol."""

    population_size: int = 300
    total_budget: int = 100_000
    inner_budget_fraction: float = 0.05
    query_dimension: int = 5
    query_count: int = 20
    variation: VariationConfig = field(default_factory=VariationConfig)
    query_variation: VariationConfig | None = None
    checkpoint_interval: int = 1000

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ConfigurationError("population size must be at least 2")
        if not 0.0 < self.inner_budget_fraction < 1.0:
            raise ConfigurationError("inner budget fraction must lie strictly in (0, 1)")
        if self.query_count < 2:
            raise ConfigurationError("query count must be at least 2")
        if self.query_dimension < 1:
            raise ConfigurationError("query dimension must be at least 1")
        if self.checkpoint_interval < 1:
            raise ConfigurationError("checkpoint interval must be at least 1")

    @property
    def inner_budget(self) -> int:
        return max(1, round(self.inner_budget_fraction * self.total_budget))

    def resolved_query_variation(self) -> VariationConfig:
        if self.query_variation is not None:
            return self.query_variation
        return VariationConfig(
            crossover_probability=self.variation.crossover_probability,
            crossover_distribution_index=self.variation.crossover_distribution_index,
            mutation_probability=1.0 / self.query_dimension,
            mutation_distribution_index=self.variation.mutation_distribution_index,
        )


@dataclass
class QueryGeneration:
    """One inner-loop batch: evaluated queries and the solutions they spawned.

    queries[i].fitness is exactly solutions[i].objective for every i.
    `survivor_fitness` snapshots the fitness matrix of the query population
    kept after this generation's elitist truncation (None when the tranche
    ended before a selection happened).
    """

    queries: list[Query]
    solutions: list[Individual]
    survivor_fitness: Array | None = None


def _query_bounds(weights: Array) -> Bounds:
    """Search box for query evolution: [0, 2 * max(initial weight, 1)].

    The box always contains every initial query and the identity query,
    keeping ratios near one (the meaningful region) reachable.
    """
    upper = 2.0 * max(1.0, float(np.max(weights)))
    k = weights.shape[1]
    return Bounds(np.zeros(k), np.full(k, upper))


def _evaluate_query_batch(
    weights: Array,
    key: KeyMatrix,
    value: Individual,
    evaluator: Evaluator,
    logger: CheckpointLogger | None,
) -> QueryGeneration:
    decisions = apply_attention_batch(weights, key, value, evaluator.problem.bounds)
    batch = Population([Individual(x) for x in decisions], evaluator.problem.bounds)
    evaluator.evaluate(batch)
    if logger is not None:
        logger.commit(evaluator.counter.used)
    queries = [
        Query(weights=weights[i].copy(), fitness=batch[i].objective)
        for i in range(len(batch))
    ]
    return QueryGeneration(queries=queries, solutions=batch.individuals)


def _query_offspring(
    weights: Array,
    fitness: Array,
    count: int,
    cfg: VariationConfig,
    bounds: Bounds,
    rng: np.random.Generator,
) -> Array:
    partition = nondominated_sort(fitness)
    rank = partition.rank_of()
    crowd = np.empty(len(fitness))
    for front in partition.fronts:
        crowd[front] = crowding_distance(fitness[front])
    pairs = (count + 1) // 2
    winners = tournament_indices(rank, crowd, 2 * pairs, rng)
    c1, c2 = sbx_batch(weights[winners[0::2]], weights[winners[1::2]], cfg, bounds, rng)
    children = np.empty((2 * pairs, weights.shape[1]))
    children[0::2] = c1
    children[1::2] = c2
    return mutation_batch(children[:count], cfg, bounds, rng)


def _elitist_query_selection(weights: Array, fitness: Array, g: int) -> tuple[Array, Array]:
    """Truncate parents plus offspring back to g by (rank, crowding)."""
    partition = nondominated_sort(fitness)
    chosen: list[int] = []
    for front in partition.fronts:
        room = g - len(chosen)
        if room <= 0:
            break
        if front.size <= room:
            chosen.extend(int(i) for i in front)
        else:
            crowd = crowding_distance(fitness[front])
            order = np.argsort(-crowd, kind="stable")[:room]
            chosen.extend(int(front[i]) for i in order)
    idx = np.array(chosen, dtype=int)
    return weights[idx], fitness[idx]


def inner_query_search(
    queries: list[Query],
    key: KeyMatrix,
    value: Individual,
    evaluator: Evaluator,
    tranche: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
    logger: CheckpointLogger | None = None,
) -> list[QueryGeneration]:
    """Evolve query weights for exactly `tranche` evaluations.

    Every generation evaluates one batch of queries by spawning and
    evaluating their steered solutions (one evaluation each), then breeds
    the next batch with tournament + SBX + polynomial mutation in weight
    space and keeps the best g of parents plus offspring. The final batch
    shrinks to whatever budget remains. Returns every generation in order;
    the concatenated solutions are the inner loop's whole output.
    """
    if tranche <= 0:
        return []
    g = len(queries)
    weights = np.stack([q.weights for q in queries])
    bounds = _query_bounds(weights)
    history: list[QueryGeneration] = []

    batch = min(g, tranche)
    generation = _evaluate_query_batch(weights[:batch], key, value, evaluator, logger)
    history.append(generation)
    remaining = tranche - batch
    if batch < g:
        return history
    fitness = np.stack([q.fitness for q in generation.queries])
    generation.survivor_fitness = fitness.copy()

    while remaining > 0:
        batch = min(g, remaining)
        children = _query_offspring(weights, fitness, batch, cfg, bounds, rng)
        generation = _evaluate_query_batch(children, key, value, evaluator, logger)
        history.append(generation)
        remaining -= batch
        if batch < g:
            break
        child_fitness = np.stack([q.fitness for q in generation.queries])
        weights, fitness = _elitist_query_selection(
            np.vstack([weights, children]), np.vstack([fitness, child_fitness]), g
        )
        generation.survivor_fitness = fitness.copy()
    return history


def lmoam_run(
    problem: Problem,
    cfg: LmoamConfig | None = None,
    seed: int = 0,
    metric=None,
) -> tuple[Population, RunRecord]:
    """Full optimizer run: returns the final population and its run record.

    Deterministic for fixed (problem, cfg, seed). `metric`, when given,
    maps a nondominated-front objective matrix to the indicator value
    logged at each checkpoint.
    """
    cfg = cfg or LmoamConfig()
    if cfg.total_budget < cfg.population_size:
        raise ConfigurationError(
            f"budget {cfg.total_budget} cannot cover the initial population of {cfg.population_size}"
        )
    rng = make_rng(seed)
    counter = EvaluationCounter(cfg.total_budget)
    record = RunRecord()
    logger = CheckpointLogger(record, cfg.checkpoint_interval, cfg.total_budget, metric)
    evaluator = Evaluator(problem, counter)
    variation = cfg.variation
    query_variation = cfg.resolved_query_variation()

    pop = Population.random(cfg.population_size, problem.bounds, rng)
    evaluator.evaluate(pop)
    logger.front = first_front_objectives(pop)
    logger.commit(counter.used)

    while counter.remaining > 0:
        assign_rank_and_crowding(pop)
        value = select_value(pop, rng)
        key = build_key(variance_vector(pop), cfg.query_dimension)
        queries = init_queries(pop, key, value, cfg.query_count, rng)

        tranche = min(cfg.inner_budget, counter.remaining)
        history = inner_query_search(
            queries, key, value, evaluator, tranche, query_variation, rng, logger
        )
        generated = [ind for generation in history for ind in generation.solutions]

        pop = Population(pop.individuals + generated, pop.bounds)
        pop = environmental_selection(pop, cfg.population_size)
        logger.front = first_front_objectives(pop)

        tranche = min(cfg.inner_budget, counter.remaining)
        pop = run_generations(pop, cfg.population_size, evaluator, tranche, variation, rng, logger)

    record.total_evaluations = counter.used
    return pop, record
