import numpy as np
import pytest

from lmoam.core import (
    Bounds,
    BudgetExhausted,
    CheckpointLogger,
    ContractViolation,
    EvaluationCounter,
    Evaluator,
    Individual,
    Population,
    Problem,
    RunRecord,
    clamp,
    dominates,
    evaluate_population,
    make_rng,
)


class SquareSum(Problem):
    """Tiny bi-objective test problem: (sum x^2, sum (x-1)^2)."""

    def __init__(self, d=3):
        self.name = "squaresum"
        self.m = 2
        self.d = d
        self.bounds = Bounds(np.zeros(d), np.ones(d))
        self.calls = 0

    def evaluate_batch(self, decisions):
        self.calls += decisions.shape[0]
        return np.stack(
            [(decisions**2).sum(1), ((decisions - 1.0) ** 2).sum(1)], axis=1
        )


def random_population(n, d, rng, evaluated=False):
    bounds = Bounds(np.zeros(d), np.ones(d))
    pop = Population.random(n, bounds, rng)
    if evaluated:
        evaluate_population(pop, SquareSum(d), EvaluationCounter(n))
    return pop


class TestDominates:
    def test_strict_improvement_in_one_objective(self):
        assert dominates((1, 2), (2, 2))

    def test_irreflexive(self):
        assert not dominates((1, 2), (1, 2))

    def test_incomparable_pair(self):
        assert not dominates((1, 3), (3, 1))

    def test_length_mismatch(self):
        with pytest.raises(ContractViolation):
            dominates((1, 2), (1, 2, 3))

    def test_strict_partial_order_on_random_triples(self):
        # Discretized values force plenty of ties and comparable pairs.
        rng = make_rng(42)
        for _ in range(2000):
            a, b, c = rng.integers(0, 4, size=(3, 3)).astype(float)
            assert not dominates(a, a)
            if dominates(a, b):
                assert not dominates(b, a)
            if dominates(a, b) and dominates(b, c):
                assert dominates(a, c)


class TestClamp:
    def test_identity_in_bounds(self):
        bounds = Bounds([0.0], [1.0])
        assert clamp(np.array([0.5]), bounds) == pytest.approx([0.5])

    def test_upper_clamp(self):
        bounds = Bounds([0.0], [1.0])
        assert clamp(np.array([1.8]), bounds) == pytest.approx([1.0])

    def test_lower_clamp(self):
        bounds = Bounds([0.0, 0.0], [1.0, 1.0])
        assert clamp(np.array([-3.0, 0.2]), bounds) == pytest.approx([0.0, 0.2])

    def test_idempotent(self):
        rng = make_rng(3)
        bounds = Bounds(np.full(5, -1.0), np.full(5, 2.0))
        for _ in range(200):
            x = rng.normal(size=5) * 4
            once = clamp(x, bounds)
            assert np.array_equal(clamp(once, bounds), once)

    def test_in_bounds_values_pass_through_bit_exact(self):
        rng = make_rng(4)
        bounds = Bounds(np.zeros(8), np.ones(8))
        x = rng.random(8)
        assert np.array_equal(clamp(x, bounds), x)


class TestBounds:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(ContractViolation):
            Bounds([0.0, 1.0], [1.0, 1.0])

    def test_dimension(self):
        assert Bounds(np.zeros(7), np.ones(7)).d == 7


class TestRng:
    def test_same_seed_same_million_draws(self):
        a = make_rng(123456789).random(1_000_000)
        b = make_rng(123456789).random(1_000_000)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(make_rng(1).random(100), make_rng(2).random(100))


class TestEvaluatePopulation:
    def test_budget_decrement(self):
        rng = make_rng(0)
        pop = random_population(5, 3, rng)
        counter = EvaluationCounter(10)
        fresh = evaluate_population(pop, SquareSum(), counter)
        assert fresh == 5
        assert counter.remaining == 5

    def test_noop_when_all_evaluated(self):
        rng = make_rng(0)
        pop = random_population(5, 3, rng, evaluated=True)
        counter = EvaluationCounter(10)
        problem = SquareSum()
        assert evaluate_population(pop, problem, counter) == 0
        assert counter.remaining == 10
        assert problem.calls == 0

    def test_budget_exhausted_signal_names_counts(self):
        rng = make_rng(0)
        pop = random_population(5, 3, rng)
        counter = EvaluationCounter(3)
        with pytest.raises(BudgetExhausted) as err:
            evaluate_population(pop, SquareSum(), counter)
        assert err.value.requested == 5
        assert err.value.available == 3
        assert counter.used == 0  # refusal, not partial evaluation

    def test_only_unevaluated_individuals_cost_budget(self):
        rng = make_rng(1)
        pop = random_population(4, 3, rng, evaluated=True)
        pop.individuals.append(Individual(rng.random(3)))
        counter = EvaluationCounter(10)
        assert evaluate_population(pop, SquareSum(), counter) == 1
        assert counter.used == 1

    def test_objectives_align_with_decisions(self):
        rng = make_rng(2)
        pop = random_population(6, 3, rng)
        evaluate_population(pop, SquareSum(), EvaluationCounter(6))
        problem = SquareSum()
        for ind in pop:
            assert ind.objective == pytest.approx(problem.evaluate(ind.decision))


class TestPopulation:
    def test_objectives_requires_evaluation(self):
        pop = random_population(3, 2, make_rng(0))
        with pytest.raises(ContractViolation):
            pop.objectives()

    def test_random_respects_bounds(self):
        bounds = Bounds(np.full(4, -2.0), np.full(4, 3.0))
        pop = Population.random(50, bounds, make_rng(5))
        decisions = pop.decisions()
        assert (decisions >= -2.0).all() and (decisions <= 3.0).all()


class TestCheckpointLogger:
    def test_rows_at_multiples_plus_endpoint(self):
        record = RunRecord()
        logger = CheckpointLogger(record, interval=1000, budget=2300)
        logger.commit(950)
        logger.commit(1900)
        logger.commit(2300)
        assert [c.evaluations for c in record.checkpoints] == [1000, 2000, 2300]

    def test_row_count_is_ceil_budget_over_interval(self):
        for budget, interval in [(100_000, 1000), (300, 1000), (1500, 1000), (999, 250)]:
            record = RunRecord()
            logger = CheckpointLogger(record, interval, budget)
            step = 37
            used = 0
            while used < budget:
                used = min(budget, used + step)
                logger.commit(used)
            assert len(record.checkpoints) == -(-budget // interval)

    def test_metric_applies_to_supplied_front(self):
        record = RunRecord()
        logger = CheckpointLogger(
            record, interval=10, budget=10, metric=lambda front: float(front.sum())
        )
        logger.front = np.array([[1.0, 2.0]])
        logger.commit(10)
        assert record.checkpoints[0].igd == 3.0


class TestEvaluator:
    def test_counter_is_single_source_of_truth(self):
        problem = SquareSum()
        counter = EvaluationCounter(8)
        evaluator = Evaluator(problem, counter)
        pop = random_population(4, 3, make_rng(7))
        evaluator.evaluate(pop)
        evaluator.evaluate(pop)  # no-op
        assert counter.used == 4
        assert problem.calls == 4
