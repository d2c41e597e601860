import numpy as np
import pytest

from lmoam.core import ConfigurationError, make_rng
from lmoam.lsmop import (
    chaos_subcomponent_lengths,
    front_surface_residual,
    load_front_csv,
    make_problem,
    sample_reference_front,
    save_front_csv,
)

ALL_IDS = range(1, 10)


def exhaustive_nondominance_check(points):
    """Chunked all-pairs oracle, independent of the production sweep filter."""
    n = points.shape[0]
    for start in range(0, n, 512):
        block = points[start : start + 512]
        le = (points[None, :, :] <= block[:, None, :]).all(-1)
        lt = (points[None, :, :] < block[:, None, :]).any(-1)
        dominated = (le & lt).any(axis=1)
        if dominated.any():
            return False
    return True


class TestConstruction:
    def test_named_instances(self):
        problem = make_problem(1, 3, 1000)
        assert (problem.name, problem.m, problem.d) == ("LSMOP1", 3, 1000)
        problem = make_problem(9, 3, 5000)
        assert (problem.name, problem.m, problem.d) == ("LSMOP9", 3, 5000)

    def test_d_not_larger_than_m_rejected(self):
        with pytest.raises(ConfigurationError):
            make_problem(1, 3, 2)

    def test_bad_id_rejected(self):
        for pid in (0, 10, -1):
            with pytest.raises(ConfigurationError):
                make_problem(pid, 3, 100)

    def test_too_few_variables_for_grouping_rejected(self):
        with pytest.raises(ConfigurationError):
            make_problem(1, 3, 10)

    def test_bounds_split_position_and_distance(self):
        problem = make_problem(4, 3, 60)
        assert problem.bounds.lower == pytest.approx(np.zeros(60))
        assert problem.bounds.upper[:2] == pytest.approx([1.0, 1.0])
        assert problem.bounds.upper[2:] == pytest.approx(np.full(58, 10.0))

    def test_groups_tile_the_distance_block(self):
        problem = make_problem(1, 3, 100)
        lengths = problem.sublen * problem.nk
        assert (problem.group_offset == np.concatenate(([0], np.cumsum(lengths)))[:-1]).all()
        assert lengths.sum() <= problem.d - problem.m + 1

    def test_chaos_sequence_first_terms(self):
        lengths = chaos_subcomponent_lengths(3, 998, 5)
        c1 = 3.8 * 0.1 * 0.9
        c2 = 3.8 * c1 * (1 - c1)
        c3 = 3.8 * c2 * (1 - c2)
        total = c1 + c2 + c3
        expected = [int(np.floor(c / total * 998 / 5)) for c in (c1, c2, c3)]
        assert lengths.tolist() == expected


class TestEvaluation:
    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_deterministic(self, pid):
        problem = make_problem(pid, 3, 40)
        rng = make_rng(pid)
        decisions = problem.bounds.lower + rng.random((4, 40)) * (
            problem.bounds.upper - problem.bounds.lower
        )
        assert np.array_equal(
            problem.evaluate_batch(decisions), problem.evaluate_batch(decisions.copy())
        )

    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_objectives_finite_and_nonnegative(self, pid):
        # ~1e5 random in-bounds points across the suite
        problem = make_problem(pid, 3, 40)
        rng = make_rng(100 + pid)
        decisions = problem.bounds.lower + rng.random((12_000, 40)) * (
            problem.bounds.upper - problem.bounds.lower
        )
        objectives = problem.evaluate_batch(decisions)
        assert np.isfinite(objectives).all()
        assert (objectives >= 0.0).all()

    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_scaling_to_larger_dimension_stays_finite(self, pid):
        rng = make_rng(200 + pid)
        relative = rng.random(500)
        for d in (100, 500):
            problem = make_problem(pid, 3, d)
            x = problem.bounds.lower + relative[:d] * (
                problem.bounds.upper - problem.bounds.lower
            )
            objectives = problem.evaluate(x)
            assert np.isfinite(objectives).all()

    def test_single_vector_evaluate_matches_batch(self):
        problem = make_problem(5, 3, 50)
        rng = make_rng(9)
        x = problem.bounds.lower + rng.random(50) * (
            problem.bounds.upper - problem.bounds.lower
        )
        assert np.array_equal(problem.evaluate(x), problem.evaluate_batch(x[None])[0])

    def test_two_objective_configuration(self):
        problem = make_problem(1, 2, 30)
        rng = make_rng(10)
        x = problem.bounds.lower + rng.random(30) * (
            problem.bounds.upper - problem.bounds.lower
        )
        assert problem.evaluate(x).shape == (2,)


class TestOptimaOnFront:
    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_constructed_optimum_lies_on_front_surface(self, pid):
        problem = make_problem(pid, 3, 100)
        rng = make_rng(300 + pid)
        for _ in range(20):
            position = np.concatenate([rng.random(1) * 0.5, rng.random(1)])
            x = problem.optimal_decision(position)
            assert (x >= problem.bounds.lower).all() and (x <= problem.bounds.upper).all()
            objectives = problem.evaluate(x)
            assert front_surface_residual(pid, 3, objectives)[0] <= 1e-6

    @pytest.mark.parametrize("pid", [1, 5])
    def test_constructed_optimum_near_sampled_front(self, pid):
        problem = make_problem(pid, 3, 100)
        front = sample_reference_front(pid, 3, 5000)
        rng = make_rng(400 + pid)
        for _ in range(10):
            position = np.concatenate([rng.random(1) * 0.4, rng.random(1)])
            objectives = problem.evaluate(problem.optimal_decision(position))
            gap = np.linalg.norm(front.points - objectives, axis=1).min()
            assert gap < 0.05

    def test_constructed_optimum_near_disconnected_front(self):
        # position must sit inside the nondominated windows; the last
        # objective is steep, so the sampled-gap tolerance is looser
        problem = make_problem(9, 3, 100)
        front = sample_reference_front(9, 3, 10_000)
        for position in ([0.05, 0.2], [0.2, 0.7], [0.7, 0.85]):
            objectives = problem.evaluate(problem.optimal_decision(np.array(position)))
            gap = np.linalg.norm(front.points - objectives, axis=1).min()
            assert gap < 0.2


class TestReferenceFronts:
    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_exact_size_and_determinism(self, pid):
        a = sample_reference_front(pid, 3, 1500)
        b = sample_reference_front(pid, 3, 1500)
        assert a.size == 1500
        assert np.array_equal(a.points, b.points)

    @pytest.mark.parametrize("pid", ALL_IDS)
    def test_pairwise_nondominated(self, pid):
        front = sample_reference_front(pid, 3, 2000)
        assert exhaustive_nondominance_check(front.points)

    def test_default_size_pairwise_nondominated(self):
        # the default 10k front, exhaustively checked once per geometry
        for pid in (1, 5, 9):
            front = sample_reference_front(pid, 3, 10_000)
            assert front.size == 10_000
            assert exhaustive_nondominance_check(front.points)

    def test_simplex_front_sums_to_one(self):
        front = sample_reference_front(3, 3, 3000)
        assert front.points.sum(axis=1) == pytest.approx(np.ones(3000))

    def test_sphere_front_has_unit_norm(self):
        front = sample_reference_front(7, 3, 3000)
        assert np.linalg.norm(front.points, axis=1) == pytest.approx(np.ones(3000))

    def test_disconnected_front_satisfies_profile(self):
        front = sample_reference_front(9, 3, 3000)
        assert front_surface_residual(9, 3, front.points).max() <= 1e-9

    def test_two_objective_front(self):
        front = sample_reference_front(1, 2, 500)
        assert front.size == 500
        assert exhaustive_nondominance_check(front.points)

    def test_bad_arguments_rejected(self):
        with pytest.raises(ConfigurationError):
            sample_reference_front(0, 3, 100)
        with pytest.raises(ConfigurationError):
            sample_reference_front(1, 3, 2)


class TestFrontCsv:
    def test_round_trip_exact(self, tmp_path):
        front = sample_reference_front(6, 3, 800)
        path = tmp_path / "front.csv"
        save_front_csv(front, path)
        loaded = load_front_csv(path)
        assert np.array_equal(loaded.points, front.points)

    def test_plain_text_one_vector_per_line(self, tmp_path):
        front = sample_reference_front(2, 3, 10)
        path = tmp_path / "front.csv"
        save_front_csv(front, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 10
        assert all(len(line.split(",")) == 3 for line in lines)
