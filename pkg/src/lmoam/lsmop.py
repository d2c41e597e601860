"""LSMOP1-9 scalable benchmark problems and reference-front samplers.

Implemented from the suite's defining publication (Cheng, Jin, Olhofer,
and Sendhoff, "Test problems for large-scale multiobjective and
many-objective optimization", IEEE Transactions on Cybernetics 47(12),
2017). Each instance follows the suite's generator:

* the first m-1 decision variables are position variables in [0, 1], the
  remaining d-m+1 are distance variables in [0, 10];
* distance variables split into m groups (one per objective), each group
  into `nk` equally sized subcomponents whose lengths follow the suite's
  logistic chaos sequence c1 = 3.8 * 0.1 * (1 - 0.1),
  c_{i+1} = 3.8 * c_i * (1 - c_i);
* a variable linkage couples distance variables to the first position
  variable before any landscape function sees them, linearly for LSMOP1-4
  and nonlinearly (cosine) for LSMOP5-9;
* objective i averages its group's landscape values and feeds them into
  the front-shape function.

Per-problem mapping to the suite definition (landscape pair eta1/eta2 is
applied to odd/even objectives, 1-based):

==========  ==========  ===========  ==========================
problem     eta1        eta2         linkage / front geometry
==========  ==========  ===========  ==========================
LSMOP1      sphere      sphere       linear / linear simplex
LSMOP2      griewank    schwefel     linear / linear simplex
LSMOP3      rastrigin   rosenbrock   linear / linear simplex
LSMOP4      ackley      griewank     linear / linear simplex
LSMOP5      sphere      sphere       nonlinear / unit sphere
LSMOP6      rosenbrock  schwefel     nonlinear / unit sphere
LSMOP7      ackley      rosenbrock   nonlinear / unit sphere
LSMOP8      griewank    sphere       nonlinear / unit sphere
LSMOP9      sphere      ackley       nonlinear / disconnected
==========  ==========  ===========  ==========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Array, Bounds, ConfigurationError, Problem
from .ea import nondominated_mask

DISTANCE_VARIABLE_UPPER = 10.0
DEFAULT_SUBCOMPONENTS = 5
DEFAULT_FRONT_POINTS = 10_000

# Nondominated position intervals of the disconnected front (LSMOP9); the
# pattern x * (1 + sin(3 * pi * x)) leaves exactly these two windows
# per position variable on the front.
_DISCONNECTED_INTERVALS = (0.0, 0.251412, 0.631627, 0.859401)


def _sphere(chunks: Array) -> Array:
    return (chunks**2).sum(-1)


def _schwefel(chunks: Array) -> Array:
    # Schwefel's problem 2.21: the largest absolute coordinate.
    return np.abs(chunks).max(-1)


def _rosenbrock(chunks: Array) -> Array:
    if chunks.shape[-1] < 2:
        return np.zeros(chunks.shape[:-1])
    head = chunks[..., :-1]
    tail = chunks[..., 1:]
    return (100.0 * (head**2 - tail) ** 2 + (head - 1.0) ** 2).sum(-1)


def _rastrigin(chunks: Array) -> Array:
    return (chunks**2 - 10.0 * np.cos(2.0 * np.pi * chunks) + 10.0).sum(-1)


def _griewank(chunks: Array) -> Array:
    idx = np.sqrt(np.arange(1, chunks.shape[-1] + 1, dtype=float))
    return (chunks**2).sum(-1) / 4000.0 - np.cos(chunks / idx).prod(-1) + 1.0


def _ackley(chunks: Array) -> Array:
    rms = np.sqrt((chunks**2).mean(-1))
    return 20.0 - 20.0 * np.exp(-0.2 * rms) - np.exp(np.cos(2.0 * np.pi * chunks).mean(-1)) + np.e


_LANDSCAPES = {
    1: (_sphere, _sphere),
    2: (_griewank, _schwefel),
    3: (_rastrigin, _rosenbrock),
    4: (_ackley, _griewank),
    5: (_sphere, _sphere),
    6: (_rosenbrock, _schwefel),
    7: (_ackley, _rosenbrock),
    8: (_griewank, _sphere),
    9: (_sphere, _ackley),
}

_LANDSCAPE_OPTIMA = {
    _sphere: 0.0,
    _schwefel: 0.0,
    _rosenbrock: 1.0,
    _rastrigin: 0.0,
    _griewank: 0.0,
    _ackley: 0.0,
}

_LINEAR_LINKAGE_IDS = frozenset({1, 2, 3, 4})


def chaos_subcomponent_lengths(m: int, n_distance: int, nk: int) -> Array:
    """Subcomponent length per variable group, from the suite's chaos sequence."""
    c = [3.8 * 0.1 * (1.0 - 0.1)]
    for _ in range(m - 1):
        c.append(3.8 * c[-1] * (1.0 - c[-1]))
    c = np.array(c)
    return np.floor(c / c.sum() * n_distance / nk).astype(int)


class LsmopProblem(Problem):
    """One LSMOP instance with a fixed (id, m, d) configuration."""

    def __init__(self, problem_id: int, m: int = 3, d: int = 300, nk: int = DEFAULT_SUBCOMPONENTS):
        if problem_id not in range(1, 10):
            raise ConfigurationError(f"problem id must be in 1..9, got {problem_id}")
        if m < 2:
            raise ConfigurationError(f"objective count must be at least 2, got {m}")
        if d <= m:
            raise ConfigurationError(f"need more variables than objectives, got d={d}, m={m}")
        if nk < 1:
            raise ConfigurationError("subcomponent count must be at least 1")
        n_distance = d - m + 1
        sublen = chaos_subcomponent_lengths(m, n_distance, nk)
        if (sublen < 1).any():
            raise ConfigurationError(
                f"d={d} is too small for m={m}: a variable group would be empty"
            )
        self.id = problem_id
        self.name = f"LSMOP{problem_id}"
        self.m = m
        self.d = d
        self.nk = nk
        self.sublen = sublen
        # Group i covers nk * sublen[i] distance variables starting at this
        # offset (within the distance block); trailing leftovers from the
        # floor division belong to no group and no objective.
        self.group_offset = np.concatenate(([0], np.cumsum(sublen * nk)))[:-1]
        lower = np.zeros(d)
        upper = np.concatenate(
            [np.ones(m - 1), np.full(n_distance, DISTANCE_VARIABLE_UPPER)]
        )
        self.bounds = Bounds(lower, upper)

    @property
    def linear_linkage(self) -> bool:
        return self.id in _LINEAR_LINKAGE_IDS

    def _linked_distance(self, decisions: Array) -> Array:
        """Apply the suite's variable linkage to the distance block."""
        m, d = self.m, self.d
        position_one = decisions[:, [0]]
        col = np.arange(m, d + 1, dtype=float)  # 1-based column numbers m..d
        if self.linear_linkage:
            factor = 1.0 + col / d
        else:
            factor = 1.0 + np.cos(0.5 * np.pi * col / d)
        return factor * decisions[:, m - 1 :] - DISTANCE_VARIABLE_UPPER * position_one

    def _landscape_means(self, linked: Array) -> Array:
        """Per-objective landscape averages over the variable groups."""
        n = linked.shape[0]
        means = np.zeros((n, self.m))
        eta = _LANDSCAPES[self.id]
        for i in range(self.m):
            fn = eta[i % 2]  # objective i+1 (1-based): odd uses eta1
            width = int(self.sublen[i])
            start = int(self.group_offset[i])
            block = linked[:, start : start + self.nk * width]
            chunks = block.reshape(n, self.nk, width)
            means[:, i] = fn(chunks).sum(axis=1) / (width * self.nk)
        return means

    def evaluate_batch(self, decisions: Array) -> Array:
        decisions = np.asarray(decisions, dtype=float)
        if decisions.ndim != 2 or decisions.shape[1] != self.d:
            raise ConfigurationError(f"expected decision rows of length {self.d}")
        n = decisions.shape[0]
        m = self.m
        position = decisions[:, : m - 1]
        g = self._landscape_means(self._linked_distance(decisions))
        ones = np.ones((n, 1))
        if self.id <= 4:
            # Linear front shape: products of position variables, simplex POF.
            left = np.cumprod(np.hstack([ones, position]), axis=1)[:, ::-1]
            right = np.hstack([ones, 1.0 - position[:, ::-1]])
            return (1.0 + g) * left * right
        if self.id <= 8:
            # Spherical front shape with neighboring-group coupling.
            theta = position * (np.pi / 2.0)
            left = np.cumprod(np.hstack([ones, np.cos(theta)]), axis=1)[:, ::-1]
            right = np.hstack([ones, np.sin(theta[:, ::-1])])
            g_next = np.hstack([g[:, 1:], np.zeros((n, 1))])
            return (1.0 + g + g_next) * left * right
        # Disconnected front: position variables pass through, the last
        # objective follows the multimodal sine profile.
        g_total = 1.0 + g.sum(axis=1)
        objectives = np.empty((n, m))
        objectives[:, : m - 1] = position
        scaled = position / (1.0 + g_total[:, None])
        profile = (scaled * (1.0 + np.sin(3.0 * np.pi * position))).sum(axis=1)
        objectives[:, m - 1] = (1.0 + g_total) * (m - profile)
        return objectives

    def optimal_decision(self, position: Array) -> Array:
        """A Pareto-optimal decision vector with the given position variables.

        Each distance variable is set so its linked value hits the group's
        landscape optimum (0, or 1 for the rosenbrock groups). Only feasible
        for position[0] small enough that those targets stay inside the box;
        used by the reference-front oracle tests.
        """
        position = np.asarray(position, dtype=float)
        if position.shape != (self.m - 1,):
            raise ConfigurationError("position must have length m - 1")
        m, d = self.m, self.d
        x = np.zeros(d)
        x[: m - 1] = position
        col = np.arange(m, d + 1, dtype=float)
        if self.linear_linkage:
            factor = 1.0 + col / d
        else:
            factor = 1.0 + np.cos(0.5 * np.pi * col / d)
        target = np.zeros(d - m + 1)
        eta = _LANDSCAPES[self.id]
        for i in range(m):
            width = int(self.sublen[i])
            start = int(self.group_offset[i])
            target[start : start + self.nk * width] = _LANDSCAPE_OPTIMA[eta[i % 2]]
        distance = (target + DISTANCE_VARIABLE_UPPER * position[0]) / factor
        if (distance < 0).any() or (distance > DISTANCE_VARIABLE_UPPER).any():
            raise ConfigurationError(
                "no in-bounds optimum for this position; use a smaller first component"
            )
        x[m - 1 :] = distance
        return x


def make_problem(problem_id: int, m: int, d: int) -> LsmopProblem:
    """Construct the LSMOP instance for (id, m, d)."""
    return LsmopProblem(problem_id, m=m, d=d)


@dataclass
class ReferenceFront:
    """Mutually nondominated samples from a problem's true Pareto front."""

    points: Array

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _simplex_lattice(m: int, minimum: int) -> Array:
    """Smallest uniform simplex lattice with at least `minimum` points."""
    h = 1
    while math.comb(h + m - 1, m - 1) < minimum:
        h += 1

    rows: list[list[int]] = []

    def compose(prefix: list[int], left: int, slots: int) -> None:
        if slots == 1:
            rows.append(prefix + [left])
            return
        for v in range(left + 1):
            compose(prefix + [v], left - v, slots - 1)

    compose([], h, m)
    return np.array(rows, dtype=float) / h


def _thin(points: Array, n_points: int) -> Array:
    """Deterministically keep exactly n_points evenly spaced rows."""
    total = points.shape[0]
    if total == n_points:
        return points
    idx = np.round(np.linspace(0, total - 1, n_points)).astype(int)
    return points[idx]


def _disconnected_front(m: int, n_points: int) -> Array:
    """Grid sample of the disconnected front, filtered and thinned."""
    a0, a1, b0, b1 = _DISCONNECTED_INTERVALS
    median = (a1 - a0) / (b1 - b0 + a1 - a0)
    side = max(2, math.ceil((n_points * 1.6) ** (1.0 / (m - 1))))
    while True:
        u = np.linspace(0.0, 1.0, side)
        u = np.where(u <= median, u * (a1 - a0) / median + a0,
                     (u - median) * (b1 - b0) / (1.0 - median) + b0)
        grids = np.meshgrid(*([u] * (m - 1)), indexing="ij")
        position = np.stack([grid.ravel() for grid in grids], axis=1)
        last = 2.0 * (m - (position / 2.0 * (1.0 + np.sin(3.0 * np.pi * position))).sum(axis=1))
        points = np.hstack([position, last[:, None]])
        points = points[nondominated_mask(points)]
        if points.shape[0] >= n_points:
            return _thin(points, n_points)
        side = math.ceil(side * 1.5)


def sample_reference_front(
    problem_id: int,
    m: int,
    n_points: int = DEFAULT_FRONT_POINTS,
    rng: np.random.Generator | None = None,
) -> ReferenceFront:
    """Sample exactly n_points mutually nondominated true-front points.

    Sampling is structured and deterministic for every problem geometry
    (simplex lattice, normalized lattice, thinned grid), so the stream
    argument is accepted for interface uniformity but never consumed.
    """
    del rng
    if problem_id not in range(1, 10):
        raise ConfigurationError(f"problem id must be in 1..9, got {problem_id}")
    if m < 2:
        raise ConfigurationError("objective count must be at least 2")
    if n_points < m:
        raise ConfigurationError("need at least m reference points")
    if problem_id <= 4:
        points = _thin(_simplex_lattice(m, n_points), n_points)
    elif problem_id <= 8:
        lattice = _simplex_lattice(m, n_points)
        points = _thin(lattice / np.linalg.norm(lattice, axis=1, keepdims=True), n_points)
    else:
        points = _disconnected_front(m, n_points)
    return ReferenceFront(points=points)


def front_surface_residual(problem_id: int, m: int, objectives: Array) -> Array:
    """Distance proxy from objective vectors to the true front surface.

    Zero (up to float error) exactly when a point satisfies the front's
    defining equation: unit coordinate sum for LSMOP1-4, unit norm for
    LSMOP5-8, and the sine-profile identity for LSMOP9.
    """
    objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
    if problem_id <= 4:
        return np.abs(objectives.sum(axis=1) - 1.0)
    if problem_id <= 8:
        return np.abs(np.linalg.norm(objectives, axis=1) - 1.0)
    position = objectives[:, : m - 1]
    expected = 2.0 * (m - (position / 2.0 * (1.0 + np.sin(3.0 * np.pi * position))).sum(axis=1))
    return np.abs(objectives[:, m - 1] - expected)


def save_front_csv(front: ReferenceFront, path: str | Path) -> None:
    """One objective vector per line, full float precision, LF endings."""
    np.savetxt(path, front.points, fmt="%.17g", delimiter=",", newline="\n")


def load_front_csv(path: str | Path) -> ReferenceFront:
    points = np.loadtxt(path, delimiter=",", ndmin=2)
    return ReferenceFront(points=points)
