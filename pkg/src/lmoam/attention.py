"""Variance-driven attention over decision variables.

Variables are bucketed by their normalized population variance (the key
matrix), donor individuals seed bucket-weight vectors (queries), and a
query steers one well-spread nondominated individual (the value) by
multiplying each of its variables with its bucket's weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Array, Bounds, ContractViolation, Individual, Population, clamp
from .ea import crowding_distance, nondominated_mask


@dataclass
class VarianceVector:
    """Per-variable population variances, raw and min-max normalized."""

    raw: Array
    normalized: Array


def variance_vector(pop: Population) -> VarianceVector:
    """Column variances of the population's decision matrix.

    Uses the population convention (divide by n). When every variable has
    the same variance the normalized vector is all zeros, which collapses
    everything into a single bucket downstream.
    """
    if len(pop) < 2:
        raise ContractViolation("variance needs a population of at least 2")
    decisions = pop.decisions()
    raw = decisions.var(axis=0)
    lo = raw.min()
    span = raw.max() - lo
    if span == 0.0:
        normalized = np.zeros_like(raw)
    else:
        normalized = (raw - lo) / span
    return VarianceVector(raw=raw, normalized=normalized)


@dataclass
class KeyMatrix:
    """Variable-to-bucket assignment, stored as one bucket index per variable.

    Equivalent to the binary d-by-k matrix with exactly one 1 per row;
    `as_matrix` materializes that form when the product view is handier.
    """

    bucket_of: Array
    k: int

    def __post_init__(self) -> None:
        self.bucket_of = np.asarray(self.bucket_of, dtype=int)
        if self.bucket_of.min(initial=0) < 0 or self.bucket_of.max(initial=0) >= self.k:
            raise ContractViolation("bucket indices must lie in [0, k)")

    @property
    def d(self) -> int:
        return self.bucket_of.size

    def as_matrix(self) -> Array:
        matrix = np.zeros((self.d, self.k))
        matrix[np.arange(self.d), self.bucket_of] = 1.0
        return matrix

    def project(self, decisions: Array) -> Array:
        """Bucket-wise sums: rows of decisions times the binary matrix."""
        decisions = np.asarray(decisions, dtype=float)
        if decisions.ndim == 1:
            return np.bincount(self.bucket_of, weights=decisions, minlength=self.k)
        out = np.zeros((decisions.shape[0], self.k))
        for j in range(self.k):
            cols = self.bucket_of == j
            if cols.any():
                out[:, j] = decisions[:, cols].sum(axis=1)
        return out

    def expand(self, weights: Array) -> Array:
        """Back-projection onto variables: weight lookup through the transpose."""
        weights = np.asarray(weights, dtype=float)
        return weights[..., self.bucket_of]


def build_key(variances: VarianceVector, k: int) -> KeyMatrix:
    """Bucket variables by normalized variance into k half-open intervals.

    Variable i lands in bucket floor(normalized[i] * k); the top edge
    (normalized exactly 1) is clamped into bucket k - 1 so every variable
    has exactly one bucket.
    """
    if k < 1:
        raise ContractViolation("bucket count k must be at least 1")
    buckets = np.floor(variances.normalized * k).astype(int)
    buckets[buckets >= k] = k - 1
    return KeyMatrix(bucket_of=buckets, k=k)


@dataclass
class Query:
    """A k-vector of bucket weights plus the fitness its solution earned."""

    weights: Array
    fitness: Array | None = None

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)


def select_value(pop: Population, rng: np.random.Generator) -> Individual:
    """Pick the steered individual: max crowding on the first front.

    Boundary members carry infinite crowding, so with three or more front
    members the choice is always among them; ties (including infinite ones)
    break uniformly at random through the run's stream.
    """
    if len(pop) == 0:
        raise ContractViolation("cannot select a value individual from an empty population")
    objectives = pop.objectives()
    front = np.flatnonzero(nondominated_mask(objectives))
    crowd = crowding_distance(objectives[front])
    best = front[crowd == crowd.max()]
    return pop[int(best[rng.integers(best.size)])]


def init_queries(
    pop: Population,
    key: KeyMatrix,
    value: Individual,
    g: int,
    rng: np.random.Generator,
) -> list[Query]:
    """Seed g queries from uniformly drawn donor individuals.

    Each donor q yields weights value_sums / donor_sums bucket-wise; a zero
    donor sum contributes the neutral weight 1, so a donor identical to the
    value individual always produces the all-ones query.
    """
    if g < 1:
        raise ContractViolation("query count g must be at least 1")
    if key.d != pop.bounds.d:
        raise ContractViolation("key matrix dimension does not match the population")
    value_sums = key.project(value.decision)
    donors = rng.integers(0, len(pop), size=g)
    queries = []
    for donor in donors:
        donor_sums = key.project(pop[int(donor)].decision)
        weights = np.ones(key.k)
        np.divide(value_sums, donor_sums, out=weights, where=donor_sums != 0.0)
        queries.append(Query(weights=weights))
    return queries


def apply_attention(query: Query, key: KeyMatrix, value: Individual, bounds: Bounds) -> Array:
    """Steer the value individual: per-variable weights times its decision.

    The binary key makes the matrix product a bucket lookup; the result is
    clamped into bounds. An all-ones query reproduces the value decision
    vector bit-exactly.
    """
    attention = key.expand(query.weights)
    return clamp(attention * value.decision, bounds)


def apply_attention_batch(weights: Array, key: KeyMatrix, value: Individual, bounds: Bounds) -> Array:
    """`apply_attention` over a (g, k) weight matrix, one row per query."""
    attention = key.expand(np.asarray(weights, dtype=float))
    return clamp(attention * value.decision[None, :], bounds)
