"""Random plane trees conditioned on their edge count, and their codings.

A tree with n edges is stored over its n+1 vertices in lexicographic
(depth-first) order, so the vertex with lexicographic index j is ``u_j``
everywhere in this package.  The Lukasiewicz path, height process and
contour exploration are the three standard codings; the conditioned
sampler draws i.i.d. offspring counts conditioned to sum to n and applies
the cycle-lemma rotation to obtain the excursion coding of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import CodingError, InvariantViolation, ParameterError, SamplingBudgetError
from .offspring import OffspringLaw

DEFAULT_P0 = 1.0 / 3.0


@dataclass(frozen=True)
class LukasiewiczExcursion:
    """Increment coding: increments[m] = offspring(u_m) - 1, length n+1.

    Partial sums stay nonnegative until the final step lands at -1.
    """

    increments: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.increments) - 1

    def path(self) -> np.ndarray:
        """X(0..n+1): X(0)=0 and X(m+1)=X(m)+increments[m]."""
        out = np.zeros(len(self.increments) + 1, dtype=np.int64)
        np.cumsum(self.increments, out=out[1:])
        return out


@dataclass(frozen=True)
class PlaneTree:
    """Rooted plane tree over vertices 0..n in lexicographic order."""

    n_edges: int
    parent: np.ndarray  # parent[0] = -1
    height: np.ndarray
    child_offsets: np.ndarray  # CSR offsets, length n+2
    children: np.ndarray  # children grouped per vertex, lexicographic order

    @property
    def n_vertices(self) -> int:
        return self.n_edges + 1

    def offspring_counts(self) -> np.ndarray:
        return np.diff(self.child_offsets)


@dataclass(frozen=True)
class LabelledTree:
    """Plane tree plus integer labels with unit increments along edges."""

    tree: PlaneTree
    labels: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.tree.n_edges


@dataclass(frozen=True)
class CornerSequence:
    """The 2n corners of the contour exploration, in traversal order."""

    vertices: np.ndarray
    heights: np.ndarray
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.vertices)


def sample_conditioned_offspring(
    law: OffspringLaw,
    n: int,
    rng: np.random.Generator,
    max_trials: int | None = None,
) -> tuple[np.ndarray, int]:
    """Draw n+1 i.i.d. offspring counts conditioned on total = n.

    Plain rejection: a trial is accepted iff its sum is exactly n (the
    compiled kernel abandons a trial as soon as the running sum exceeds n,
    which changes nothing in distribution because offspring counts are
    nonnegative).  Returns ``(offspring, trials_used)``.
    """
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if max_trials is None:
        # ~50x the local-limit expectation; hitting this is a seed-quality
        # signal rather than normal behaviour.
        max_trials = 20_000 + int(500.0 * n ** (1.0 / law.alpha))
    if max_trials < 1:
        raise ParameterError("max_trials must be positive")
    offspring, trials = kernels.sample_conditioned_offspring(
        law.cum_table, law.alpha, law.c_phi, n, max_trials, rng
    )
    if offspring is None:
        raise SamplingBudgetError(
            f"no accepted trial for n={n} after {trials} rejections", trials=trials
        )
    return offspring, trials


def cycle_shift_to_excursion(offspring: np.ndarray) -> LukasiewiczExcursion:
    """Rotate an offspring vector into its unique excursion ordering.

    The rotation starts right after the first global minimum of the
    partial sums of (offspring - 1); by the cycle lemma this is the only
    rotation whose partial sums stay nonnegative until the final -1.
    """
    increments = np.asarray(offspring, dtype=np.int64) - 1
    sums = np.cumsum(increments)
    if sums[-1] != -1:
        raise CodingError(f"offspring must sum to n, got partial-sum end {sums[-1]}")
    split = int(np.argmin(sums))  # first position attaining the minimum
    rotated = np.concatenate([increments[split + 1 :], increments[: split + 1]])
    check = np.cumsum(rotated)
    if check[-1] != -1 or (check[:-1] < 0).any():
        raise InvariantViolation("cycle-lemma rotation did not produce an excursion")
    return LukasiewiczExcursion(increments=rotated)


def tree_from_lukasiewicz(exc: LukasiewiczExcursion) -> PlaneTree:
    """Decode the excursion into the unique plane tree it codes."""
    increments = np.asarray(exc.increments, dtype=np.int64)
    if len(increments) < 1:
        raise CodingError("excursion is empty")
    if (increments < -1).any():
        raise CodingError("Lukasiewicz increments must be >= -1")
    sums = np.cumsum(increments)
    if sums[-1] != -1 or (sums[:-1] < 0).any():
        raise CodingError("increments do not form an excursion")
    offspring = increments + 1
    return tree_from_offspring(offspring)


def tree_from_offspring(offspring: np.ndarray) -> PlaneTree:
    """Build the tree whose lexicographic offspring sequence is given."""
    offspring = np.asarray(offspring, dtype=np.int64)
    n = len(offspring) - 1
    parent, height = kernels.parent_height_from_offspring(offspring)
    counts = np.zeros(n + 1, dtype=np.int64)
    np.add.at(counts, parent[1:], 1)
    if not np.array_equal(counts, offspring):
        raise CodingError("offspring counts inconsistent with decoded tree")
    child_offsets = np.zeros(n + 2, dtype=np.int64)
    np.cumsum(counts, out=child_offsets[1:])
    # Stable sort by parent keeps children in lexicographic order.
    children = np.argsort(parent[1:], kind="stable").astype(np.int64) + 1
    return PlaneTree(
        n_edges=n,
        parent=parent,
        height=height,
        child_offsets=child_offsets,
        children=children,
    )


def height_process(tree: PlaneTree) -> np.ndarray:
    """H(j) = generation of u_j, for j = 0..n."""
    return tree.height


def contour_exploration(tree: PlaneTree, labels: np.ndarray | None = None) -> CornerSequence:
    """The 2n corners bounding the unique face, starting at the root edge."""
    if tree.n_edges < 1:
        raise CodingError("contour exploration needs at least one edge")
    vertices = kernels.contour_vertices(tree.child_offsets, tree.children)
    heights = tree.height[vertices]
    corner_labels = None if labels is None else np.asarray(labels, dtype=np.int64)[vertices]
    return CornerSequence(vertices=vertices, heights=heights, labels=corner_labels)


def assign_labels(tree: PlaneTree, p0: float, rng: np.random.Generator) -> LabelledTree:
    """Attach root-0 labels with i.i.d. centred increments in {-1, 0, +1}.

    P(increment = 0) = p0 and P(+1) = P(-1) = (1 - p0)/2; p0 = 1 would
    make every label 0 and is rejected.
    """
    if not (0.0 <= p0 < 1.0):
        raise ParameterError(f"p0 must lie in [0, 1), got {p0}")
    n = tree.n_edges
    u = rng.random(n)
    half = (1.0 - p0) / 2.0
    inc = np.where(u < half, -1, np.where(u < 2.0 * half, 1, 0)).astype(np.int64)
    labels = np.zeros(n + 1, dtype=np.int64)
    # Accumulate parent labels level by level (parents always precede
    # children in lexicographic order, and each level only needs the
    # previous one).
    order = np.argsort(tree.height[1:], kind="stable") + 1
    heights = tree.height[order]
    boundaries = np.searchsorted(heights, np.arange(1, int(tree.height.max()) + 2))
    start = 0
    for stop in boundaries:
        batch = order[start:stop]
        if len(batch):
            labels[batch] = labels[tree.parent[batch]] + inc[batch - 1]
        start = stop
    return LabelledTree(tree=tree, labels=labels)


def sample_labelled_tree(
    law: OffspringLaw,
    n: int,
    rng: np.random.Generator,
    p0: float = DEFAULT_P0,
    max_trials: int | None = None,
) -> tuple[LabelledTree, int]:
    """Sample a conditioned tree with labels; returns (tree, trials_used)."""
    offspring, trials = sample_conditioned_offspring(law, n, rng, max_trials)
    exc = cycle_shift_to_excursion(offspring)
    tree = tree_from_lukasiewicz(exc)
    return assign_labels(tree, p0, rng), trials
