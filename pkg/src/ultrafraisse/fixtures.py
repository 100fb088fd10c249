"""Shared example trees: binary prefix trees and seeded random trees."""

from __future__ import annotations

import random

from .balltree import BallTree
from .spaces import FiniteSpace, Surjection


def binary_tree(depth: int) -> BallTree:
    """The full binary tree of the given depth; balls are bit prefixes."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    levels = []
    parents = []
    for a in range(depth + 1):
        labels = [format(i, f"0{a}b") if a else "" for i in range(2**a)]
        levels.append(FiniteSpace(id=f"bits{a}", points=tuple(labels)))
    for a in range(depth):
        parents.append(
            Surjection(levels[a + 1], levels[a], {b: b[:-1] for b in levels[a + 1].points})
        )
    return BallTree(levels=tuple(levels), parents=tuple(parents))


def k4() -> BallTree:
    """The four-point binary depth-2 tree used throughout the test fixtures."""
    return binary_tree(2)


def random_tree(seed: int, max_depth: int = 5, max_points: int = 64) -> BallTree:
    """A seeded random ball tree with bounded depth and leaf count."""
    rng = random.Random(seed)
    depth = rng.randint(1, max_depth)
    levels = [FiniteSpace(id="rt0", points=("b",))]
    parents = []
    for a in range(depth):
        upper = []
        mapping = {}
        for label in levels[a].points:
            width = rng.randint(1, 4)
            for i in range(width):
                child = f"{label}.{i}"
                upper.append(child)
                mapping[child] = label
        # trim uniformly if the level exceeds the leaf budget, keeping one child each
        if len(upper) > max_points:
            keep = {label: False for label in levels[a].points}
            trimmed = []
            for child in upper:
                parent = mapping[child]
                if not keep[parent]:
                    keep[parent] = True
                    trimmed.append(child)
            for child in upper:
                if child not in trimmed and len(trimmed) < max_points:
                    trimmed.append(child)
            upper = [c for c in upper if c in set(trimmed)]
            mapping = {c: mapping[c] for c in upper}
        space = FiniteSpace(id=f"rt{a + 1}", points=tuple(upper))
        parents.append(Surjection(space, levels[a], mapping))
        levels.append(space)
    return BallTree(levels=tuple(levels), parents=tuple(parents))
