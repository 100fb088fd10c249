"""Finite discrete spaces, total point maps and surjections.

Every space fixes its point order at construction; that order is the
tie-breaker for all canonical constructions built on top (pair labels,
round-robin assignments, witness selection).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


@dataclass(frozen=True)
class FiniteSpace:
    """A nonempty finite set of labelled points with a fixed order."""

    id: str
    points: tuple[str, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError(f"space {self.id!r} has no points")
        if len(set(self.points)) != len(self.points):
            raise ValueError(f"space {self.id!r} has duplicate point labels")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[str]:
        return iter(self.points)

    def __contains__(self, label: str) -> bool:
        return label in self.points

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise ValueError(f"{label!r} is not a point of {self.id!r}") from None


class PointMap:
    """A total map between finite spaces; not necessarily onto."""

    __slots__ = ("dom", "cod", "mapping")

    def __init__(self, dom: FiniteSpace, cod: FiniteSpace, mapping: Mapping[str, str]):
        missing = [p for p in dom.points if p not in mapping]
        if missing:
            raise ValueError(f"map {dom.id!r}->{cod.id!r} undefined at {missing[0]!r}")
        extra = [p for p in mapping if p not in dom]
        if extra:
            raise ValueError(f"map {dom.id!r}->{cod.id!r} defined at foreign point {extra[0]!r}")
        bad = [v for v in mapping.values() if v not in cod]
        if bad:
            raise ValueError(f"map {dom.id!r}->{cod.id!r} hits foreign value {bad[0]!r}")
        self.dom = dom
        self.cod = cod
        self.mapping = dict(mapping)

    def __call__(self, point: str) -> str:
        return self.mapping[point]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointMap)
            and self.dom == other.dom
            and self.cod == other.cod
            and self.mapping == other.mapping
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.dom.id!r} -> {self.cod.id!r})"

    def is_surjective(self) -> bool:
        return set(self.mapping.values()) == set(self.cod.points)

    def fiber(self, value: str) -> tuple[str, ...]:
        """Preimage of one codomain point, in domain order."""
        return tuple(p for p in self.dom.points if self.mapping[p] == value)

    def image(self) -> tuple[str, ...]:
        """Values actually attained, in codomain order."""
        hit = set(self.mapping.values())
        return tuple(q for q in self.cod.points if q in hit)


class Surjection(PointMap):
    """A total map with every codomain point attained."""

    __slots__ = ()

    def __init__(self, dom: FiniteSpace, cod: FiniteSpace, mapping: Mapping[str, str]):
        super().__init__(dom, cod, mapping)
        if not self.is_surjective():
            miss = next(q for q in cod.points if q not in set(self.mapping.values()))
            raise ValueError(f"map {dom.id!r}->{cod.id!r} misses {miss!r}: not a surjection")


def identity(space: FiniteSpace) -> Surjection:
    return Surjection(space, space, {p: p for p in space.points})


def compose(g: PointMap, f: PointMap) -> PointMap:
    """Pointwise composition g o f; a Surjection when both inputs are."""
    if f.cod != g.dom:
        raise ValueError(f"cannot compose: {f.cod.id!r} is not {g.dom.id!r}")
    mapping = {p: g(f(p)) for p in f.dom.points}
    cls = Surjection if isinstance(f, Surjection) and isinstance(g, Surjection) else PointMap
    return cls(f.dom, g.cod, mapping)


def pair_label(x: str, y: str) -> str:
    return f"({x},{y})"


def pullback(q1: Surjection, q2: Surjection) -> tuple[FiniteSpace, Surjection, Surjection]:
    """Pullback of a cospan q1: X -> Z <- Y :q2.

    Returns (W, f1, g1) where W holds the pairs (x, y) with q1(x) = q2(y),
    labelled "(x,y)" in lexicographic order of (index of x, index of y),
    and f1, g1 are the two projections.  Both projections are onto because
    q1 and q2 are.
    """
    if q1.cod != q2.cod:
        raise ValueError(f"pullback needs a shared codomain, got {q1.cod.id!r} and {q2.cod.id!r}")
    x_space, y_space = q1.dom, q2.dom
    pairs = [
        (x, y)
        for x in x_space.points
        for y in y_space.points
        if q1(x) == q2(y)
    ]
    w = FiniteSpace(
        id=f"pb({x_space.id},{y_space.id})",
        points=tuple(pair_label(x, y) for x, y in pairs),
    )
    f1 = Surjection(w, x_space, {pair_label(x, y): x for x, y in pairs})
    g1 = Surjection(w, y_space, {pair_label(x, y): y for x, y in pairs})
    return w, f1, g1


def product(x_space: FiniteSpace, y_space: FiniteSpace) -> tuple[FiniteSpace, Surjection, Surjection]:
    """Cartesian product with its two projections, pairs in canonical order."""
    pairs = [(x, y) for x in x_space.points for y in y_space.points]
    p = FiniteSpace(
        id=f"prod({x_space.id},{y_space.id})",
        points=tuple(pair_label(x, y) for x, y in pairs),
    )
    px = Surjection(p, x_space, {pair_label(x, y): x for x, y in pairs})
    py = Surjection(p, y_space, {pair_label(x, y): y for x, y in pairs})
    return p, px, py
