"""Finite inverse sequences of discrete spaces and their limits.

A sequence is a list of spaces U_0..U_n with step maps U_{a+1} -> U_a.
Because every step is a function, each top-level point extends downward
to exactly one compatible tuple, so the limit is materialized eagerly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .spaces import FiniteSpace, PointMap, Surjection, compose, identity


@dataclass(frozen=True)
class Report:
    """Outcome of a report-style check: empty `issues` means valid."""

    issues: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues


@dataclass(frozen=True)
class InverseSequence:
    spaces: tuple[FiniteSpace, ...]
    steps: tuple[PointMap, ...]

    def __post_init__(self):
        if not self.spaces:
            raise ValueError("sequence needs at least one space")
        if len(self.steps) != len(self.spaces) - 1:
            raise ValueError(
                f"{len(self.spaces)} spaces need {len(self.spaces) - 1} steps, got {len(self.steps)}"
            )
        for a, step in enumerate(self.steps):
            if step.dom != self.spaces[a + 1] or step.cod != self.spaces[a]:
                raise ValueError(f"step {a} does not map spaces[{a + 1}] onto spaces[{a}]")

    @property
    def length(self) -> int:
        return len(self.spaces) - 1

    def bonding(self, a: int, b: int) -> PointMap:
        """Composite map U_b -> U_a for a <= b (identity when a == b)."""
        if not 0 <= a <= b <= self.length:
            raise ValueError(f"bad bonding levels ({a}, {b}) for length {self.length}")
        out: PointMap = identity(self.spaces[b])
        for level in range(b - 1, a - 1, -1):
            out = compose(self.steps[level], out)
        return out


@dataclass(frozen=True)
class Thread:
    """A compatible tuple through a sequence: steps send each entry to the one below."""

    entries: tuple[str, ...]


def check_coherent(seq: InverseSequence) -> Report:
    """List every non-surjective step and every violated composition identity."""
    issues = []
    for a, step in enumerate(seq.steps):
        if not step.is_surjective():
            missed = next(q for q in step.cod.points if q not in set(step.mapping.values()))
            issues.append(f"step {a} not surjective: misses {missed!r}")
    n = seq.length
    for a in range(n + 1):
        for b in range(a, n + 1):
            for c in range(b, n + 1):
                direct = seq.bonding(a, c)
                composite = compose(seq.bonding(a, b), seq.bonding(b, c))
                if direct != composite:
                    issues.append(f"bonding({a},{c}) != bonding({a},{b}) o bonding({b},{c})")
    return Report(tuple(issues))


def limit_threads(seq: InverseSequence) -> list[Thread]:
    """All compatible tuples, one per top-level point, in top-space order."""
    report = check_coherent(seq)
    if not report.ok:
        raise ValueError(f"incoherent sequence: {report.issues[0]}")
    threads = []
    for top in seq.spaces[-1].points:
        entries = [top]
        for step in reversed(seq.steps):
            entries.append(step(entries[-1]))
        threads.append(Thread(tuple(reversed(entries))))
    return threads


def project(t: Thread, a: int) -> str:
    if not 0 <= a < len(t.entries):
        raise ValueError(f"level {a} out of range for a thread of length {len(t.entries)}")
    return t.entries[a]


def is_thread_of(t: Thread, seq: InverseSequence) -> bool:
    if len(t.entries) != seq.length + 1:
        return False
    if any(e not in sp for e, sp in zip(t.entries, seq.spaces)):
        return False
    return all(step(t.entries[a + 1]) == t.entries[a] for a, step in enumerate(seq.steps))


@dataclass(frozen=True)
class SequenceArrow:
    """A level-wise family of surjections src -> dst along a nondecreasing reindexing.

    maps[a] sends src.spaces[reindex[a]] onto dst.spaces[a]; naturality makes the
    induced map on threads well defined.
    """

    src: InverseSequence
    dst: InverseSequence
    reindex: tuple[int, ...]
    maps: tuple[Surjection, ...]

    def __post_init__(self):
        m = self.dst.length
        if len(self.reindex) != m + 1 or len(self.maps) != m + 1:
            raise ValueError("need one reindex entry and one map per dst level")
        if any(self.reindex[a] > self.reindex[a + 1] for a in range(m)):
            raise ValueError("reindex must be nondecreasing")
        if any(not 0 <= r <= self.src.length for r in self.reindex):
            raise ValueError("reindex out of src range")
        for a, f in enumerate(self.maps):
            if f.dom != self.src.spaces[self.reindex[a]] or f.cod != self.dst.spaces[a]:
                raise ValueError(f"maps[{a}] has wrong domain or codomain")
        for a in range(m):
            lhs = compose(self.dst.steps[a], self.maps[a + 1])
            rhs = compose(self.maps[a], self.src.bonding(self.reindex[a], self.reindex[a + 1]))
            if lhs != rhs:
                raise ValueError(f"naturality fails between dst levels {a} and {a + 1}")


def apply_sequence_arrow(arrow: SequenceArrow, t: Thread) -> Thread:
    if not is_thread_of(t, arrow.src):
        raise ValueError("not a thread of the arrow's source sequence")
    entries = tuple(arrow.maps[a](t.entries[arrow.reindex[a]]) for a in range(arrow.dst.length + 1))
    out = Thread(entries)
    assert is_thread_of(out, arrow.dst)
    return out


@dataclass(frozen=True)
class SlicedSequence:
    """An inverse sequence together with compatible maps from a fixed base space.

    phis[a] is a slice object whose target is spaces[a]; each step must carry
    phis[a+1] to phis[a] pointwise on the base.
    """

    seq: InverseSequence
    phis: tuple = field(default=())

    def __post_init__(self):
        if len(self.phis) != self.seq.length + 1:
            raise ValueError("need one slice map per sequence level")
        for a, phi in enumerate(self.phis):
            if phi.target != self.seq.spaces[a]:
                raise ValueError(f"phis[{a}] does not land in spaces[{a}]")
        base = self.phis[0].base
        for a, step in enumerate(self.seq.steps):
            upper, lower = self.phis[a + 1], self.phis[a]
            for point in base.points:
                if step(upper.point_value(point)) != lower.point_value(point):
                    raise ValueError(
                        f"step {a} does not carry phis[{a + 1}] to phis[{a}] at base point {point!r}"
                    )

    @property
    def base(self):
        return self.phis[0].base
