"""Algorithms on generic presentations: embed, lift, extend, retract.

A generic presentation packages a base tree K, a sliced sequence over it,
the ambient tree rebuilt from that sequence, the induced injection of K
into the ambient points, and a nowhere-density certificate for the image.
All four headline operations are deterministic; the brute-force oracle
recomputes the lifting problem by exhaustive enumeration so the two routes
can be compared on small instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .balltree import (
    BallTree,
    NowhereDenseWitness,
    ball_quotients,
    factoring_level,
    from_sequence,
    is_uniformly_nowhere_dense,
    thread_embedding,
    u_metric,
)
from .engine import BuildResult, PaddingSchedule, TaskSchedule, build_fraisse
from .errors import DepthError, InputError
from .sequences import SequenceArrow, SlicedSequence, Thread, apply_sequence_arrow
from .slices import SliceObject
from .spaces import FiniteSpace, PointMap, Surjection


@dataclass(frozen=True)
class GenericPresentation:
    """An embedding of `space` into the limit of `sliced`, with certificate."""

    space: BallTree
    sliced: SlicedSequence
    ambient: BallTree
    eta: dict[str, Thread]
    witness: NowhereDenseWitness
    level_offset: int
    build: BuildResult | None = None

    def eta_point(self, x: str) -> str:
        """The ambient point carrying x (top entry of its thread)."""
        return self.eta[x].entries[-1]

    def eta_entry_sets(self) -> tuple[set[str], ...]:
        """Per ambient level, the ball labels met by the embedded image."""
        out: tuple[set[str], ...] = tuple(set() for _ in self.ambient.levels)
        for thread in self.eta.values():
            for level, entry in enumerate(thread.entries):
                out[level].add(entry)
        return out


def _validate_presentation(pres: GenericPresentation) -> None:
    if set(pres.eta) != set(pres.space.points):
        raise ValueError("eta must be defined exactly on the points of the base tree")
    tops = [t.entries[-1] for t in pres.eta.values()]
    if len(set(tops)) != len(tops):
        raise DepthError("eta is not injective: the sequence is too shallow to separate")
    offset = pres.level_offset
    for x, thread in pres.eta.items():
        if len(thread.entries) != pres.ambient.depth + 1:
            raise ValueError(f"eta thread for {x!r} has the wrong length")
        for level, entry in enumerate(thread.entries):
            if level < offset:
                continue
            want = pres.sliced.phis[level - offset].point_value(x)
            if entry != want:
                raise ValueError(f"eta thread for {x!r} disagrees with the slice maps at {level}")


def embed_generic(
    tree: BallTree,
    depth: int,
    schedule: PaddingSchedule,
    tasks: TaskSchedule = TaskSchedule(),
) -> GenericPresentation:
    """Embed `tree` into the limit of a freshly built sequence of padded spaces.

    The image misses every pad point, so each ambient ball keeps a pad child
    whose cylinder avoids the image; that child is the per-ball witness and
    the resulting certificate has target level alpha+1 at every alpha.
    """
    if depth < tree.depth:
        raise DepthError(f"depth {depth} cannot separate a tree of depth {tree.depth}")
    build = build_fraisse(tree, depth, schedule, tasks)
    ambient = from_sequence(build.sequence.seq)
    offset = ambient.depth - build.sequence.seq.length
    root = ambient.levels[0].points[0]
    eta = {}
    for x in tree.points:
        entries = ((root,) if offset else ()) + tuple(
            phi.point_value(x) for phi in build.sequence.phis
        )
        eta[x] = Thread(entries)
    marked: tuple[set[str], ...] = tuple(set() for _ in ambient.levels)
    for thread in eta.values():
        for level, entry in enumerate(thread.entries):
            marked[level].add(entry)
    target_levels = []
    choices = []
    for alpha in range(ambient.depth):
        choice = {}
        for label in ambient.levels[alpha].points:
            free = [c for c in ambient.children(alpha, label) if c not in marked[alpha + 1]]
            assert free, "every padded stage keeps a pad child under each ball"
            choice[label] = free[0]
        target_levels.append(alpha + 1)
        choices.append(choice)
    pres = GenericPresentation(
        space=tree,
        sliced=build.sequence,
        ambient=ambient,
        eta=eta,
        witness=NowhereDenseWitness(tuple(target_levels), tuple(choices)),
        level_offset=offset,
        build=build,
    )
    _validate_presentation(pres)
    return pres


def presentation_from_subset(ambient: BallTree, subset: Sequence[str]) -> GenericPresentation:
    """Present a subset of an existing tree as the embedded copy of its own subtree.

    The base tree is the induced subtree on the subset; the slice maps are the
    ancestor inclusions, and the witness is found by exhaustive search (the
    subset must be uniformly nowhere dense, otherwise the input is rejected).
    """
    points = list(dict.fromkeys(subset))
    if not points:
        raise InputError("subset is empty")
    for p in points:
        if p not in ambient.levels[-1]:
            raise InputError(f"subset point {p!r} is not a point of the ambient tree")
    levels = []
    for alpha in range(ambient.depth + 1):
        hit = {ambient.ancestor(ambient.depth, p, alpha) for p in points}
        levels.append(
            FiniteSpace(
                id=f"sub:{ambient.levels[alpha].id}",
                points=tuple(b for b in ambient.levels[alpha].points if b in hit),
            )
        )
    parents = []
    for alpha in range(ambient.depth):
        parents.append(
            Surjection(
                levels[alpha + 1],
                levels[alpha],
                {b: ambient.parents[alpha](b) for b in levels[alpha + 1].points},
            )
        )
    base = BallTree(levels=tuple(levels), parents=tuple(parents))
    phis = tuple(
        SliceObject(
            base=base,
            level=alpha,
            target=ambient.levels[alpha],
            quotient_map=PointMap(
                levels[alpha], ambient.levels[alpha], {b: b for b in levels[alpha].points}
            ),
        )
        for alpha in range(ambient.depth + 1)
    )
    sliced = SlicedSequence(ball_quotients(ambient), phis)
    witness = is_uniformly_nowhere_dense(ambient, points)
    if not isinstance(witness, NowhereDenseWitness):
        raise InputError(
            f"subset is not uniformly nowhere dense: fails at level {witness.level} "
            f"inside ball {witness.ball!r}"
        )
    embedding = thread_embedding(ambient)
    pres = GenericPresentation(
        space=base,
        sliced=sliced,
        ambient=ambient,
        eta={p: embedding[p] for p in points},
        witness=witness,
        level_offset=0,
    )
    _validate_presentation(pres)
    return pres


@dataclass(frozen=True)
class LiftResult:
    """A lift constant on the balls of one ambient level, with its allocation."""

    beta: int
    ball_table: dict[str, str]
    point_table: dict[str, str]
    avoid_families: dict[str, tuple[str, ...]]
    image_families: dict[str, tuple[str, ...]]


def _ball_values(tree: BallTree, level: int, point_map: Mapping[str, str]) -> dict[str, str]:
    out = {}
    for label in tree.levels[level].points:
        values = {point_map[p] for p in tree.leafset(level, label)}
        if len(values) != 1:
            raise ValueError(f"map is not constant on ball {label!r} at level {level}")
        out[label] = values.pop()
    return out


def _choose_lift_level(
    pres: GenericPresentation,
    f: Surjection,
    b: Mapping[str, str],
    g: Mapping[str, str],
) -> tuple[int, str]:
    """Least level whose balls separate the b-classes of the image and leave
    enough image-free balls in every g-fiber; returns (level, '') or (0, why)."""
    ambient = pres.ambient
    alpha = factoring_level(ambient, dict(g))
    entry_levels = pres.eta_entry_sets()
    reason = ""
    for beta in range(alpha + 1, ambient.depth + 1):
        g_on_balls = _ball_values(ambient, beta, g)
        ok = True
        for label in ambient.levels[beta].points:
            holders = [x for x in pres.space.points if pres.eta[x].entries[beta] == label]
            if len({b[x] for x in holders}) > 1:
                reason = f"level {beta}: ball {label!r} mixes distinct b-values"
                ok = False
                break
        if not ok:
            continue
        for x_point in f.cod.points:
            free = [
                label
                for label in ambient.levels[beta].points
                if g_on_balls[label] == x_point and label not in entry_levels[beta]
            ]
            if len(free) < len(f.fiber(x_point)):
                reason = (
                    f"level {beta}: fiber over {x_point!r} has {len(free)} image-free balls, "
                    f"needs {len(f.fiber(x_point))}"
                )
                ok = False
                break
        if ok:
            return beta, ""
    return 0, reason or "no level deeper than the factoring level exists"


def lift_through_generic(
    pres: GenericPresentation,
    f: Surjection,
    b: Mapping[str, str],
    g: Mapping[str, str],
) -> LiftResult:
    """Solve f o h = g and h o eta = b for a surjection h off the ambient tree.

    Requires the square g o eta = f o b to commute.  A level beta is chosen
    deep enough that each ball meeting the embedded image determines one
    b-value and each g-fiber keeps an image-free ball per point of its
    f-fiber; balls meeting the image follow b, image-free balls are dealt
    round-robin to the f-fiber so that h is onto.
    """
    x_space, y_space = f.cod, f.dom
    for x in pres.space.points:
        if x not in b:
            raise InputError(f"b is undefined at base point {x!r}")
        if b[x] not in y_space:
            raise InputError(f"b value {b[x]!r} is not a point of the lift source")
    for w in pres.ambient.points:
        if w not in g:
            raise InputError(f"g is undefined at ambient point {w!r}")
        if g[w] not in x_space:
            raise InputError(f"g value {g[w]!r} is not a point of the lift target")
    if set(g[w] for w in pres.ambient.points) != set(x_space.points):
        raise InputError("g is not onto the lift target")
    for x in pres.space.points:
        if g[pres.eta_point(x)] != f(b[x]):
            raise InputError(f"square does not commute at base point {x!r}")

    beta, reason = _choose_lift_level(pres, f, b, g)
    if beta == 0:
        raise DepthError(f"ambient depth {pres.ambient.depth} is insufficient: {reason}")

    ambient = pres.ambient
    g_on_balls = _ball_values(ambient, beta, g)
    entry_at_beta: dict[str, list[str]] = {}
    for x in pres.space.points:
        entry_at_beta.setdefault(pres.eta[x].entries[beta], []).append(x)
    ball_table: dict[str, str] = {}
    avoid: dict[str, list[str]] = {y: [] for y in y_space.points}
    image: dict[str, list[str]] = {y: [] for y in y_space.points}
    for x_point in x_space.points:
        fiber = f.fiber(x_point)
        free = []
        for label in ambient.levels[beta].points:
            if g_on_balls[label] != x_point:
                continue
            holders = entry_at_beta.get(label)
            if holders:
                y = b[holders[0]]
                ball_table[label] = y
                image[y].append(label)
            else:
                free.append(label)
        for i, label in enumerate(free):
            y = fiber[i % len(fiber)]
            ball_table[label] = y
            avoid[y].append(label)

    point_table = {
        w: ball_table[ambient.ancestor(ambient.depth, w, beta)] for w in ambient.points
    }
    assert set(point_table.values()) == set(y_space.points)
    assert all(f(point_table[w]) == g[w] for w in ambient.points)
    assert all(point_table[pres.eta_point(x)] == b[x] for x in pres.space.points)
    return LiftResult(
        beta=beta,
        ball_table=ball_table,
        point_table=point_table,
        avoid_families={y: tuple(v) for y, v in avoid.items()},
        image_families={y: tuple(v) for y, v in image.items()},
    )


def brute_force_lift_oracle(
    pres: GenericPresentation,
    f: Surjection,
    b: Mapping[str, str],
    g: Mapping[str, str],
    *,
    bound: int = 200_000,
    beta: int | None = None,
) -> list[dict[str, str]]:
    """Every ball table at one level solving both lift equations, by enumeration.

    Independent of the constructive route: candidates per ball come from the
    fiber constraints alone and surjectivity is filtered at the end.  Raises
    when the search space |Y| ** (number of balls) exceeds `bound`.
    """
    if beta is None:
        beta, reason = _choose_lift_level(pres, f, b, g)
        if beta == 0:
            raise DepthError(f"no enumeration level available: {reason}")
    ambient = pres.ambient
    labels = ambient.levels[beta].points
    y_space = f.dom
    if len(y_space) ** len(labels) > bound:
        raise DepthError(
            f"oracle bound exceeded: {len(y_space)}^{len(labels)} maps at level {beta}"
        )
    g_on_balls = _ball_values(ambient, beta, g)
    forced: dict[str, set[str]] = {}
    for x in pres.space.points:
        forced.setdefault(pres.eta[x].entries[beta], set()).add(b[x])
    candidates = []
    for label in labels:
        cands = [y for y in f.fiber(g_on_balls[label])]
        need = forced.get(label)
        if need is not None:
            cands = [y for y in cands if y in need] if len(need) == 1 else []
        candidates.append(cands)
    out = []
    for combo in itertools.product(*candidates):
        if set(combo) != set(y_space.points):
            continue
        out.append(dict(zip(labels, combo)))
    return out


@dataclass(frozen=True)
class PartialHomeo:
    """A bijection between two embedded base trees respecting balls level-by-level."""

    src: GenericPresentation
    dst: GenericPresentation
    mapping: dict[str, str]

    def __post_init__(self):
        src_pts, dst_pts = self.src.space.points, self.dst.space.points
        if set(self.mapping) != set(src_pts) or set(self.mapping.values()) != set(dst_pts):
            raise InputError("mapping is not a bijection between the two embedded sets")
        if len(set(self.mapping.values())) != len(self.mapping):
            raise InputError("mapping is not injective")
        common = min(self.src.space.depth, self.dst.space.depth)
        for x in src_pts:
            for y in src_pts:
                du = u_metric(self.src.space, x, y)
                dv = u_metric(self.dst.space, self.mapping[x], self.mapping[y])
                if min(du, common) != min(dv, common):
                    raise InputError(
                        f"mapping breaks ball structure at level {min(du, dv) + 1}: "
                        f"pair ({x!r}, {y!r}) meets at {du}, images meet at {dv}"
                    )


@dataclass(frozen=True)
class AmbientAutoMap:
    """Level-wise bijections between two ambient trees commuting with parents."""

    src: BallTree
    dst: BallTree
    level_maps: tuple[dict[str, str], ...]

    def __post_init__(self):
        if self.src.depth != self.dst.depth:
            raise ValueError("ambient trees differ in depth")
        if len(self.level_maps) != self.src.depth + 1:
            raise ValueError("need one level map per level")
        for level, table in enumerate(self.level_maps):
            if set(table) != set(self.src.levels[level].points):
                raise ValueError(f"level {level} map is not total")
            if set(table.values()) != set(self.dst.levels[level].points):
                raise ValueError(f"level {level} map is not a bijection")
        for level in range(self.src.depth):
            upper, lower = self.level_maps[level + 1], self.level_maps[level]
            for child in self.src.levels[level + 1].points:
                if self.dst.parents[level](upper[child]) != lower[self.src.parents[level](child)]:
                    raise ValueError(f"level maps do not commute with parents at {child!r}")

    def apply(self, thread: Thread) -> Thread:
        return Thread(tuple(self.level_maps[a][e] for a, e in enumerate(thread.entries)))


def extend_homeo(p: PartialHomeo) -> AmbientAutoMap:
    """Extend a partial homeomorphism to level bijections of the ambients.

    Levels are fixed one at a time: children carrying embedded points are
    matched through the given bijection, the remaining (image-free) children
    are paired off in canonical order.  Rounds alternate the driving side,
    which only alternates the iteration order; the matching itself is
    symmetric.  Fails when level shapes or fiber sizes disagree.
    """
    src_amb, dst_amb = p.src.ambient, p.dst.ambient
    if src_amb.depth != dst_amb.depth:
        raise DepthError(
            f"ambient depths differ ({src_amb.depth} vs {dst_amb.depth}); "
            "build both presentations to the same depth"
        )
    src_marks: dict[tuple[int, str], list[str]] = {}
    for x, thread in p.src.eta.items():
        for level, entry in enumerate(thread.entries):
            src_marks.setdefault((level, entry), []).append(x)
    dst_marked: tuple[set[str], ...] = tuple(set() for _ in dst_amb.levels)
    for thread in p.dst.eta.values():
        for level, entry in enumerate(thread.entries):
            dst_marked[level].add(entry)

    level_maps = [{src_amb.levels[0].points[0]: dst_amb.levels[0].points[0]}]
    for level in range(1, src_amb.depth + 1):
        if len(src_amb.levels[level]) != len(dst_amb.levels[level]):
            raise DepthError(
                f"round {level}: levels have {len(src_amb.levels[level])} and "
                f"{len(dst_amb.levels[level])} balls; the presentations are incompatible"
            )
        table: dict[str, str] = {}
        parents_pairs = list(level_maps[level - 1].items())
        if level % 2 == 0:
            parents_pairs = sorted(
                parents_pairs, key=lambda vw: dst_amb.levels[level - 1].index(vw[1])
            )
        for v, w in parents_pairs:
            src_children = src_amb.children(level - 1, v)
            dst_children = dst_amb.children(level - 1, w)
            if len(src_children) != len(dst_children):
                raise DepthError(
                    f"round {level}: ball {v!r} has {len(src_children)} children, "
                    f"its image {w!r} has {len(dst_children)}"
                )
            taken = set()
            for child in src_children:
                holders = src_marks.get((level, child))
                if not holders:
                    continue
                targets = {p.dst.eta[p.mapping[x]].entries[level] for x in holders}
                if len(targets) != 1:
                    raise InputError(
                        f"round {level}: ball {child!r} maps across distinct target balls"
                    )
                target = targets.pop()
                assert target in dst_children
                table[child] = target
                taken.add(target)
            free_dst = [c for c in dst_children if c not in taken]
            spare_dst = [c for c in free_dst if c in dst_marked[level]]
            if spare_dst:
                raise InputError(
                    f"round {level}: target ball {spare_dst[0]!r} carries embedded points "
                    "not reached by the mapping"
                )
            free_src = [c for c in src_children if c not in table]
            for c_src, c_dst in zip(free_src, free_dst):
                table[c_src] = c_dst
        level_maps.append(table)

    auto = AmbientAutoMap(src=src_amb, dst=dst_amb, level_maps=tuple(level_maps))
    for x, y in p.mapping.items():
        assert auto.apply(p.src.eta[x]) == p.dst.eta[y]
    return auto


def retract_onto(pres: GenericPresentation) -> SequenceArrow:
    """A sequence arrow from the ambient quotients onto the base quotients
    that is a left inverse of the embedding.

    Each ambient point is sent to its nearest embedded point (deepest shared
    ball, ties to the canonical order); the per-level components then factor
    through the recorded reindex levels, which certify uniform continuity.
    """
    ambient, base = pres.ambient, pres.space
    nearest: dict[str, str] = {}
    for w in ambient.points:
        best = max(
            base.points,
            key=lambda x: (u_metric(ambient, w, pres.eta_point(x)), -base.points.index(x)),
        )
        nearest[w] = best
    reindex = []
    maps = []
    for m in range(base.depth + 1):
        component = {w: base.ancestor(base.depth, nearest[w], m) for w in ambient.points}
        level = factoring_level(ambient, component)
        reindex.append(level)
        table = _ball_values(ambient, level, component)
        maps.append(Surjection(ambient.levels[level], base.levels[m], table))
    arrow = SequenceArrow(
        src=ball_quotients(ambient),
        dst=ball_quotients(base),
        reindex=tuple(reindex),
        maps=tuple(maps),
    )
    embedded = thread_embedding(base)
    for x in base.points:
        assert apply_sequence_arrow(arrow, pres.eta[x]) == embedded[x]
    return arrow


def retraction_table(pres: GenericPresentation, arrow: SequenceArrow) -> dict[str, str]:
    """Ambient point to base point table induced by a retraction arrow."""
    embedding = thread_embedding(pres.ambient)
    out = {}
    for w in pres.ambient.points:
        out[w] = apply_sequence_arrow(arrow, embedding[w]).entries[-1]
    return out
