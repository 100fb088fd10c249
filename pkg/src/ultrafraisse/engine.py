"""Construction of generic sequences over a fixed ball tree.

The building blocks are padded spaces: the balls of the base tree at one
level, extended by a block of padding points that the map from the base
never reaches.  Canonical surjections between padded spaces route ball
labels along parent chains and padding through a round-robin splitter that
feeds both the coarser padding and (via a cyclic cover) the coarser balls.

`build_fraisse` walks a rigid ball-level track, absorbing scheduled test
arrows by pullback before each advance; the pad block per level grows just
enough for every absorbed arrow to factor back through the canonical
surjection.  `verify_fraisse` recertifies the two sequence conditions
(reach every object; factor every arrow into a stage) from scratch.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .balltree import BallTree, factoring_level
from .errors import DepthError
from .sequences import InverseSequence, SlicedSequence
from .slices import SliceArrow, SliceObject, amalgamate_slice, compose_arrows, identity_arrow
from .spaces import FiniteSpace, PointMap, Surjection, compose


@dataclass(frozen=True)
class PaddingSchedule:
    """Geometric pad sizes: level g gets base * growth**g padding points.

    growth >= 2 keeps every splitter fiber nonempty (pad(d) >= 2 * pad(x)
    whenever d > x); base >= 2 keeps padding available at every level.
    """

    base: int = 2
    growth: int = 2
    max_index: int | None = None

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("pad base must be at least 2")
        if self.growth < 2:
            raise ValueError("pad growth must be at least 2")

    def pad(self, index: int) -> int:
        if index < 0:
            raise ValueError("pad index must be nonnegative")
        if self.max_index is not None and index > self.max_index:
            raise DepthError(f"padding schedule ends at index {self.max_index}, asked for {index}")
        return self.base * self.growth**index

    def min_index_for(self, count: int, floor: int = 0) -> int:
        """Smallest index >= floor whose pad size reaches `count`."""
        index = max(floor, 0)
        while self.pad(index) < count:
            index += 1
        return index


def pad_space(schedule: PaddingSchedule, index: int) -> FiniteSpace:
    return FiniteSpace(
        id=f"pad{index}",
        points=tuple(f"p{i}" for i in range(schedule.pad(index))),
    )


@dataclass(frozen=True)
class PaddedObject:
    """A slice object onto (balls at one level) + (an unreached pad block)."""

    ball_level: int
    pad_index: int
    object: SliceObject
    pad_labels: tuple[str, ...]

    @property
    def ball_labels(self) -> tuple[str, ...]:
        return self.object.base.levels[self.ball_level].points


def make_padded_object(
    tree: BallTree, ball_level: int, pad_index: int, schedule: PaddingSchedule
) -> PaddedObject:
    """Target = ball labels at `ball_level` (tree order) followed by pad labels."""
    if not 0 <= ball_level <= tree.depth:
        raise ValueError(f"level {ball_level} out of range for depth {tree.depth}")
    balls = tree.levels[ball_level].points
    pads = pad_space(schedule, pad_index).points
    if set(balls) & set(pads):
        clash = sorted(set(balls) & set(pads))[0]
        raise ValueError(f"ball label {clash!r} collides with a pad label")
    target = FiniteSpace(id=f"L{ball_level}P{pad_index}", points=balls + pads)
    quotient = PointMap(tree.levels[ball_level], target, {b: b for b in balls})
    obj = SliceObject(base=tree, level=ball_level, target=target, quotient_map=quotient)
    return PaddedObject(ball_level=ball_level, pad_index=pad_index, object=obj, pad_labels=pads)


def make_splitter(
    pad_lo: int, pad_hi: int, schedule: PaddingSchedule
) -> dict[str, tuple[str, int]]:
    """Round-robin map from the larger pad block to (smaller pad block) x {0,1}.

    For pad_lo < pad_hi every fiber is nonempty and sizes differ by at most
    one; for pad_lo == pad_hi each pad is sent to itself with tag 1, which
    makes the same-index canonical surjection the identity.
    """
    if pad_lo > pad_hi:
        raise ValueError(f"splitter needs pad_lo <= pad_hi, got ({pad_lo}, {pad_hi})")
    hi_points = pad_space(schedule, pad_hi).points
    if pad_lo == pad_hi:
        return {x: (x, 1) for x in hi_points}
    lo_points = pad_space(schedule, pad_lo).points
    targets = [(p, tag) for p in lo_points for tag in (0, 1)]
    assert len(hi_points) >= len(targets)
    return {x: targets[i % len(targets)] for i, x in enumerate(hi_points)}


def make_ball_cover(
    tree: BallTree, ball_level: int, pad_index: int, schedule: PaddingSchedule
) -> Surjection:
    """Cyclic surjection from a pad block onto the balls at one level."""
    balls = tree.levels[ball_level]
    pads = pad_space(schedule, pad_index)
    if len(pads) < len(balls):
        raise DepthError(
            f"pad block {pad_index} has {len(pads)} points, cannot cover {len(balls)} balls"
        )
    mapping = {x: balls.points[i % len(balls)] for i, x in enumerate(pads.points)}
    return Surjection(pads, balls, mapping)


def dominating_arrow(
    tree: BallTree,
    low: tuple[int, int],
    high: tuple[int, int],
    schedule: PaddingSchedule,
) -> SliceArrow:
    """Canonical surjection between padded objects, from `high` indices to `low`.

    Ball labels follow the parent chain; a pad with splitter tag 1 lands on
    the coarser pad, tag 0 lands on a ball through the cyclic cover.
    """
    (alpha, xi), (beta, delta) = low, high
    if not (0 <= alpha <= beta <= tree.depth):
        raise ValueError(f"ball levels must satisfy 0 <= {alpha} <= {beta} <= {tree.depth}")
    if xi > delta:
        raise ValueError(f"pad indices must satisfy {xi} <= {delta}")
    src = make_padded_object(tree, beta, delta, schedule)
    dst = make_padded_object(tree, alpha, xi, schedule)
    splitter = make_splitter(xi, delta, schedule)
    cover = make_ball_cover(tree, alpha, xi, schedule) if xi < delta else None
    mapping = {}
    for b in src.ball_labels:
        mapping[b] = tree.ancestor(beta, b, alpha)
    for x in src.pad_labels:
        p, tag = splitter[x]
        mapping[x] = p if tag == 1 else cover(p)
    q = Surjection(src.object.target, dst.object.target, mapping)
    return SliceArrow(src.object, dst.object, q)


def dominate_object(
    f: SliceObject, tree: BallTree, schedule: PaddingSchedule
) -> tuple[PaddedObject, SliceArrow]:
    """A padded object covering `f`: balls carry the values of f, pads cover
    the unreached part of the target (or the least target point if none)."""
    if f.base != tree:
        raise ValueError("slice object lives over a different tree")
    table = f.point_table()
    beta = factoring_level(tree, table)
    image = set(table.values())
    leftover = [t for t in f.target.points if t not in image]
    gamma = schedule.min_index_for(max(len(leftover), 1))
    padded = make_padded_object(tree, beta, gamma, schedule)
    mapping = {}
    for b in padded.ball_labels:
        leaf = tree.descendants(beta, b, tree.depth)[0]
        mapping[b] = table[leaf]
    for i, x in enumerate(padded.pad_labels):
        mapping[x] = leftover[i % len(leftover)] if leftover else f.target.points[0]
    q = Surjection(padded.object.target, f.target, mapping)
    return padded, SliceArrow(padded.object, f, q)


def dominate_arrow(
    arrow: SliceArrow,
    dst: PaddedObject,
    schedule: PaddingSchedule,
    *,
    ball_level: int | None = None,
    pad_floor: int | None = None,
) -> tuple[PaddedObject, SliceArrow]:
    """Factor the canonical surjection through an arrow into a padded object.

    Given arrow: h -> dst, produce a deeper padded object P and an arrow
    g: P -> h with arrow.q o g.q equal (pointwise) to the canonical
    surjection P -> dst.  The pad index grows until every splitter fiber is
    large enough to cover the corresponding fiber of `arrow`.
    """
    if dst.object != arrow.dst:
        raise ValueError("`dst` is not the padded object the arrow lands in")
    tree = arrow.src.base
    h = arrow.src
    alpha, xi = dst.ball_level, dst.pad_index
    beta = min(tree.depth, max(alpha + 1, h.level)) if ball_level is None else ball_level
    if beta < max(alpha, h.level) or beta > tree.depth:
        raise DepthError(f"ball level {beta} cannot host the factored arrow")

    ball_need = {z: len(arrow.q.fiber(z)) for z in dst.ball_labels}
    pad_need = {p: len(arrow.q.fiber(p)) for p in dst.pad_labels}
    delta = max(xi + 1, pad_floor if pad_floor is not None else 0)
    while True:
        splitter = make_splitter(xi, delta, schedule)
        cover = make_ball_cover(tree, alpha, xi, schedule)
        hi_points = pad_space(schedule, delta).points
        tag1: dict[str, list[str]] = {p: [] for p in dst.pad_labels}
        tag0: dict[str, list[str]] = {z: [] for z in dst.ball_labels}
        for x in hi_points:
            p, tag = splitter[x]
            if tag == 1:
                tag1[p].append(x)
            else:
                tag0[cover(p)].append(x)
        short = [p for p in dst.pad_labels if len(tag1[p]) < pad_need[p]]
        short += [z for z in dst.ball_labels if len(tag0[z]) < ball_need[z]]
        if not short:
            break
        if schedule.max_index is not None and delta >= schedule.max_index:
            raise DepthError(
                f"padding schedule too small: fiber over {short[0]!r} needs "
                f"{max(pad_need.get(short[0], 0), ball_need.get(short[0], 0))} points"
            )
        delta += 1

    padded = make_padded_object(tree, beta, delta, schedule)
    mapping = {}
    for b in padded.ball_labels:
        mapping[b] = h.value_on_ball(beta, b)
    h_image = set(h.point_table().values())
    for p in dst.pad_labels:
        fiber = arrow.q.fiber(p)
        for i, x in enumerate(tag1[p]):
            mapping[x] = fiber[i % len(fiber)]
    for z in dst.ball_labels:
        fiber = arrow.q.fiber(z)
        reached = [y for y in fiber if y in h_image]
        fresh = [y for y in fiber if y not in h_image]
        block = tag0[z]
        if fresh and reached:
            head, tail = block[: -len(fresh)], block[-len(fresh):]
        elif fresh:
            head, tail = [], block
        else:
            head, tail = block, []
        for i, x in enumerate(head):
            mapping[x] = reached[i % len(reached)]
        for i, x in enumerate(tail):
            mapping[x] = fresh[i % len(fresh)]
    g = SliceArrow(padded.object, h, Surjection(padded.object.target, h.target, mapping))
    canonical = dominating_arrow(tree, (alpha, xi), (beta, delta), schedule)
    assert compose(arrow.q, g.q) == canonical.q
    return padded, g


@dataclass(frozen=True)
class FraisseTask:
    """An arrow into one stage of the sequence, to be absorbed by the build."""

    stage: int
    arrow: SliceArrow

    def __post_init__(self):
        if self.stage < 0:
            raise ValueError("stage must be nonnegative")


TaskGenerator = Callable[[SlicedSequence], FraisseTask | None]


@dataclass(frozen=True)
class TaskSchedule:
    """FIFO list of (tag, generator); a generator may wait (return None)
    until the stage it targets exists."""

    entries: tuple[tuple[str, TaskGenerator], ...] = ()

    def __post_init__(self):
        tags = [tag for tag, _ in self.entries]
        if len(set(tags)) != len(tags):
            raise ValueError("task tags must be distinct")


def point_split_task(stage: int, point: str) -> tuple[str, TaskGenerator]:
    """Generator splitting one target point of stage `stage` into two copies."""

    def generate(current: SlicedSequence) -> FraisseTask | None:
        if current.seq.length < stage:
            return None
        phi = current.phis[stage]
        if point not in phi.target:
            raise ValueError(f"{point!r} is not a point of stage {stage}")
        low, high = f"{point}<0", f"{point}<1"
        if low in phi.target or high in phi.target:
            raise ValueError(f"split labels for {point!r} collide with existing points")
        points = []
        for p in phi.target.points:
            points.extend((low, high) if p == point else (p,))
        split_space = FiniteSpace(id=f"{phi.target.id}|split({point})", points=tuple(points))
        collapse = Surjection(
            split_space,
            phi.target,
            {p: (point if p in (low, high) else p) for p in split_space.points},
        )
        ball_space = phi.base.levels[phi.level]
        lifted = {
            b: (low if phi.quotient_map(b) == point else phi.quotient_map(b))
            for b in ball_space.points
        }
        split_obj = SliceObject(
            base=phi.base,
            level=phi.level,
            target=split_space,
            quotient_map=PointMap(ball_space, split_space, lifted),
        )
        return FraisseTask(stage=stage, arrow=SliceArrow(split_obj, phi, collapse))

    return f"split:{stage}:{point}", generate


@dataclass(frozen=True)
class TaskWitness:
    tag: str
    stage: int
    beta: int
    mapping: Surjection


@dataclass(frozen=True)
class BuildResult:
    sequence: SlicedSequence
    padded: tuple[PaddedObject, ...]
    tasks: tuple[tuple[str, FraisseTask], ...]
    witnesses: dict[str, TaskWitness]
    log: tuple[str, ...]


def _digest(q: Surjection) -> str:
    text = ";".join(f"{k}->{v}" for k, v in sorted(q.mapping.items()))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def build_fraisse(
    tree: BallTree,
    depth: int,
    schedule: PaddingSchedule,
    tasks: TaskSchedule = TaskSchedule(),
) -> BuildResult:
    """Build a sliced sequence of padded objects absorbing every scheduled task.

    Stage t sits at ball level min(t, tree depth); each step amalgamates the
    pending eligible tasks into the current stage by pullback, then factors
    the combined arrow through the next canonical surjection, whose pad index
    is grown as needed.  Every absorbed task receives a witness
    (beta, g) with bonding(stage, beta) = task arrow composed with g, exactly.
    """
    if depth < 1:
        raise DepthError("sequence depth must be at least 1")

    def track(t: int) -> int:
        return min(t, tree.depth)

    start = make_padded_object(tree, 0, schedule.min_index_for(len(tree.levels[0])), schedule)
    padded = [start]
    spaces = [start.object.target]
    steps: list[Surjection] = []
    phis = [start.object]
    waiting = list(tasks.entries)
    pending: list[tuple[str, FraisseTask]] = []
    witnesses: dict[str, TaskWitness] = {}
    materialized: list[tuple[str, FraisseTask]] = []
    log: list[str] = []

    for t in range(depth):
        current = SlicedSequence(InverseSequence(tuple(spaces), tuple(steps)), tuple(phis))
        still_waiting = []
        for tag, generate in waiting:
            task = generate(current)
            if task is None:
                still_waiting.append((tag, generate))
                continue
            if task.stage > current.seq.length:
                raise ValueError(f"task {tag!r} targets unbuilt stage {task.stage}")
            if task.arrow.dst != phis[task.stage]:
                raise ValueError(f"task {tag!r} does not land in stage {task.stage}")
            pending.append((tag, task))
            materialized.append((tag, task))
        waiting = still_waiting

        beta = track(t + 1)
        combined = phis[t]
        into = identity_arrow(combined)
        projections: dict[str, SliceArrow] = {}
        absorbed: list[tuple[str, FraisseTask]] = []
        deferred: list[tuple[str, FraisseTask]] = []
        for tag, task in pending:
            if task.arrow.src.level > beta:
                deferred.append((tag, task))
                continue
            bond = current.seq.bonding(task.stage, t)
            cospan = SliceArrow(combined, phis[task.stage], compose(bond, into.q))
            combined, to_prev, to_task = amalgamate_slice(
                combined, task.arrow.src, phis[task.stage], cospan, task.arrow
            )
            projections = {tg: compose_arrows(arr, to_prev) for tg, arr in projections.items()}
            into = compose_arrows(into, to_prev)
            projections[tag] = to_task
            absorbed.append((tag, task))
        pending = deferred

        floor = max(
            padded[t].pad_index + 1,
            schedule.min_index_for(len(tree.levels[beta])),
        )
        next_padded, close = dominate_arrow(
            into, padded[t], schedule, ball_level=beta, pad_floor=floor
        )
        step = compose(into.q, close.q)
        padded.append(next_padded)
        spaces.append(next_padded.object.target)
        steps.append(step)
        phis.append(next_padded.object)
        log.append(
            f"stage {t + 1}: ball_level={next_padded.ball_level} "
            f"pad_index={next_padded.pad_index} size={len(next_padded.object.target)}"
        )
        for tag, task in absorbed:
            witness_q = compose(projections[tag].q, close.q)
            witnesses[tag] = TaskWitness(tag=tag, stage=task.stage, beta=t + 1, mapping=witness_q)
            log.append(f"task {tag}: stage={task.stage} beta={t + 1} digest={_digest(witness_q)}")

    if pending or waiting:
        left = [tag for tag, _ in pending] + [tag for tag, _ in waiting]
        raise DepthError(f"schedule exhausted the build: unserviced tasks {left}")

    sequence = SlicedSequence(InverseSequence(tuple(spaces), tuple(steps)), tuple(phis))
    return BuildResult(
        sequence=sequence,
        padded=tuple(padded),
        tasks=tuple(materialized),
        witnesses=witnesses,
        log=tuple(log),
    )


@dataclass(frozen=True)
class ProbeResult:
    index: int
    status: str
    level: int | None = None
    mapping: Surjection | None = None
    detail: str = ""


@dataclass(frozen=True)
class TaskResult:
    index: int
    status: str
    beta: int | None = None
    mapping: Surjection | None = None
    detail: str = ""


@dataclass(frozen=True)
class FraisseReport:
    probes: tuple[ProbeResult, ...]
    tasks: tuple[TaskResult, ...]

    @property
    def ok(self) -> bool:
        return all(p.status == "witnessed" for p in self.probes) and all(
            t.status == "witnessed" for t in self.tasks
        )


def _forced_values(phi: SliceObject, probe: SliceObject) -> tuple[dict[str, str] | None, str]:
    """Values any commuting map must take on the image of phi, or a conflict."""
    forced: dict[str, str] = {}
    for point in phi.base.points:
        key = phi.point_value(point)
        want = probe.point_value(point)
        if forced.setdefault(key, want) != want:
            return None, f"base point {point!r} forces {key!r} to both {forced[key]!r} and {want!r}"
    return forced, ""


def _saturate(
    needed: list[str], free: list[str], candidates: dict[str, frozenset[str]]
) -> tuple[dict[str, str] | None, str]:
    """Assign distinct free points to cover `needed`, by augmenting paths."""
    owner: dict[str, str] = {}

    def assign(y: str, seen: set[str]) -> bool:
        for x in free:
            if x in seen or y not in candidates[x]:
                continue
            seen.add(x)
            if x not in owner or assign(owner[x], seen):
                owner[x] = y
                return True
        return False

    for y in needed:
        if not assign(y, set()):
            return None, y
    return owner, ""


def _search_task_witness(
    sliced: SlicedSequence, task: FraisseTask, beta: int
) -> tuple[Surjection | None, str]:
    phi = sliced.phis[beta]
    target = task.arrow.src.target
    forced, conflict = _forced_values(phi, task.arrow.src)
    if forced is None:
        return None, conflict
    bond = sliced.seq.bonding(task.stage, beta)
    candidates = {
        x: frozenset(task.arrow.q.fiber(bond(x))) for x in sliced.seq.spaces[beta].points
    }
    for x, y in forced.items():
        if y not in candidates[x]:
            return None, f"forced value {y!r} at {x!r} is outside the bonding fiber"
    free = [x for x in sliced.seq.spaces[beta].points if x not in forced]
    covered = set(forced.values())
    needed = [y for y in target.points if y not in covered]
    owner, stuck = _saturate(needed, free, candidates)
    if owner is None:
        return None, f"target point {stuck!r} cannot be covered by any free fiber"
    mapping = dict(forced)
    for x in free:
        mapping[x] = owner[x] if x in owner else sorted(candidates[x])[0]
    g = Surjection(sliced.seq.spaces[beta], target, mapping)
    assert compose(task.arrow.q, g) == bond
    return g, ""


def verify_fraisse(
    sliced: SlicedSequence,
    tasks: Sequence[FraisseTask] = (),
    probes: Sequence[SliceObject] = (),
    *,
    bound: int = 100_000,
) -> FraisseReport:
    """Independently certify reachability and absorption on a sliced sequence.

    For each probe a commuting surjection out of some stage is searched; for
    each task, every stage beta is scanned for a commuting surjection g with
    bonding(stage, beta) = arrow o g, using fiber constraints plus a matching
    step, which finds a witness exactly when one exists.  Small instances are
    cross-checked by full enumeration under `bound`.
    """
    probe_results = []
    for index, probe in enumerate(probes):
        outcome = ProbeResult(index=index, status="failed", detail="no stage admits an arrow")
        for level in range(sliced.seq.length + 1):
            forced, conflict = _forced_values(sliced.phis[level], probe)
            if forced is None:
                continue
            free = [x for x in sliced.seq.spaces[level].points if x not in forced]
            covered = set(forced.values())
            needed = [y for y in probe.target.points if y not in covered]
            if len(needed) > len(free):
                continue
            mapping = dict(forced)
            for i, x in enumerate(free):
                mapping[x] = needed[i] if i < len(needed) else probe.target.points[0]
            q = Surjection(sliced.seq.spaces[level], probe.target, mapping)
            SliceArrow(sliced.phis[level], probe, q)
            outcome = ProbeResult(index=index, status="witnessed", level=level, mapping=q)
            break
        if (
            outcome.status == "failed"
            and len(probe.target) ** len(sliced.seq.spaces[0]) <= bound
        ):
            # cross-check emptiness at the smallest stage by enumeration
            space = sliced.seq.spaces[0]
            for values in itertools.product(probe.target.points, repeat=len(space)):
                q = dict(zip(space.points, values))
                if set(q.values()) != set(probe.target.points):
                    continue
                if all(
                    q[sliced.phis[0].point_value(p)] == probe.point_value(p)
                    for p in sliced.base.points
                ):
                    raise AssertionError("probe search missed a stage-0 witness")
        probe_results.append(outcome)

    task_results = []
    for index, task in enumerate(tasks):
        outcome = TaskResult(index=index, status="failed", detail="no stage admits a witness")
        reasons = []
        for beta in range(task.stage, sliced.seq.length + 1):
            g, reason = _search_task_witness(sliced, task, beta)
            if g is not None:
                outcome = TaskResult(index=index, status="witnessed", beta=beta, mapping=g)
                break
            reasons.append(f"beta={beta}: {reason}")
        if outcome.status == "failed":
            outcome = TaskResult(index=index, status="failed", detail="; ".join(reasons))
        task_results.append(outcome)

    return FraisseReport(probes=tuple(probe_results), tasks=tuple(task_results))
