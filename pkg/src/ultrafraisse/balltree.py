"""Truncated ultrametric spaces as leveled partition trees.

A tree of depth d stores, for each level 0..d, the finite space of ball
labels at that level, plus a parent surjection from each level to the one
above.  Level 0 is a single ball (the whole space) and the level-d balls
are the points.  Distances use the reversed convention: u(a, b) is the
deepest level at which a and b still share a ball, so larger values mean
closer, and u(a, b) = d exactly when a = b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .spaces import FiniteSpace, Surjection
from .sequences import InverseSequence, Report, Thread


@dataclass(frozen=True)
class BallTree:
    levels: tuple[FiniteSpace, ...]
    parents: tuple[Surjection, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValueError("a ball tree needs depth >= 1")
        if len(self.parents) != len(self.levels) - 1:
            raise ValueError("need one parent map per non-root level")
        if len(self.levels[0]) != 1:
            raise ValueError("level 0 must consist of a single ball")
        for a, par in enumerate(self.parents):
            if par.dom != self.levels[a + 1] or par.cod != self.levels[a]:
                raise ValueError(f"parent map {a} does not map level {a + 1} onto level {a}")
        # ancestor chains: _chains[level][ball] = (ancestor at 0, ..., ball)
        chains: list[dict[str, tuple[str, ...]]] = [{b: (b,) for b in self.levels[0].points}]
        for a, par in enumerate(self.parents):
            chains.append({b: chains[a][par(b)] + (b,) for b in self.levels[a + 1].points})
        object.__setattr__(self, "_chains", tuple(chains))

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def points(self) -> tuple[str, ...]:
        return self.levels[-1].points

    def ancestor(self, level: int, label: str, alpha: int) -> str:
        """The level-alpha ball containing the given level-`level` ball."""
        if not 0 <= alpha <= level <= self.depth:
            raise ValueError(f"bad ancestor request ({level}, {alpha})")
        chain = self._chains[level].get(label)
        if chain is None:
            raise ValueError(f"{label!r} is not a ball at level {level}")
        return chain[alpha]

    def children(self, level: int, label: str) -> tuple[str, ...]:
        """Balls at level+1 directly inside the given ball, in canonical order."""
        if not 0 <= level < self.depth:
            raise ValueError(f"no children below level {level}")
        if label not in self.levels[level]:
            raise ValueError(f"{label!r} is not a ball at level {level}")
        return self.parents[level].fiber(label)

    def descendants(self, level: int, label: str, beta: int) -> tuple[str, ...]:
        """Balls at level `beta` >= `level` contained in the given ball."""
        if not 0 <= level <= beta <= self.depth:
            raise ValueError(f"bad descendant request ({level}, {beta})")
        return tuple(
            b for b in self.levels[beta].points if self._chains[beta][b][level] == label
        )

    def leafset(self, level: int, label: str) -> frozenset[str]:
        return frozenset(self.descendants(level, label, self.depth))


def u_metric(tree: BallTree, a: str, b: str) -> int:
    """Deepest level at which a and b share a ball; equals depth iff a == b."""
    if a not in tree.levels[-1]:
        raise ValueError(f"unknown point {a!r}")
    if b not in tree.levels[-1]:
        raise ValueError(f"unknown point {b!r}")
    chain_a = tree._chains[tree.depth][a]
    chain_b = tree._chains[tree.depth][b]
    meet = 0
    for level in range(tree.depth + 1):
        if chain_a[level] != chain_b[level]:
            break
        meet = level
    return meet


def ball(tree: BallTree, point: str, alpha: int) -> frozenset[str]:
    """All points sharing the level-alpha ball of `point`."""
    if point not in tree.levels[-1]:
        raise ValueError(f"unknown point {point!r}")
    if not 0 <= alpha <= tree.depth:
        raise ValueError(f"level {alpha} out of range")
    return tree.leafset(alpha, tree.ancestor(tree.depth, point, alpha))


def check_axioms(tree: BallTree) -> Report:
    """Exhaustively verify the three ultrametric laws plus the ball nesting law."""
    issues = []
    pts = tree.points
    d = tree.depth
    dist = {(a, b): u_metric(tree, a, b) for a in pts for b in pts}
    for a in pts:
        for b in pts:
            if (dist[(a, b)] == d) != (a == b):
                issues.append(f"identity law fails at ({a!r}, {b!r})")
            if dist[(a, b)] != dist[(b, a)]:
                issues.append(f"symmetry fails at ({a!r}, {b!r})")
    for x in pts:
        for y in pts:
            for z in pts:
                if dist[(y, z)] < min(dist[(y, x)], dist[(x, z)]):
                    issues.append(f"triangle law fails at ({y!r}, {x!r}, {z!r})")
    all_balls = [
        (alpha, label, tree.leafset(alpha, label))
        for alpha in range(d + 1)
        for label in tree.levels[alpha].points
    ]
    for alpha, la, sa in all_balls:
        for beta, lb, sb in all_balls:
            inter = sa & sb
            if inter and not (sa <= sb or sb <= sa):
                issues.append(f"balls ({alpha},{la!r}) and ({beta},{lb!r}) overlap without nesting")
            if sa < sb and not alpha > beta:
                issues.append(f"strict nesting ({alpha},{la!r}) < ({beta},{lb!r}) without level drop")
    return Report(tuple(issues))


def ball_quotients(tree: BallTree) -> InverseSequence:
    """The inverse sequence of level spaces with parent maps as steps."""
    return InverseSequence(spaces=tree.levels, steps=tree.parents)


ROOT_LABEL = "*"


def from_sequence(seq: InverseSequence) -> BallTree:
    """Rebuild a ball tree whose level-alpha balls are the sequence's spaces.

    The sequence must be coherent.  When the bottom space is not a singleton,
    a fresh one-ball root level is prepended: the whole space is always the
    single ball of radius zero.
    """
    from .sequences import check_coherent

    report = check_coherent(seq)
    if not report.ok:
        raise ValueError(f"incoherent sequence: {report.issues[0]}")
    spaces = list(seq.spaces)
    steps = [
        s if isinstance(s, Surjection) else Surjection(s.dom, s.cod, s.mapping)
        for s in seq.steps
    ]
    if len(spaces[0]) > 1:
        root = FiniteSpace(id="root", points=(ROOT_LABEL,))
        steps.insert(0, Surjection(spaces[0], root, {p: ROOT_LABEL for p in spaces[0].points}))
        spaces.insert(0, root)
    return BallTree(levels=tuple(spaces), parents=tuple(steps))


def thread_embedding(tree: BallTree) -> dict[str, Thread]:
    """Each point mapped to its chain of ancestors, a thread of the ball quotients."""
    return {p: Thread(tree._chains[tree.depth][p]) for p in tree.points}


@dataclass(frozen=True)
class BoundSchedule:
    """Nondecreasing per-level caps on the number of balls."""

    caps: tuple[int, ...]

    def __post_init__(self):
        if any(c <= 0 for c in self.caps):
            raise ValueError("caps must be positive")
        if any(self.caps[i] > self.caps[i + 1] for i in range(len(self.caps) - 1)):
            raise ValueError("caps must be nondecreasing")


def check_bounded(tree: BallTree, schedule: BoundSchedule) -> Report:
    issues = []
    if len(schedule.caps) < tree.depth + 1:
        issues.append(f"schedule covers {len(schedule.caps)} levels, tree has {tree.depth + 1}")
    for alpha, space in enumerate(tree.levels):
        if alpha < len(schedule.caps) and len(space) > schedule.caps[alpha]:
            issues.append(f"level {alpha} has {len(space)} balls, cap is {schedule.caps[alpha]}")
    return Report(tuple(issues))


@dataclass(frozen=True)
class NowhereDenseWitness:
    """A per-level certificate that a point set is uniformly nowhere dense.

    For each level alpha < depth, `target_levels[alpha]` is a level beta > alpha
    and `choices[alpha]` picks, inside every alpha-ball, one beta-ball whose
    points all avoid the subject set.
    """

    target_levels: tuple[int, ...]
    choices: tuple[dict[str, str], ...]


@dataclass(frozen=True)
class NowhereDenseFailure:
    """Least level at which no avoiding deeper ball exists, with an offending ball."""

    level: int
    ball: str


def _avoiding_descendants(tree: BallTree, level: int, label: str, beta: int, avoid: frozenset[str]) -> tuple[str, ...]:
    return tuple(
        b for b in tree.descendants(level, label, beta) if not (tree.leafset(beta, b) & avoid)
    )


def is_uniformly_nowhere_dense(
    tree: BallTree, subset: Iterable[str]
) -> NowhereDenseWitness | NowhereDenseFailure:
    """Exhaustive search for a uniform nowhere-density witness.

    For every level alpha the least beta > alpha is found such that each
    alpha-ball contains a beta-ball disjoint from the subset, together with
    the lexicographically least such ball per alpha-ball.  If some level
    admits no beta at all, the least failing level is returned instead.
    """
    avoid = frozenset(subset)
    unknown = avoid - set(tree.points)
    if unknown:
        raise ValueError(f"subset point {sorted(unknown)[0]!r} is not in the tree")
    target_levels = []
    choices = []
    for alpha in range(tree.depth):
        found_beta = None
        found_choice: dict[str, str] = {}
        for beta in range(alpha + 1, tree.depth + 1):
            choice = {}
            for label in tree.levels[alpha].points:
                free = _avoiding_descendants(tree, alpha, label, beta, avoid)
                if not free:
                    break
                choice[label] = free[0]
            else:
                found_beta, found_choice = beta, choice
                break
        if found_beta is None:
            worst = next(
                label
                for label in tree.levels[alpha].points
                if not _avoiding_descendants(tree, alpha, label, tree.depth, avoid)
            )
            return NowhereDenseFailure(level=alpha, ball=worst)
        target_levels.append(found_beta)
        choices.append(found_choice)
    return NowhereDenseWitness(tuple(target_levels), tuple(choices))


def validate_witness(tree: BallTree, subset: Iterable[str], witness: NowhereDenseWitness) -> Report:
    """Recheck every clause of a witness against the tree and subset."""
    avoid = frozenset(subset)
    issues = []
    if len(witness.target_levels) != tree.depth or len(witness.choices) != tree.depth:
        return Report((f"witness covers {len(witness.target_levels)} levels, tree needs {tree.depth}",))
    for alpha in range(tree.depth):
        beta = witness.target_levels[alpha]
        if not alpha < beta <= tree.depth:
            issues.append(f"level {alpha}: target level {beta} not in ({alpha}, {tree.depth}]")
            continue
        choice = witness.choices[alpha]
        for label in tree.levels[alpha].points:
            picked = choice.get(label)
            if picked is None:
                issues.append(f"level {alpha}: no choice for ball {label!r}")
                continue
            if picked not in tree.levels[beta]:
                issues.append(f"level {alpha}: choice {picked!r} is not a level-{beta} ball")
                continue
            if tree.ancestor(beta, picked, alpha) != label:
                issues.append(f"level {alpha}: choice {picked!r} is not inside ball {label!r}")
            if tree.leafset(beta, picked) & avoid:
                issues.append(f"level {alpha}: choice {picked!r} meets the subset")
    return Report(tuple(issues))


def nowhere_dense_to_uniform(
    tree: BallTree,
    subset: Iterable[str],
    per_ball: Mapping[tuple[int, str], tuple[int, str]],
) -> NowhereDenseWitness:
    """Turn per-ball avoidance data into a uniform witness.

    `per_ball` assigns to every ball (alpha, label) with alpha < depth some
    deeper level and an avoiding ball inside it.  Per level the uniform target
    is the maximum of the per-ball levels; each witness ball is deepened to
    that level by taking its least descendant, which still avoids the subset.
    """
    avoid = frozenset(subset)
    target_levels = []
    choices = []
    for alpha in range(tree.depth):
        entries = {}
        for label in tree.levels[alpha].points:
            got = per_ball.get((alpha, label))
            if got is None:
                raise ValueError(f"per_ball data missing for ball ({alpha}, {label!r})")
            beta_v, picked = got
            if not alpha < beta_v <= tree.depth:
                raise ValueError(f"ball ({alpha}, {label!r}): level {beta_v} not below {label!r}")
            if picked not in tree.levels[beta_v] or tree.ancestor(beta_v, picked, alpha) != label:
                raise ValueError(f"ball ({alpha}, {label!r}): witness {picked!r} not inside it")
            if tree.leafset(beta_v, picked) & avoid:
                raise ValueError(f"ball ({alpha}, {label!r}): witness {picked!r} meets the subset")
            entries[label] = (beta_v, picked)
        beta = max(b for b, _ in entries.values())
        deepened = {}
        for label, (beta_v, picked) in entries.items():
            descendants = tree.descendants(beta_v, picked, beta)
            deepened[label] = descendants[0]
            assert not (tree.leafset(beta, descendants[0]) & avoid)
        target_levels.append(beta)
        choices.append(deepened)
    return NowhereDenseWitness(tuple(target_levels), tuple(choices))


def factoring_level(tree: BallTree, point_map: Mapping[str, str]) -> int:
    """Least level at which the map is constant on every ball.

    The returned level is the modulus of uniform continuity of the map; it
    always exists because depth-level balls are singletons.
    """
    missing = [p for p in tree.points if p not in point_map]
    if missing:
        raise ValueError(f"map undefined at point {missing[0]!r}")
    for level in range(tree.depth + 1):
        if all(
            len({point_map[p] for p in tree.leafset(level, label)}) == 1
            for label in tree.levels[level].points
        ):
            return level
    return tree.depth
