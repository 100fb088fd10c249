"""JSON encoding of trees, sequences and certificates.

The schema is flat and diffable: a tree is its depth, the label lists per
level and the parent index per child; maps are label-to-label objects.
Serialization is byte-deterministic (sorted keys, fixed separators).
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .balltree import BallTree, NowhereDenseWitness
from .errors import SchemaError
from .sequences import InverseSequence, SlicedSequence
from .slices import SliceObject
from .spaces import FiniteSpace, PointMap, Surjection


def require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def content_digest(payload: dict) -> str:
    body = {k: v for k, v in payload.items() if k != "integrity"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def loads(text: str) -> Any:
    return json.loads(text)


def tree_to_json(tree: BallTree) -> dict:
    parents = []
    for a, par in enumerate(tree.parents):
        upper = tree.levels[a + 1]
        lower = tree.levels[a]
        parents.append([lower.index(par(b)) for b in upper.points])
    return {
        "depth": tree.depth,
        "levels": [list(level.points) for level in tree.levels],
        "parents": parents,
    }


def tree_from_json(data: Any, name: str = "tree") -> BallTree:
    require(isinstance(data, dict), f"{name}: expected an object")
    require(isinstance(data.get("depth"), int), f"{name}: 'depth' must be an integer")
    levels_raw = data.get("levels")
    parents_raw = data.get("parents")
    require(isinstance(levels_raw, list) and levels_raw, f"{name}: 'levels' must be a list")
    require(isinstance(parents_raw, list), f"{name}: 'parents' must be a list")
    require(len(levels_raw) == data["depth"] + 1, f"{name}: depth disagrees with level count")
    require(len(parents_raw) == data["depth"], f"{name}: need one parent row per non-root level")
    levels = []
    for a, labels in enumerate(levels_raw):
        require(
            isinstance(labels, list) and all(isinstance(x, str) for x in labels),
            f"{name}: level {a} must be a list of strings",
        )
        try:
            levels.append(FiniteSpace(id=f"level{a}", points=tuple(labels)))
        except ValueError as exc:
            raise SchemaError(f"{name}: level {a}: {exc}") from None
    parents = []
    for a, row in enumerate(parents_raw):
        upper, lower = levels[a + 1], levels[a]
        require(
            isinstance(row, list) and len(row) == len(upper),
            f"{name}: parent row {a} must list one index per level-{a + 1} ball",
        )
        mapping = {}
        for child, idx in zip(upper.points, row):
            require(
                isinstance(idx, int) and 0 <= idx < len(lower),
                f"{name}: parent row {a}: index {idx!r} out of range",
            )
            mapping[child] = lower.points[idx]
        try:
            parents.append(Surjection(upper, lower, mapping))
        except ValueError as exc:
            raise SchemaError(f"{name}: parent row {a}: {exc}") from None
    try:
        return BallTree(levels=tuple(levels), parents=tuple(parents))
    except ValueError as exc:
        raise SchemaError(f"{name}: {exc}") from None


def trees_equal(a: BallTree, b: BallTree) -> bool:
    """Structural equality: same level labels and same parent assignments."""
    if a.depth != b.depth:
        return False
    if any(x.points != y.points for x, y in zip(a.levels, b.levels)):
        return False
    return all(x.mapping == y.mapping for x, y in zip(a.parents, b.parents))


def map_from_json(data: Any, dom: FiniteSpace, cod: FiniteSpace, name: str, surjective: bool = True):
    require(isinstance(data, dict), f"{name}: expected a label-to-label object")
    require(all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()), f"{name}: labels must be strings")
    cls = Surjection if surjective else PointMap
    try:
        return cls(dom, cod, data)
    except ValueError as exc:
        raise SchemaError(f"{name}: {exc}") from None


def sliced_to_json(sliced: SlicedSequence) -> dict:
    return {
        "spaces": [{"id": sp.id, "points": list(sp.points)} for sp in sliced.seq.spaces],
        "steps": [dict(step.mapping) for step in sliced.seq.steps],
        "phis": [
            {"level": phi.level, "map": dict(phi.quotient_map.mapping)} for phi in sliced.phis
        ],
    }


def sliced_parts_from_json(
    data: Any, base: BallTree, name: str = "sequence"
) -> tuple[tuple[FiniteSpace, ...], tuple[PointMap, ...], tuple[SliceObject, ...]]:
    """Parse the shape of a sliced sequence without judging its semantics.

    Steps come back as plain point maps; surjectivity and compatibility stay
    with the verifier so that bad certificate content reads as a failed
    check, not as a parse error.
    """
    require(isinstance(data, dict), f"{name}: expected an object")
    spaces_raw = data.get("spaces")
    steps_raw = data.get("steps")
    phis_raw = data.get("phis")
    require(isinstance(spaces_raw, list) and spaces_raw, f"{name}: 'spaces' must be a list")
    require(isinstance(steps_raw, list), f"{name}: 'steps' must be a list")
    require(isinstance(phis_raw, list), f"{name}: 'phis' must be a list")
    require(len(steps_raw) == len(spaces_raw) - 1, f"{name}: need one step per adjacent pair")
    require(len(phis_raw) == len(spaces_raw), f"{name}: need one slice map per space")
    spaces = []
    for i, entry in enumerate(spaces_raw):
        require(
            isinstance(entry, dict) and isinstance(entry.get("id"), str),
            f"{name}: space {i} needs an 'id'",
        )
        pts = entry.get("points")
        require(
            isinstance(pts, list) and all(isinstance(x, str) for x in pts),
            f"{name}: space {i} needs string points",
        )
        try:
            spaces.append(FiniteSpace(id=entry["id"], points=tuple(pts)))
        except ValueError as exc:
            raise SchemaError(f"{name}: space {i}: {exc}") from None
    steps = tuple(
        map_from_json(step, spaces[i + 1], spaces[i], f"{name}: step {i}", surjective=False)
        for i, step in enumerate(steps_raw)
    )
    phis = []
    for i, entry in enumerate(phis_raw):
        require(isinstance(entry, dict), f"{name}: phi {i} must be an object")
        level = entry.get("level")
        require(
            isinstance(level, int) and 0 <= level <= base.depth,
            f"{name}: phi {i} has a bad level",
        )
        quotient = map_from_json(
            entry.get("map"), base.levels[level], spaces[i], f"{name}: phi {i}", surjective=False
        )
        try:
            phis.append(SliceObject(base=base, level=level, target=spaces[i], quotient_map=quotient))
        except ValueError as exc:
            raise SchemaError(f"{name}: phi {i}: {exc}") from None
    return tuple(spaces), steps, tuple(phis)


def sliced_from_json(data: Any, base: BallTree, name: str = "sequence") -> SlicedSequence:
    spaces, steps, phis = sliced_parts_from_json(data, base, name)
    try:
        return SlicedSequence(InverseSequence(spaces, steps), phis)
    except ValueError as exc:
        raise SchemaError(f"{name}: {exc}") from None


def witness_to_json(witness: NowhereDenseWitness) -> dict:
    return {
        "levels": [
            {"alpha": alpha, "beta": witness.target_levels[alpha], "choices": dict(witness.choices[alpha])}
            for alpha in range(len(witness.target_levels))
        ]
    }


def witness_from_json(data: Any, name: str = "witness") -> NowhereDenseWitness:
    require(isinstance(data, dict) and isinstance(data.get("levels"), list), f"{name}: expected levels")
    targets = []
    choices = []
    for i, entry in enumerate(data["levels"]):
        require(isinstance(entry, dict), f"{name}: level {i} must be an object")
        require(entry.get("alpha") == i, f"{name}: level {i} out of order")
        beta = entry.get("beta")
        require(isinstance(beta, int), f"{name}: level {i} needs an integer 'beta'")
        ch = entry.get("choices")
        require(
            isinstance(ch, dict)
            and all(isinstance(k, str) and isinstance(v, str) for k, v in ch.items()),
            f"{name}: level {i} choices must map labels to labels",
        )
        targets.append(beta)
        choices.append(dict(ch))
    return NowhereDenseWitness(tuple(targets), tuple(choices))
