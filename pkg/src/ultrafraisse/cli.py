"""Batch front end: build and re-verify embedding, extension and retraction
certificates as JSON documents.

Exit codes: 0 ok, 1 verification failure, 2 parse error, 3 capacity or
depth error, 4 semantic input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .balltree import (
    ball_quotients,
    factoring_level,
    from_sequence,
    is_uniformly_nowhere_dense,
    thread_embedding,
    validate_witness,
)
from .engine import PaddingSchedule, TaskSchedule, point_split_task, verify_fraisse
from .errors import DepthError, InputError, SchemaError
from .fixtures import binary_tree, k4
from .generic import (
    GenericPresentation,
    PartialHomeo,
    extend_homeo,
    embed_generic,
    presentation_from_subset,
    retract_onto,
    retraction_table,
)
from .sequences import (
    InverseSequence,
    SequenceArrow,
    SlicedSequence,
    Thread,
    apply_sequence_arrow,
    check_coherent,
)
from .slices import SliceArrow, SliceObject
from .spaces import FiniteSpace, Surjection, compose, identity
from . import serial


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line: all algorithms are deterministic, the seed label
    is recorded in certificates verbatim."""

    command: str
    inputs: tuple[str, ...] = ()
    depth: int = 4
    pad_base: int = 2
    pad_growth: int = 2
    bounds: int = 200_000
    out: str | None = None
    seed_label: str = ""
    splits: tuple[str, ...] = ()

    def __post_init__(self):
        if self.depth < 1:
            raise DepthError("depth must be at least 1")
        try:
            PaddingSchedule(self.pad_base, self.pad_growth)
        except ValueError as exc:
            raise InputError(str(exc)) from None


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}: malformed JSON: {exc.msg} (line {exc.lineno} column {exc.colno})"
        ) from None


def _schedule(config: RunConfig) -> PaddingSchedule:
    return PaddingSchedule(config.pad_base, config.pad_growth)


def _task_schedule(config: RunConfig) -> TaskSchedule:
    entries = []
    for spec_text in config.splits:
        stage_text, _, point = spec_text.partition(":")
        if not point:
            raise InputError(f"--split wants STAGE:POINT, got {spec_text!r}")
        try:
            stage = int(stage_text)
        except ValueError:
            raise InputError(f"--split stage {stage_text!r} is not an integer") from None
        entries.append(point_split_task(stage, point))
    return TaskSchedule(tuple(entries))


def _canonical_probes(tree) -> list[SliceObject]:
    """One probe per base level (the ball quotient itself) plus a constant probe."""
    probes = []
    point_space = FiniteSpace(id="pt", points=("pt",))
    probes.append(
        SliceObject(
            base=tree,
            level=0,
            target=point_space,
            quotient_map=Surjection(
                tree.levels[0], point_space, {b: "pt" for b in tree.levels[0].points}
            ),
        )
    )
    for alpha in range(tree.depth + 1):
        probes.append(
            SliceObject(
                base=tree,
                level=alpha,
                target=tree.levels[alpha],
                quotient_map=identity(tree.levels[alpha]),
            )
        )
    return probes


def _eta_json(pres: GenericPresentation) -> dict:
    return {x: list(t.entries) for x, t in pres.eta.items()}


def _embed_payload(config: RunConfig, tree) -> dict:
    schedule = _schedule(config)
    tasks = _task_schedule(config)
    pres = embed_generic(tree, config.depth, schedule, tasks)
    probes = _canonical_probes(tree)
    task_list = [t for _, t in pres.build.tasks]
    report = verify_fraisse(pres.sliced, task_list, probes, bound=config.bounds)
    if not report.ok:
        raise RuntimeError("engine bug: freshly built sequence failed its own certification")
    payload = {
        "kind": "embedding-certificate",
        "params": {
            "depth": config.depth,
            "pad_base": config.pad_base,
            "pad_growth": config.pad_growth,
            "seed_label": config.seed_label,
            "splits": list(config.splits),
        },
        "space": serial.tree_to_json(tree),
        "sequence": serial.sliced_to_json(pres.sliced),
        "ambient": serial.tree_to_json(pres.ambient),
        "eta": _eta_json(pres),
        "witness": serial.witness_to_json(pres.witness),
        "tasks": [
            {
                "tag": tag,
                "stage": task.stage,
                "source_points": list(task.arrow.src.target.points),
                "source_level": task.arrow.src.level,
                "source_map": dict(task.arrow.src.quotient_map.mapping),
                "arrow_map": dict(task.arrow.q.mapping),
                "witness_beta": pres.build.witnesses[tag].beta,
                "witness_map": dict(pres.build.witnesses[tag].mapping.mapping),
            }
            for tag, task in pres.build.tasks
        ],
        "probes": [
            {
                "target_points": list(probe.target.points),
                "level": probe.level,
                "target_map": dict(probe.quotient_map.mapping),
                "witness_stage": result.level,
                "witness_map": dict(result.mapping.mapping),
            }
            for probe, result in zip(probes, report.probes)
        ],
        "log": list(pres.build.log),
    }
    payload["integrity"] = serial.content_digest(payload)
    return payload


def cmd_embed(config: RunConfig) -> dict:
    tree = serial.tree_from_json(_read_json(config.inputs[0]), name=config.inputs[0])
    return _embed_payload(config, tree)


def cmd_extend(config: RunConfig) -> dict:
    data = _read_json(config.inputs[0])
    serial.require(isinstance(data, dict), "extend input: expected an object")
    ambient = serial.tree_from_json(data.get("ambient"), name="extend input ambient")
    src_points = data.get("src")
    dst_points = data.get("dst")
    mapping = data.get("map")
    serial.require(
        isinstance(src_points, list) and all(isinstance(x, str) for x in src_points),
        "extend input: 'src' must be a list of points",
    )
    serial.require(
        isinstance(dst_points, list) and all(isinstance(x, str) for x in dst_points),
        "extend input: 'dst' must be a list of points",
    )
    serial.require(
        isinstance(mapping, dict)
        and all(isinstance(k, str) and isinstance(v, str) for k, v in mapping.items()),
        "extend input: 'map' must be a label-to-label object",
    )
    src_pres = presentation_from_subset(ambient, src_points)
    dst_pres = presentation_from_subset(ambient, dst_points)
    auto = extend_homeo(PartialHomeo(src_pres, dst_pres, dict(mapping)))
    payload = {
        "kind": "extension-certificate",
        "ambient": serial.tree_to_json(ambient),
        "src_points": list(src_points),
        "dst_points": list(dst_points),
        "mapping": dict(mapping),
        "levels": [
            {"level": level, "map": dict(table)} for level, table in enumerate(auto.level_maps)
        ],
    }
    payload["integrity"] = serial.content_digest(payload)
    return payload


def cmd_retract(config: RunConfig) -> dict:
    tree = serial.tree_from_json(_read_json(config.inputs[0]), name=config.inputs[0])
    schedule = _schedule(config)
    pres = embed_generic(tree, config.depth, schedule, _task_schedule(config))
    arrow = retract_onto(pres)
    payload = {
        "kind": "retraction-certificate",
        "params": {
            "depth": config.depth,
            "pad_base": config.pad_base,
            "pad_growth": config.pad_growth,
            "seed_label": config.seed_label,
            "splits": list(config.splits),
        },
        "space": serial.tree_to_json(tree),
        "sequence": serial.sliced_to_json(pres.sliced),
        "ambient": serial.tree_to_json(pres.ambient),
        "eta": _eta_json(pres),
        "reindex": list(arrow.reindex),
        "maps": [dict(m.mapping) for m in arrow.maps],
        "table": retraction_table(pres, arrow),
    }
    payload["integrity"] = serial.content_digest(payload)
    return payload


Check = tuple[str, str, str]  # name, status, detail


def _check(checks: list[Check], name: str, fn) -> bool:
    try:
        fn()
    except (AssertionError, ValueError, KeyError) as exc:
        checks.append((name, "fail", str(exc) or repr(exc)))
        return False
    checks.append((name, "pass", ""))
    return True


def _recheck_eta(checks: list[Check], pres_space, sliced, ambient, eta_raw) -> dict[str, Thread]:
    serial.require(
        isinstance(eta_raw, dict)
        and all(
            isinstance(k, str) and isinstance(v, list) and all(isinstance(e, str) for e in v)
            for k, v in eta_raw.items()
        ),
        "eta table must map points to label lists",
    )
    offset = ambient.depth - sliced.seq.length
    eta: dict[str, Thread] = {}

    def run():
        if set(eta_raw) != set(pres_space.points):
            raise ValueError("eta table does not cover exactly the base points")
        root = ambient.levels[0].points[0]
        for x, entries in eta_raw.items():
            want = ((root,) if offset else ()) + tuple(
                phi.point_value(x) for phi in sliced.phis
            )
            if tuple(entries) != want:
                raise ValueError(f"eta entry for {x!r} disagrees with the slice maps")
            eta[x] = Thread(tuple(entries))
        tops = [t.entries[-1] for t in eta.values()]
        if len(set(tops)) != len(tops):
            raise ValueError("eta table is not injective")

    _check(checks, "eta table matches the sequence and is injective", run)
    return eta


def _assemble_sliced(checks: list[Check], payload: dict, space) -> SlicedSequence | None:
    spaces, steps, phis = serial.sliced_parts_from_json(
        payload.get("sequence"), space, name="certificate sequence"
    )
    holder: dict[str, SlicedSequence] = {}

    def assemble():
        holder["sliced"] = SlicedSequence(InverseSequence(spaces, steps), phis)

    if not _check(checks, "sequence wiring and slice compatibility", assemble):
        return None
    sliced = holder["sliced"]
    report = check_coherent(sliced.seq)
    ok = _check(
        checks,
        "sequence is coherent with surjective steps",
        lambda: _raise_unless(report.ok, "; ".join(report.issues[:3])),
    )
    return sliced if ok else None


def _verify_embedding(payload: dict, bounds: int) -> list[Check]:
    checks: list[Check] = []
    space = serial.tree_from_json(payload.get("space"), name="certificate space")
    sliced = _assemble_sliced(checks, payload, space)
    if sliced is None:
        return checks
    ambient_stated = serial.tree_from_json(payload.get("ambient"), name="certificate ambient")
    ambient = from_sequence(sliced.seq)
    _check(
        checks,
        "ambient tree equals the rebuilt sequence tree",
        lambda: _raise_unless(serial.trees_equal(ambient, ambient_stated), "trees differ"),
    )
    eta = _recheck_eta(checks, space, sliced, ambient, payload.get("eta", {}))
    image = [t.entries[-1] for t in eta.values()]

    witness = serial.witness_from_json(payload.get("witness"))
    witness_report = validate_witness(ambient, image, witness)
    _check(
        checks,
        "nowhere-density witness is valid",
        lambda: _raise_unless(witness_report.ok, "; ".join(witness_report.issues[:3])),
    )
    cost = len(ambient.points) * sum(len(level) for level in ambient.levels)
    if cost <= bounds:
        def minimality():
            found = is_uniformly_nowhere_dense(ambient, image)
            if found != witness:
                raise ValueError("exhaustive search disagrees with the stated witness")
        _check(checks, "witness matches the exhaustive search", minimality)
    else:
        checks.append(("witness matches the exhaustive search", "skipped (bound)", f"cost {cost}"))

    for i, entry in enumerate(payload.get("tasks", [])):
        def task_check(entry=entry):
            target = FiniteSpace(id=f"task{i}", points=tuple(entry["source_points"]))
            level = entry["source_level"]
            src_obj = SliceObject(
                base=space,
                level=level,
                target=target,
                quotient_map=serial.map_from_json(
                    entry["source_map"], space.levels[level], target, "task source", surjective=False
                ),
            )
            stage = entry["stage"]
            arrow = SliceArrow(
                src_obj,
                sliced.phis[stage],
                serial.map_from_json(entry["arrow_map"], target, sliced.seq.spaces[stage], "task arrow"),
            )
            beta = entry["witness_beta"]
            witness_map = serial.map_from_json(
                entry["witness_map"], sliced.seq.spaces[beta], target, "task witness"
            )
            SliceArrow(sliced.phis[beta], src_obj, witness_map)
            if compose(arrow.q, witness_map) != sliced.seq.bonding(stage, beta):
                raise ValueError(f"bonding({stage},{beta}) is not arrow o witness")
        _check(checks, f"task {entry.get('tag', i)} absorption witness", task_check)

    for i, entry in enumerate(payload.get("probes", [])):
        def probe_check(entry=entry):
            target = FiniteSpace(id=f"probe{i}", points=tuple(entry["target_points"]))
            level = entry["level"]
            probe = SliceObject(
                base=space,
                level=level,
                target=target,
                quotient_map=serial.map_from_json(
                    entry["target_map"], space.levels[level], target, "probe", surjective=False
                ),
            )
            stage = entry["witness_stage"]
            witness_map = serial.map_from_json(
                entry["witness_map"], sliced.seq.spaces[stage], target, "probe witness"
            )
            SliceArrow(sliced.phis[stage], probe, witness_map)
        _check(checks, f"probe {i} reachability witness", probe_check)
    return checks


def _verify_extension(payload: dict, bounds: int) -> list[Check]:
    checks: list[Check] = []
    ambient = serial.tree_from_json(payload.get("ambient"), name="certificate ambient")
    src = presentation_from_subset(ambient, payload.get("src_points", []))
    dst = presentation_from_subset(ambient, payload.get("dst_points", []))
    mapping = payload.get("mapping", {})
    levels = payload.get("levels", [])
    serial.require(isinstance(levels, list) and len(levels) == ambient.depth + 1, "levels malformed")
    tables = [entry.get("map", {}) for entry in levels]

    def bijections():
        for level, table in enumerate(tables):
            pts = set(ambient.levels[level].points)
            if set(table) != pts or set(table.values()) != pts:
                raise ValueError(f"level {level} map is not a bijection of the level")
    _check(checks, "level maps are bijections", bijections)

    def parent_compat():
        for level in range(ambient.depth):
            for child in ambient.levels[level + 1].points:
                got = ambient.parents[level](tables[level + 1][child])
                want = tables[level][ambient.parents[level](child)]
                if got != want:
                    raise ValueError(f"parent compatibility fails at {child!r} (level {level + 1})")
    _check(checks, "level maps commute with parents", parent_compat)

    def extension():
        if set(mapping) != set(src.space.points):
            raise ValueError("mapping does not cover the source points")
        for x, y in mapping.items():
            got = tuple(tables[a][e] for a, e in enumerate(src.eta[x].entries))
            if got != dst.eta[y].entries:
                raise ValueError(f"extension clause fails at {x!r}")
    _check(checks, "level maps extend the point mapping", extension)
    return checks


def _verify_retraction(payload: dict, bounds: int) -> list[Check]:
    checks: list[Check] = []
    space = serial.tree_from_json(payload.get("space"), name="certificate space")
    sliced = _assemble_sliced(checks, payload, space)
    if sliced is None:
        return checks
    ambient = from_sequence(sliced.seq)
    _check(
        checks,
        "ambient tree equals the rebuilt sequence tree",
        lambda: _raise_unless(
            serial.trees_equal(ambient, serial.tree_from_json(payload.get("ambient"))), "trees differ"
        ),
    )
    eta = _recheck_eta(checks, space, sliced, ambient, payload.get("eta", {}))

    reindex = payload.get("reindex", [])
    maps_raw = payload.get("maps", [])
    table = payload.get("table", {})
    holder: dict[str, SequenceArrow] = {}

    def arrow_check():
        serial.require(
            isinstance(reindex, list) and len(reindex) == space.depth + 1, "reindex malformed"
        )
        maps = tuple(
            serial.map_from_json(m, ambient.levels[reindex[i]], space.levels[i], f"retract map {i}")
            for i, m in enumerate(maps_raw)
        )
        holder["arrow"] = SequenceArrow(
            src=ball_quotients(ambient), dst=ball_quotients(space), reindex=tuple(reindex), maps=maps
        )
    _check(checks, "retraction is a natural arrow of sequences", arrow_check)
    if "arrow" not in holder:
        return checks
    arrow = holder["arrow"]

    def left_inverse():
        embedded = thread_embedding(space)
        for x in space.points:
            if apply_sequence_arrow(arrow, eta[x]) != embedded[x]:
                raise ValueError(f"retraction does not restore base point {x!r}")
    _check(checks, "retraction is a left inverse of the embedding", left_inverse)

    def table_check():
        embedding = thread_embedding(ambient)
        for w in ambient.points:
            want = apply_sequence_arrow(arrow, embedding[w]).entries[-1]
            if table.get(w) != want:
                raise ValueError(f"table entry for {w!r} disagrees with the arrow")
    _check(checks, "point table matches the arrow", table_check)

    def certified_levels():
        for m in range(space.depth + 1):
            component = {
                w: space.ancestor(space.depth, table[w], m) for w in ambient.points
            }
            if factoring_level(ambient, component) != reindex[m]:
                raise ValueError(f"component {m} does not factor first at level {reindex[m]}")
    _check(checks, "reindex levels are the exact factoring levels", certified_levels)
    return checks


def lift_certificate_payload(pres, f: Surjection, b: dict, g: dict, result) -> dict:
    """Serialize a lifting problem and its solution over a subset presentation."""
    if pres.level_offset != 0:
        raise InputError("lift certificates cover subset presentations only")
    payload = {
        "kind": "lift-certificate",
        "ambient": serial.tree_to_json(pres.ambient),
        "subset": sorted(pres.eta),
        "f_source": list(f.dom.points),
        "f_target": list(f.cod.points),
        "f": dict(f.mapping),
        "b": dict(b),
        "g": dict(g),
        "beta": result.beta,
        "ball_table": dict(result.ball_table),
        "avoid_families": {y: list(v) for y, v in result.avoid_families.items()},
        "image_families": {y: list(v) for y, v in result.image_families.items()},
    }
    payload["integrity"] = serial.content_digest(payload)
    return payload


def _verify_lift(payload: dict, bounds: int) -> list[Check]:
    checks: list[Check] = []
    ambient = serial.tree_from_json(payload.get("ambient"), name="certificate ambient")
    pres = presentation_from_subset(ambient, payload.get("subset", []))
    y_space = FiniteSpace("Y", tuple(payload.get("f_source", ())))
    x_space = FiniteSpace("X", tuple(payload.get("f_target", ())))
    f = serial.map_from_json(payload.get("f"), y_space, x_space, "lift arrow")
    b = payload.get("b", {})
    g = payload.get("g", {})
    beta = payload.get("beta")
    serial.require(isinstance(beta, int) and 0 < beta <= ambient.depth, "bad lift level")
    table = payload.get("ball_table", {})

    def square():
        for x in pres.space.points:
            if g.get(pres.eta_point(x)) != f(b[x]):
                raise ValueError(f"square does not commute at base point {x!r}")

    _check(checks, "lift square commutes", square)

    def equations():
        if set(table) != set(ambient.levels[beta].points):
            raise ValueError("ball table does not cover the level")
        point_table = {
            w: table[ambient.ancestor(ambient.depth, w, beta)] for w in ambient.points
        }
        if set(point_table.values()) != set(y_space.points):
            raise ValueError("lift is not onto its source")
        for w in ambient.points:
            if f(point_table[w]) != g.get(w):
                raise ValueError(f"first lift equation fails at {w!r}")
        for x in pres.space.points:
            if point_table[pres.eta_point(x)] != b[x]:
                raise ValueError(f"second lift equation fails at base point {x!r}")

    _check(checks, "lift equations hold pointwise", equations)

    def families():
        avoid = payload.get("avoid_families", {})
        image = payload.get("image_families", {})
        seen: set[str] = set()
        marked = {t.entries[beta] for t in pres.eta.values()}
        for y in y_space.points:
            for label in avoid.get(y, []):
                if label in seen:
                    raise ValueError(f"ball {label!r} assigned twice")
                seen.add(label)
                if label in marked:
                    raise ValueError(f"avoid ball {label!r} meets the embedded image")
                if table.get(label) != y:
                    raise ValueError(f"avoid ball {label!r} not routed to {y!r}")
            for label in image.get(y, []):
                if label in seen:
                    raise ValueError(f"ball {label!r} assigned twice")
                seen.add(label)
                if label not in marked:
                    raise ValueError(f"image ball {label!r} misses the embedded image")
                if table.get(label) != y:
                    raise ValueError(f"image ball {label!r} not routed to {y!r}")
        if seen != set(ambient.levels[beta].points):
            raise ValueError("families do not partition the level")

    _check(checks, "avoid/image families partition the level", families)
    return checks


def _raise_unless(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def cmd_verify(config: RunConfig) -> tuple[list[Check], int]:
    payload = _read_json(config.inputs[0])
    serial.require(isinstance(payload, dict), "certificate must be a JSON object")
    kind = payload.get("kind")
    checks: list[Check] = []
    _check(
        checks,
        "content digest matches",
        lambda: _raise_unless(
            payload.get("integrity") == serial.content_digest(payload), "digest mismatch"
        ),
    )
    verifiers = {
        "embedding-certificate": _verify_embedding,
        "extension-certificate": _verify_extension,
        "retraction-certificate": _verify_retraction,
        "lift-certificate": _verify_lift,
    }
    if kind not in verifiers:
        raise SchemaError(f"unknown certificate kind {kind!r}")
    try:
        checks += verifiers[kind](payload, config.bounds)
    except InputError as exc:
        checks.append(("certificate content re-derivation", "fail", str(exc)))
    failed = [c for c in checks if c[1] == "fail"]
    return checks, 1 if failed else 0


def _emit(config: RunConfig, payload: dict, summary: str) -> None:
    text = serial.dumps(payload)
    if config.out:
        Path(config.out).write_text(text)
        print(f"{summary} -> {config.out}")
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _run_verify(config: RunConfig) -> int:
    checks, code = cmd_verify(config)
    for name, status, detail in checks:
        mark = {"pass": "PASS", "fail": "FAIL", "skipped (bound)": "SKIP"}[status]
        line = f"{mark} {name}"
        if detail:
            line += f": {detail}"
        print(line)
    print(f"{config.inputs[0]}: {'ok' if code == 0 else 'FAILED'}")
    return code


def cmd_demo(config: RunConfig) -> int:
    out_dir = Path(config.out or "demo-out")
    out_dir.mkdir(parents=True, exist_ok=True)

    k4_path = out_dir / "k4.json"
    k4_path.write_text(serial.dumps(serial.tree_to_json(k4())))
    binary_path = out_dir / "binary3.json"
    binary_path.write_text(serial.dumps(serial.tree_to_json(binary_tree(3))))

    embed_cfg = RunConfig(
        command="embed",
        inputs=(str(k4_path),),
        depth=config.depth,
        pad_base=config.pad_base,
        pad_growth=config.pad_growth,
        bounds=config.bounds,
        out=str(out_dir / "k4-embedding.json"),
        seed_label=config.seed_label,
        splits=("1:p0", "2:00"),
    )
    _emit(embed_cfg, cmd_embed(embed_cfg), "embedding certificate")

    extend_input = {
        "ambient": serial.tree_to_json(binary_tree(3)),
        "src": ["000"],
        "dst": ["111"],
        "map": {"000": "111"},
    }
    extend_in_path = out_dir / "swap-input.json"
    extend_in_path.write_text(serial.dumps(extend_input))
    extend_cfg = RunConfig(
        command="extend",
        inputs=(str(extend_in_path),),
        out=str(out_dir / "swap-extension.json"),
        bounds=config.bounds,
    )
    _emit(extend_cfg, cmd_extend(extend_cfg), "extension certificate")

    retract_cfg = RunConfig(
        command="retract",
        inputs=(str(k4_path),),
        depth=config.depth,
        pad_base=config.pad_base,
        pad_growth=config.pad_growth,
        bounds=config.bounds,
        out=str(out_dir / "k4-retraction.json"),
        seed_label=config.seed_label,
    )
    _emit(retract_cfg, cmd_retract(retract_cfg), "retraction certificate")

    worst = 0
    for cert in ("k4-embedding.json", "swap-extension.json", "k4-retraction.json"):
        verify_cfg = RunConfig(
            command="verify", inputs=(str(out_dir / cert),), bounds=config.bounds
        )
        checks, code = cmd_verify(verify_cfg)
        status = "ok" if code == 0 else "FAILED"
        print(f"{cert}: {status} ({len(checks)} checks)")
        worst = max(worst, code)
    return worst


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ultrafraisse",
        description="Build and verify generic-embedding certificates over ball trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="path to a JSON input")
        p.add_argument("--depth", type=int, default=4, help="sequence length to build")
        p.add_argument("--pad-base", type=int, default=2, dest="pad_base")
        p.add_argument("--pad-growth", type=int, default=2, dest="pad_growth")
        p.add_argument("--bounds", type=int, default=200_000, help="search budget for oracles")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--seed-label", default="", dest="seed_label")
        p.add_argument(
            "--split",
            action="append",
            default=[],
            dest="splits",
            metavar="STAGE:POINT",
            help="schedule a point-splitting task (repeatable)",
        )

    common(sub.add_parser("embed", help="embed a tree into a generic limit"))
    common(sub.add_parser("extend", help="extend a bijection of embedded sets"))
    common(sub.add_parser("retract", help="retract a generic limit onto the tree"))
    common(sub.add_parser("verify", help="re-verify a certificate"))
    common(sub.add_parser("demo", help="run the bundled pipeline"), with_input=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            inputs=(args.input,) if hasattr(args, "input") else (),
            depth=args.depth,
            pad_base=args.pad_base,
            pad_growth=args.pad_growth,
            bounds=args.bounds,
            out=args.out,
            seed_label=args.seed_label,
            splits=tuple(args.splits),
        )
        if config.command == "embed":
            _emit(config, cmd_embed(config), "embedding certificate")
            return 0
        if config.command == "extend":
            _emit(config, cmd_extend(config), "extension certificate")
            return 0
        if config.command == "retract":
            _emit(config, cmd_retract(config), "retraction certificate")
            return 0
        if config.command == "verify":
            return _run_verify(config)
        if config.command == "demo":
            return cmd_demo(config)
        raise SchemaError(f"unknown command {config.command!r}")
    except SchemaError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except DepthError as exc:
        print(f"depth/capacity error: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        # library-level contract violations triggered by user data
        print(f"input error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
