"""Command-line interface: scenes, invariants, fuzzing, search, replay, exports.

Exit codes: 0 success/consistent, 1 invariant violation / illegal scene /
failed replay / genericity failure, 2 usage or parse errors.  All
randomness enters through explicit --seed flags.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fixtures
from .geom import Circle, Disk, GeometryError
from .invariants import (
    Diagram,
    GenericityError,
    InvariantError,
    band_sum,
    crossing_index,
    f2_word,
    linking_number,
    project_diagram,
    scene_curves,
    tricolor_count,
)
from .moves import Discretization, MoveError, MoveScript
from .scenes import IllegalSceneError, ParameterError, Scene, SceneFormatError, build_model_a, build_model_b, build_model_c, is_legal
from .search import (
    Exhausted,
    FuzzReport,
    ReplayError,
    ReplayFailure,
    SearchConfig,
    default_audits,
    fuzz,
    replay,
    search,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_scene(path: str, require_legal: bool = True) -> Scene:
    try:
        with open(path) as f:
            scene = Scene.parse(f.read())
    except (OSError, SceneFormatError, GeometryError, ValueError) as exc:
        raise CliError(f"cannot parse scene {path}: {exc}", EXIT_USAGE)
    if require_legal:
        rep = is_legal(scene)
        if not rep.ok:
            raise CliError(f"illegal scene: {rep.violations[0]}", EXIT_VIOLATION)
    return scene


def _parse_direction(text: str) -> np.ndarray:
    try:
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise ValueError
        return np.array(parts)
    except ValueError:
        raise CliError(f"bad direction {text!r}; expected x,y,z", EXIT_USAGE)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_scene(args) -> int:
    try:
        if args.model == "modelA":
            scene = build_model_a(args.r, clearance=args.clearance)
        elif args.model == "modelB":
            scene = build_model_b(
                args.r_left, args.r_right, args.r_hoop, args.rope_slack, clearance=args.clearance
            )
        else:
            scene = build_model_c(args.r_hoop, args.tube, args.rope_length, clearance=args.clearance)
    except (ParameterError, IllegalSceneError, GeometryError) as exc:
        raise CliError(str(exc), EXIT_USAGE)
    with open(args.out, "w") as f:
        f.write(scene.serialize())
    for tag in scene.regime_tags:
        print(tag)
    return EXIT_OK


def _word_for_scene(scene: Scene) -> str:
    hoop = scene.piece("hoop")
    fixed = scene.piece("pole")
    return str(
        f2_word(
            scene.rope("rope"),
            Disk(hoop.circle),
            Disk(fixed.circle),
            clearance=scene.clearance,
            clear_of_a=[fixed.segment] if fixed.segment is not None else [],
        )
    )


def cmd_invariant(args) -> int:
    scene = _load_scene(args.scene)
    try:
        if args.kind == "word":
            print(f"word: {_word_for_scene(scene)}")
        elif args.kind == "index":
            idx = crossing_index(scene.rope("rope"), Disk(scene.piece("hoop").circle))
            print(f"index: {idx.value}")
        elif args.kind == "linking":
            diagram = _diagram_for(scene, args)
            ids = sorted(diagram.components)
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    print(f"linking: {a} {b} {linking_number(diagram, a, b)}")
        else:  # tricolor
            if args.band_sum == "canonical":
                diagram, site = fixtures.model_c_band_site(scene)
                diagram = band_sum(diagram, "rope1", "rope2", site)
            else:
                diagram = _diagram_for(scene, args)
            count = tricolor_count(diagram)
            print(f"count: {count}, tricolorable: {'true' if count > 3 else 'false'}")
    except (InvariantError, KeyError) as exc:
        raise CliError(f"invariant undefined on this scene: {exc}", EXIT_VIOLATION)
    return EXIT_OK


def _diagram_for(scene: Scene, args) -> Diagram:
    curves = scene_curves(scene, n_circle=args.n_circle)
    direction = "auto" if args.direction is None else _parse_direction(args.direction)
    try:
        import random

        return project_diagram(curves, direction, rng=random.Random(args.seed))
    except GenericityError as exc:
        raise CliError(f"projection not generic: {exc}", EXIT_VIOLATION)


def cmd_fuzz(args) -> int:
    scene = _load_scene(args.scene)
    audits = default_audits(scene, args.audit or ["legal"], seed=args.seed)
    disc = Discretization(apex_pitch=args.pitch, apex_ball=args.ball)
    report = fuzz(scene, seed=args.seed, steps=args.steps, audits=audits, disc=disc)
    text = report.serialize()
    if args.report:
        with open(args.report, "w") as f:
            f.write(text)
    counts = {}
    for a in report.audits:
        counts[a.status] = counts.get(a.status, 0) + 1
    print(
        f"fuzz: seed {report.seed}, applied {report.steps_applied}/{report.steps_attempted}, "
        + ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
    )
    return EXIT_VIOLATION if report.violated() else EXIT_OK


def cmd_search(args) -> int:
    scene = _load_scene(args.scene)
    cfg = SearchConfig(
        max_depth=args.max_depth,
        max_states=args.max_states,
        discretization=Discretization(apex_pitch=args.pitch, apex_ball=args.ball),
        state_key_resolution=args.resolution,
    )
    result = search(scene, cfg)
    if isinstance(result, Exhausted):
        print(f"exhausted: states {result.states}, depth {result.depth}")
        return EXIT_OK
    if args.out:
        with open(args.out, "w") as f:
            f.write(result.serialize())
    print(f"solved: {len(result.moves)} moves")
    return EXIT_OK


def cmd_replay(args) -> int:
    scene = _load_scene(args.scene)
    try:
        with open(args.script) as f:
            script = MoveScript.parse(f.read())
    except (OSError, MoveError, ValueError) as exc:
        raise CliError(f"cannot parse script {args.script}: {exc}", EXIT_USAGE)
    try:
        result = replay(scene, script)
    except ReplayError as exc:
        raise CliError(str(exc), EXIT_VIOLATION)
    if isinstance(result, ReplayFailure):
        raise CliError(f"replay failed at step {result.step}: {result.violation}", EXIT_VIOLATION)
    print(f"goal: {'reached' if result.goal else 'not-reached'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def _svg_for(scene: Scene, args) -> str:
    import random

    curves = scene_curves(scene, n_circle=args.n_circle, include_open=True)
    direction = "auto" if args.direction is None else _parse_direction(args.direction)
    diagram = project_diagram(curves, direction, rng=random.Random(args.seed))
    gap = 0.02 * max(
        np.ptp([p for tr in diagram.components.values() for p in tr.geometry], axis=0).max(), 1e-9
    )
    paths = []
    all_pts = []
    for cid, trace in diagram.components.items():
        pts = trace.geometry
        all_pts.append(pts)
        n = len(pts)
        m = n if trace.closed else n - 1
        # carve out a gap around every underpass of this component
        cuts = []
        for cross_id, role, (i, t) in trace.events:
            if role == "under":
                cuts.append((i, t))
        segs = []
        for i in range(m):
            a, b = pts[i], pts[(i + 1) % n]
            length = np.linalg.norm(b - a)
            local = sorted(t for j, t in cuts if j == i)
            lo = 0.0
            pieces = []
            for t in local:
                pieces.append((lo, max(lo, t - gap / length)))
                lo = min(1.0, t + gap / length)
            pieces.append((lo, 1.0))
            for t0, t1 in pieces:
                if t1 - t0 > 1e-9:
                    segs.append((a + t0 * (b - a), a + t1 * (b - a)))
        d_attr = " ".join(
            f"M {p[0]:.6f} {-p[1]:.6f} L {q[0]:.6f} {-q[1]:.6f}" for p, q in segs
        )
        paths.append(f'  <path d="{d_attr}" fill="none" stroke="black" stroke-width="{gap/2:.6f}"/>')
    pts = np.vstack(all_pts)
    x0, y0 = pts.min(axis=0) - 5 * gap
    x1, y1 = pts.max(axis=0) + 5 * gap
    header = (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{x0:.6f} {-y1:.6f} {x1 - x0:.6f} {y1 - y0:.6f}">'
    )
    return header + "\n" + "\n".join(paths) + "\n</svg>\n"


def _tube_mesh(points: np.ndarray, closed: bool, radius: float, sides: int = 12):
    """Crude tube mesh along a polyline; returns (vertices, faces)."""
    from .geom import unit

    n = len(points)
    rings = []
    m = n if closed else n - 1
    for i in range(n):
        prev_pt = points[(i - 1) % n]
        next_pt = points[(i + 1) % n]
        tangent = next_pt - prev_pt if closed or 0 < i < n - 1 else (
            points[min(i + 1, n - 1)] - points[max(i - 1, 0)]
        )
        t = unit(tangent)
        k = int(np.argmin(np.abs(t)))
        e = np.zeros(3)
        e[k] = 1.0
        u = unit(np.cross(t, e))
        v = np.cross(t, u)
        ring = [
            points[i] + radius * (math.cos(2 * math.pi * j / sides) * u + math.sin(2 * math.pi * j / sides) * v)
            for j in range(sides)
        ]
        rings.append(ring)
    verts = [p for ring in rings for p in ring]
    faces = []
    for i in range(m):
        i2 = (i + 1) % n
        for j in range(sides):
            j2 = (j + 1) % sides
            a = i * sides + j
            b = i * sides + j2
            c = i2 * sides + j2
            d = i2 * sides + j
            faces.append((a, b, c))
            faces.append((a, c, d))
    return verts, faces


def _obj_for(scene: Scene) -> str:
    lines = []
    offset = 0
    rope_radius = 0.01
    for piece in scene.pieces:
        if piece.circle is not None:
            c = piece.circle
            if c.tube_radius > 0.0:
                lines.append(f"g {piece.id}")
                verts, faces = _tube_mesh(c.polygon(48), True, c.tube_radius)
                for v in verts:
                    lines.append(f"v {v[0]:.9f} {v[1]:.9f} {v[2]:.9f}")
                for a, b, cc in faces:
                    lines.append(f"f {a + 1 + offset} {b + 1 + offset} {cc + 1 + offset}")
                offset += len(verts)
            else:
                lines.append(f"g {piece.id}")
                pts = c.polygon(96)
                for v in pts:
                    lines.append(f"v {v[0]:.9f} {v[1]:.9f} {v[2]:.9f}")
                idx = " ".join(str(offset + i + 1) for i in range(len(pts)))
                lines.append(f"l {idx} {offset + 1}")
                offset += len(pts)
        if piece.segment is not None:
            lines.append(f"g {piece.id}_pole")
            for v in (piece.segment.a, piece.segment.b):
                lines.append(f"v {v[0]:.9f} {v[1]:.9f} {v[2]:.9f}")
            lines.append(f"l {offset + 1} {offset + 2}")
            offset += 2
    for rope in scene.ropes:
        lines.append(f"g {rope.id}")
        verts, faces = _tube_mesh(rope.vertices, rope.closed, rope_radius)
        for v in verts:
            lines.append(f"v {v[0]:.9f} {v[1]:.9f} {v[2]:.9f}")
        for a, b, cc in faces:
            lines.append(f"f {a + 1 + offset} {b + 1 + offset} {cc + 1 + offset}")
        offset += len(verts)
    return "\n".join(lines) + "\n"


def cmd_export(args) -> int:
    scene = _load_scene(args.scene, require_legal=False)
    if args.format == "svg":
        try:
            text = _svg_for(scene, args)
        except GenericityError as exc:
            raise CliError(f"projection not generic: {exc}", EXIT_VIOLATION)
    elif args.format == "obj":
        text = _obj_for(scene)
    else:
        raise CliError(f"unknown format {args.format!r}", EXIT_USAGE)
    with open(args.out, "w") as f:
        f.write(text)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.name != "modelC-length-scan":
        raise CliError(f"unknown experiment {args.name!r}", EXIT_USAGE)
    print("length,outcome,states")
    length = args.start
    while length <= args.stop + 1e-12:
        try:
            scene = build_model_c(args.r_hoop, args.tube, length)
        except (ParameterError, IllegalSceneError) as exc:
            print(f"{length:.6g},infeasible,0")
            length += args.step
            continue
        cfg = SearchConfig(max_depth=args.max_depth, max_states=args.max_states)
        result = search(scene, cfg)
        if isinstance(result, Exhausted):
            print(f"{length:.6g},exhausted,{result.states}")
        else:
            print(f"{length:.6g},solved,{len(result.moves)}")
        length += args.step
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tanglekit",
        description="Disentanglement puzzle scenes, moves, invariants, fuzzing and search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scene", help="build a puzzle scene and write its JSON file")
    ps = p.add_subparsers(dest="model", required=True)
    pa = ps.add_parser("modelA")
    pa.add_argument("--r", type=float, required=True, help="moving hoop radius")
    pb = ps.add_parser("modelB")
    pb.add_argument("--r-left", type=float, required=True)
    pb.add_argument("--r-right", type=float, required=True)
    pb.add_argument("--r-hoop", type=float, required=True)
    pb.add_argument("--rope-slack", type=float, required=True)
    pc = ps.add_parser("modelC")
    pc.add_argument("--r-hoop", type=float, required=True)
    pc.add_argument("--tube", type=float, required=True)
    pc.add_argument("--rope-length", type=float, required=True)
    for q in (pa, pb, pc):
        q.add_argument("-o", "--out", required=True)
        q.add_argument("--clearance", type=float, default=1e-3)
        q.set_defaults(func=cmd_scene)

    p = sub.add_parser("invariant", help="compute an invariant of a scene")
    p.add_argument("kind", choices=["word", "index", "linking", "tricolor"])
    p.add_argument("scene")
    p.add_argument("--band-sum", choices=["canonical"], default=None)
    p.add_argument("--direction", default=None, help="projection direction x,y,z (default: auto)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-circle", type=int, default=64)
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("fuzz", help="apply random validated moves and audit invariants")
    p.add_argument("scene")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--audit", action="append", choices=["word", "index", "linking", "legal", "budget"])
    p.add_argument("--report", default=None, help="write the JSON report here")
    p.add_argument("--pitch", type=float, default=0.05)
    p.add_argument("--ball", type=float, default=0.1)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("search", help="bounded breadth-first search for a solving move script")
    p.add_argument("scene")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--max-states", type=int, default=10000)
    p.add_argument("--pitch", type=float, default=0.1)
    p.add_argument("--ball", type=float, default=0.5)
    p.add_argument("--resolution", type=float, default=0.05)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("replay", help="replay a move script against a scene")
    p.add_argument("scene")
    p.add_argument("script")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export", help="write an SVG diagram or OBJ meshes")
    p.add_argument("scene")
    p.add_argument("--format", choices=["svg", "obj"], required=True)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--direction", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-circle", type=int, default=64)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("experiment", help="exploratory parameter scans (never acceptance)")
    p.add_argument("name", choices=["modelC-length-scan"])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--r-hoop", type=float, default=1.0)
    p.add_argument("--tube", type=float, default=0.05)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-states", type=int, default=2000)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
