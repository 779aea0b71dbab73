"""Rope moves and rigid steps: validation, application, enumeration.

A triangle move replaces one rope edge by the two other sides of a solid
triangle that meets the polygon only in that edge and keeps clearance from
everything else; the inverse move removes the vertex again, validated by
the same rule on the triangle being swept away.  Rigid steps move a piece
by at most half the clearance so the continuous motion stays safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _jsonio
from .geom import (
    EPS,
    Circle,
    Plane,
    Segment,
    Triangle,
    DegenerateShapeError,
    norm,
    point_circle_distance,
    point_segment_distance,
    segment_circle_distance,
    segment_segment_distance,
    segment_triangle_distance,
    triangle_circle_distance,
    pts_triangle_distance,
)
from .scenes import (
    PIN_EXEMPT_FACTOR,
    Attachment,
    PolyRope,
    RigidPiece,
    Scene,
    _rope_piece_exempt,
    _piece_pair_exempt,
    circle_sample_slack,
    is_legal,
    piece_plane_clearance,
)

SCRIPT_FORMAT_VERSION = 1


class MoveError(ValueError):
    pass


class IndexMoveError(MoveError):
    pass


class DegenerateTriangleError(MoveError):
    pass


class ImmovablePieceError(MoveError):
    pass


class StepTooLargeError(MoveError):
    pass


@dataclass(frozen=True)
class DeltaMove:
    rope_id: str
    edge_index: int
    apex: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "apex", np.asarray(self.apex, dtype=float))


@dataclass(frozen=True)
class InverseDelta:
    rope_id: str
    vertex_index: int


@dataclass(frozen=True)
class RigidStep:
    piece_id: str
    axis: np.ndarray
    angle: float
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))


Move = object  # DeltaMove | InverseDelta | RigidStep


@dataclass
class ValidationReport:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class MoveScript:
    scene_hash: str
    moves: tuple

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple(self.moves))

    def to_dict(self) -> dict:
        return {
            "version": SCRIPT_FORMAT_VERSION,
            "scene_hash": self.scene_hash,
            "moves": [move_to_dict(m) for m in self.moves],
        }

    def serialize(self) -> str:
        return _jsonio.canonical_dumps(self.to_dict()) + "\n"

    @staticmethod
    def from_dict(d: dict) -> "MoveScript":
        if d["version"] != SCRIPT_FORMAT_VERSION:
            raise MoveError(f"unsupported script version {d['version']!r}")
        return MoveScript(d["scene_hash"], tuple(move_from_dict(m) for m in d["moves"]))

    @staticmethod
    def parse(text: str) -> "MoveScript":
        return MoveScript.from_dict(_jsonio.canonical_loads(text))


def move_to_dict(m) -> dict:
    if isinstance(m, DeltaMove):
        return {
            "type": "delta",
            "rope_id": m.rope_id,
            "edge_index": m.edge_index,
            "apex": [float(x) for x in m.apex],
        }
    if isinstance(m, InverseDelta):
        return {"type": "inverse_delta", "rope_id": m.rope_id, "vertex_index": m.vertex_index}
    if isinstance(m, RigidStep):
        return {
            "type": "rigid",
            "piece_id": m.piece_id,
            "rotation": {"axis": [float(x) for x in m.axis], "angle": float(m.angle)},
            "translation": [float(x) for x in m.translation],
        }
    raise MoveError(f"unknown move {m!r}")


def move_from_dict(d: dict):
    t = d.get("type")
    if t == "delta":
        return DeltaMove(d["rope_id"], int(d["edge_index"]), d["apex"])
    if t == "inverse_delta":
        return InverseDelta(d["rope_id"], int(d["vertex_index"]))
    if t == "rigid":
        return RigidStep(d["piece_id"], d["rotation"]["axis"], float(d["rotation"]["angle"]), d["translation"])
    raise MoveError(f"unknown move type {t!r}")


# ---------------------------------------------------------------------------
# triangle clearance core
# ---------------------------------------------------------------------------


def _triangle_circle_lower_bound(tri: Triangle, c: Circle) -> float:
    verts = tri.vertices()
    centroid = verts.mean(axis=0)
    r_tri = max(norm(v - centroid) for v in verts)
    return point_circle_distance(centroid, c) - r_tri


def _clipped_edge_clear(a, b, shared, tri: Triangle, delta: float) -> float:
    """Distance from the far part of an edge emanating at a shared triangle vertex."""
    length = norm(b - a)
    if np.array_equal(a, shared):
        t0 = min(1.0, delta / length)
        sub_a, sub_b = a + t0 * (b - a), b
    else:
        t1 = max(0.0, 1.0 - delta / length)
        sub_a, sub_b = a, a + t1 * (b - a)
    if np.array_equal(sub_a, sub_b):
        return math.inf
    if norm(sub_b - sub_a) <= EPS:
        return math.inf
    return segment_triangle_distance(Segment(sub_a, sub_b), tri)


def _triangle_plane_clearance(tri: Triangle, plane: Plane, pinned_pts, delta: float) -> float:
    verts = tri.vertices()
    pinned_here = [p for p in pinned_pts if any(np.array_equal(v, p) for v in verts)]
    if not pinned_here:
        return min(plane.signed_distance(v) for v in verts)
    best = math.inf
    for v in verts:
        if any(np.array_equal(v, p) for p in pinned_here):
            continue
        best = min(best, plane.signed_distance(v))
    # corner at a pinned point: exempt the ball there; the clipped region's
    # minimum is attained at remaining vertices or the clip points
    ball = PIN_EXEMPT_FACTOR * delta
    for p in pinned_here:
        for v in verts:
            if np.array_equal(v, p):
                continue
            length = norm(v - p)
            t0 = min(1.0, ball / length)
            best = min(best, plane.signed_distance(p + t0 * (v - p)))
    return best


def _triangle_clear_in_scene(
    scene: Scene, rope: PolyRope, tri: Triangle, skip_edges: set, shared_vertices
) -> ValidationReport:
    delta = scene.clearance
    tol = delta - EPS

    # own rope: shared edge(s) excluded, edges at shared vertices clipped
    for i in range(rope.n_edges()):
        if i in skip_edges:
            continue
        a, b = rope.edge(i)
        shared = None
        for s in shared_vertices:
            if np.array_equal(a, s) or np.array_equal(b, s):
                shared = s
                break
        if shared is not None:
            d = _clipped_edge_clear(a, b, shared, tri, delta)
        else:
            d = segment_triangle_distance(Segment(a, b), tri)
        if d < tol:
            return ValidationReport(False, f"triangle meets own rope edge {i} (distance {d:.6g})")

    for other in scene.ropes:
        if other.id == rope.id:
            continue
        for j, (a, b) in enumerate(other.edges()):
            d = segment_triangle_distance(Segment(a, b), tri)
            if d < tol:
                return ValidationReport(False, f"triangle too close to rope {other.id} edge {j}")

    for piece in scene.pieces:
        if _rope_piece_exempt(scene, rope, piece):
            continue
        if piece.segment is not None:
            d = segment_triangle_distance(piece.segment, tri)
            if d < tol:
                return ValidationReport(False, f"triangle too close to piece {piece.id}")
        if piece.circle is not None:
            c = piece.circle
            if _triangle_circle_lower_bound(tri, c) - c.tube_radius < tol:
                approx = float(pts_triangle_distance(c.polygon(256), tri).min()) - c.tube_radius
                if approx - circle_sample_slack(c, 256) < tol:
                    d = triangle_circle_distance(tri, c) - c.tube_radius
                    if d < tol:
                        return ValidationReport(False, f"triangle too close to piece {piece.id}")

    pinned_pts = list(rope.pinned) if rope.pinned is not None else []
    for plane in scene.forbidden_planes:
        d = _triangle_plane_clearance(tri, plane, pinned_pts, delta)
        if d < tol:
            return ValidationReport(False, f"triangle too close to forbidden plane (clearance {d:.6g})")

    return ValidationReport(True)


# ---------------------------------------------------------------------------
# delta moves
# ---------------------------------------------------------------------------


def _delta_triangle(scene: Scene, m: DeltaMove) -> tuple[PolyRope, Triangle, np.ndarray, np.ndarray]:
    rope = scene.rope(m.rope_id)
    if not (0 <= m.edge_index < rope.n_edges()):
        raise IndexMoveError(f"edge index {m.edge_index} out of range for rope {m.rope_id}")
    a, b = rope.edge(m.edge_index)
    if point_segment_distance(m.apex, a, b) <= EPS:
        raise DegenerateTriangleError("apex within epsilon of the edge's line")
    try:
        tri = Triangle(a, b, m.apex)
    except DegenerateShapeError as exc:
        raise DegenerateTriangleError(str(exc)) from exc
    return rope, tri, a, b


def validate_delta(scene: Scene, m: DeltaMove) -> ValidationReport:
    rope, tri, a, b = _delta_triangle(scene, m)
    if rope.length_budget is not None:
        new_perim = rope.perimeter() - norm(b - a) + norm(m.apex - a) + norm(b - m.apex)
        if new_perim > rope.length_budget:
            return ValidationReport(False, f"length budget exceeded ({new_perim:.6g})")
    return _triangle_clear_in_scene(scene, rope, tri, {m.edge_index}, (a, b))


def validate_inverse_delta(scene: Scene, m: InverseDelta) -> ValidationReport:
    rope = scene.rope(m.rope_id)
    n = len(rope.vertices)
    if rope.closed:
        if not (0 <= m.vertex_index < n):
            raise IndexMoveError(f"vertex index {m.vertex_index} out of range")
        if n <= 3:
            raise IndexMoveError("closed rope needs at least 3 vertices")
        j = m.vertex_index
        prev_v = rope.vertices[(j - 1) % n]
        v = rope.vertices[j]
        next_v = rope.vertices[(j + 1) % n]
        removed_edges = {(j - 1) % n, j}
    else:
        if not (1 <= m.vertex_index <= n - 2):
            raise IndexMoveError("can only remove interior vertices of an open rope")
        j = m.vertex_index
        prev_v, v, next_v = rope.vertices[j - 1], rope.vertices[j], rope.vertices[j + 1]
        removed_edges = {j - 1, j}
    if norm(next_v - prev_v) <= EPS:
        return ValidationReport(False, "removal would collapse to a zero-length edge")
    if point_segment_distance(v, prev_v, next_v) <= EPS:
        tri = None  # collinear vertex sweeps no area; removal is free
    else:
        try:
            tri = Triangle(prev_v, v, next_v)
        except DegenerateShapeError as exc:
            raise DegenerateTriangleError(str(exc)) from exc
    if tri is not None:
        rep = _triangle_clear_in_scene(scene, rope, tri, removed_edges, (prev_v, next_v))
        if not rep.ok:
            return rep
    return ValidationReport(True)


# ---------------------------------------------------------------------------
# rigid steps
# ---------------------------------------------------------------------------


def rotation_matrix(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = norm(axis)
    if n <= EPS:
        if abs(angle) > EPS:
            raise MoveError("rotation axis must be nonzero when angle is nonzero")
        return np.eye(3)
    a = axis / n
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = a
    return np.array(
        [
            [c + x * x * (1 - c), x * y * (1 - c) - z * s, x * z * (1 - c) + y * s],
            [y * x * (1 - c) + z * s, c + y * y * (1 - c), y * z * (1 - c) - x * s],
            [z * x * (1 - c) - y * s, z * y * (1 - c) + x * s, c + z * z * (1 - c)],
        ]
    )


def transform_piece(piece: RigidPiece, rot: np.ndarray, trans: np.ndarray) -> RigidPiece:
    ref = piece.reference_point()

    def tp(p):
        return rot @ (np.asarray(p, dtype=float) - ref) + ref + trans

    seg = Segment(tp(piece.segment.a), tp(piece.segment.b)) if piece.segment is not None else None
    circ = None
    if piece.circle is not None:
        c = piece.circle
        circ = Circle(tp(c.center), c.radius, rot @ c.normal, c.tube_radius)
    atts = tuple(Attachment(a.rope_id, a.rope_end, tp(a.point)) for a in piece.attachments)
    return RigidPiece(piece.id, piece.kind, segment=seg, circle=circ, movable=piece.movable, attachments=atts)


def _step_displacement_bound(piece: RigidPiece, m: RigidStep) -> float:
    return norm(m.translation) + abs(m.angle) * piece.circumradius()


def _dragged_rope(scene: Scene, piece: RigidPiece, new_piece: RigidPiece):
    """Ropes with endpoint vertices welded to the piece, after the step."""
    out = {}
    for old_att, new_att in zip(piece.attachments, new_piece.attachments):
        rope = scene.rope(old_att.rope_id)
        verts = out.get(rope.id, rope.vertices.copy())
        idx = 0 if old_att.rope_end == 0 else len(verts) - 1
        verts[idx] = new_att.point
        out[rope.id] = verts
    return {
        rid: PolyRope(rid, verts, scene.rope(rid).closed, scene.rope(rid).pinned, scene.rope(rid).length_budget)
        for rid, verts in out.items()
    }


def validate_rigid_step(scene: Scene, m: RigidStep) -> ValidationReport:
    piece = scene.piece(m.piece_id)
    if not piece.movable:
        raise ImmovablePieceError(f"piece {m.piece_id} is not movable")
    delta = scene.clearance
    bound = _step_displacement_bound(piece, m)
    if bound > 0.5 * delta + EPS:
        raise StepTooLargeError(
            f"step displacement bound {bound:.6g} exceeds half the clearance {0.5 * delta:.6g}"
        )
    rot = rotation_matrix(m.axis, m.angle)
    new_piece = transform_piece(piece, rot, m.translation)
    tol = delta - EPS

    try:
        dragged = _dragged_rope(scene, piece, new_piece)
    except Exception as exc:  # budget or pinned violations from the dragged vertex
        return ValidationReport(False, f"dragged rope invalid: {exc}")

    new_ropes = [dragged.get(r.id, r) for r in scene.ropes]

    from .scenes import rope_piece_distance, piece_piece_distance

    for other in scene.pieces:
        if other.id == piece.id:
            continue
        if _piece_pair_exempt(scene, piece, other):
            continue
        d = piece_piece_distance(new_piece, other)
        if d < tol:
            return ValidationReport(False, f"end pose too close to piece {other.id} (distance {d:.6g})")
    for rope in new_ropes:
        if _rope_piece_exempt(scene, rope, new_piece):
            continue
        d = rope_piece_distance(rope, new_piece, stop_below=tol)
        if d < tol:
            return ValidationReport(False, f"end pose too close to rope {rope.id} (distance {d:.6g})")
    for plane in scene.forbidden_planes:
        d = piece_plane_clearance(new_piece, plane)
        if d < tol:
            return ValidationReport(False, f"end pose too close to forbidden plane (clearance {d:.6g})")

    # edges moved by dragged endpoints keep their clearances too
    for rid, rope in dragged.items():
        moved = [0, len(rope.vertices) - 2] if len(rope.vertices) >= 2 else []
        for i in set(j for j in moved if 0 <= j < rope.n_edges()):
            a, b = rope.edge(i)
            for other in scene.pieces:
                if other.id == piece.id:
                    other_eff = new_piece
                else:
                    other_eff = other
                if _rope_piece_exempt(scene, rope, other_eff):
                    continue
                dmin = math.inf
                if other_eff.segment is not None:
                    dmin = min(dmin, segment_segment_distance(a, b, other_eff.segment.a, other_eff.segment.b))
                if other_eff.circle is not None:
                    dmin = min(
                        dmin,
                        segment_circle_distance(Segment(a, b), other_eff.circle) - other_eff.circle.tube_radius,
                    )
                if dmin < tol:
                    return ValidationReport(False, f"dragged rope {rid} too close to piece {other_eff.id}")
            for other_rope in scene.ropes:
                if other_rope.id == rid:
                    continue
                eff = dragged.get(other_rope.id, other_rope)
                for c, dpt in eff.edges():
                    if segment_segment_distance(a, b, c, dpt) < tol:
                        return ValidationReport(False, f"dragged rope {rid} too close to rope {other_rope.id}")
            for plane in scene.forbidden_planes:
                sa, sb = plane.signed_distance(a), plane.signed_distance(b)
                if min(sa, sb) < tol:
                    return ValidationReport(False, f"dragged rope {rid} too close to forbidden plane")

    return ValidationReport(True)


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------


def validate_move(scene: Scene, m) -> ValidationReport:
    if isinstance(m, DeltaMove):
        return validate_delta(scene, m)
    if isinstance(m, InverseDelta):
        return validate_inverse_delta(scene, m)
    if isinstance(m, RigidStep):
        return validate_rigid_step(scene, m)
    raise MoveError(f"unknown move {m!r}")


def apply_move(scene: Scene, m, *, check_legal: bool = True) -> Scene:
    rep = validate_move(scene, m)
    if not rep.ok:
        raise MoveError(f"move rejected: {rep.reason}")
    if isinstance(m, DeltaMove):
        rope = scene.rope(m.rope_id)
        verts = rope.vertices
        insert_at = m.edge_index + 1
        new_verts = np.vstack([verts[:insert_at], m.apex[None, :], verts[insert_at:]])
        new_rope = PolyRope(rope.id, new_verts, rope.closed, rope.pinned, rope.length_budget)
        out = scene.with_rope(new_rope)
    elif isinstance(m, InverseDelta):
        rope = scene.rope(m.rope_id)
        verts = rope.vertices
        new_verts = np.delete(verts, m.vertex_index, axis=0)
        new_rope = PolyRope(rope.id, new_verts, rope.closed, rope.pinned, rope.length_budget)
        out = scene.with_rope(new_rope)
    else:
        piece = scene.piece(m.piece_id)
        rot = rotation_matrix(m.axis, m.angle)
        new_piece = transform_piece(piece, rot, m.translation)
        out = scene.with_piece(new_piece)
        for rid, rope in _dragged_rope(scene, piece, new_piece).items():
            out = out.with_rope(rope)
    if check_legal:
        rep = is_legal(out)
        if not rep.ok:
            raise MoveError(f"move produced an illegal scene: {rep.violations[0]}")
    return out


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Discretization:
    apex_pitch: float = 0.1
    apex_ball: float = 0.5

    def __post_init__(self):
        if self.apex_pitch <= 0.0 or self.apex_ball <= 0.0:
            raise MoveError("discretization pitch and ball radius must be positive")


_lattice_cache: dict = {}


def _lattice_offsets(pitch: float, ball: float) -> np.ndarray:
    key = (pitch, ball)
    if key not in _lattice_cache:
        k = int(math.floor(ball / pitch))
        rng = range(-k, k + 1)
        offs = [
            (i * pitch, j * pitch, l * pitch)
            for i in rng
            for j in rng
            for l in rng
            if (i, j, l) != (0, 0, 0) and math.sqrt(i * i + j * j + l * l) * pitch <= ball
        ]
        _lattice_cache[key] = np.array(offs)
    return _lattice_cache[key]


def enumerate_moves(scene: Scene, disc: Discretization = Discretization()) -> list:
    """Validated candidate moves in deterministic order.

    Per rope: delta apexes on a lattice around each edge midpoint
    (lexicographic offset order), then inverse deltas per vertex; per movable
    piece: 12 axis-aligned translations (lengths delta/2 and delta/4) and 6
    small rotations.
    """
    out = []
    offsets = _lattice_offsets(disc.apex_pitch, disc.apex_ball)
    for rope in scene.ropes:
        for i in range(rope.n_edges()):
            a, b = rope.edge(i)
            mid = 0.5 * (a + b)
            for off in offsets:
                apex = mid + off
                if point_segment_distance(apex, a, b) <= EPS:
                    continue
                m = DeltaMove(rope.id, i, apex)
                try:
                    if validate_delta(scene, m).ok:
                        out.append(m)
                except MoveError:
                    continue
        n = len(rope.vertices)
        vertex_range = range(n) if rope.closed else range(1, n - 1)
        for j in vertex_range:
            m = InverseDelta(rope.id, j)
            try:
                if validate_inverse_delta(scene, m).ok:
                    out.append(m)
            except MoveError:
                continue
    delta = scene.clearance
    axes = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    for piece in scene.pieces:
        if not piece.movable:
            continue
        for mag in (0.5 * delta, 0.25 * delta):
            for ax in axes:
                for sgn in (1.0, -1.0):
                    m = RigidStep(piece.id, np.zeros(3), 0.0, sgn * mag * ax)
                    try:
                        if validate_rigid_step(scene, m).ok:
                            out.append(m)
                    except MoveError:
                        continue
        r = piece.circumradius()
        if r > EPS:
            ang = 0.45 * delta / r
            for ax in axes:
                for sgn in (1.0, -1.0):
                    m = RigidStep(piece.id, ax, sgn * ang, np.zeros(3))
                    try:
                        if validate_rigid_step(scene, m).ok:
                            out.append(m)
                    except MoveError:
                        continue
    return out
