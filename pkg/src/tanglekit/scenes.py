"""Puzzle scenes: builders, legality, goal predicates and persistence.

A Scene is an immutable snapshot of rigid pieces, polygonal ropes and
forbidden half-space boundaries.  Mutation happens only through the moves
module, which produces fresh scenes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from . import _jsonio
from .geom import (
    DEFAULT_CLEARANCE,
    EPS,
    Circle,
    GeometryError,
    Plane,
    Segment,
    norm,
    point_circle_distance,
    point_segment_distance,
    segment_circle_distance,
    segment_segment_distance,
    unit,
)

SCENE_FORMAT_VERSION = 1

# Pinned rope ends sit ON the forbidden plane; geometry within this multiple
# of the clearance around a pinned point is exempt from plane checks.  The
# factor 2 keeps any departure steeper than 30 degrees legal.
PIN_EXEMPT_FACTOR = 2.0


class ParameterError(ValueError):
    pass


class IllegalSceneError(ValueError):
    pass


class SceneFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PolyRope:
    """Open or closed polygonal rope with an optional length budget."""

    id: str
    vertices: np.ndarray
    closed: bool = False
    pinned: tuple | None = None  # pair of fixed endpoint coordinates
    length_budget: float | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 2:
            raise GeometryError("rope needs at least 2 vertices of 3 coordinates")
        if not np.all(np.isfinite(v)):
            raise GeometryError("non-finite rope vertex")
        object.__setattr__(self, "vertices", v)
        for a, b in self.edges():
            if norm(b - a) <= EPS:
                raise GeometryError(f"rope {self.id}: consecutive vertices coincide")
        if self.pinned is not None:
            if self.closed:
                raise GeometryError("closed ropes cannot have pinned ends")
            pa, pb = (np.asarray(p, dtype=float) for p in self.pinned)
            object.__setattr__(self, "pinned", (pa, pb))
            if not (np.array_equal(v[0], pa) and np.array_equal(v[-1], pb)):
                raise GeometryError(f"rope {self.id}: endpoints must equal the pinned points exactly")
        if self.length_budget is not None and self.perimeter() > self.length_budget:
            raise GeometryError(
                f"rope {self.id}: perimeter {self.perimeter():.6g} exceeds budget {self.length_budget:.6g}"
            )

    def n_edges(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def edges(self):
        v = self.vertices
        n = len(v)
        for i in range(n - 1):
            yield v[i], v[i + 1]
        if self.closed:
            yield v[n - 1], v[0]

    def edge(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if self.closed:
            return v[i % len(v)], v[(i + 1) % len(v)]
        return v[i], v[i + 1]

    def perimeter(self) -> float:
        return float(sum(norm(b - a) for a, b in self.edges()))


@dataclass(frozen=True)
class Attachment:
    rope_id: str
    rope_end: int  # 0 = first vertex, 1 = last vertex
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        if self.rope_end not in (0, 1):
            raise GeometryError("rope_end must be 0 or 1")


PIECE_KINDS = ("pole_segment", "circle", "lollipop")


@dataclass(frozen=True)
class RigidPiece:
    id: str
    kind: str
    segment: Segment | None = None
    circle: Circle | None = None
    movable: bool = False
    attachments: tuple = ()

    def __post_init__(self):
        if self.kind not in PIECE_KINDS:
            raise GeometryError(f"unknown piece kind {self.kind!r}")
        if self.kind == "pole_segment" and (self.segment is None or self.circle is not None):
            raise GeometryError("pole_segment piece needs exactly a segment")
        if self.kind == "circle" and (self.circle is None or self.segment is not None):
            raise GeometryError("circle piece needs exactly a circle")
        if self.kind == "lollipop" and (self.circle is None or self.segment is None):
            raise GeometryError("lollipop piece needs a segment and a circle")
        object.__setattr__(self, "attachments", tuple(self.attachments))
        for att in self.attachments:
            d = min(self._geometry_distance(att.point), 1.0)
            if d > 1e-7:
                raise GeometryError(f"attachment point not on piece {self.id} (distance {d:.3g})")

    def _geometry_distance(self, p) -> float:
        d = math.inf
        if self.segment is not None:
            d = min(d, point_segment_distance(p, self.segment.a, self.segment.b))
        if self.circle is not None:
            d = min(d, point_circle_distance(p, self.circle))
        return d

    def geometries(self):
        out = []
        if self.segment is not None:
            out.append(self.segment)
        if self.circle is not None:
            out.append(self.circle)
        return out

    def reference_point(self) -> np.ndarray:
        if self.kind == "circle":
            return self.circle.center
        return self.segment.a

    def circumradius(self) -> float:
        ref = self.reference_point()
        r = 0.0
        if self.segment is not None:
            r = max(r, norm(self.segment.a - ref), norm(self.segment.b - ref))
        if self.circle is not None:
            r = max(
                r,
                norm(self.circle.center - ref) + self.circle.radius + self.circle.tube_radius,
            )
        return r


@dataclass(frozen=True)
class PoseGoal:
    piece_id: str
    center: np.ndarray
    normal: np.ndarray
    radius: float
    tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "normal", unit(np.asarray(self.normal, dtype=float)))


@dataclass(frozen=True)
class SeparationGoal:
    group_a: tuple
    group_b: tuple
    margin: float

    def __post_init__(self):
        object.__setattr__(self, "group_a", tuple(self.group_a))
        object.__setattr__(self, "group_b", tuple(self.group_b))


@dataclass(frozen=True)
class Scene:
    model_tag: str
    clearance: float
    pieces: tuple
    ropes: tuple
    forbidden_planes: tuple
    goal: object
    regime_tags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "ropes", tuple(self.ropes))
        object.__setattr__(self, "forbidden_planes", tuple(self.forbidden_planes))
        object.__setattr__(self, "regime_tags", tuple(self.regime_tags))
        ids = [p.id for p in self.pieces] + [r.id for r in self.ropes]
        if len(set(ids)) != len(ids):
            raise GeometryError("piece/rope ids must be unique")

    def piece(self, pid: str) -> RigidPiece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(f"no piece {pid!r}")

    def rope(self, rid: str) -> PolyRope:
        for r in self.ropes:
            if r.id == rid:
                return r
        raise KeyError(f"no rope {rid!r}")

    def with_rope(self, rope: PolyRope) -> "Scene":
        ropes = tuple(rope if r.id == rope.id else r for r in self.ropes)
        return replace(self, ropes=ropes)

    def with_piece(self, piece: RigidPiece) -> "Scene":
        pieces = tuple(piece if p.id == piece.id else p for p in self.pieces)
        return replace(self, pieces=pieces)

    def require_legal(self):
        rep = is_legal(self)
        if not rep.ok:
            raise IllegalSceneError(f"illegal scene: {rep.violations[0]}")
        return self

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": SCENE_FORMAT_VERSION,
            "model_tag": self.model_tag,
            "clearance": float(self.clearance),
            "pieces": [_piece_to_dict(p) for p in self.pieces],
            "ropes": [_rope_to_dict(r) for r in self.ropes],
            "forbidden_planes": [
                {"point": [float(x) for x in pl.point], "normal": [float(x) for x in pl.normal]}
                for pl in self.forbidden_planes
            ],
            "goal": _goal_to_dict(self.goal),
            "regime_tags": list(self.regime_tags),
        }

    def serialize(self) -> str:
        return _jsonio.canonical_dumps(self.to_dict()) + "\n"

    def content_hash(self) -> str:
        return _jsonio.content_hash(self.serialize())

    @staticmethod
    def from_dict(d: dict) -> "Scene":
        try:
            if d["version"] != SCENE_FORMAT_VERSION:
                raise SceneFormatError(f"unsupported scene version {d['version']!r}")
            pieces = tuple(_piece_from_dict(p) for p in d["pieces"])
            ropes = tuple(_rope_from_dict(r) for r in d["ropes"])
            planes = tuple(Plane(pl["point"], pl["normal"]) for pl in d["forbidden_planes"])
            goal = _goal_from_dict(d["goal"])
            return Scene(
                model_tag=d["model_tag"],
                clearance=float(d["clearance"]),
                pieces=pieces,
                ropes=ropes,
                forbidden_planes=planes,
                goal=goal,
                regime_tags=tuple(d["regime_tags"]),
            )
        except (KeyError, TypeError) as exc:
            raise SceneFormatError(f"malformed scene file: {exc}") from exc

    @staticmethod
    def parse(text: str) -> "Scene":
        return Scene.from_dict(_jsonio.canonical_loads(text))


def _piece_to_dict(p: RigidPiece) -> dict:
    geom = {}
    if p.segment is not None:
        geom["segment"] = {"a": [float(x) for x in p.segment.a], "b": [float(x) for x in p.segment.b]}
    if p.circle is not None:
        geom["circle"] = {
            "center": [float(x) for x in p.circle.center],
            "radius": float(p.circle.radius),
            "normal": [float(x) for x in p.circle.normal],
            "tube_radius": float(p.circle.tube_radius),
        }
    return {
        "id": p.id,
        "kind": p.kind,
        "movable": p.movable,
        "geometry": geom,
        "attachments": [
            {"rope_id": a.rope_id, "rope_end": a.rope_end, "point": [float(x) for x in a.point]}
            for a in p.attachments
        ],
    }


def _piece_from_dict(d: dict) -> RigidPiece:
    geom = d["geometry"]
    seg = None
    circ = None
    if "segment" in geom:
        seg = Segment(geom["segment"]["a"], geom["segment"]["b"])
    if "circle" in geom:
        c = geom["circle"]
        circ = Circle(c["center"], c["radius"], c["normal"], c["tube_radius"])
    atts = tuple(Attachment(a["rope_id"], a["rope_end"], a["point"]) for a in d["attachments"])
    return RigidPiece(d["id"], d["kind"], segment=seg, circle=circ, movable=d["movable"], attachments=atts)


def _rope_to_dict(r: PolyRope) -> dict:
    return {
        "id": r.id,
        "closed": r.closed,
        "pinned": [[float(x) for x in p] for p in r.pinned] if r.pinned else [],
        "length_budget": float(r.length_budget) if r.length_budget is not None else None,
        "vertices": [[float(x) for x in v] for v in r.vertices],
    }


def _rope_from_dict(d: dict) -> PolyRope:
    pinned = tuple(np.asarray(p, dtype=float) for p in d["pinned"]) if d["pinned"] else None
    budget = d["length_budget"]
    return PolyRope(
        id=d["id"],
        vertices=np.asarray(d["vertices"], dtype=float),
        closed=d["closed"],
        pinned=pinned,
        length_budget=float(budget) if budget is not None else None,
    )


def _goal_to_dict(goal) -> dict:
    if isinstance(goal, PoseGoal):
        return {
            "type": "pose",
            "piece_id": goal.piece_id,
            "center": [float(x) for x in goal.center],
            "normal": [float(x) for x in goal.normal],
            "radius": float(goal.radius),
            "tolerance": float(goal.tolerance),
        }
    if isinstance(goal, SeparationGoal):
        return {
            "type": "separation",
            "group_a": list(goal.group_a),
            "group_b": list(goal.group_b),
            "margin": float(goal.margin),
        }
    raise SceneFormatError(f"unknown goal {goal!r}")


def _goal_from_dict(d: dict):
    if d["type"] == "pose":
        return PoseGoal(d["piece_id"], d["center"], d["normal"], d["radius"], d["tolerance"])
    if d["type"] == "separation":
        return SeparationGoal(tuple(d["group_a"]), tuple(d["group_b"]), d["margin"])
    raise SceneFormatError(f"unknown goal type {d['type']!r}")


# ---------------------------------------------------------------------------
# legality
# ---------------------------------------------------------------------------


@dataclass
class LegalityReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _rope_piece_exempt(scene: Scene, rope: PolyRope, piece: RigidPiece) -> bool:
    if any(a.rope_id == rope.id for a in piece.attachments):
        return True
    # Model B: the rope may touch its end circles; only the middle hoop is hard.
    if scene.model_tag == "modelB" and piece.movable:
        return True
    return False


def _piece_pair_exempt(scene: Scene, p1: RigidPiece, p2: RigidPiece) -> bool:
    if scene.model_tag == "modelB" and p1.movable and p2.movable:
        return True
    return False


def _segment_circle_lower_bound(a, b, c: Circle) -> float:
    dmin = point_segment_distance(c.center, a, b)
    dmax = max(norm(np.asarray(a, dtype=float) - c.center), norm(np.asarray(b, dtype=float) - c.center))
    if c.radius < dmin:
        return dmin - c.radius
    if c.radius > dmax:
        return c.radius - dmax
    return 0.0


def circle_sample_slack(c: Circle, n: int) -> float:
    """Distance error bound when the circle is replaced by n samples."""
    return 2.0 * c.radius * math.sin(math.pi / (2.0 * n))


def rope_piece_distance(rope: PolyRope, piece: RigidPiece, stop_below: float | None = None) -> float:
    """Min distance from rope edges to piece geometry (tube radii subtracted).

    With stop_below set, the result is only guaranteed exact when it is
    below that threshold; clearly-far pairs are resolved by a sampled bound.
    """
    from .geom import pts_segment_distance

    best = math.inf
    samples = piece.circle.polygon(256) if piece.circle is not None else None
    slack = circle_sample_slack(piece.circle, 256) if piece.circle is not None else 0.0
    for a, b in rope.edges():
        if piece.segment is not None:
            best = min(best, segment_segment_distance(a, b, piece.segment.a, piece.segment.b))
        if piece.circle is not None:
            c = piece.circle
            approx = float(pts_segment_distance(samples, a, b).min()) - c.tube_radius
            if stop_below is not None and approx - slack >= max(stop_below, 0.0) and approx - slack < best:
                best = min(best, approx - slack)  # certified lower bound, still >= threshold
            elif approx - slack < min(best, math.inf):
                best = min(best, segment_circle_distance(Segment(a, b), c) - c.tube_radius)
        if stop_below is not None and best < stop_below:
            return best
    return best


def rope_rope_distance(r1: PolyRope, r2: PolyRope, stop_below: float | None = None) -> float:
    best = math.inf
    for a, b in r1.edges():
        for c, d in r2.edges():
            best = min(best, segment_segment_distance(a, b, c, d))
            if stop_below is not None and best < stop_below:
                return best
    return best


def piece_piece_distance(p1: RigidPiece, p2: RigidPiece, stop_below: float | None = None) -> float:
    from .geom import distance, pts_circle_distance, pts_segment_distance

    best = math.inf
    for g1 in p1.geometries():
        for g2 in p2.geometries():
            tubes = (g1.tube_radius if isinstance(g1, Circle) else 0.0) + (
                g2.tube_radius if isinstance(g2, Circle) else 0.0
            )
            if stop_below is not None and isinstance(g1, Circle):
                samples = g1.polygon(256)
                slack = circle_sample_slack(g1, 256)
                if isinstance(g2, Circle):
                    approx = float(pts_circle_distance(samples, g2).min()) - tubes
                else:
                    approx = float(pts_segment_distance(samples, g2.a, g2.b).min()) - tubes
                if approx - slack >= stop_below:
                    best = min(best, approx - slack)
                    continue
            d = distance(g1, g2) - tubes
            best = min(best, d)
    return best


def piece_plane_clearance(piece: RigidPiece, plane: Plane) -> float:
    """Min signed distance of the piece to the oriented plane."""
    best = math.inf
    if piece.segment is not None:
        best = min(best, plane.signed_distance(piece.segment.a), plane.signed_distance(piece.segment.b))
    if piece.circle is not None:
        c = piece.circle
        h = plane.signed_distance(c.center)
        tilt = norm(plane.normal - float(np.dot(plane.normal, c.normal)) * c.normal)
        best = min(best, h - c.radius * tilt - c.tube_radius)
    return best


def _rope_plane_clearance(rope: PolyRope, plane: Plane, delta: float) -> float:
    """Min signed distance of the rope to the plane, exempting pinned-end balls."""
    best = math.inf
    pinned_pts = list(rope.pinned) if rope.pinned is not None else []
    verts = rope.vertices
    n = len(verts)
    edge_list = [(verts[i], verts[i + 1]) for i in range(n - 1)]
    if rope.closed:
        edge_list.append((verts[-1], verts[0]))
    for a, b in edge_list:
        sa = plane.signed_distance(a)
        sb = plane.signed_distance(b)
        lo, hi = 0.0, 1.0
        length = norm(b - a)
        ball = PIN_EXEMPT_FACTOR * delta
        for p in pinned_pts:
            if np.array_equal(a, p):
                lo = min(1.0, ball / length)
            if np.array_equal(b, p):
                hi = max(0.0, 1.0 - ball / length)
        if lo >= hi:
            continue
        s_lo = sa + lo * (sb - sa)
        s_hi = sa + hi * (sb - sa)
        best = min(best, s_lo, s_hi)
    return best


def is_legal(scene: Scene) -> LegalityReport:
    """Clearance audit of a scene; reports every violation found.

    Comparisons allow the geometric epsilon of slack so that exact-boundary
    configurations are not misclassified by float cancellation.
    """
    delta = scene.clearance - EPS
    violations = []

    for rope in scene.ropes:
        for piece in scene.pieces:
            if _rope_piece_exempt(scene, rope, piece):
                continue
            d = rope_piece_distance(rope, piece, stop_below=delta)
            if d < delta:
                violations.append(f"rope {rope.id} too close to piece {piece.id} (distance {d:.6g})")

    for i, r1 in enumerate(scene.ropes):
        for r2 in scene.ropes[i + 1 :]:
            d = rope_rope_distance(r1, r2, stop_below=delta)
            if d < delta:
                violations.append(f"rope {r1.id} too close to rope {r2.id} (distance {d:.6g})")

    for i, p1 in enumerate(scene.pieces):
        for p2 in scene.pieces[i + 1 :]:
            if _piece_pair_exempt(scene, p1, p2):
                continue
            if not (p1.movable or p2.movable):
                continue  # fixed scaffolding may be welded by construction
            d = piece_piece_distance(p1, p2)
            if d < delta:
                violations.append(f"piece {p1.id} too close to piece {p2.id} (distance {d:.6g})")

    for plane in scene.forbidden_planes:
        for rope in scene.ropes:
            d = _rope_plane_clearance(rope, plane, delta)
            if d < delta:
                violations.append(f"rope {rope.id} too close to forbidden plane (clearance {d:.6g})")
        for piece in scene.pieces:
            if not piece.movable:
                continue
            d = piece_plane_clearance(piece, plane)
            if d < delta:
                violations.append(f"piece {piece.id} too close to forbidden plane (clearance {d:.6g})")

    for rope in scene.ropes:
        if rope.length_budget is not None and rope.perimeter() > rope.length_budget:
            violations.append(
                f"rope {rope.id} perimeter {rope.perimeter():.9g} exceeds budget {rope.length_budget:.9g}"
            )

    return LegalityReport(not violations, violations)


# ---------------------------------------------------------------------------
# goal predicates
# ---------------------------------------------------------------------------


def _entity_sample_points(scene: Scene, entity_id: str) -> np.ndarray:
    pts = []
    try:
        piece = scene.piece(entity_id)
    except KeyError:
        rope = scene.rope(entity_id)
        pts.append(rope.vertices)
    else:
        if piece.segment is not None:
            s = piece.segment
            ts = np.linspace(0.0, 1.0, 8)[:, None]
            pts.append(s.a + ts * (s.b - s.a))
        if piece.circle is not None:
            pts.append(piece.circle.polygon(64))
    return np.vstack(pts)


def _entity_plane_clearance(scene: Scene, entity_id: str, plane: Plane) -> float:
    try:
        piece = scene.piece(entity_id)
    except KeyError:
        rope = scene.rope(entity_id)
        return min(plane.signed_distance(v) for v in rope.vertices)
    return piece_plane_clearance(piece, plane)


def find_separating_plane(scene: Scene, group_a, group_b, margin: float):
    """Oriented plane with group_a strictly below and group_b strictly above.

    Linear separability over sampled piece points proposes a plane; piece-level
    exact distance checks confirm the margin.  Returns the Plane or None.
    """
    pts_a = np.vstack([_entity_sample_points(scene, e) for e in group_a])
    pts_b = np.vstack([_entity_sample_points(scene, e) for e in group_b])
    n_a, n_b = len(pts_a), len(pts_b)
    # variables: w (3), b, t;  maximize t
    # constraints: w.a - b + t <= 0  (group A below),  -w.x + b + t <= 0 (B above)
    a_ub = np.zeros((n_a + n_b, 5))
    a_ub[:n_a, :3] = pts_a
    a_ub[:n_a, 3] = -1.0
    a_ub[:n_a, 4] = 1.0
    a_ub[n_a:, :3] = -pts_b
    a_ub[n_a:, 3] = 1.0
    a_ub[n_a:, 4] = 1.0
    b_ub = np.zeros(n_a + n_b)
    cost = np.array([0.0, 0.0, 0.0, 0.0, -1.0])
    bounds = [(-1.0, 1.0)] * 3 + [(None, None), (0.0, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success or res.x[4] <= 0.0:
        return None
    w = res.x[:3]
    wn = norm(w)
    if wn <= EPS:
        return None
    normal = w / wn
    offset = res.x[3] / wn
    # plane oriented so group_b is on the positive side
    plane = Plane(offset * normal, normal)
    ok_a = all(_entity_plane_clearance(scene, e, Plane(plane.point, -plane.normal)) >= margin for e in group_a)
    ok_b = all(_entity_plane_clearance(scene, e, plane) >= margin for e in group_b)
    if ok_a and ok_b:
        return plane
    return None


def goal_reached(scene: Scene) -> bool:
    goal = scene.goal
    if isinstance(goal, PoseGoal):
        piece = scene.piece(goal.piece_id)
        c = piece.circle
        if c is None:
            return False
        tol = goal.tolerance
        if norm(c.center - goal.center) > tol:
            return False
        if abs(c.radius - goal.radius) > tol:
            return False
        if min(norm(c.normal - goal.normal), norm(c.normal + goal.normal)) > tol:
            return False
        return True
    if isinstance(goal, SeparationGoal):
        return find_separating_plane(scene, goal.group_a, goal.group_b, goal.margin) is not None
    raise SceneFormatError(f"unknown goal {goal!r}")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

YHAT = np.array([0.0, 1.0, 0.0])
ZHAT = np.array([0.0, 0.0, 1.0])
XHAT = np.array([1.0, 0.0, 0.0])


def build_model_a(r: float, clearance: float = DEFAULT_CLEARANCE) -> Scene:
    """Pole-and-circle puzzle: fixed lollipop, pinned rope, movable hoop.

    The hoop starts at center (0,-1/2,2) and the goal pose is its mirror
    image at (0,+1/2,2).  Radii 1 <= r < 2 are tagged paper-impossible.
    """
    if not (0.0 < r < 2.0):
        raise ParameterError("hoop radius must satisfy 0 < r < 2 (r >= 2 touches the plane z=0)")
    lollipop = RigidPiece(
        "pole",
        "lollipop",
        segment=Segment([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        circle=Circle([0.0, 0.0, 2.0], 1.0, YHAT),
        movable=False,
    )
    hoop = RigidPiece(
        "hoop",
        "circle",
        circle=Circle([0.0, -0.5, 2.0], r, YHAT),
        movable=True,
    )
    rope = PolyRope(
        "rope",
        vertices=np.array(
            [[0.0, -1.0, 0.0], [0.0, -1.0, 2.0], [0.0, 1.0, 2.0], [0.0, 1.0, 0.0]]
        ),
        closed=False,
        pinned=(np.array([0.0, -1.0, 0.0]), np.array([0.0, 1.0, 0.0])),
    )
    scene = Scene(
        model_tag="modelA",
        clearance=clearance,
        pieces=(lollipop, hoop),
        ropes=(rope,),
        forbidden_planes=(Plane([0.0, 0.0, 0.0], ZHAT),),
        goal=PoseGoal("hoop", [0.0, 0.5, 2.0], YHAT, r, 1e-6),
        regime_tags=("paper-impossible",) if r >= 1.0 else (),
    )
    return scene.require_legal()


def build_model_b(
    r_left: float,
    r_right: float,
    r_hoop: float,
    rope_slack: float,
    clearance: float = DEFAULT_CLEARANCE,
) -> Scene:
    """Rope ending in two rigid circles, threading a fixed middle hoop.

    Canonical coordinates (the source layout fixes none): hoop at the origin
    with normal y, end circles at y = -/+ (1 + rope_slack), rope welded to one
    marked point on each end circle and passing straight through the hoop.
    """
    if min(r_left, r_right, r_hoop) <= 0.0 or rope_slack <= 0.0:
        raise ParameterError("radii and rope_slack must be positive")
    d = 1.0 + rope_slack
    hoop = RigidPiece("hoop", "circle", circle=Circle([0.0, 0.0, 0.0], r_hoop, YHAT), movable=False)
    left_pt = np.array([r_left, -d, 0.0])
    right_pt = np.array([r_right, d, 0.0])
    rope = PolyRope(
        "rope",
        vertices=np.array([left_pt, [0.0, -d, 0.0], [0.0, d, 0.0], right_pt]),
        closed=False,
    )
    left = RigidPiece(
        "left",
        "circle",
        circle=Circle([0.0, -d, 0.0], r_left, YHAT),
        movable=True,
        attachments=(Attachment("rope", 0, left_pt),),
    )
    right = RigidPiece(
        "right",
        "circle",
        circle=Circle([0.0, d, 0.0], r_right, YHAT),
        movable=True,
        attachments=(Attachment("rope", 1, right_pt),),
    )
    hypothesis_ok = r_left >= r_hoop and r_right >= r_hoop
    scene = Scene(
        model_tag="modelB",
        clearance=clearance,
        pieces=(hoop, left, right),
        ropes=(rope,),
        forbidden_planes=(),
        goal=SeparationGoal(("hoop",), ("left", "right", "rope"), clearance),
        regime_tags=("paper-impossible",) if hypothesis_ok else ("hypothesis-violated",),
    )
    return scene.require_legal()


def model_c_constants(r_hoop: float, tube: float, clearance: float = DEFAULT_CLEARANCE) -> dict:
    """Canonical fixture constants for the two-Hopf-link puzzle.

    All numbers are documented invented constants; the figure they stand in
    for is not available, so determinism wins over fidelity.
    """
    s = max(0.01 * r_hoop, 5.0 * clearance)  # build margin
    w1 = tube + 0.5 * s  # rope1 loop half-width
    w2 = tube + s  # rope2 loop half-width
    z0 = w1 + 2.0 * s  # depth of hoop1's plane below the tangle
    g = 2.0 * tube + 6.0 * s  # x of hoop2's plane
    d = 2.0 * s  # finger lateral offset
    z_gap = 0.5 * (tube + w2)  # finger height inside rope2's window
    z_r = z_gap + 3.0 * s  # return height over rope2
    x_in = g - s  # window entry
    x_out = g + 2.0 * s  # window exit, past the hoop plane
    t1x = max(w1 - 4.0 * s, -w1 + s)  # finger re-entry point on the top edge
    return {
        "s": s, "w1": w1, "w2": w2, "z0": z0, "g": g, "d": d,
        "z_gap": z_gap, "z_r": z_r, "x_in": x_in, "x_out": x_out, "t1x": t1x,
    }


def build_model_c(
    r_hoop: float,
    tube: float,
    rope_length: float,
    clearance: float = DEFAULT_CLEARANCE,
) -> Scene:
    """Two solid hoops, each Hopf-linked by a closed rope, tangled together.

    Rope 1 carries a finger that passes through hoop 2's opening and threads
    in and out of rope 2's window (the gap between rope 2 and hoop 2's tube),
    clasping rope 2 trivially: the assemblies are pairwise topologically
    unlinked yet admit no separating plane at build time.  Budgets
    rope_length <= r_hoop are tagged paper-impossible.
    """
    if not (0.0 < tube < r_hoop):
        raise ParameterError("need 0 < tube < r_hoop")
    if rope_length <= 2.0 * math.pi * tube:
        raise ParameterError("rope_length too short to encircle the tube")
    k = model_c_constants(r_hoop, tube, clearance)
    w1, w2, z0, g, d = k["w1"], k["w2"], k["z0"], k["g"], k["d"]
    z_gap, z_r, x_in, x_out, t1x = k["z_gap"], k["z_r"], k["x_in"], k["x_out"], k["t1x"]
    hoop1 = RigidPiece(
        "hoop1",
        "circle",
        circle=Circle([-r_hoop, 0.0, -z0], r_hoop, ZHAT, tube_radius=tube),
        movable=True,
    )
    hoop2 = RigidPiece(
        "hoop2",
        "circle",
        circle=Circle([g, 0.0, r_hoop], r_hoop, XHAT, tube_radius=tube),
        movable=True,
    )
    rope1 = PolyRope(
        "rope1",
        vertices=np.array(
            [
                [-w1, 0.0, -z0 - w1],
                [w1, 0.0, -z0 - w1],
                [w1, 0.0, -z0 + w1],
                [w1, d, z_gap],
                [x_in, d, z_gap],
                [x_in, -d, z_gap],
                [x_out, -d, z_gap],
                [x_out, d, z_gap],
                [x_out, d, z_r],
                [w1, d, z_r],
                [t1x, 0.0, -z0 + w1],
                [-w1, 0.0, -z0 + w1],
            ]
        ),
        closed=True,
        length_budget=rope_length,
    )
    rope2 = PolyRope(
        "rope2",
        vertices=np.array(
            [
                [g - w2, 0.0, -w2],
                [g + w2, 0.0, -w2],
                [g + w2, 0.0, w2],
                [g - w2, 0.0, w2],
            ]
        ),
        closed=True,
        length_budget=rope_length,
    )
    if rope1.perimeter() > rope_length or rope2.perimeter() > rope_length:
        raise ParameterError(
            f"infeasible rope_length {rope_length:.6g}: the canonical tangle needs "
            f"{max(rope1.perimeter(), rope2.perimeter()):.6g}"
        )
    scene = Scene(
        model_tag="modelC",
        clearance=clearance,
        pieces=(hoop1, hoop2),
        ropes=(rope1, rope2),
        forbidden_planes=(),
        goal=SeparationGoal(("hoop1", "rope1"), ("hoop2", "rope2"), clearance),
        regime_tags=("paper-impossible",) if rope_length <= r_hoop else (),
    )
    scene = scene.require_legal()
    if goal_reached(scene):
        raise IllegalSceneError("canonical tangle unexpectedly admits a separating plane")
    return scene
