"""Obstruction invariants: crossing words, disk-crossing index, diagrams.

The two-generator word records the ordered signed passages of a rope
through two flat spanning disks.  The disk-crossing index is the signed
passage count through one disk.  Planar diagrams come from a generic
orthogonal projection; on them live linking numbers, mod-3 coloring counts
and band sums.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import _jsonio
from .geom import (
    DEGENERATE,
    EPS,
    Circle,
    Disk,
    Segment,
    cross2,
    disk_disk_distance,
    norm,
    seg_disk_crossing,
    crossing_parameter,
    segment_disk_distance,
    unit,
)

DIAGRAM_FORMAT_VERSION = 1

_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


class InvariantError(ValueError):
    pass


class DegenerateCrossingError(InvariantError):
    pass


class DisksNotClearError(InvariantError):
    pass


class GenericityError(InvariantError):
    pass


class IllegalSiteError(InvariantError):
    pass


# ---------------------------------------------------------------------------
# free-group words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordF2:
    """Reduced word over {a, b}; uppercase letters are inverses."""

    letters: tuple

    def __post_init__(self):
        object.__setattr__(self, "letters", _reduce(tuple(self.letters)))

    def __str__(self) -> str:
        return "".join(self.letters)

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            return str(self) == other
        return isinstance(other, WordF2) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def exponent_sum(self, generator: str) -> int:
        return sum(1 for x in self.letters if x == generator) - sum(
            1 for x in self.letters if x == _INVERSE[generator]
        )

    @staticmethod
    def parse(text: str) -> "WordF2":
        bad = set(text) - set("abAB")
        if bad:
            raise InvariantError(f"invalid word letters {bad}")
        return WordF2(tuple(text))


def _reduce(letters: tuple) -> tuple:
    out = []
    for x in letters:
        if x not in _INVERSE:
            raise InvariantError(f"invalid letter {x!r}")
        if out and out[-1] == _INVERSE[x]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _rope_disk_crossings(rope, disk: Disk, eps: float):
    """(edge_index, parameter, sign) for each transversal crossing."""
    out = []
    for i in range(rope.n_edges()):
        a, b = rope.edge(i)
        seg = Segment(a, b)
        res = seg_disk_crossing(seg, disk, eps=eps)
        if res is DEGENERATE:
            raise DegenerateCrossingError(f"degenerate crossing at rope edge {i}")
        if res is None:
            continue
        out.append((i, crossing_parameter(seg, disk), res))
    return out


def f2_word(
    rope,
    disk_a: Disk,
    disk_b: Disk,
    *,
    clearance: float,
    clear_of_a=(),
    clear_of_b=(),
    eps: float = EPS,
) -> WordF2:
    """Ordered signed crossings of the rope through two disks as a reduced word.

    Generator a reads crossings of disk_a, b of disk_b; signs follow the
    rope's orientation against each disk normal.  The word is only defined
    when the flat disks are mutually clear and each disk avoids its listed
    obstruction segments; otherwise DisksNotClearError is raised and callers
    skip.  A segment welded to a disk's rim (the pole under its own circle)
    belongs in neither list.
    """
    if disk_disk_distance(disk_a, disk_b) < clearance:
        raise DisksNotClearError("spanning disks are not mutually clear")
    for disk, segs in ((disk_a, clear_of_a), (disk_b, clear_of_b)):
        for seg in segs:
            if segment_disk_distance(seg, disk) < clearance:
                raise DisksNotClearError("spanning disk not clear of an obstruction segment")
    events = []
    for letter, disk in (("a", disk_a), ("b", disk_b)):
        for i, t, sign in _rope_disk_crossings(rope, disk, eps):
            events.append((i, t, letter if sign > 0 else _INVERSE[letter]))
    events.sort(key=lambda e: (e[0], e[1]))
    return WordF2(tuple(x for _, _, x in events))


@dataclass(frozen=True)
class CrossingIndex:
    value: int


def crossing_index(rope, hoop_disk: Disk, eps: float = EPS) -> CrossingIndex:
    """Signed sum of rope crossings through the disk (universal-cover shadow)."""
    total = sum(s for _, _, s in _rope_disk_crossings(rope, hoop_disk, eps))
    return CrossingIndex(total)


# ---------------------------------------------------------------------------
# diagrams
# ---------------------------------------------------------------------------


@dataclass
class CrossingRec:
    sign: int
    over_component: str
    under_component: str
    position: tuple  # 2D projection coordinates


@dataclass
class ComponentTrace:
    """Events (crossing id, role) in traversal order, with locations.

    locations are (edge_index, parameter) along the component polyline and
    order the events; geometry holds the projected closed polyline.
    """

    id: str
    closed: bool
    events: list = field(default_factory=list)  # (crossing_id, role, location)
    geometry: np.ndarray | None = None  # (n, 2) projected vertices


@dataclass
class Diagram:
    components: dict  # id -> ComponentTrace
    crossings: dict  # id -> CrossingRec

    def component_ids(self):
        return list(self.components.keys())

    # -- arcs ---------------------------------------------------------------

    def arcs(self):
        """Arc decomposition: (arc ids per component, crossing arc references).

        Returns (arc_owner, refs) where arc_owner maps arc_id -> component id
        and refs maps crossing_id -> {"over": arc, "under_in": arc,
        "under_out": arc}.  Arcs run from one underpass to the next.
        """
        for trace in self.components.values():
            if not trace.closed:
                raise InvariantError("arc decomposition needs closed components")
        arc_owner = {}
        refs = {cid: {} for cid in self.crossings}
        next_arc = 0
        for cid, trace in self.components.items():
            events = trace.events
            under_positions = [k for k, ev in enumerate(events) if ev[1] == "under"]
            if not under_positions:
                arc = next_arc
                next_arc += 1
                arc_owner[arc] = cid
                for crossing_id, role, _loc in events:
                    refs[crossing_id]["over"] = arc
                continue
            arc_of_slot = {}
            for j, start in enumerate(under_positions):
                arc = next_arc
                next_arc += 1
                arc_owner[arc] = cid
                arc_of_slot[j] = arc
            n = len(events)
            for j, start in enumerate(under_positions):
                end = under_positions[(j + 1) % len(under_positions)]
                arc = arc_of_slot[j]
                # under event at `start` begins this arc
                crossing_id = events[start][0]
                refs[crossing_id]["under_out"] = arc
                refs[events[end][0]]["under_in"] = arc
                k = (start + 1) % n
                while k != end:
                    cid2, role, _loc = events[k]
                    if role == "over":
                        refs[cid2]["over"] = arc
                    k = (k + 1) % n
        return arc_owner, refs

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        arc_owner, refs = self.arcs()
        return {
            "version": DIAGRAM_FORMAT_VERSION,
            "components": list(self.components.keys()),
            "arcs": [{"id": a, "component": c} for a, c in sorted(arc_owner.items())],
            "crossings": [
                {
                    "over": refs[cid]["over"],
                    "under_in": refs[cid]["under_in"],
                    "under_out": refs[cid]["under_out"],
                    "sign": rec.sign,
                }
                for cid, rec in sorted(self.crossings.items())
            ],
        }

    def serialize(self) -> str:
        return _jsonio.canonical_dumps(self.to_dict()) + "\n"


def _projection_frame(direction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = unit(np.asarray(direction, dtype=float))
    k = int(np.argmin(np.abs(d)))
    e = np.zeros(3)
    e[k] = 1.0
    u = unit(np.cross(d, e))
    v = np.cross(d, u)
    return d, u, v


def _segments_2d(curves_2d):
    """Flat arrays of all edges: (curve_idx, edge_idx, p (2,), q (2,))."""
    rows = []
    for ci, (cid, pts, closed, depths) in enumerate(curves_2d):
        n = len(pts)
        m = n if closed else n - 1
        for i in range(m):
            rows.append((ci, i, pts[i], pts[(i + 1) % n], depths[i], depths[(i + 1) % n]))
    return rows


def project_diagram(
    curves,
    direction="auto",
    *,
    clearance: float = 0.0,
    n_retries: int = 100,
    rng: random.Random | None = None,
    eps: float = EPS,
) -> Diagram:
    """Planar link diagram of 3D curves by orthogonal projection.

    curves: list of (id, points (n,3), closed).  With direction="auto",
    seeded random unit directions are drawn until one is generic (no
    near-tangent crossing, triple point, vertex-over-edge or depth tie
    within eps); an explicit direction raises GenericityError instead.
    """
    if clearance > 0.0:
        _require_disjoint(curves, clearance)
    if isinstance(direction, str) and direction == "auto":
        rng = rng or random.Random(0)
        last_err = None
        for _ in range(n_retries):
            d = np.array([rng.gauss(0.0, 1.0) for _ in range(3)])
            if norm(d) <= eps:
                continue
            try:
                return _project_once(curves, d, eps)
            except GenericityError as exc:
                last_err = exc
        raise GenericityError(f"no generic direction after {n_retries} tries: {last_err}")
    return _project_once(curves, np.asarray(direction, dtype=float), eps)


def _require_disjoint(curves, clearance: float):
    from .geom import segment_segment_distance

    for i, (id_a, pts_a, closed_a) in enumerate(curves):
        for id_b, pts_b, closed_b in curves[i + 1 :]:
            na, nb = len(pts_a), len(pts_b)
            ma = na if closed_a else na - 1
            mb = nb if closed_b else nb - 1
            for ia in range(ma):
                a0, a1 = pts_a[ia], pts_a[(ia + 1) % na]
                for ib in range(mb):
                    b0, b1 = pts_b[ib], pts_b[(ib + 1) % nb]
                    if segment_segment_distance(a0, a1, b0, b1) < clearance:
                        raise InvariantError(f"curves {id_a} and {id_b} are too close to project")


def _project_once(curves, direction, eps: float) -> Diagram:
    d, u, v = _projection_frame(direction)
    curves_2d = []
    for cid, pts, closed in curves:
        pts = np.asarray(pts, dtype=float)
        xy = np.stack([pts @ u, pts @ v], axis=1)
        depth = pts @ d
        curves_2d.append((cid, xy, closed, depth))

    rows = _segments_2d(curves_2d)
    crossings_raw = []
    for ii in range(len(rows)):
        ci, ei, p0, p1, dp0, dp1 = rows[ii]
        for jj in range(ii + 1, len(rows)):
            cj, ej, q0, q1, dq0, dq1 = rows[jj]
            if ci == cj:
                n = len(curves_2d[ci][1])
                m = n if curves_2d[ci][2] else n - 1
                if ei == ej or (ei + 1) % m == ej % m or (ej + 1) % m == ei % m:
                    # identical or adjacent edges share a vertex, not a crossing
                    if curves_2d[ci][2] or abs(ei - ej) <= 1:
                        continue
            r = p1 - p0
            s = q1 - q0
            denom = cross2(r, s)
            qp = q0 - p0
            if abs(denom) <= eps * max(norm(r) * norm(s), 1e-300):
                # parallel in projection: generic iff they do not overlap
                if _segments_overlap_2d(p0, p1, q0, q1, eps):
                    raise GenericityError("parallel overlapping edges in projection")
                continue
            t = cross2(qp, s) / denom
            w = cross2(qp, r) / denom
            if t < -0.0 or t > 1.0 or w < -0.0 or w > 1.0:
                continue
            margin_t = eps / max(norm(r), eps)
            margin_w = eps / max(norm(s), eps)
            if t < margin_t or t > 1.0 - margin_t or w < margin_w or w > 1.0 - margin_w:
                raise GenericityError("crossing within eps of a vertex in projection")
            di = dp0 + t * (dp1 - dp0)
            dj = dq0 + w * (dq1 - dq0)
            if abs(di - dj) <= eps:
                raise GenericityError("depth tie at a crossing")
            pos = p0 + t * r
            crossings_raw.append((ii, jj, t, w, di, dj, pos))

    for a in range(len(crossings_raw)):
        for b in range(a + 1, len(crossings_raw)):
            if norm(crossings_raw[a][6] - crossings_raw[b][6]) <= eps:
                raise GenericityError("triple point in projection")

    components = {}
    for cid, xy, closed, depth in curves_2d:
        components[cid] = ComponentTrace(cid, closed, [], xy)
    crossings = {}
    events = {cid: [] for cid, *_ in curves_2d}
    for k, (ii, jj, t, w, di, dj, pos) in enumerate(crossings_raw):
        ci, ei, p0, p1, _, _ = rows[ii]
        cj, ej, q0, q1, _, _ = rows[jj]
        id_i = curves_2d[ci][0]
        id_j = curves_2d[cj][0]
        dir_i = p1 - p0
        dir_j = q1 - q0
        if di < dj:
            over_id, under_id = id_i, id_j
            sign = 1 if cross2(dir_i, dir_j) > 0 else -1
            over_loc, under_loc = (ei, t), (ej, w)
        else:
            over_id, under_id = id_j, id_i
            sign = 1 if cross2(dir_j, dir_i) > 0 else -1
            over_loc, under_loc = (ej, w), (ei, t)
        crossings[k] = CrossingRec(sign, over_id, under_id, (float(pos[0]), float(pos[1])))
        events[over_id].append((k, "over", over_loc))
        events[under_id].append((k, "under", under_loc))
    for cid, evs in events.items():
        components[cid].events = sorted(evs, key=lambda e: e[2])
    return Diagram(components, crossings)


def _segments_overlap_2d(p0, p1, q0, q1, eps: float) -> bool:
    from .geom import point_segment_distance_2d

    return (
        min(
            point_segment_distance_2d(q0, p0, p1),
            point_segment_distance_2d(q1, p0, p1),
            point_segment_distance_2d(p0, q0, q1),
            point_segment_distance_2d(p1, q0, q1),
        )
        <= eps
    )


def scene_curves(scene, n_circle: int = 64, include_open: bool = False):
    """Curves of a scene for projection (ropes plus circle spines).

    Circle sampling is phase-shifted by half a step so that no polygon
    vertex lands on welded points such as a pole end on its circle.
    """
    out = []
    for rope in scene.ropes:
        if rope.closed or include_open:
            out.append((rope.id, rope.vertices.copy(), rope.closed))
    for piece in scene.pieces:
        if piece.circle is not None:
            out.append((piece.id, piece.circle.polygon(n_circle, phase=math.pi / n_circle), True))
        if include_open and piece.segment is not None:
            out.append((piece.id + ".segment", np.array([piece.segment.a, piece.segment.b]), False))
    return out


# ---------------------------------------------------------------------------
# linking number and colorings
# ---------------------------------------------------------------------------


def linking_number(d: Diagram, comp_i: str, comp_j: str) -> int:
    if comp_i == comp_j:
        raise InvariantError("linking number needs two distinct components")
    for c in (comp_i, comp_j):
        if c not in d.components:
            raise InvariantError(f"unknown component {c!r}")
    total = 0
    for rec in d.crossings.values():
        if {rec.over_component, rec.under_component} == {comp_i, comp_j}:
            total += rec.sign
    if total % 2 != 0:
        raise InvariantError("odd inter-component crossing sign sum; diagram malformed")
    return total // 2


def _coloring_rows(d: Diagram):
    arc_owner, refs = d.arcs()
    arcs = sorted(arc_owner)
    index = {a: k for k, a in enumerate(arcs)}
    rows = []
    for cid in sorted(d.crossings):
        ref = refs[cid]
        row = [0] * len(arcs)
        for key in ("over", "under_in", "under_out"):
            row[index[ref[key]]] += 1
        rows.append([x % 3 for x in row])
    return arcs, rows


def tricolor_count(d: Diagram) -> int:
    """Number of mod-3 arc colorings (over + under_in + under_out = 0).

    Always a power of 3 and at least 3; "tricolorable" means > 3.
    """
    arcs, rows = _coloring_rows(d)
    nullity = len(arcs) - _gf3_rank(rows, len(arcs))
    return 3**nullity


def tricolor_count_bruteforce(d: Diagram, max_arcs: int = 14) -> int:
    """Independent enumeration of all 3^arcs assignments."""
    arcs, rows = _coloring_rows(d)
    n = len(arcs)
    if n > max_arcs:
        raise InvariantError(f"brute force capped at {max_arcs} arcs, diagram has {n}")
    if not rows:
        return 3**n
    m = np.array(rows, dtype=np.int64)
    total = 3**n
    assignments = np.zeros((total, n), dtype=np.int64)
    vals = np.arange(total)
    for k in range(n):
        assignments[:, n - 1 - k] = vals % 3
        vals = vals // 3
    ok = np.all((assignments @ m.T) % 3 == 0, axis=1)
    return int(np.count_nonzero(ok))


def tricolor_count_backtracking(d: Diagram) -> int:
    """Exhaustive depth-first count of mod-3 colorings with early pruning.

    Independent of the rank computation; scales to diagrams whose plain
    3^arcs enumeration is out of reach.
    """
    arcs, rows = _coloring_rows(d)
    n = len(arcs)
    triples = []
    for row in rows:
        triple = []
        for j, coeff in enumerate(row):
            triple.extend([j] * coeff)
        triples.append(tuple(triple))
    by_arc = {}
    for ci, tr in enumerate(triples):
        for j in tr:
            by_arc.setdefault(j, set()).add(ci)
    # assignment order: walk arcs so each new one closes crossings quickly
    order = []
    seen = set()
    for ci in range(len(triples)):
        for j in triples[ci]:
            if j not in seen:
                seen.add(j)
                order.append(j)
    for j in range(n):
        if j not in seen:
            seen.add(j)
            order.append(j)
    pos = {j: k for k, j in enumerate(order)}
    ready = [[] for _ in range(n + 1)]
    for ci, tr in enumerate(triples):
        k = max(pos[j] for j in tr) if tr else 0
        ready[k + 1].append(ci)

    colors = [0] * n
    total = 0
    stack = [(0, 0)]

    def consistent(level):
        for ci in ready[level]:
            if sum(colors[j] for j in triples[ci]) % 3 != 0:
                return False
        return True

    def dfs(level):
        nonlocal total
        if level == n:
            total += 1
            return
        j = order[level]
        for v in (0, 1, 2):
            colors[j] = v
            if consistent(level + 1):
                dfs(level + 1)
        colors[j] = 0

    dfs(0)
    return total


def is_tricolorable(d: Diagram) -> bool:
    return tricolor_count(d) > 3


def _gf3_rank(rows, width: int) -> int:
    m = [list(r) for r in rows]
    rank = 0
    col = 0
    nrows = len(m)
    while rank < nrows and col < width:
        piv = None
        for r in range(rank, nrows):
            if m[r][col] % 3 != 0:
                piv = r
                break
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 if m[rank][col] % 3 == 1 else 2  # inverse of 1 or 2 mod 3
        m[rank] = [(x * inv) % 3 for x in m[rank]]
        for r in range(nrows):
            if r != rank and m[r][col] % 3 != 0:
                f = m[r][col] % 3
                m[r] = [(x - f * y) % 3 for x, y in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# band sum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandSite:
    """Where and how a band joins two components.

    core runs in the projection plane from a point on an arc of comp_i to a
    point on an arc of comp_j.  over_flags gives, for each intersection of
    the core with diagram edges in core order, whether the band passes over.
    Both attachment neighborhoods must be crossing-free.
    """

    arc_i: int
    arc_j: int
    core: np.ndarray  # (m, 2)
    over_flags: tuple

    def __post_init__(self):
        object.__setattr__(self, "core", np.asarray(self.core, dtype=float))
        object.__setattr__(self, "over_flags", tuple(bool(x) for x in self.over_flags))
        if self.core.ndim != 2 or self.core.shape[1] != 2 or len(self.core) < 2:
            raise IllegalSiteError("band core needs at least two 2D points")


def _locate_on_component(trace: ComponentTrace, point, tol: float = 1e-6):
    """Closest (edge_index, parameter) on the component polyline to the point."""
    if trace.geometry is None:
        raise IllegalSiteError(f"component {trace.id} carries no geometry")
    pts = trace.geometry
    n = len(pts)
    m = n if trace.closed else n - 1
    best = (math.inf, None)
    p = np.asarray(point, dtype=float)
    for i in range(m):
        a = pts[i]
        b = pts[(i + 1) % n]
        d = b - a
        dd = float(np.dot(d, d))
        t = 0.0 if dd == 0.0 else float(np.clip(np.dot(p - a, d) / dd, 0.0, 1.0))
        dist = norm(p - (a + t * d))
        if dist < best[0]:
            best = (dist, (i, t))
    if best[0] > tol:
        raise IllegalSiteError(f"band attachment point not on component {trace.id} (off by {best[0]:.3g})")
    return best[1]


def _core_intersections(d: Diagram, core: np.ndarray, skip_radius: float):
    """Intersections of the core with all component edges, in core order."""
    hits = []
    ends = (core[0], core[-1])
    for cid, trace in d.components.items():
        pts = trace.geometry
        if pts is None:
            raise IllegalSiteError(f"component {cid} carries no geometry; band it earlier")
        n = len(pts)
        m = n if trace.closed else n - 1
        for k in range(len(core) - 1):
            p0, p1 = core[k], core[k + 1]
            r = p1 - p0
            for i in range(m):
                q0 = pts[i]
                q1 = pts[(i + 1) % n]
                s = q1 - q0
                denom = cross2(r, s)
                if abs(denom) <= EPS * max(norm(r) * norm(s), 1e-300):
                    continue
                qp = q0 - p0
                t = cross2(qp, s) / denom
                w = cross2(qp, r) / denom
                if not (0.0 <= t <= 1.0 and 0.0 <= w <= 1.0):
                    continue
                pos = p0 + t * r
                if min(norm(pos - ends[0]), norm(pos - ends[1])) <= skip_radius:
                    continue  # tangential touch at the attachment neighborhoods
                hits.append(((k, t), cid, (i, w), pos, unit(r), unit(s)))
    hits.sort(key=lambda h: h[0])
    return hits


def _core_self_intersections(core: np.ndarray):
    """Transversal self-intersections of the core, sorted by the first pass."""
    hits = []
    m = len(core) - 1
    for k1 in range(m):
        p0, p1 = core[k1], core[k1 + 1]
        r = p1 - p0
        for k2 in range(k1 + 2, m):
            q0, q1 = core[k2], core[k2 + 1]
            s = q1 - q0
            denom = cross2(r, s)
            if abs(denom) <= EPS * max(norm(r) * norm(s), 1e-300):
                continue
            qp = q0 - p0
            t = cross2(qp, s) / denom
            w = cross2(qp, r) / denom
            if not (0.0 < t < 1.0 and 0.0 < w < 1.0):
                continue
            hits.append(((k1, t), (k2, w), p0 + t * r, unit(r), unit(s)))
    hits.sort(key=lambda h: h[0])
    return hits


def reverse_component(d: Diagram, cid: str) -> Diagram:
    """New diagram with one component's orientation reversed.

    Crossing signs flip where exactly one strand belongs to the component;
    over/under and all other components are untouched.
    """
    tr = d.components[cid]
    if tr.geometry is None:
        raise InvariantError(f"component {cid} carries no geometry to reverse")
    if not tr.closed:
        raise InvariantError("only closed components can be reversed here")
    pts = tr.geometry
    n = len(pts)
    new_geom = np.roll(pts[::-1], 1, axis=0)

    def newloc(loc):
        i, w = loc[0], loc[1]
        return (n - 1 - i, 1.0 - w)

    new_events = [(c, r, newloc(l)) for (c, r, l) in reversed(tr.events)]
    new_components = dict(d.components)
    new_components[cid] = ComponentTrace(cid, True, new_events, new_geom)
    new_crossings = {}
    for k, rec in d.crossings.items():
        strands_on_cid = (rec.over_component == cid) + (rec.under_component == cid)
        sign = -rec.sign if strands_on_cid == 1 else rec.sign
        new_crossings[k] = CrossingRec(sign, rec.over_component, rec.under_component, rec.position)
    return Diagram(new_components, new_crossings)


def collect_band_hits(d: Diagram, core: np.ndarray, skip_radius: float = 1e-9):
    """All band crossings in flag order: arc hits and core self-hits merged.

    Entries are ("arc", key, hit) or ("self", key, hit), sorted by the core
    location of (the hit / its first pass).
    """
    arc_hits = _core_intersections(d, core, skip_radius=skip_radius)
    self_hits = _core_self_intersections(core)
    return sorted(
        [("arc", h[0], h) for h in arc_hits] + [("self", h[0], h) for h in self_hits],
        key=lambda x: x[1],
    )


def band_sum(d: Diagram, comp_i: str, comp_j: str, site: BandSite) -> Diagram:
    """Join two components with a flat band running along site.core.

    The band contributes two parallel strands; each core intersection with a
    diagram edge becomes two crossings whose over/under follows
    site.over_flags and whose signs come from the local tangents.  Component
    count drops by one.  The merged component carries no geometry.
    """
    if comp_i == comp_j:
        raise IllegalSiteError("band sum needs two distinct components")
    for c in (comp_i, comp_j):
        if c not in d.components:
            raise IllegalSiteError(f"unknown component {c!r}")
    arc_owner, _refs = d.arcs()
    if arc_owner.get(site.arc_i) != comp_i or arc_owner.get(site.arc_j) != comp_j:
        raise IllegalSiteError("site arcs do not belong to the named components")
    trace_i = d.components[comp_i]
    trace_j = d.components[comp_j]
    if not (trace_i.closed and trace_j.closed):
        raise IllegalSiteError("band sum needs closed components")
    loc_i = _locate_on_component(trace_i, site.core[0])
    loc_j = _locate_on_component(trace_j, site.core[-1])
    for loc, trace in ((loc_i, trace_i), (loc_j, trace_j)):
        for _cid, _role, ev_loc in trace.events:
            if ev_loc == loc:
                raise IllegalSiteError("band attachment at a crossing")
    # attachment must be on the named arcs (combinatorial site check)
    if _arc_at_location(d, trace_i, loc_i) != site.arc_i:
        raise IllegalSiteError("core start does not lie on arc_i")
    if _arc_at_location(d, trace_j, loc_j) != site.arc_j:
        raise IllegalSiteError("core end does not lie on arc_j")

    # Strand A is the strand attached on the arrival side of the cut at p and
    # the departure side at q; for an untwisted band its offset side from the
    # core is constant, fixed by the attachment geometry at both ends.  When
    # the two ends disagree, the flat band forces the second component's
    # orientation to flip (the usual orientation convention of a band sum).
    def _edge_dir(trace, loc):
        pts = trace.geometry
        n = len(pts)
        i = loc[0]
        return unit(pts[(i + 1) % n] - pts[i])

    core_start_dir = unit(site.core[1] - site.core[0])
    core_end_dir = unit(site.core[-1] - site.core[-2])
    side_p = cross2(core_start_dir, -_edge_dir(trace_i, loc_i))
    side_q = cross2(core_end_dir, _edge_dir(trace_j, loc_j))
    if abs(side_p) <= EPS or abs(side_q) <= EPS:
        raise IllegalSiteError("band core leaves an attachment parallel to the component")
    side_p = 1 if side_p > 0 else -1
    side_q = 1 if side_q > 0 else -1
    if side_p != side_q:
        d = reverse_component(d, comp_j)
        trace_i = d.components[comp_i]
        trace_j = d.components[comp_j]
        loc_j = _locate_on_component(trace_j, site.core[-1])
        side_q = cross2(core_end_dir, _edge_dir(trace_j, loc_j))
        if not (abs(side_q) > EPS and (1 if side_q > 0 else -1) == side_p):
            raise IllegalSiteError("band attachment sides stay inconsistent after reversal")

    all_hits = collect_band_hits(d, site.core)
    if len(all_hits) != len(site.over_flags):
        raise IllegalSiteError(
            f"band core crosses {len(all_hits)} times but {len(site.over_flags)} over/under flags given"
        )

    merged_id = f"{comp_i}+{comp_j}"
    next_cross = (max(d.crossings) + 1) if d.crossings else 0
    new_crossings = dict(d.crossings)
    inserted = {cid: [] for cid in d.components}  # events to weave into other traces
    strand_events = {"A": [], "B": []}  # (sort key along the core, (crossing, role))

    def merge_name(cid):
        return merged_id if cid in (comp_i, comp_j) else cid

    for idx, (kind, _key, h) in enumerate(all_hits):
        over = site.over_flags[idx]
        if kind == "arc":
            core_loc, cid, edge_loc, pos, core_dir, edge_dir = h
            c = cross2(core_dir, edge_dir)
            for sigma, strand in ((1, "A"), (-1, "B")):
                cross_id = next_cross
                next_cross += 1
                direction = core_dir if sigma > 0 else -core_dir
                if over:
                    sign = 1 if cross2(direction, edge_dir) > 0 else -1
                    rec = CrossingRec(sign, merged_id, merge_name(cid), tuple(pos))
                    band_role, other_role = "over", "under"
                else:
                    sign = 1 if cross2(edge_dir, direction) > 0 else -1
                    rec = CrossingRec(sign, merge_name(cid), merged_id, tuple(pos))
                    band_role, other_role = "under", "over"
                new_crossings[cross_id] = rec
                # the sigma strand sits at offset sigma*side_p off the core; its
                # hit shifts along the arc by sigma*side_p/cross2(core, arc)
                arc_side = 1 if (sigma * side_p / c) > 0 else -1
                strand_events[strand].append(((core_loc[0], core_loc[1], 0.0), (cross_id, band_role)))
                inserted[cid].append((cross_id, other_role, (edge_loc[0], edge_loc[1], arc_side)))
        else:
            loc1, loc2, pos, d1, d2 = h
            c = cross2(d1, d2)
            mdot = float(d1 @ d2)
            for s1, name1 in ((1, "A"), (-1, "B")):
                for s2, name2 in ((1, "A"), (-1, "B")):
                    cross_id = next_cross
                    next_cross += 1
                    dir1 = d1 if s1 > 0 else -d1
                    dir2 = d2 if s2 > 0 else -d2
                    if over:  # the first pass runs in front of the second
                        sign = 1 if cross2(dir1, dir2) > 0 else -1
                        role1, role2 = "over", "under"
                    else:
                        sign = 1 if cross2(dir2, dir1) > 0 else -1
                        role1, role2 = "under", "over"
                    new_crossings[cross_id] = CrossingRec(sign, merged_id, merged_id, tuple(pos))
                    # offset-induced param shifts order the four crossings locally
                    du = side_p * (s1 * mdot - s2) / c
                    dv = side_p * (s1 - s2 * mdot) / c
                    strand_events[name1].append(((loc1[0], loc1[1], du), (cross_id, role1)))
                    strand_events[name2].append(((loc2[0], loc2[1], dv), (cross_id, role2)))

    strand_a_events = [
        (cid_, role, ("A", key)) for key, (cid_, role) in sorted(strand_events["A"], key=lambda e: e[0])
    ]
    strand_b_events = [
        (cid_, role, ("B", key))
        for key, (cid_, role) in sorted(strand_events["B"], key=lambda e: e[0], reverse=True)
    ]

    def walk_from(trace: ComponentTrace, loc):
        evs = sorted(trace.events + inserted[trace.id], key=lambda e: e[2])
        after = [e for e in evs if e[2] > loc]
        before = [e for e in evs if e[2] <= loc]
        return after + before

    merged_events = (
        strand_a_events
        + [(c, r, ("J", loc)) for c, r, loc in walk_from(trace_j, loc_j)]
        + strand_b_events
        + [(c, r, ("I", loc)) for c, r, loc in walk_from(trace_i, loc_i)]
    )

    components = {}
    for cid, trace in d.components.items():
        if cid in (comp_i, comp_j):
            continue
        evs = sorted(trace.events + inserted[cid], key=lambda e: e[2])
        components[cid] = ComponentTrace(cid, trace.closed, evs, trace.geometry)
    components[merged_id] = ComponentTrace(merged_id, True, merged_events, None)

    # rewrite component names on old crossings involving the merged parts
    for cid, rec in new_crossings.items():
        over = merged_id if rec.over_component in (comp_i, comp_j) else rec.over_component
        under = merged_id if rec.under_component in (comp_i, comp_j) else rec.under_component
        new_crossings[cid] = CrossingRec(rec.sign, over, under, rec.position)

    return Diagram(components, new_crossings)


def _arc_at_location(d: Diagram, trace: ComponentTrace, loc) -> int:
    """Arc id of the component at the given polyline location."""
    arc_owner, refs = d.arcs()
    events = trace.events
    under_slots = [k for k, ev in enumerate(events) if ev[1] == "under"]
    comp_arcs = sorted(a for a, c in arc_owner.items() if c == trace.id)
    if not under_slots:
        return comp_arcs[0]
    # arc j runs from under_slots[j] to under_slots[j+1]; find the slot whose
    # interval contains loc in cyclic order
    for j, start in enumerate(under_slots):
        end = under_slots[(j + 1) % len(under_slots)]
        a = events[start][2]
        b = events[end][2]
        if a < b:
            inside = a < loc <= b
        else:
            inside = loc > a or loc <= b
        if inside:
            return comp_arcs[j]
    return comp_arcs[0]
