"""3D/2D geometric primitives and predicates.

Distances treat circles as their 1D spine curve; tube thickness is a
parameter the callers compare against.  All reals are double precision,
with a single geometric epsilon EPS for degeneracy tests and a separate
legality clearance used by the scene/move layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EPS = 1e-9
DEFAULT_CLEARANCE = 1e-3

DEGENERATE = "degenerate"


class GeometryError(ValueError):
    pass


class DegenerateShapeError(GeometryError):
    pass


class PreconditionError(GeometryError):
    pass


def _vec3(p) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.shape != (3,):
        raise GeometryError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("non-finite coordinate")
    return v


def _vec2(p) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.shape != (2,):
        raise GeometryError(f"expected a 2-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError("non-finite coordinate")
    return v


def norm(v) -> float:
    return float(np.linalg.norm(v))


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n <= EPS:
        raise DegenerateShapeError("cannot normalize a near-zero vector")
    return v / n


def cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec3(self.a))
        object.__setattr__(self, "b", _vec3(self.b))
        if norm(self.b - self.a) <= EPS:
            raise DegenerateShapeError("zero-length segment")

    @property
    def direction(self) -> np.ndarray:
        return self.b - self.a

    def length(self) -> float:
        return norm(self.b - self.a)

    def point_at(self, t: float) -> np.ndarray:
        return self.a + t * (self.b - self.a)


@dataclass(frozen=True)
class Triangle:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _vec3(self.p))
        object.__setattr__(self, "q", _vec3(self.q))
        object.__setattr__(self, "r", _vec3(self.r))
        if self.area() <= EPS:
            raise DegenerateShapeError("degenerate (near zero area) triangle")

    def area(self) -> float:
        return 0.5 * norm(np.cross(self.q - self.p, self.r - self.p))

    def normal(self) -> np.ndarray:
        return unit(np.cross(self.q - self.p, self.r - self.p))

    def vertices(self) -> np.ndarray:
        return np.array([self.p, self.q, self.r])


@dataclass(frozen=True)
class Circle:
    """Circle in 3D; tube_radius = 0 is a wire, > 0 a solid hoop."""

    center: np.ndarray
    radius: float
    normal: np.ndarray
    tube_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center))
        object.__setattr__(self, "normal", unit(_vec3(self.normal)))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "tube_radius", float(self.tube_radius))
        if not (self.radius > self.tube_radius >= 0.0):
            raise DegenerateShapeError("circle needs radius > tube_radius >= 0")

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic in-plane orthonormal frame (u, v)."""
        n = self.normal
        k = int(np.argmin(np.abs(n)))
        e = np.zeros(3)
        e[k] = 1.0
        u = unit(np.cross(n, e))
        v = np.cross(n, u)
        return u, v

    def point_at(self, theta) -> np.ndarray:
        u, v = self.frame()
        theta = np.asarray(theta, dtype=float)
        pts = (
            self.center
            + self.radius * np.outer(np.cos(theta), u)
            + self.radius * np.outer(np.sin(theta), v)
        )
        return pts[0] if theta.ndim == 0 else pts

    def polygon(self, n: int = 64, phase: float = 0.0) -> np.ndarray:
        theta = 2.0 * math.pi * np.arange(n) / n + phase
        return self.point_at(theta)


@dataclass(frozen=True)
class Disk:
    """Flat spanning disk of a circle (always coplanar with it)."""

    circle: Circle

    @property
    def center(self) -> np.ndarray:
        return self.circle.center

    @property
    def radius(self) -> float:
        return self.circle.radius

    @property
    def normal(self) -> np.ndarray:
        return self.circle.normal


@dataclass(frozen=True)
class Plane:
    """Oriented plane; the closed half-space on the negative side is kept out."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _vec3(self.point))
        object.__setattr__(self, "normal", unit(_vec3(self.normal)))

    def signed_distance(self, p) -> float:
        return float(np.dot(np.asarray(p, dtype=float) - self.point, self.normal))


@dataclass(frozen=True)
class SideLabel:
    """A side of an oriented segment, in the segment's own frame.

    sign = +1 is the side the leftward normal of a->b points to, so the
    label is comparable along a rigidly moving family of segments.
    """

    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise GeometryError("side sign must be +1 or -1")


# ---------------------------------------------------------------------------
# pairwise distances
# ---------------------------------------------------------------------------


def point_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    dd = float(np.dot(d, d))
    t = 0.0 if dd == 0.0 else float(np.clip(np.dot(p - a, d) / dd, 0.0, 1.0))
    return norm(p - (a + t * d))


def segment_segment_distance(a0, a1, b0, b1) -> float:
    # Ericson, Real-Time Collision Detection 5.1.9 style.
    p1 = np.asarray(a0, dtype=float)
    q1 = np.asarray(a1, dtype=float)
    p2 = np.asarray(b0, dtype=float)
    q2 = np.asarray(b1, dtype=float)
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    c = float(np.dot(d1, r))
    b = float(np.dot(d1, d2))
    denom = a * e - b * b
    if denom > 0.0:
        s = float(np.clip((b * f - c * e) / denom, 0.0, 1.0))
    else:
        s = 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = float(np.clip(-c / a, 0.0, 1.0))
    elif t > 1.0:
        t = 1.0
        s = float(np.clip((b - c) / a, 0.0, 1.0))
    return norm((p1 + s * d1) - (p2 + t * d2))


def point_triangle_distance(p, tri: Triangle) -> float:
    # Ericson-style closest point on triangle.
    a, b, c = tri.p, tri.q, tri.r
    p = np.asarray(p, dtype=float)
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(np.dot(ab, ap))
    d2 = float(np.dot(ac, ap))
    if d1 <= 0.0 and d2 <= 0.0:
        return norm(p - a)
    bp = p - b
    d3 = float(np.dot(ab, bp))
    d4 = float(np.dot(ac, bp))
    if d3 >= 0.0 and d4 <= d3:
        return norm(p - b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return norm(p - (a + v * ab))
    cp = p - c
    d5 = float(np.dot(ab, cp))
    d6 = float(np.dot(ac, cp))
    if d6 >= 0.0 and d5 <= d6:
        return norm(p - c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return norm(p - (a + w * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return norm(p - (b + w * (c - b)))
    n = unit(np.cross(ab, ac))
    return abs(float(np.dot(p - a, n)))


def _segment_pierces_triangle(a, b, tri: Triangle) -> bool:
    n = np.cross(tri.q - tri.p, tri.r - tri.p)
    da = float(np.dot(a - tri.p, n))
    db = float(np.dot(b - tri.p, n))
    if da * db > 0.0 or (da == 0.0 and db == 0.0):
        return False
    denom = da - db
    if denom == 0.0:
        return False
    t = da / denom
    x = a + t * (b - a)
    # barycentric containment
    v0 = tri.q - tri.p
    v1 = tri.r - tri.p
    v2 = x - tri.p
    d00 = float(np.dot(v0, v0))
    d01 = float(np.dot(v0, v1))
    d11 = float(np.dot(v1, v1))
    d20 = float(np.dot(v2, v0))
    d21 = float(np.dot(v2, v1))
    den = d00 * d11 - d01 * d01
    if den == 0.0:
        return False
    v = (d11 * d20 - d01 * d21) / den
    w = (d00 * d21 - d01 * d20) / den
    return v >= 0.0 and w >= 0.0 and v + w <= 1.0


def segment_triangle_distance(seg: Segment, tri: Triangle) -> float:
    a, b = seg.a, seg.b
    if _segment_pierces_triangle(a, b, tri):
        return 0.0
    edges = ((tri.p, tri.q), (tri.q, tri.r), (tri.r, tri.p))
    best = min(segment_segment_distance(a, b, e0, e1) for e0, e1 in edges)
    best = min(best, point_triangle_distance(a, tri), point_triangle_distance(b, tri))
    return best


def triangle_triangle_distance(t1: Triangle, t2: Triangle) -> float:
    best = math.inf
    for e0, e1 in ((t1.p, t1.q), (t1.q, t1.r), (t1.r, t1.p)):
        best = min(best, segment_triangle_distance(Segment(e0, e1), t2))
    for e0, e1 in ((t2.p, t2.q), (t2.q, t2.r), (t2.r, t2.p)):
        best = min(best, segment_triangle_distance(Segment(e0, e1), t1))
    return best


def point_circle_distance(p, c: Circle) -> float:
    p = np.asarray(p, dtype=float)
    w = p - c.center
    h = float(np.dot(w, c.normal))
    inplane = w - h * c.normal
    rho = norm(inplane)
    return math.hypot(rho - c.radius, h)


# batched point-set distances (pts has shape (n, 3))


def pts_segment_distance(pts: np.ndarray, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    dd = float(np.dot(d, d))
    t = np.clip((pts - a) @ d / dd, 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * d), axis=1)


def pts_circle_distance(pts: np.ndarray, c: Circle) -> np.ndarray:
    w = pts - c.center
    h = w @ c.normal
    inplane = w - h[:, None] * c.normal
    rho = np.linalg.norm(inplane, axis=1)
    return np.hypot(rho - c.radius, h)


def pts_disk_distance(pts: np.ndarray, disk: Disk) -> np.ndarray:
    w = pts - disk.center
    h = w @ disk.normal
    inplane = w - h[:, None] * disk.normal
    rho = np.linalg.norm(inplane, axis=1)
    gap = np.maximum(rho - disk.radius, 0.0)
    return np.hypot(gap, h)


def pts_triangle_distance(pts: np.ndarray, tri: Triangle) -> np.ndarray:
    # vectorized Ericson closest-point-on-triangle
    a, b, c = tri.p, tri.q, tri.r
    ab = b - a
    ac = c - a
    n = np.cross(ab, ac)
    nn = float(np.dot(n, n))
    ap = pts - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = pts - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = pts - c
    d5 = cp @ ab
    d6 = cp @ ac
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    out = np.empty(len(pts))
    done = np.zeros(len(pts), dtype=bool)

    def settle(mask, closest):
        todo = mask & ~done
        if np.any(todo):
            diff = pts[todo] - (closest[todo] if closest.ndim == 2 else closest)
            out[todo] = np.linalg.norm(diff, axis=1)
            done[todo] = True

    settle((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, pts.shape))
    settle((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, pts.shape))
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 != d3, d1 / (d1 - d3), 0.0)
    settle((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v_ab[:, None] * ab)
    settle((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, pts.shape))
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = np.where(d2 != d6, d2 / (d2 - d6), 0.0)
    settle((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w_ac[:, None] * ac)
    denom_bc = (d4 - d3) + (d5 - d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = np.where(denom_bc != 0, (d4 - d3) / denom_bc, 0.0)
    settle((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + w_bc[:, None] * (c - b))
    if np.any(~done):
        h = ap[~done] @ n / math.sqrt(nn)
        out[~done] = np.abs(h)
    return out


def _min_over_circle(c: Circle, batch_fn, coarse: int = 128, basins: int = 3, passes: int = 5) -> float:
    """Minimize batch_fn over points of the circle by coarse sampling plus zoom."""
    thetas = 2.0 * math.pi * np.arange(coarse) / coarse
    vals = batch_fn(c.point_at(thetas))
    order = np.argsort(vals)
    picked = []
    for idx in order:
        if all(min(abs(idx - j), coarse - abs(idx - j)) > 2 for j in picked):
            picked.append(int(idx))
        if len(picked) >= basins:
            break
    best = float(vals.min())
    step = 2.0 * math.pi / coarse
    fine = 33
    for idx in picked:
        lo = thetas[idx] - step
        hi = thetas[idx] + step
        for _ in range(passes):
            ts = np.linspace(lo, hi, fine)
            vs = batch_fn(c.point_at(ts))
            k = int(np.argmin(vs))
            best = min(best, float(vs[k]))
            h = (hi - lo) / (fine - 1)
            lo = ts[k] - h
            hi = ts[k] + h
    return best


_distance_memo: dict = {}
_MEMO_CAP = 200_000


def _memo_get(key):
    return _distance_memo.get(key)


def _memo_put(key, value):
    if len(_distance_memo) > _MEMO_CAP:
        _distance_memo.clear()
    _distance_memo[key] = value
    return value


def _circle_key(c: Circle):
    return (c.center.tobytes(), c.radius, c.normal.tobytes())


def segment_circle_distance(seg: Segment, c: Circle) -> float:
    key = ("sc", seg.a.tobytes(), seg.b.tobytes(), _circle_key(c))
    v = _memo_get(key)
    if v is None:
        v = _memo_put(key, _min_over_circle(c, lambda pts: pts_segment_distance(pts, seg.a, seg.b)))
    return v


def circle_circle_distance(c1: Circle, c2: Circle) -> float:
    key = ("cc", _circle_key(c1), _circle_key(c2))
    v = _memo_get(key)
    if v is None:
        v = _memo_put(key, _min_over_circle(c1, lambda pts: pts_circle_distance(pts, c2)))
    return v


def triangle_circle_distance(tri: Triangle, c: Circle) -> float:
    return _min_over_circle(c, lambda pts: pts_triangle_distance(pts, tri))


_Point = tuple  # shapes passed to distance(); points are plain 3-vectors


def _shape_kind(s):
    if isinstance(s, Segment):
        return "segment"
    if isinstance(s, Triangle):
        return "triangle"
    if isinstance(s, Circle):
        return "circle"
    arr = np.asarray(s, dtype=float)
    if arr.shape == (3,):
        return "point"
    raise GeometryError(f"unsupported shape {type(s)!r}")


def distance(shape_a, shape_b) -> float:
    """Euclidean minimum distance between two shapes.

    Supported shapes: point (3-vector), Segment, Triangle, Circle (spine).
    """
    ka, kb = _shape_kind(shape_a), _shape_kind(shape_b)
    if (ka, kb) in _DISPATCH:
        return _DISPATCH[(ka, kb)](shape_a, shape_b)
    return _DISPATCH[(kb, ka)](shape_b, shape_a)


_DISPATCH = {
    ("point", "point"): lambda p, q: norm(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)),
    ("point", "segment"): lambda p, s: point_segment_distance(p, s.a, s.b),
    ("point", "triangle"): lambda p, t: point_triangle_distance(p, t),
    ("point", "circle"): lambda p, c: point_circle_distance(p, c),
    ("segment", "segment"): lambda s, t: segment_segment_distance(s.a, s.b, t.a, t.b),
    ("segment", "triangle"): lambda s, t: segment_triangle_distance(s, t),
    ("segment", "circle"): lambda s, c: segment_circle_distance(s, c),
    ("triangle", "triangle"): lambda s, t: triangle_triangle_distance(s, t),
    ("triangle", "circle"): lambda t, c: triangle_circle_distance(t, c),
    ("circle", "circle"): lambda c, d: circle_circle_distance(c, d),
}


# ---------------------------------------------------------------------------
# disk predicates
# ---------------------------------------------------------------------------


def seg_disk_crossing(seg: Segment, disk: Disk, eps: float = EPS):
    """Signed transversal crossing of an open segment through an open disk.

    Returns +1 / -1 (sign of direction . disk normal), None when there is no
    crossing, or DEGENERATE when the configuration is within eps of a
    boundary case (near-coplanar segment, endpoint on the plane, or crossing
    point within eps of the rim).  Callers must handle DEGENERATE.
    """
    n = disk.normal
    ha = float(np.dot(seg.a - disk.center, n))
    hb = float(np.dot(seg.b - disk.center, n))
    if (ha > eps and hb > eps) or (ha < -eps and hb < -eps):
        return None
    if abs(ha) <= eps or abs(hb) <= eps:
        # endpoint on (or nearly on) the plane: can't certify transversality,
        # unless both endpoints are near-coplanar and far from the disk.
        return DEGENERATE
    t = ha / (ha - hb)
    x = seg.a + t * (seg.b - seg.a)
    w = x - disk.center
    rho = norm(w - float(np.dot(w, n)) * n)
    if abs(rho - disk.radius) <= eps:
        return DEGENERATE
    if rho > disk.radius:
        return None
    return 1 if float(np.dot(seg.direction, n)) > 0.0 else -1


def crossing_parameter(seg: Segment, disk: Disk) -> float:
    """Parameter t of the plane crossing; meaningful when a crossing exists."""
    n = disk.normal
    ha = float(np.dot(seg.a - disk.center, n))
    hb = float(np.dot(seg.b - disk.center, n))
    return ha / (ha - hb)


def point_disk_distance(p, disk: Disk) -> float:
    p = np.asarray(p, dtype=float)
    w = p - disk.center
    h = float(np.dot(w, disk.normal))
    inplane = w - h * disk.normal
    rho = norm(inplane)
    if rho <= disk.radius:
        return abs(h)
    return math.hypot(rho - disk.radius, h)


def segment_disk_distance(seg: Segment, disk: Disk) -> float:
    res = seg_disk_crossing(seg, disk, eps=0.0)
    if res in (1, -1):
        return 0.0
    best = min(point_disk_distance(seg.a, disk), point_disk_distance(seg.b, disk))
    best = min(best, segment_circle_distance(seg, disk.circle))
    return best


def disk_disk_distance(d1: Disk, d2: Disk) -> float:
    """Minimum distance between two filled flat disks."""
    n1, n2 = d1.normal, d2.normal
    cr = np.cross(n1, n2)
    if norm(cr) > EPS:
        # planes intersect in a line; if the line meets both disks, they touch
        ln = unit(cr)
        # point on the line: solve the 2 plane equations
        a = np.array([n1, n2, ln])
        b = np.array([float(np.dot(n1, d1.center)), float(np.dot(n2, d2.center)), 0.0])
        p0 = np.linalg.solve(a, b)

        def interval(disk: Disk):
            w = p0 - disk.center
            # |w + t*ln|^2 <= r^2 with w in-plane
            wl = float(np.dot(w, ln))
            c0 = float(np.dot(w, w)) - wl * wl
            rad2 = disk.radius**2 - c0
            if rad2 < 0.0:
                return None
            s = math.sqrt(rad2)
            return (-wl - s, -wl + s)

        i1, i2 = interval(d1), interval(d2)
        if i1 and i2 and i1[0] <= i2[1] and i2[0] <= i1[1]:
            return 0.0
    else:
        # parallel planes
        h = float(np.dot(d2.center - d1.center, n1))
        off = d2.center - d1.center - h * n1
        if norm(off) <= d1.radius + d2.radius:
            return abs(h)
    best = circle_circle_distance(d1.circle, d2.circle)
    best = min(best, _min_over_circle(d1.circle, lambda pts: pts_disk_distance(pts, d2)))
    best = min(best, _min_over_circle(d2.circle, lambda pts: pts_disk_distance(pts, d1)))
    return best


# ---------------------------------------------------------------------------
# clearance check for solid triangles
# ---------------------------------------------------------------------------


@dataclass
class ClearanceReport:
    ok: bool
    violation: object = None
    distance: float = math.nan

    def __bool__(self) -> bool:
        return self.ok


def triangle_clear(tri: Triangle, obstacles, clearance: float = DEFAULT_CLEARANCE) -> ClearanceReport:
    """True iff the closed solid triangle keeps >= clearance from every obstacle.

    Obstacles: Segment, Circle (tube_radius honored), Plane (oriented
    keep-out side), or polyline given as an (n,3) array of vertices.
    On failure reports the first violating obstacle and achieved distance.
    """
    for obs in obstacles:
        if isinstance(obs, Plane):
            d = min(obs.signed_distance(v) for v in tri.vertices())
            if d < clearance:
                return ClearanceReport(False, obs, d)
        elif isinstance(obs, Circle):
            d = triangle_circle_distance(tri, obs) - obs.tube_radius
            if d < clearance:
                return ClearanceReport(False, obs, d)
        elif isinstance(obs, Segment):
            d = segment_triangle_distance(obs, tri)
            if d < clearance:
                return ClearanceReport(False, obs, d)
        else:
            pts = np.asarray(obs, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
                raise GeometryError("polyline obstacle needs an (n,3) array, n >= 2")
            for i in range(len(pts) - 1):
                if norm(pts[i + 1] - pts[i]) <= EPS:
                    continue
                d = segment_triangle_distance(Segment(pts[i], pts[i + 1]), tri)
                if d < clearance:
                    return ClearanceReport(False, obs, d)
    return ClearanceReport(True)


# ---------------------------------------------------------------------------
# 2D types and the side-selection predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment2:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec2(self.a))
        object.__setattr__(self, "b", _vec2(self.b))
        if norm(self.b - self.a) <= EPS:
            raise DegenerateShapeError("zero-length segment")

    @property
    def direction(self) -> np.ndarray:
        return self.b - self.a


@dataclass(frozen=True)
class Circle2:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec2(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise DegenerateShapeError("circle radius must be positive")


def _side_of(seg: Segment2, p) -> int:
    c = cross2(seg.direction, np.asarray(p, dtype=float) - seg.a)
    if c > 0.0:
        return 1
    if c < 0.0:
        return -1
    return 0


def _line_circle_params(seg: Segment2, circle: Circle2):
    """Parameters t (along a->b, unclamped) where the supporting line meets the circle."""
    d = seg.direction
    f = seg.a - circle.center
    a = float(np.dot(d, d))
    b = 2.0 * float(np.dot(f, d))
    c = float(np.dot(f, f)) - circle.radius**2
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    return ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a))


def select_minor_side(circle: Circle2, seg: Segment2, eps: float = EPS) -> SideLabel:
    """Side of the chord segment whose circular arc is shorter than half the circle.

    Preconditions follow the short-chord setup: radius >= 1, chord length
    <= 1, the supporting line meets the circle twice with both intersection
    points on the segment, and neither endpoint is within eps of the circle.
    The returned side is always the one not containing the circle's center.
    """
    if circle.radius < 1.0:
        raise PreconditionError("circle radius must be >= 1")
    for e in (seg.a, seg.b):
        if abs(norm(e - circle.center) - circle.radius) <= eps:
            raise PreconditionError("segment endpoint on the circle")
    seg_len = norm(seg.direction)
    d_line = abs(cross2(seg.direction, circle.center - seg.a)) / seg_len
    if d_line >= circle.radius - eps:
        raise PreconditionError("supporting line misses the circle or is tangent")
    chord = 2.0 * math.sqrt(max(circle.radius**2 - d_line**2, 0.0))
    if chord > 1.0 + eps:
        raise PreconditionError(f"chord length {chord:.6g} exceeds 1")
    params = _line_circle_params(seg, circle)
    if params is None:
        raise PreconditionError("no intersection with the circle")
    t0, t1 = params
    if not (0.0 <= t0 <= 1.0 and 0.0 <= t1 <= 1.0):
        raise PreconditionError("intersection points not both on the segment")
    side_of_center = _side_of(seg, circle.center)
    if side_of_center == 0:
        raise PreconditionError("center on the supporting line")
    return SideLabel(-side_of_center)


# Lemma-2 lollipop: pole (0,0)-(0,1) plus circle x^2 + (y-2)^2 = 1.
LOLLIPOP_POLE = (np.array([0.0, 0.0]), np.array([0.0, 1.0]))
LOLLIPOP_CENTER = np.array([0.0, 2.0])
LOLLIPOP_RADIUS = 1.0
_WELD = np.array([0.0, 1.0])
_BASE = np.array([0.0, 0.0])


def _seg_seg_intersection_2d(p0, p1, q0, q1, eps: float):
    """Intersection point of two 2D segments, or None; raises on collinear overlap."""
    r = p1 - p0
    s = q1 - q0
    denom = cross2(r, s)
    qp = q0 - p0
    if abs(denom) <= eps * norm(r) * norm(s):
        # parallel: overlap only matters if collinear and overlapping
        if abs(cross2(qp, r)) <= eps * norm(r):
            tt0 = float(np.dot(qp, r) / np.dot(r, r))
            tt1 = float(np.dot(q1 - p0, r) / np.dot(r, r))
            if max(min(tt0, tt1), 0.0) <= min(max(tt0, tt1), 1.0):
                raise PreconditionError("segment collinear with pole")
        return None
    t = cross2(qp, s) / denom
    u = cross2(qp, r) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return p0 + t * r
    return None


def select_lollipop_side(seg: Segment2, eps: float = EPS) -> SideLabel:
    """Side of the segment on which the cut-off part of the lollipop misses (0,0).

    The lollipop is the fixed pole (0,0)-(0,1) welded to the circle
    x^2+(y-2)^2=1.  The piece of the lollipop containing the base point
    always meets the segment from exactly one side; the selected side is the
    other one.  With no cut at all the side is decided by a direct region
    test on the supporting line.
    """
    a, b = seg.a, seg.b
    pole_a, pole_b = LOLLIPOP_POLE
    for e in (a, b):
        if point_segment_distance_2d(e, pole_a, pole_b) <= eps:
            raise PreconditionError("segment endpoint touches the pole")
        dc = norm(e - LOLLIPOP_CENTER)
        if abs(dc - LOLLIPOP_RADIUS) <= eps:
            raise PreconditionError("segment endpoint touches the circle")
        if dc < LOLLIPOP_RADIUS:
            raise PreconditionError("segment endpoint inside the circle")
    if point_segment_distance_2d(_BASE, a, b) <= eps:
        raise PreconditionError("segment passes through (0,0)")

    # pole cut (at most one transversal point)
    pole_cut = _seg_seg_intersection_2d(a, b, pole_a, pole_b, eps)
    if pole_cut is not None:
        if norm(pole_cut - _WELD) <= eps or norm(pole_cut - _BASE) <= eps:
            raise PreconditionError("cut too close to a lollipop joint")

    # circle cuts
    circ = Circle2(LOLLIPOP_CENTER, LOLLIPOP_RADIUS)
    params = _line_circle_params(seg, circ)
    circle_cuts = []
    if params is not None:
        t0, t1 = params
        if abs(t1 - t0) * norm(seg.direction) <= eps:
            if 0.0 <= t0 <= 1.0:
                raise PreconditionError("segment tangent to the circle")
        else:
            for t in (t0, t1):
                if 0.0 <= t <= 1.0:
                    pt = a + t * seg.direction
                    if norm(pt - _WELD) <= eps:
                        raise PreconditionError("cut too close to the weld")
                    circle_cuts.append(pt)
        if len(circle_cuts) == 1:
            # endpoints strictly outside the closed disk make cuts come in pairs
            raise PreconditionError("single circle cut; endpoint too close to the disk")

    if pole_cut is None and not circle_cuts:
        s = _side_of(seg, _BASE)
        if s == 0:
            raise PreconditionError("(0,0) on the supporting line with no cut")
        return SideLabel(-s)

    if pole_cut is not None:
        # base piece = pole below the cut; it leaves the segment downward
        below = pole_cut + np.array([0.0, -1.0]) * min(1e-6, 0.5 * norm(pole_cut - _BASE))
        s = _side_of(seg, below)
        if s == 0:
            raise PreconditionError("degenerate pole cut")
        return SideLabel(-s)

    # only circle cuts: base piece runs from the weld along the circle both
    # ways; at each of its two cut points it sits on one (the same) side.
    ang = [math.atan2(p[1] - LOLLIPOP_CENTER[1], p[0] - LOLLIPOP_CENTER[0]) for p in circle_cuts]
    weld_ang = math.atan2(_WELD[1] - LOLLIPOP_CENTER[1], _WELD[0] - LOLLIPOP_CENTER[0])
    sides = []
    for phi, cut in zip(ang, circle_cuts):
        # walk slightly from the cut toward the weld along the circle
        step = 1e-6
        for direction in (1.0, -1.0):
            phi2 = phi + direction * step
            # does moving this way head toward the weld without passing the other cut?
            if _arc_contains(phi, ang[1] if cut is circle_cuts[0] else ang[0], weld_ang, direction):
                p_near = LOLLIPOP_CENTER + LOLLIPOP_RADIUS * np.array([math.cos(phi2), math.sin(phi2)])
                sides.append(_side_of(seg, p_near))
                break
    if len(sides) != 2 or sides[0] != sides[1] or sides[0] == 0:
        raise PreconditionError("ambiguous circle cut configuration")
    return SideLabel(-sides[0])


def _arc_contains(phi_from: float, phi_other: float, phi_target: float, direction: float) -> bool:
    """True if walking from phi_from in +/-direction reaches phi_target before phi_other."""

    def fwd(x, y):
        d = (y - x) % (2.0 * math.pi)
        return d

    if direction > 0:
        return fwd(phi_from, phi_target) < fwd(phi_from, phi_other)
    return fwd(phi_target, phi_from) < fwd(phi_other, phi_from)


def point_segment_distance_2d(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    dd = float(np.dot(d, d))
    t = 0.0 if dd == 0.0 else float(np.clip(np.dot(p - a, d) / dd, 0.0, 1.0))
    return norm(p - (a + t * d))
