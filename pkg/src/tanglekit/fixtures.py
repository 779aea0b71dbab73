"""Engine-authored fixtures: canonical projections, band sites, solution scripts.

The canonical band for the two-Hopf-link scene runs from the finger of
rope 1, through hoop 2's opening, around the far side of hoop 2's ring and
back down to rope 2.  That lasso is what makes the banded link carry a
nonconstant mod-3 coloring; a short band would collapse it to a chain.
"""

from __future__ import annotations

import math

import numpy as np

from .geom import unit
from .invariants import (
    BandSite,
    Diagram,
    IllegalSiteError,
    _arc_at_location,
    _locate_on_component,
    _projection_frame,
    collect_band_hits,
    project_diagram,
    scene_curves,
)
from .moves import MoveScript, RigidStep, apply_move
from .scenes import Scene, build_model_a, goal_reached, model_c_constants

# Fixed, documented projection for the canonical two-Hopf-link diagram:
# nearly along +x so hoop 2 shows as a full circle and both rope loops stay
# clear of each other's projections.
MODEL_C_PROJECTION = (1.0, 0.08, 0.04)


def model_c_band_core(scene: Scene) -> np.ndarray:
    """3D polyline of the canonical band core from rope 1 to rope 2.

    The core leaves the finger's hook inside rope 2's window, rises into free
    space, runs along a trefoil-tied arc and comes back down to rope 2.  The
    band's boundary therefore carries a connected trefoil-pair, which is what
    makes the banded link tricolorable; a short or merely looped band joins
    the split Hopf pairs into a plain chain.
    """
    if scene.model_tag != "modelC":
        raise IllegalSiteError("canonical band core is defined for modelC scenes")
    r_hoop = scene.piece("hoop2").circle.radius
    tube = scene.piece("hoop2").circle.tube_radius
    k = model_c_constants(r_hoop, tube, scene.clearance)
    w2, g, d = k["w2"], k["g"], k["d"]
    z_gap, x_in, x_out = k["z_gap"], k["x_in"], k["x_out"]
    hook_x = 0.5 * (x_in + x_out)
    p = np.array([hook_x, -d, z_gap])  # on rope 1's hook, inside the window
    q = np.array([hook_x, 0.0, w2])  # on rope 2's top edge, right above

    scale = 0.06 * r_hoop
    center = np.array([g, 0.0, 0.45 * r_hoop])
    t = np.linspace(0.25, 2.0 * math.pi - 0.25, 41)
    blob = np.stack(
        [np.sin(t) + 2.0 * np.sin(2.0 * t), np.cos(t) - 2.0 * np.cos(2.0 * t), -np.sin(3.0 * t)],
        axis=1,
    )
    blob = center + scale * blob
    leg_in = np.array([[hook_x, -3.0 * d, 0.2 * r_hoop]])
    leg_out = np.array([[hook_x, 2.0 * d, 0.2 * r_hoop], [hook_x, 2.0 * d, w2 + 2.0 * d]])
    return np.vstack([p[None, :], leg_in, blob, leg_out, q[None, :]])


def model_c_canonical_diagram(scene: Scene, n_circle: int = 64):
    """Project the scene along the canonical direction (no retries)."""
    curves = scene_curves(scene, n_circle=n_circle)
    return project_diagram(curves, MODEL_C_PROJECTION), curves


def model_c_band_site(scene: Scene, n_circle: int = 64):
    """(diagram, site) for the canonical band sum of the two rope components.

    The over/under flag of every band crossing is read off the 3D core:
    nearer to the viewer than the crossed edge means the band passes over.
    """
    diagram, curves = model_c_canonical_diagram(scene, n_circle)
    core3 = model_c_band_core(scene)
    direction, u, v = _projection_frame(MODEL_C_PROJECTION)
    core2 = np.stack([core3 @ u, core3 @ v], axis=1)
    core_depth = core3 @ direction

    depths = {}
    for cid, pts, closed in curves:
        depths[cid] = np.asarray(pts, dtype=float) @ direction

    def at_core(loc):
        k, t = loc
        return (1.0 - t) * core_depth[k] + t * core_depth[k + 1]

    flags = []
    for kind, _key, h in collect_band_hits(diagram, core2, skip_radius=1e-7):
        if kind == "arc":
            core_loc, cid, (i, w), _pos, _cd, _ed = h
            dep = depths[cid]
            n = len(dep)
            edge_depth = (1.0 - w) * dep[i] + w * dep[(i + 1) % n]
            flags.append(bool(at_core(core_loc) < edge_depth))
        else:
            loc1, loc2, _pos, _d1, _d2 = h
            flags.append(bool(at_core(loc1) < at_core(loc2)))

    trace1 = diagram.components["rope1"]
    trace2 = diagram.components["rope2"]
    loc_i = _locate_on_component(trace1, core2[0])
    loc_j = _locate_on_component(trace2, core2[-1])
    site = BandSite(
        arc_i=_arc_at_location(diagram, trace1, loc_i),
        arc_j=_arc_at_location(diagram, trace2, loc_j),
        core=core2,
        over_flags=tuple(flags),
    )
    return diagram, site


def model_a_solution_script(r: float = 0.5, clearance: float = 1e-3) -> MoveScript:
    """Straight slide of the hoop from y=-1/2 to y=+1/2 in half-clearance steps.

    Only meaningful in the solvable regime r < 1; the generated script is
    validated move by move while it is built.
    """
    scene = build_model_a(r, clearance)
    if r >= 1.0:
        raise ValueError("solution fixture exists only for r < 1")
    target_y = 0.5
    moves = []
    current = scene
    step = 0.5 * clearance
    guard = 0
    while True:
        y = current.piece("hoop").circle.center[1]
        remaining = target_y - y
        if abs(remaining) <= 1e-12:
            break
        dy = math.copysign(min(step, abs(remaining)), remaining)
        m = RigidStep("hoop", np.zeros(3), 0.0, np.array([0.0, dy, 0.0]))
        current = apply_move(current, m, check_legal=False)
        moves.append(m)
        guard += 1
        if guard > 100000:
            raise RuntimeError("solution generator failed to converge")
    if not goal_reached(current):
        raise RuntimeError("generated script does not reach the goal pose")
    return MoveScript(scene.content_hash(), tuple(moves))
