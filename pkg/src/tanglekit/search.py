"""Bounded search, deterministic fuzzing with invariant audits, and replay."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _jsonio
from .geom import Disk, Segment
from .invariants import (
    DegenerateCrossingError,
    DisksNotClearError,
    GenericityError,
    InvariantError,
    crossing_index,
    f2_word,
    linking_number,
    project_diagram,
    scene_curves,
)
from .moves import (
    DeltaMove,
    Discretization,
    InverseDelta,
    MoveError,
    MoveScript,
    RigidStep,
    _lattice_offsets,
    apply_move,
    enumerate_moves,
    validate_move,
)
from .scenes import Scene, goal_reached, is_legal

REPORT_FORMAT_VERSION = 1


class SearchError(ValueError):
    pass


class ReplayError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 8
    max_states: int = 10000
    discretization: Discretization = Discretization()
    state_key_resolution: float = 0.05

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_states <= 0 or self.state_key_resolution <= 0:
            raise SearchError("search bounds must be positive")


@dataclass
class Exhausted:
    states: int
    depth: int


def _state_key(scene: Scene, resolution: float) -> tuple:
    parts = []
    for rope in scene.ropes:
        q = np.round(rope.vertices / resolution).astype(np.int64)
        parts.append((rope.id, q.tobytes(), len(rope.vertices)))
    for piece in scene.pieces:
        if not piece.movable:
            continue
        vals = []
        if piece.segment is not None:
            vals.append(piece.segment.a)
            vals.append(piece.segment.b)
        if piece.circle is not None:
            vals.append(piece.circle.center)
            vals.append(piece.circle.normal)
        q = np.round(np.concatenate(vals) / resolution).astype(np.int64)
        parts.append((piece.id, q.tobytes()))
    return tuple(parts)


def search(scene: Scene, cfg: SearchConfig = SearchConfig()):
    """Breadth-first search over discretized moves.

    Returns a MoveScript whose replay is legal at every step and ends with
    goal_reached, or Exhausted(states, depth); exhaustion is a bound, never
    an impossibility proof.
    """
    if not is_legal(scene).ok:
        raise SearchError("search needs a legal start scene")
    start_hash = scene.content_hash()
    if goal_reached(scene):
        return MoveScript(start_hash, ())
    visited = {_state_key(scene, cfg.state_key_resolution)}
    frontier = deque([(scene, ())])
    states = 0
    depth_reached = 0
    while frontier:
        current, path = frontier.popleft()
        if len(path) >= cfg.max_depth:
            depth_reached = max(depth_reached, len(path))
            continue
        for move in enumerate_moves(current, cfg.discretization):
            try:
                nxt = apply_move(current, move, check_legal=False)
            except MoveError:
                continue
            key = _state_key(nxt, cfg.state_key_resolution)
            if key in visited:
                continue
            visited.add(key)
            states += 1
            new_path = path + (move,)
            depth_reached = max(depth_reached, len(new_path))
            if goal_reached(nxt):
                script = MoveScript(start_hash, new_path)
                final = replay(scene, script)
                if isinstance(final, ReplayFailure):
                    raise SearchError(f"search produced an unreplayable script: {final.violation}")
                return script
            if states >= cfg.max_states:
                return Exhausted(states, depth_reached)
            frontier.append((nxt, new_path))
    return Exhausted(states, depth_reached)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


@dataclass
class ReplayFailure:
    step: int
    violation: str


@dataclass
class ReplayResult:
    scene: Scene
    goal: bool


def replay(scene: Scene, script: MoveScript):
    """Validate and apply each scripted move; hash binds script to scene."""
    if script.scene_hash != scene.content_hash():
        raise ReplayError(
            f"scene hash mismatch: script wants {script.scene_hash}, scene is {scene.content_hash()}"
        )
    current = scene
    for step, move in enumerate(script.moves):
        try:
            current = apply_move(current, move)
        except (MoveError, KeyError) as exc:
            return ReplayFailure(step, str(exc))
    return ReplayResult(current, goal_reached(current))


# ---------------------------------------------------------------------------
# fuzzing
# ---------------------------------------------------------------------------


@dataclass
class AuditEntry:
    step: int
    invariant: str
    status: str  # conserved | skipped | VIOLATED
    value: str


@dataclass
class FuzzReport:
    seed: int
    steps_attempted: int
    steps_applied: int
    audits: list = field(default_factory=list)

    def violated(self) -> bool:
        return any(a.status == "VIOLATED" for a in self.audits)

    def to_dict(self) -> dict:
        return {
            "version": REPORT_FORMAT_VERSION,
            "seed": self.seed,
            "steps_attempted": self.steps_attempted,
            "steps_applied": self.steps_applied,
            "audits": [
                {"step": a.step, "invariant": a.invariant, "status": a.status, "value": a.value}
                for a in self.audits
            ],
        }

    def serialize(self) -> str:
        return _jsonio.canonical_dumps(self.to_dict()) + "\n"


class WordAudit:
    """Conservation of the two-disk crossing word (skips when undefined)."""

    name = "word"

    def __init__(self, scene: Scene, hoop_id: str = "hoop", fixed_id: str = "pole", rope_id: str = "rope"):
        self.hoop_id = hoop_id
        self.fixed_id = fixed_id
        self.rope_id = rope_id
        self.reference = self.evaluate(scene)

    def evaluate(self, scene: Scene):
        hoop = scene.piece(self.hoop_id)
        fixed = scene.piece(self.fixed_id)
        return str(
            f2_word(
                scene.rope(self.rope_id),
                Disk(hoop.circle),
                Disk(fixed.circle),
                clearance=scene.clearance,
                clear_of_a=[fixed.segment] if fixed.segment is not None else [],
            )
        )

    def check(self, scene: Scene):
        try:
            value = self.evaluate(scene)
        except (DisksNotClearError, DegenerateCrossingError) as exc:
            return "skipped", f"undefined: {exc}"
        return ("conserved" if value == self.reference else "VIOLATED"), value


class IndexAudit:
    """Conservation of the signed disk-crossing sum through the middle hoop."""

    name = "index"

    def __init__(self, scene: Scene, hoop_id: str = "hoop", rope_id: str = "rope"):
        self.hoop_id = hoop_id
        self.rope_id = rope_id
        self.reference = self.evaluate(scene)

    def evaluate(self, scene: Scene) -> int:
        return crossing_index(scene.rope(self.rope_id), Disk(scene.piece(self.hoop_id).circle)).value

    def check(self, scene: Scene):
        try:
            value = self.evaluate(scene)
        except DegenerateCrossingError as exc:
            return "skipped", f"undefined: {exc}"
        return ("conserved" if value == self.reference else "VIOLATED"), str(value)


class LinkingAudit:
    """Conservation of all pairwise linking numbers of the scene's curves."""

    name = "linking"

    def __init__(self, scene: Scene, seed: int = 0, n_circle: int = 32):
        self.seed = seed
        self.n_circle = n_circle
        self.step_counter = 0
        self.reference = self.evaluate(scene, 0)

    def evaluate(self, scene: Scene, step: int):
        curves = scene_curves(scene, n_circle=self.n_circle)
        rng = random.Random((self.seed << 20) ^ step)
        diagram = project_diagram(curves, "auto", rng=rng)
        ids = sorted(diagram.components)
        return tuple(
            (a, b, linking_number(diagram, a, b)) for i, a in enumerate(ids) for b in ids[i + 1 :]
        )

    def check(self, scene: Scene):
        self.step_counter += 1
        try:
            value = self.evaluate(scene, self.step_counter)
        except (GenericityError, InvariantError) as exc:
            return "skipped", f"undefined: {exc}"
        ok = value == self.reference
        return ("conserved" if ok else "VIOLATED"), ";".join(f"{a}-{b}:{v}" for a, b, v in value)


class LegalAudit:
    """Every reached scene satisfies the clearance rules."""

    name = "legal"

    def __init__(self, scene: Scene):
        pass

    def check(self, scene: Scene):
        rep = is_legal(scene)
        if rep.ok:
            return "conserved", "legal"
        return "VIOLATED", rep.violations[0]


class BudgetAudit:
    """Rope length budgets are never exceeded."""

    name = "budget"

    def __init__(self, scene: Scene):
        pass

    def check(self, scene: Scene):
        for rope in scene.ropes:
            if rope.length_budget is not None and rope.perimeter() > rope.length_budget:
                return "VIOLATED", f"{rope.id} perimeter {rope.perimeter():.9g}"
        return "conserved", "within budgets"


def default_audits(scene: Scene, kinds, seed: int = 0):
    """Instantiate audits by name for the given scene."""
    out = []
    for kind in kinds:
        if kind == "word":
            out.append(WordAudit(scene))
        elif kind == "index":
            out.append(IndexAudit(scene))
        elif kind == "linking":
            out.append(LinkingAudit(scene, seed=seed))
        elif kind == "legal":
            out.append(LegalAudit(scene))
        elif kind == "budget":
            out.append(BudgetAudit(scene))
        else:
            raise SearchError(f"unknown audit {kind!r}")
    return out


@dataclass(frozen=True)
class _CandidateUniverse:
    """Deterministic indexable universe of candidate moves for one scene."""

    scene: Scene
    disc: Discretization

    def layout(self):
        offsets = _lattice_offsets(self.disc.apex_pitch, self.disc.apex_ball)
        slots = []
        for rope in self.scene.ropes:
            slots.append(("delta", rope.id, rope.n_edges() * len(offsets)))
            n = len(rope.vertices)
            n_inv = n if rope.closed else max(0, n - 2)
            slots.append(("inverse", rope.id, n_inv))
        movable = [p.id for p in self.scene.pieces if p.movable]
        slots.append(("rigid", None, len(movable) * 18))
        return offsets, slots, movable

    def draw(self, rng: random.Random):
        offsets, slots, movable = self.layout()
        total = sum(c for _, _, c in slots)
        if total == 0:
            return None
        k = rng.randrange(total)
        delta = self.scene.clearance
        for kind, rope_id, count in slots:
            if k >= count:
                k -= count
                continue
            if kind == "delta":
                rope = self.scene.rope(rope_id)
                edge = k // len(offsets)
                off = offsets[k % len(offsets)]
                a, b = rope.edge(edge)
                return DeltaMove(rope_id, edge, 0.5 * (a + b) + off)
            if kind == "inverse":
                rope = self.scene.rope(rope_id)
                idx = k if rope.closed else k + 1
                return InverseDelta(rope_id, idx)
            piece_id = movable[k // 18]
            j = k % 18
            axes = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
            if j < 12:
                mag = 0.5 * delta if j < 6 else 0.25 * delta
                ax = axes[(j % 6) // 2]
                sgn = 1.0 if j % 2 == 0 else -1.0
                return RigidStep(piece_id, np.zeros(3), 0.0, sgn * mag * ax)
            j -= 12
            piece = self.scene.piece(piece_id)
            r = piece.circumradius()
            ang = 0.45 * delta / max(r, delta)
            ax = axes[j // 2]
            sgn = 1.0 if j % 2 == 0 else -1.0
            return RigidStep(piece_id, ax, sgn * ang, np.zeros(3))
        return None


def fuzz(
    scene: Scene,
    seed: int,
    steps: int,
    audits=(),
    disc: Discretization = Discretization(apex_pitch=0.05, apex_ball=0.1),
    max_proposals: int = 400,
) -> FuzzReport:
    """Apply `steps` random validated moves and audit invariants after each.

    Moves are drawn uniformly over the validated candidates by seeded
    rejection sampling from the deterministic candidate universe (Python's
    Mersenne Twister via random.Random(seed)); identical inputs give
    byte-identical reports.
    """
    if not is_legal(scene).ok:
        raise SearchError("fuzz needs a legal start scene")
    rng = random.Random(seed)
    report = FuzzReport(seed=seed, steps_attempted=0, steps_applied=0)
    current = scene
    for step in range(1, steps + 1):
        report.steps_attempted += 1
        universe = _CandidateUniverse(current, disc)
        applied = None
        for _ in range(max_proposals):
            move = universe.draw(rng)
            if move is None:
                break
            try:
                if not validate_move(current, move).ok:
                    continue
            except MoveError:
                continue
            applied = move
            break
        if applied is None:
            continue
        current = apply_move(current, applied, check_legal=False)
        report.steps_applied += 1
        for audit in audits:
            status, value = audit.check(current)
            report.audits.append(AuditEntry(step, audit.name, status, value))
    return report
