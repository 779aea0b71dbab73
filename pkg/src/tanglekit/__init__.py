"""Disentanglement puzzle engine: scenes, moves, invariants, search."""

from .geom import Circle, Disk, Plane, Segment, Triangle
from .scenes import (
    PolyRope,
    RigidPiece,
    Scene,
    build_model_a,
    build_model_b,
    build_model_c,
    goal_reached,
    is_legal,
)
from .moves import DeltaMove, Discretization, InverseDelta, MoveScript, RigidStep, apply_move
from .invariants import (
    BandSite,
    Diagram,
    WordF2,
    band_sum,
    crossing_index,
    f2_word,
    linking_number,
    project_diagram,
    tricolor_count,
)
from .search import FuzzReport, SearchConfig, fuzz, replay, search

__version__ = "0.1.0"
