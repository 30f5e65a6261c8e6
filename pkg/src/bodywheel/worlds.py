"""Bundled training worlds, generated deterministically in code."""

from __future__ import annotations

from .errors import ConfigError
from .kinematics import Goal, Pose, World, load_world


def corridor() -> World:
    """S-shaped corridor, 3 m wide: east 8 m, north 6 m, east 8 m.

    The prescribed track runs along the centerline; the goal disc sits at
    the far end. The two turns make timing errors visible in E_diff while
    leaving enough clearance that a moderately sloppy driver never touches
    a wall.
    """
    path = [(0.0, 0.0), (8.0, 0.0), (8.0, 6.0), (16.0, 6.0)]
    walls = [
        # left boundary (north of leg 1, west of leg 2, north of leg 3)
        (-1.5, 1.5, 6.5, 1.5),
        (6.5, 1.5, 6.5, 7.5),
        (6.5, 7.5, 17.5, 7.5),
        # right boundary
        (-1.5, -1.5, 9.5, -1.5),
        (9.5, -1.5, 9.5, 4.5),
        (9.5, 4.5, 17.5, 4.5),
        # end caps
        (-1.5, -1.5, -1.5, 1.5),
        (17.5, 4.5, 17.5, 7.5),
    ]
    return World(id="corridor", walls=walls, path=path,
                 start=Pose(0.0, 0.0, 0.0), goal=Goal(16.0, 6.0, 0.8))


def doorway() -> World:
    """Two rooms joined by a 1.2 m doorway; straight track through it."""
    walls = [
        (-1.0, -4.0, 11.0, -4.0),
        (11.0, -4.0, 11.0, 4.0),
        (11.0, 4.0, -1.0, 4.0),
        (-1.0, 4.0, -1.0, -4.0),
        (5.0, -4.0, 5.0, -0.6),
        (5.0, 0.6, 5.0, 4.0),
    ]
    return World(id="doorway", walls=walls, path=[(0.0, 0.0), (10.0, 0.0)],
                 start=Pose(0.0, 0.0, 0.0), goal=Goal(10.0, 0.0, 0.8))


def open_room() -> World:
    """Unwalled practice area with a straight 10 m track."""
    return World(id="open", walls=[], path=[(0.0, 0.0), (10.0, 0.0)],
                 start=Pose(0.0, 0.0, 0.0), goal=Goal(10.0, 0.0, 0.8))


BUILTIN_WORLDS = {
    "corridor": corridor,
    "doorway": doorway,
    "open": open_room,
}


def resolve_world(ref) -> World:
    """Resolve ``builtin:<name>`` or a ``.bworld`` path into a World."""
    ref = str(ref)
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTIN_WORLDS:
            raise ConfigError(f"unknown builtin world {name!r} "
                              f"(have: {sorted(BUILTIN_WORLDS)})")
        return BUILTIN_WORLDS[name]()
    return load_world(ref)
