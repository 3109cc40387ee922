"""Deterministic 2D rectangle world: renders bundles with exact ground truth,
and corrupts them with scripted consistency artifacts.

Objects are axis-aligned rectangles on a uniform background, integrated with
per-frame Euler steps and equal-mass elastic collision response. Positions are
rounded to integer pixel rectangles at render time, and the ground-truth flow
stores each object's integer displacement over both its old and new footprint,
so backward warping reconstructs the next frame exactly on clean scenes.
Later objects in the list are drawn on top; an object fully covered by a later
one loses its track slot for that frame, like a tracker would.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .interchange import (
    Bundle,
    ParseError,
    Track,
    TrackSet,
    VideoMeta,
    canonical_json,
    write_bundle,
    _atomic_write_bytes,
)

EVENTS_FILENAME = "events.json"
WORLD_FILENAME = "world.json"

# displacement per frame above which injected ground-truth flow is treated as
# underivable (a real flow estimator would fail on such a jump)
DERIVABLE_MAX_PX = 6.0


class ScriptError(Exception):
    """The scene script is inconsistent (object out of bounds, bad action...)."""


class InjectionError(Exception):
    """The injection cannot be applied to this bundle."""


@dataclass
class Action:
    kind: str  # push | rest | exit
    frame: int
    dv: tuple[float, float] | None = None
    edge: str | None = None
    speed: float | None = None


@dataclass
class ObjectSpec:
    name: str
    size: tuple[int, int]  # (w, h), pixels
    gray: int
    position: tuple[float, float]  # centre at frame 1
    velocity: tuple[float, float] = (0.0, 0.0)
    class_label: str = "box"
    actions: list[Action] = field(default_factory=list)
    allow_exit: bool = False
    solid: bool = True  # non-solid objects pass over others (occluders)


@dataclass
class SceneScript:
    video_id: str
    height: int = 64
    width: int = 64
    frame_count: int = 24
    background: int = 100
    frame_rate: Fraction = Fraction(12)
    seed: int = 0
    objects: list[ObjectSpec] = field(default_factory=list)


@dataclass
class WorldObject:
    """Post-simulation truth for one object: integer, unclipped rectangles."""

    object_id: int
    name: str
    class_label: str
    gray: int
    size: tuple[int, int]
    rects: list[tuple[int, int, int, int] | None]


@dataclass
class World:
    background: int
    objects: list[WorldObject]


@dataclass
class Injection:
    kind: str
    object_id: int | None = None
    frame: int | None = None       # 1-indexed
    frame_b: int | None = None     # second frame for frame_swap
    frames: tuple[int, int] | None = None  # inclusive range for vanish_midway
    offset: tuple[float, float] | None = None
    amplitude: float | None = None
    velocity: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for k in ("object_id", "frame", "frame_b", "frames", "offset", "amplitude", "velocity"):
            v = getattr(self, k)
            if v is not None:
                d[k] = list(v) if isinstance(v, tuple) else v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Injection":
        kw = dict(d)
        for k in ("frames", "offset", "velocity"):
            if kw.get(k) is not None:
                kw[k] = tuple(kw[k])
        return cls(**kw)


INJECTION_KINDS = (
    "vanish_midway", "teleport", "frame_swap", "brightness_flicker",
    "constant_color_filter", "frozen_reaction", "spontaneous_motion",
)


@dataclass
class SimBundle:
    tracks: TrackSet
    frames: np.ndarray
    flow: np.ndarray
    events: list[dict]
    world: World
    injections: list[Injection] = field(default_factory=list)

    def as_bundle(self) -> Bundle:
        return Bundle(tracks=self.tracks, frames=self.frames, flow=self.flow)


# ---------------------------------------------------------------------------
# geometry on integer rects

def _rect_from_center(cx: float, cy: float, size: tuple[int, int]) -> tuple[int, int, int, int]:
    w, h = size
    x0 = math.floor(cx - w / 2.0 + 0.5)
    y0 = math.floor(cy - h / 2.0 + 0.5)
    return (x0, y0, x0 + w, y0 + h)


def _clip_rect(r, width, height):
    x0, y0, x1, y1 = r
    x0c, y0c = max(0, x0), max(0, y0)
    x1c, y1c = min(width, x1), min(height, y1)
    if x0c >= x1c or y0c >= y1c:
        return None
    return (x0c, y0c, x1c, y1c)


def _contains(outer, inner) -> bool:
    return (outer[0] <= inner[0] and outer[1] <= inner[1]
            and outer[2] >= inner[2] and outer[3] >= inner[3])


# ---------------------------------------------------------------------------
# simulation

def simulate(script: SceneScript) -> SimBundle:
    _validate_script(script)
    n = len(script.objects)
    t_count = script.frame_count
    pos = [list(o.position) for o in script.objects]
    vel = [list(o.velocity) for o in script.objects]
    allow_exit = [o.allow_exit for o in script.objects]
    rects: list[list] = [[None] * t_count for _ in range(n)]
    events: list[dict] = []

    def record_rects(t: int):
        for i, obj in enumerate(script.objects):
            r = _rect_from_center(pos[i][0], pos[i][1], obj.size)
            clipped = _clip_rect(r, script.width, script.height)
            if clipped is None:
                if not allow_exit[i]:
                    raise ScriptError(f"object {obj.name} left the world at frame {t} without a scripted exit")
                rects[i][t - 1] = None
                if t >= 2 and rects[i][t - 2] is not None:
                    events.append({"kind": "exit", "frame": t, "objects": [i + 1]})
            else:
                if clipped != r and not allow_exit[i]:
                    raise ScriptError(f"object {obj.name} crossed the boundary at frame {t} without a scripted exit")
                rects[i][t - 1] = r

    record_rects(1)
    for t in range(2, t_count + 1):
        for i, obj in enumerate(script.objects):
            for act in obj.actions:
                if act.frame != t:
                    continue
                if act.kind == "push":
                    vel[i][0] += act.dv[0]
                    vel[i][1] += act.dv[1]
                    events.append({"kind": "push", "frame": t, "objects": [i + 1],
                                   "dv": list(act.dv)})
                elif act.kind == "rest":
                    vel[i] = [0.0, 0.0]
                elif act.kind == "exit":
                    vel[i] = list(_edge_velocity(act.edge, act.speed))
                    allow_exit[i] = True
        for i in range(n):
            pos[i][0] += vel[i][0]
            pos[i][1] += vel[i][1]
        _resolve_collisions(script, pos, vel, t, events)
        record_rects(t)

    world = World(
        background=script.background,
        objects=[
            WorldObject(object_id=i + 1, name=o.name, class_label=o.class_label,
                        gray=o.gray, size=o.size, rects=rects[i])
            for i, o in enumerate(script.objects)
        ],
    )
    meta = VideoMeta(video_id=script.video_id, frame_count=t_count,
                     height=script.height, width=script.width, frame_rate=script.frame_rate)
    frames = render_frames(world, meta)
    flow, _ = render_flow(world, meta)
    tracks = build_tracks(world, meta)
    return SimBundle(tracks=tracks, frames=frames, flow=flow, events=events, world=world)


def _edge_velocity(edge: str, speed: float) -> tuple[float, float]:
    if edge == "left":
        return (-speed, 0.0)
    if edge == "right":
        return (speed, 0.0)
    if edge == "top":
        return (0.0, -speed)
    if edge == "bottom":
        return (0.0, speed)
    raise ScriptError(f"unknown edge {edge!r}")


def _validate_script(script: SceneScript):
    if script.frame_count < 2:
        raise ScriptError("frame_count must be >= 2")
    if not (0 <= script.background <= 255):
        raise ScriptError("background must be a gray level in [0, 255]")
    names = [o.name for o in script.objects]
    if len(names) != len(set(names)):
        raise ScriptError("duplicate object names")
    for o in script.objects:
        if o.size[0] < 1 or o.size[1] < 1:
            raise ScriptError(f"object {o.name}: degenerate size {o.size}")
        if not (0 <= o.gray <= 255):
            raise ScriptError(f"object {o.name}: gray {o.gray} outside [0, 255]")
        r = _rect_from_center(o.position[0], o.position[1], o.size)
        if _clip_rect(r, script.width, script.height) != r:
            raise ScriptError(f"object {o.name} does not fit inside the world at frame 1")
        for act in o.actions:
            if act.kind not in ("push", "rest", "exit"):
                raise ScriptError(f"object {o.name}: unknown action {act.kind!r}")
            if not (2 <= act.frame <= script.frame_count):
                raise ScriptError(f"object {o.name}: action frame {act.frame} out of range")
            if act.kind == "push" and act.dv is None:
                raise ScriptError(f"object {o.name}: push without dv")
            if act.kind == "exit" and (act.edge is None or act.speed is None):
                raise ScriptError(f"object {o.name}: exit needs edge and speed")


def _resolve_collisions(script: SceneScript, pos, vel, t: int, events: list[dict]):
    """Equal-mass elastic response along the axis of least penetration.
    Single pass in pair order; desk-scale scenes have at most one contact per frame."""
    n = len(script.objects)
    for i in range(n):
        for j in range(i + 1, n):
            if not (script.objects[i].solid and script.objects[j].solid):
                continue
            wi, hi = script.objects[i].size
            wj, hj = script.objects[j].size
            px = min(pos[i][0] + wi / 2, pos[j][0] + wj / 2) - max(pos[i][0] - wi / 2, pos[j][0] - wj / 2)
            py = min(pos[i][1] + hi / 2, pos[j][1] + hj / 2) - max(pos[i][1] - hi / 2, pos[j][1] - hj / 2)
            if px < 0 or py < 0:
                continue
            axis = 0 if px <= py else 1
            direction = 1.0 if pos[j][axis] >= pos[i][axis] else -1.0
            closing = (vel[i][axis] - vel[j][axis]) * direction
            if closing <= 0:
                continue
            vel[i][axis], vel[j][axis] = vel[j][axis], vel[i][axis]
            pen = px if axis == 0 else py
            pos[i][axis] -= direction * pen / 2.0
            pos[j][axis] += direction * pen / 2.0
            events.append({"kind": "collision", "frame": t,
                           "objects": [i + 1, j + 1]})


# ---------------------------------------------------------------------------
# rendering

def render_frames(world: World, meta: VideoMeta) -> np.ndarray:
    frames = np.full((meta.frame_count, meta.height, meta.width), world.background, dtype=np.uint8)
    for t in range(meta.frame_count):
        for obj in world.objects:
            r = obj.rects[t]
            if r is None:
                continue
            c = _clip_rect(r, meta.width, meta.height)
            if c is None:
                continue
            frames[t, c[1]:c[3], c[0]:c[2]] = obj.gray
    return frames


def render_flow(world: World, meta: VideoMeta,
                derivable_max: float | None = None) -> tuple[np.ndarray, list[int]]:
    """Ground-truth flow at destination pixels. Each object's integer
    displacement is painted over both its old and new footprint, so vacated
    pixels point back to pre-entry background and the warp stays exact.
    Transitions where any object jumps farther than ``derivable_max`` are
    zeroed and reported (1-indexed)."""
    flow = np.zeros((meta.frame_count - 1, meta.height, meta.width, 2), dtype=np.float32)
    underivable = []
    for t in range(meta.frame_count - 1):
        bad = False
        for obj in world.objects:
            r0, r1 = obj.rects[t], obj.rects[t + 1]
            if r0 is None or r1 is None:
                continue
            dx = r1[0] - r0[0]
            dy = r1[1] - r0[1]
            if derivable_max is not None and math.hypot(dx, dy) > derivable_max:
                bad = True
            for r in (r0, r1):
                c = _clip_rect(r, meta.width, meta.height)
                if c is None:
                    continue
                flow[t, c[1]:c[3], c[0]:c[2], 0] = dx
                flow[t, c[1]:c[3], c[0]:c[2], 1] = dy
        if bad:
            flow[t] = 0.0
            underivable.append(t + 1)
    return flow, underivable


def build_tracks(world: World, meta: VideoMeta) -> TrackSet:
    tracks = []
    for idx, obj in enumerate(world.objects):
        boxes = []
        for t in range(meta.frame_count):
            r = obj.rects[t]
            c = _clip_rect(r, meta.width, meta.height) if r is not None else None
            if c is None:
                boxes.append(None)
                continue
            covered = any(
                later.rects[t] is not None and _contains(later.rects[t], c)
                for later in world.objects[idx + 1:]
            )
            boxes.append(None if covered else tuple(float(v) for v in c))
        tracks.append(Track(object_id=obj.object_id, class_label=obj.class_label, boxes=boxes))
    ts = TrackSet(meta=meta, tracks=tracks)
    ts.validate()
    return ts


# ---------------------------------------------------------------------------
# injections

def inject(bundle: SimBundle, injection: Injection) -> SimBundle:
    """Apply one corruption, returning a new bundle. Injections whose frame
    ranges overlap an already-applied one are rejected."""
    if injection.kind not in INJECTION_KINDS:
        raise InjectionError(f"unknown injection kind {injection.kind!r}")
    new_frames_set = _affected_frames(bundle, injection)
    for prior in bundle.injections:
        if new_frames_set & _affected_frames(bundle, prior):
            raise InjectionError(
                f"{injection.kind} overlaps frames already touched by {prior.kind}"
            )
    out = copy.deepcopy(bundle)
    handler = {
        "vanish_midway": _inject_vanish,
        "teleport": _inject_teleport,
        "frame_swap": _inject_frame_swap,
        "brightness_flicker": _inject_brightness,
        "constant_color_filter": _inject_color_filter,
        "frozen_reaction": _inject_frozen_reaction,
        "spontaneous_motion": _inject_spontaneous,
    }[injection.kind]
    handler(out, injection)
    out.injections.append(injection)
    return out


def _affected_frames(bundle: SimBundle, injection: Injection) -> frozenset[int]:
    t_count = bundle.tracks.meta.frame_count
    k = injection.kind
    if k == "vanish_midway":
        a, b = injection.frames
        return frozenset(range(a, b + 1))
    if k == "teleport":
        return frozenset([injection.frame])
    if k == "frame_swap":
        return frozenset([injection.frame, injection.frame_b])
    if k == "brightness_flicker":
        return frozenset(range(2, t_count + 1, 2))
    if k == "constant_color_filter":
        return frozenset(range(1, t_count + 1))
    if k in ("frozen_reaction", "spontaneous_motion"):
        start = injection.frame if injection.frame is not None else _first_collision_frame(bundle)
        if start is None:
            return frozenset()
        return frozenset(range(start, t_count + 1))
    raise InjectionError(f"unknown injection kind {k!r}")


def _world_object(bundle: SimBundle, object_id: int) -> WorldObject:
    for obj in bundle.world.objects:
        if obj.object_id == object_id:
            return obj
    raise InjectionError(f"no object with id {object_id}")


def _rerender_frames(bundle: SimBundle, frames_1idx=None):
    meta = bundle.tracks.meta
    fresh = render_frames(bundle.world, meta)
    if frames_1idx is None:
        bundle.frames = fresh
    else:
        for t in frames_1idx:
            bundle.frames[t - 1] = fresh[t - 1]


def _rebuild_tracks(bundle: SimBundle):
    bundle.tracks = build_tracks(bundle.world, bundle.tracks.meta)


def _inject_vanish(bundle: SimBundle, inj: Injection):
    if inj.object_id is None or inj.frames is None:
        raise InjectionError("vanish_midway needs object_id and frames")
    a, b = inj.frames
    t_count = bundle.tracks.meta.frame_count
    if not (1 <= a <= b <= t_count):
        raise InjectionError(f"vanish range ({a}, {b}) outside video")
    obj = _world_object(bundle, inj.object_id)
    if all(obj.rects[t - 1] is None for t in range(a, b + 1)):
        raise InjectionError(f"object {inj.object_id} is never visible in frames {a}..{b}")
    for t in range(a, b + 1):
        obj.rects[t - 1] = None
    _rerender_frames(bundle, range(a, b + 1))
    _rebuild_tracks(bundle)
    # flow is left stale: the corruption is a pixel-level blanking


def _inject_teleport(bundle: SimBundle, inj: Injection):
    if inj.object_id is None or inj.frame is None or inj.offset is None:
        raise InjectionError("teleport needs object_id, frame and offset")
    meta = bundle.tracks.meta
    if not (1 <= inj.frame <= meta.frame_count):
        raise InjectionError(f"frame {inj.frame} outside video")
    obj = _world_object(bundle, inj.object_id)
    r = obj.rects[inj.frame - 1]
    if r is None:
        raise InjectionError(f"object {inj.object_id} not visible at frame {inj.frame}")
    dx, dy = int(round(inj.offset[0])), int(round(inj.offset[1]))
    moved = (r[0] + dx, r[1] + dy, r[2] + dx, r[3] + dy)
    if _clip_rect(moved, meta.width, meta.height) != moved:
        raise InjectionError("teleport target leaves the world")
    obj.rects[inj.frame - 1] = moved
    _rerender_frames(bundle, [inj.frame])
    _rebuild_tracks(bundle)


def _inject_frame_swap(bundle: SimBundle, inj: Injection):
    if inj.frame is None or inj.frame_b is None:
        raise InjectionError("frame_swap needs frame and frame_b")
    a, b = sorted((inj.frame, inj.frame_b))
    t_count = bundle.tracks.meta.frame_count
    if not (1 <= a <= t_count and 1 <= b <= t_count):
        raise InjectionError("swap frames outside video")
    if b - a < 2:
        raise InjectionError("frame_swap requires non-adjacent frames")
    bundle.frames[[a - 1, b - 1]] = bundle.frames[[b - 1, a - 1]]
    for obj in bundle.world.objects:
        obj.rects[a - 1], obj.rects[b - 1] = obj.rects[b - 1], obj.rects[a - 1]
    _rebuild_tracks(bundle)
    flow, underivable = render_flow(bundle.world, bundle.tracks.meta, derivable_max=DERIVABLE_MAX_PX)
    bundle.flow = flow
    for t in underivable:
        bundle.events.append({"kind": "cut", "frame": t, "objects": []})


def _inject_brightness(bundle: SimBundle, inj: Injection):
    if inj.amplitude is None:
        raise InjectionError("brightness_flicker needs amplitude")
    shifted = bundle.frames[1::2].astype(np.int16) + int(round(inj.amplitude))
    bundle.frames[1::2] = np.clip(shifted, 0, 255).astype(np.uint8)


def _inject_color_filter(bundle: SimBundle, inj: Injection):
    if inj.amplitude is None:
        raise InjectionError("constant_color_filter needs amplitude")
    shifted = bundle.frames.astype(np.int16) + int(round(inj.amplitude))
    bundle.frames = np.clip(shifted, 0, 255).astype(np.uint8)


def _first_collision_frame(bundle: SimBundle) -> int | None:
    frames = [e["frame"] for e in bundle.events if e["kind"] == "collision"]
    return min(frames) if frames else None


def _inject_frozen_reaction(bundle: SimBundle, inj: Injection):
    collisions = [e for e in bundle.events if e["kind"] == "collision"]
    if not collisions:
        raise InjectionError("no collision in this bundle to freeze")
    ev = collisions[0]
    t_col = ev["frame"]
    struck = inj.object_id
    if struck is None:
        # the struck member is the one at rest just before impact
        for oid in ev["objects"]:
            obj = _world_object(bundle, oid)
            r_pre = obj.rects[t_col - 2] if t_col >= 2 else None
            r_pre2 = obj.rects[t_col - 3] if t_col >= 3 else r_pre
            if r_pre is not None and r_pre2 is not None and r_pre == r_pre2:
                struck = oid
                break
        if struck is None:
            raise InjectionError("no resting partner in the first collision")
    obj = _world_object(bundle, struck)
    # hold the pre-impact rect so the struck object shows no reaction at all,
    # not even the contact-resolution nudge
    hold = obj.rects[t_col - 2]
    if hold is None:
        raise InjectionError(f"struck object {struck} invisible before collision frame {t_col}")
    for t in range(t_col, bundle.tracks.meta.frame_count + 1):
        obj.rects[t - 1] = hold
    _rerender_frames(bundle)
    bundle.flow, _ = render_flow(bundle.world, bundle.tracks.meta)
    _rebuild_tracks(bundle)


def _inject_spontaneous(bundle: SimBundle, inj: Injection):
    if inj.object_id is None or inj.frame is None or inj.velocity is None:
        raise InjectionError("spontaneous_motion needs object_id, frame and velocity")
    meta = bundle.tracks.meta
    obj = _world_object(bundle, inj.object_id)
    t0 = inj.frame
    if not (2 <= t0 <= meta.frame_count - 1):
        raise InjectionError(f"frame {t0} leaves no room for motion")
    base = obj.rects[t0 - 1]
    if base is None:
        raise InjectionError(f"object {inj.object_id} not visible at frame {t0}")
    for t in range(max(1, t0 - 3), t0 + 1):
        if obj.rects[t - 1] != base:
            raise InjectionError(f"object {inj.object_id} is not at rest before frame {t0}")
    vx, vy = inj.velocity
    for t in range(t0 + 1, meta.frame_count + 1):
        k = t - t0
        moved = (base[0] + math.floor(vx * k + 0.5), base[1] + math.floor(vy * k + 0.5),
                 base[2] + math.floor(vx * k + 0.5), base[3] + math.floor(vy * k + 0.5))
        if _clip_rect(moved, meta.width, meta.height) != moved:
            raise InjectionError("spontaneous motion would leave the world")
        obj.rects[t - 1] = moved
    _rerender_frames(bundle)
    bundle.flow, _ = render_flow(bundle.world, bundle.tracks.meta)
    _rebuild_tracks(bundle)


# ---------------------------------------------------------------------------
# bundle directory round-trip (adds events.json and world.json to the interchange files)

def write_sim_bundle(bundle: SimBundle, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    write_bundle(bundle.as_bundle(), directory)
    _atomic_write_bytes(os.path.join(directory, EVENTS_FILENAME),
                        canonical_json({"events": bundle.events,
                                        "injections": [i.to_dict() for i in bundle.injections]}).encode())
    world_doc = {
        "background": bundle.world.background,
        "objects": [
            {
                "object_id": o.object_id,
                "name": o.name,
                "class_label": o.class_label,
                "gray": o.gray,
                "size": list(o.size),
                "rects": [list(r) if r is not None else None for r in o.rects],
            }
            for o in bundle.world.objects
        ],
    }
    _atomic_write_bytes(os.path.join(directory, WORLD_FILENAME),
                        canonical_json(world_doc).encode())


def read_sim_bundle(directory) -> SimBundle:
    from .interchange import read_bundle

    base = read_bundle(directory)
    if base.frames is None:
        raise InjectionError(f"{directory} has no frames; not a simulator bundle")
    world_path = os.path.join(directory, WORLD_FILENAME)
    if not os.path.exists(world_path):
        raise InjectionError(f"{directory} has no {WORLD_FILENAME}; injections need simulator truth")
    with open(world_path, "r", encoding="utf-8") as fh:
        try:
            wd = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(world_path, e.pos, e.msg) from e
    world = World(
        background=wd["background"],
        objects=[
            WorldObject(
                object_id=o["object_id"], name=o["name"], class_label=o["class_label"],
                gray=o["gray"], size=tuple(o["size"]),
                rects=[tuple(r) if r is not None else None for r in o["rects"]],
            )
            for o in wd["objects"]
        ],
    )
    events = []
    injections = []
    events_path = os.path.join(directory, EVENTS_FILENAME)
    if os.path.exists(events_path):
        with open(events_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        events = doc.get("events", [])
        injections = [Injection.from_dict(d) for d in doc.get("injections", [])]
    return SimBundle(tracks=base.tracks, frames=base.frames, flow=base.flow,
                     events=events, world=world, injections=injections)


# ---------------------------------------------------------------------------
# canned scenes

def standard_scene(video_id: str = "standard") -> SceneScript:
    """Three lanes: two same-direction movers (the trailing one slower, so
    their ordering never flips) and one resting box. Nothing ever touches
    anything, so a clean run scores perfectly on every submetric."""
    return SceneScript(
        video_id=video_id,
        objects=[
            ObjectSpec(name="moverA", size=(10, 10), gray=180, position=(19.0, 12.0),
                       velocity=(1.2, 0.0)),
            ObjectSpec(name="moverB", size=(6, 6), gray=220, position=(8.0, 30.0),
                       velocity=(1.1, 0.0)),
            ObjectSpec(name="rester", size=(9, 9), gray=60, position=(50.0, 54.0)),
        ],
    )


def random_lane_scene(seed: int, video_id: str | None = None) -> SceneScript:
    """Jittered variant of the standard scene; the lane layout (and the leader
    staying strictly faster) keeps the clean score perfect for any seed."""
    rng = np.random.default_rng(seed)
    size_a = int(rng.integers(8, 12))
    size_b = 6
    size_c = int(rng.integers(7, 9))
    # both speeds stay above 1 px/frame so the rounded rects never stall for a
    # frame (a stall would flip the moving bit); the leader stays strictly
    # faster, so the movers' ordering never flips
    vel_a = float(rng.uniform(1.25, 1.40))
    vel_b = vel_a - float(rng.uniform(0.05, 0.15))
    return SceneScript(
        video_id=video_id or f"lane-{seed}",
        seed=seed,
        objects=[
            ObjectSpec(name="moverA", size=(size_a, size_a), gray=int(rng.integers(150, 200)),
                       position=(float(rng.uniform(16, 22)), 12.0),
                       velocity=(vel_a, 0.0)),
            ObjectSpec(name="moverB", size=(size_b, size_b), gray=int(rng.integers(200, 235)),
                       position=(float(rng.uniform(5, 9)), 30.0),
                       velocity=(vel_b, 0.0)),
            ObjectSpec(name="rester", size=(size_c, size_c), gray=int(rng.integers(40, 80)),
                       position=(float(rng.uniform(56, 58)), 54.0)),
        ],
    )


def standard_injections(bundle: SimBundle) -> list[Injection]:
    """The stock corruption battery for lane scenes (and anything shaped like
    them): one injection per kind, parameters derived from the bundle."""
    t_count = bundle.tracks.meta.frame_count
    return [
        Injection(kind="vanish_midway", object_id=1, frames=(t_count // 2 + 1, t_count)),
        Injection(kind="brightness_flicker", amplitude=20),
        Injection(kind="frame_swap", frame=t_count // 3, frame_b=2 * t_count // 3),
        Injection(kind="spontaneous_motion", object_id=3, frame=t_count // 2 - 2,
                  velocity=(-1.2, 0.0)),
        Injection(kind="teleport", object_id=2, frame=t_count // 2, offset=(0.0, 18.0)),
        Injection(kind="constant_color_filter", amplitude=10),
        Injection(kind="frozen_reaction"),
    ]


# ---------------------------------------------------------------------------
# script files (JSON)

def script_to_dict(script: SceneScript) -> dict:
    return {
        "video_id": script.video_id,
        "height": script.height,
        "width": script.width,
        "frame_count": script.frame_count,
        "background": script.background,
        "frame_rate": str(script.frame_rate),
        "seed": script.seed,
        "objects": [
            {
                "name": o.name,
                "class_label": o.class_label,
                "size": list(o.size),
                "gray": o.gray,
                "position": list(o.position),
                "velocity": list(o.velocity),
                "allow_exit": o.allow_exit,
                "solid": o.solid,
                "actions": [
                    {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in (("kind", a.kind), ("frame", a.frame), ("dv", a.dv),
                                  ("edge", a.edge), ("speed", a.speed))
                     if v is not None}
                    for a in o.actions
                ],
            }
            for o in script.objects
        ],
    }


def script_from_dict(d: dict) -> SceneScript:
    try:
        objects = []
        for od in d.get("objects", []):
            actions = []
            for ad in od.get("actions", []):
                actions.append(Action(
                    kind=ad["kind"], frame=ad["frame"],
                    dv=tuple(ad["dv"]) if "dv" in ad else None,
                    edge=ad.get("edge"), speed=ad.get("speed"),
                ))
            objects.append(ObjectSpec(
                name=od["name"], size=tuple(od["size"]), gray=od["gray"],
                position=tuple(od["position"]), velocity=tuple(od.get("velocity", (0.0, 0.0))),
                class_label=od.get("class_label", "box"),
                actions=actions, allow_exit=od.get("allow_exit", False),
                solid=od.get("solid", True),
            ))
        return SceneScript(
            video_id=d["video_id"],
            height=d.get("height", 64), width=d.get("width", 64),
            frame_count=d.get("frame_count", 24),
            background=d.get("background", 100),
            frame_rate=Fraction(d.get("frame_rate", "12")),
            seed=d.get("seed", 0),
            objects=objects,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScriptError(f"bad scene script: {e}") from e


def load_script(path) -> SceneScript:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.pos, e.msg) from e
    return script_from_dict(d)


def save_script(script: SceneScript, path) -> None:
    _atomic_write_bytes(path, canonical_json(script_to_dict(script)).encode())
