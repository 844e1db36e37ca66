"""Game-state snapshot schema, wire encoding, and derived features.

Snapshots travel as newline-delimited JSON (one message per line, UTF-8).
The dataclasses here are plain carriers: producers are responsible for
normalized angles and finite numbers, and ``encode_state`` re-checks both
at the boundary so an unnormalized state never reaches the wire.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import EncodingError, ProtocolError, SchemaError

TAU = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [-π, π].

    Both endpoints are preserved (π stays π, -π stays -π); comparisons at
    the branch point should use a small tolerance since -π and π denote the
    same heading.
    """
    if not (isinstance(theta, (int, float)) and math.isfinite(theta)):
        raise ValueError(f"angle must be finite, got {theta!r}")
    return math.remainder(theta, TAU)


# ---------------------------------------------------------------------------
# schema types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True, slots=True)
class Rotation:
    pitch: float = 0.0
    yaw: float = 0.0
    roll: float = 0.0


@dataclass(frozen=True, slots=True)
class Physics:
    location: Vec3 = field(default_factory=Vec3)
    rotation: Rotation = field(default_factory=Rotation)
    velocity: Vec3 = field(default_factory=Vec3)
    angular_velocity: Vec3 = field(default_factory=Vec3)


@dataclass(frozen=True, slots=True)
class BallState:
    location: Vec3 = field(default_factory=Vec3)
    rotation: Rotation = field(default_factory=Rotation)
    velocity: Vec3 = field(default_factory=Vec3)
    angular_velocity: Vec3 = field(default_factory=Vec3)


@dataclass(frozen=True, slots=True)
class CarState:
    physics: Physics
    team_id: int
    demolished: bool = False
    ground_contact: bool = True
    jumped: bool = False
    boost: float = 0.0
    is_bot: bool = False


@dataclass(frozen=True, slots=True)
class TeamInfo:
    team_id: int
    score: int = 0


@dataclass(frozen=True, slots=True)
class GameInfo:
    seconds_elapsed: float = 0.0


@dataclass(frozen=True, slots=True)
class BoostPadState:
    pad_id: int
    active: bool = True
    respawn_remaining: float = 0.0


class UiState(enum.Enum):
    IN_GAME = "in_game"
    PAUSED = "paused"
    OTHER = "other"


@dataclass(frozen=True, slots=True)
class GameState:
    ball: BallState
    cars: tuple[CarState, ...]
    teams: tuple[TeamInfo, ...]
    info: GameInfo
    pads: tuple[BoostPadState, ...] = ()
    ui: UiState = UiState.IN_GAME
    tick: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.cars, list):
            object.__setattr__(self, "cars", tuple(self.cars))
        if isinstance(self.teams, list):
            object.__setattr__(self, "teams", tuple(self.teams))
        if isinstance(self.pads, list):
            object.__setattr__(self, "pads", tuple(self.pads))
        if len(self.teams) != 2 or {t.team_id for t in self.teams} != {0, 1}:
            raise ValueError("a match has exactly two teams, ids 0 and 1")
        for team in self.teams:
            if not isinstance(team.score, int) or team.score < 0:
                raise ValueError(f"score must be a non-negative int, got {team.score!r}")
        for car in self.cars:
            if car.team_id not in (0, 1):
                raise ValueError(f"car team_id must be 0 or 1, got {car.team_id!r}")
            if not 0.0 <= car.boost <= 100.0:
                raise ValueError(f"boost out of [0, 100]: {car.boost!r}")
        if not isinstance(self.tick, int) or self.tick < 0:
            raise ValueError(f"tick must be a non-negative int, got {self.tick!r}")


@dataclass(frozen=True, slots=True)
class DerivedFeatures:
    distance_car_ball: float
    relative_direction: Vec3
    relative_velocity: Vec3


def compute_derived(state: GameState, car_index: int) -> DerivedFeatures:
    """Per-car features: distance to ball, unit direction car->ball,
    velocity difference ball - car (all in the world frame).
    """
    if not 0 <= car_index < len(state.cars):
        raise IndexError(f"car index {car_index} out of range")
    car = state.cars[car_index]
    offset = state.ball.location - car.physics.location
    distance = offset.norm()
    if distance > 0.0:
        direction = Vec3(offset.x / distance, offset.y / distance, offset.z / distance)
    else:
        direction = Vec3(0.0, 0.0, 0.0)
    return DerivedFeatures(
        distance_car_ball=distance,
        relative_direction=direction,
        relative_velocity=state.ball.velocity - car.physics.velocity,
    )


def suspend_on_pause(ui: UiState) -> bool:
    """Input processing runs only while the game is actively being played."""
    return ui is not UiState.IN_GAME


# ---------------------------------------------------------------------------
# wire encoding
# ---------------------------------------------------------------------------

def _num(value: float, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EncodingError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise EncodingError(f"{where}: non-finite value {value!r}")
    # Up to 9 significant digits on the wire: bounded message size, below
    # physics tolerance, and stable under re-encoding.
    return float(f"{value:.9g}")


_ANGLE_EPS = 1e-9


def _rotation_dict(rot: Rotation, where: str) -> dict:
    out = {}
    for name in ("pitch", "yaw", "roll"):
        value = _num(getattr(rot, name), f"{where}.{name}")
        if abs(value) > math.pi + _ANGLE_EPS:
            raise EncodingError(f"{where}.{name}: angle {value!r} not normalized to [-pi, pi]")
        out[name] = value
    return out


def _vec_dict(vec: Vec3, where: str) -> dict:
    return {
        "x": _num(vec.x, f"{where}.x"),
        "y": _num(vec.y, f"{where}.y"),
        "z": _num(vec.z, f"{where}.z"),
    }


def _physics_dict(ph: Physics, where: str) -> dict:
    return {
        "location": _vec_dict(ph.location, f"{where}.location"),
        "rotation": _rotation_dict(ph.rotation, f"{where}.rotation"),
        "velocity": _vec_dict(ph.velocity, f"{where}.velocity"),
        "angular_velocity": _vec_dict(ph.angular_velocity, f"{where}.angular_velocity"),
    }


def state_to_payload(state: GameState) -> dict:
    """GameState -> JSON-ready dict with exact schema field names."""
    return {
        "ball": {
            "location": _vec_dict(state.ball.location, "ball.location"),
            "rotation": _rotation_dict(state.ball.rotation, "ball.rotation"),
            "velocity": _vec_dict(state.ball.velocity, "ball.velocity"),
            "angular_velocity": _vec_dict(state.ball.angular_velocity, "ball.angular_velocity"),
        },
        "cars": [
            {
                "physics": _physics_dict(car.physics, f"cars[{i}].physics"),
                "team_id": car.team_id,
                "demolished": bool(car.demolished),
                "ground_contact": bool(car.ground_contact),
                "jumped": bool(car.jumped),
                "boost": _num(car.boost, f"cars[{i}].boost"),
                "is_bot": bool(car.is_bot),
            }
            for i, car in enumerate(state.cars)
        ],
        "teams": [{"team_id": t.team_id, "score": t.score} for t in state.teams],
        "info": {"seconds_elapsed": _num(state.info.seconds_elapsed, "info.seconds_elapsed")},
        "pads": [
            {
                "pad_id": p.pad_id,
                "active": bool(p.active),
                "respawn_remaining": _num(p.respawn_remaining, f"pads[{i}].respawn_remaining"),
            }
            for i, p in enumerate(state.pads)
        ],
        "ui": state.ui.value,
        "tick": state.tick,
    }


def encode_state(state: GameState) -> bytes:
    """One framed NDJSON line (UTF-8, trailing newline)."""
    return (json.dumps(state_to_payload(state), separators=(",", ":")) + "\n").encode("utf-8")


def _need(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _vec_from(obj: dict, where: str) -> Vec3:
    return Vec3(*(float(_need(obj, k, where)) for k in ("x", "y", "z")))


def _rot_from(obj: dict, where: str) -> Rotation:
    return Rotation(*(float(_need(obj, k, where)) for k in ("pitch", "yaw", "roll")))


def _physics_from(obj: dict, where: str) -> Physics:
    return Physics(
        location=_vec_from(_need(obj, "location", where), f"{where}.location"),
        rotation=_rot_from(_need(obj, "rotation", where), f"{where}.rotation"),
        velocity=_vec_from(_need(obj, "velocity", where), f"{where}.velocity"),
        angular_velocity=_vec_from(_need(obj, "angular_velocity", where), f"{where}.angular_velocity"),
    )


def payload_to_state(payload: dict) -> GameState:
    """JSON dict -> GameState. Unknown extra fields are ignored."""
    ball_obj = _need(payload, "ball", "state")
    ball = BallState(
        location=_vec_from(_need(ball_obj, "location", "ball"), "ball.location"),
        rotation=_rot_from(_need(ball_obj, "rotation", "ball"), "ball.rotation"),
        velocity=_vec_from(_need(ball_obj, "velocity", "ball"), "ball.velocity"),
        angular_velocity=_vec_from(_need(ball_obj, "angular_velocity", "ball"), "ball.angular_velocity"),
    )
    cars = tuple(
        CarState(
            physics=_physics_from(_need(c, "physics", f"cars[{i}]"), f"cars[{i}].physics"),
            team_id=int(_need(c, "team_id", f"cars[{i}]")),
            demolished=bool(_need(c, "demolished", f"cars[{i}]")),
            ground_contact=bool(_need(c, "ground_contact", f"cars[{i}]")),
            jumped=bool(_need(c, "jumped", f"cars[{i}]")),
            boost=float(_need(c, "boost", f"cars[{i}]")),
            is_bot=bool(_need(c, "is_bot", f"cars[{i}]")),
        )
        for i, c in enumerate(_need(payload, "cars", "state"))
    )
    teams = tuple(
        TeamInfo(team_id=int(_need(t, "team_id", f"teams[{i}]")),
                 score=int(_need(t, "score", f"teams[{i}]")))
        for i, t in enumerate(_need(payload, "teams", "state"))
    )
    info = GameInfo(seconds_elapsed=float(_need(_need(payload, "info", "state"),
                                                "seconds_elapsed", "info")))
    pads = tuple(
        BoostPadState(pad_id=int(_need(p, "pad_id", f"pads[{i}]")),
                      active=bool(_need(p, "active", f"pads[{i}]")),
                      respawn_remaining=float(_need(p, "respawn_remaining", f"pads[{i}]")))
        for i, p in enumerate(_need(payload, "pads", "state"))
    )
    ui_raw = _need(payload, "ui", "state")
    try:
        ui = UiState(ui_raw)
    except ValueError:
        raise SchemaError(f"state.ui: unknown value {ui_raw!r}") from None
    tick = _need(payload, "tick", "state")
    if not isinstance(tick, int) or isinstance(tick, bool) or tick < 0:
        raise SchemaError(f"state.tick: expected non-negative int, got {tick!r}")
    try:
        return GameState(ball=ball, cars=cars, teams=teams, info=info,
                         pads=pads, ui=ui, tick=tick)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def decode_state(data: bytes) -> GameState:
    """Inverse of encode_state on one complete framed line."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"not valid UTF-8: {exc}") from None
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ProtocolError(f"expected a JSON object, got {type(payload).__name__}")
    return payload_to_state(payload)


# ---------------------------------------------------------------------------
# message envelope
# ---------------------------------------------------------------------------

#: Core message kinds; servers may extend with session plumbing
#: (hello/welcome/frame/config_result/agent_action/error).
CORE_MESSAGE_TYPES = ("state", "input", "event", "config")

EVENT_KINDS = ("goal", "kickoff", "match_end")


def encode_message(msg_type: str, payload: Any) -> str:
    """One envelope as a single NDJSON line (no trailing newline)."""
    if not msg_type or not isinstance(msg_type, str):
        raise ProtocolError(f"message type must be a non-empty string, got {msg_type!r}")
    return json.dumps({"type": msg_type, "payload": payload}, separators=(",", ":"))


def decode_message(line: str) -> tuple[str, Any]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError("envelope must be a JSON object")
    if "type" not in obj:
        raise ProtocolError("envelope missing 'type'")
    msg_type = obj["type"]
    if not isinstance(msg_type, str):
        raise ProtocolError(f"envelope type must be a string, got {msg_type!r}")
    return msg_type, obj.get("payload")


def decode_input_payload(payload: Any) -> tuple[str, str, Any, Optional[int]]:
    """Validate an input payload: {player, element, intensity, tick}."""
    if not isinstance(payload, dict):
        raise ProtocolError("input payload must be an object")
    for key in ("player", "element", "intensity"):
        if key not in payload:
            raise ProtocolError(f"input payload missing {key!r}")
    player = payload["player"]
    element = payload["element"]
    if not isinstance(player, str) or not isinstance(element, str):
        raise ProtocolError("input payload player/element must be strings")
    intensity = payload["intensity"]
    if isinstance(intensity, list):
        intensity = tuple(intensity)
    tick = payload.get("tick")
    if tick is not None and (not isinstance(tick, int) or isinstance(tick, bool) or tick < 0):
        raise ProtocolError(f"input payload tick must be a non-negative int, got {tick!r}")
    return player, element, intensity, tick


def event_payload(kind: str, team: Optional[int], tick: int) -> dict:
    return {"kind": kind, "team": team, "tick": tick}
