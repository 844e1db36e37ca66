"""Deterministic fixed-timestep car-ball arena.

A desk-scale stand-in for a real driving game: top-down 2D car and ball
kinematics plus a scalar ball height for jump hits. The arena consumes only
``VirtualControllerState`` (decoded through the default game layout) and
publishes protocol ``GameState`` snapshots, so everything upstream is
exercised end to end.

Determinism contract: all physics in double precision with a fixed operation
order, timers in integer ticks, no entropy beyond the config seed. The state
trace hash is a pure function of (seed, config, input log).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, TextIO, Union

from .arbitrator import VirtualControllerState
from .errors import ReplayError
from .model import DEFAULT_GAME_MAPPING
from .protocol import (
    BallState,
    BoostPadState,
    CarState,
    GameInfo,
    GameState,
    Physics,
    Rotation,
    TeamInfo,
    UiState,
    Vec3,
    encode_state,
    normalize_angle,
)

TICK_RATE = 120

# Default game layout, inverted: the arena reads these elements.
_STEER = DEFAULT_GAME_MAPPING.element_for("Steer").id
_ACCEL = DEFAULT_GAME_MAPPING.element_for("Accelerate").id
_BRAKE = DEFAULT_GAME_MAPPING.element_for("Brake").id
_JUMP = DEFAULT_GAME_MAPPING.element_for("Jump").id
_BOOST = DEFAULT_GAME_MAPPING.element_for("Boost").id
_HANDBRAKE = DEFAULT_GAME_MAPPING.element_for("Handbrake").id


@dataclass(frozen=True)
class ArenaConfig:
    half_length: float = 60.0
    half_width: float = 40.0
    goal_width: float = 16.0
    tick_rate: int = TICK_RATE
    match_seconds: float = 300.0
    # car
    car_acceleration: float = 30.0
    brake_deceleration: float = 45.0
    boost_thrust: float = 25.0
    max_speed: float = 40.0
    reverse_speed_factor: float = 0.5
    turn_rate: float = 2.5
    handbrake_turn_multiplier: float = 2.0
    handbrake_grip_loss: float = 10.0
    friction: float = 20.0
    car_radius: float = 1.5
    # ball
    ball_radius: float = 2.0
    ball_restitution: float = 0.8
    ball_friction: float = 8.0
    ball_max_speed: float = 60.0
    gravity: float = 50.0
    jump_hit_strength: float = 18.0
    contact_height: float = 2.5
    settle_speed: float = 2.0
    # jumps
    jump_window_seconds: float = 0.2
    jump_cooldown_seconds: float = 1.0
    # boost economy
    fuel_capacity: float = 100.0
    boost_drain_rate: float = 33.0
    pad_recharge: float = 25.0
    pad_respawn_seconds: float = 10.0
    pad_radius: float = 3.0
    initial_fuel: float = 33.0
    # spawns
    spawn_distance: float = 40.0
    # match
    golden_goal: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tick_rate != TICK_RATE:
            raise ValueError(f"tick rate is fixed at {TICK_RATE}")
        positive = (
            "half_length", "half_width", "goal_width", "match_seconds",
            "car_acceleration", "brake_deceleration", "boost_thrust", "max_speed",
            "reverse_speed_factor", "turn_rate", "handbrake_turn_multiplier",
            "handbrake_grip_loss", "friction", "car_radius", "ball_radius",
            "ball_restitution", "ball_friction", "ball_max_speed", "gravity",
            "jump_hit_strength", "contact_height", "settle_speed",
            "jump_window_seconds", "jump_cooldown_seconds", "fuel_capacity",
            "boost_drain_rate", "pad_recharge", "pad_respawn_seconds",
            "pad_radius", "spawn_distance",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0 <= self.initial_fuel <= self.fuel_capacity:
            raise ValueError("initial_fuel must lie in [0, fuel_capacity]")
        if self.goal_width >= 2 * self.half_width:
            raise ValueError("goal must be narrower than the back wall")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    def fingerprint(self) -> str:
        payload = {k: getattr(self, k) for k in sorted(self.__dataclass_fields__)}
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


#: Six pads, mirrored under 180° field rotation.
def _pad_positions(config: ArenaConfig) -> tuple[tuple[float, float], ...]:
    lx = config.half_length * 0.5
    mx = config.half_length * 0.25
    my = config.half_width * 0.625
    return ((-lx, 0.0), (lx, 0.0), (-mx, my), (mx, -my), (-mx, -my), (mx, my))


class Phase:
    KICKOFF = "kickoff"
    PLAY = "play"
    GOAL_SCORED = "goal_scored"
    ENDED = "ended"


@dataclass
class CarBody:
    team_id: int
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    speed: float = 0.0
    fuel: float = 0.0
    yaw_rate: float = 0.0
    jump_window: int = 0    # ticks of elevated-hit window remaining
    jump_cooldown: int = 0  # ticks until the next jump is allowed
    is_bot: bool = False


@dataclass
class BallBody:
    x: float = 0.0
    y: float = 0.0
    h: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vh: float = 0.0


@dataclass
class PadBody:
    pad_id: int
    x: float
    y: float
    respawn: int = 0  # ticks until active again; 0 = active


@dataclass(frozen=True)
class SimEvent:
    kind: str
    tick: int
    team: Optional[int] = None
    car: Optional[int] = None
    pad: Optional[int] = None


@dataclass
class SimWorld:
    config: ArenaConfig
    tick: int = 0
    phase: str = Phase.KICKOFF
    ball: BallBody = field(default_factory=BallBody)
    cars: list[CarBody] = field(default_factory=list)
    pads: list[PadBody] = field(default_factory=list)
    scores: list[int] = field(default_factory=lambda: [0, 0])

    @property
    def seconds_elapsed(self) -> float:
        return self.tick / self.config.tick_rate


def new_world(config: ArenaConfig) -> SimWorld:
    """A fresh match: kickoff applied, phase Play, tick 0."""
    world = SimWorld(
        config=config,
        cars=[CarBody(team_id=0), CarBody(team_id=1, is_bot=True)],
        pads=[PadBody(i, x, y) for i, (x, y) in enumerate(_pad_positions(config))],
    )
    return reset_kickoff(world, config)


def reset_kickoff(world: SimWorld, config: ArenaConfig) -> SimWorld:
    """Center the ball, respawn cars mirrored and facing it, reset fuel.

    The countdown is zero ticks: the world is immediately in Play. The match
    clock keeps running across kickoffs.
    """
    if world.phase not in (Phase.KICKOFF, Phase.GOAL_SCORED):
        raise ValueError(f"cannot kick off from phase {world.phase!r}")
    world.ball = BallBody()
    for car in world.cars:
        sign = -1.0 if car.team_id == 0 else 1.0
        car.x = sign * config.spawn_distance
        car.y = 0.0
        car.heading = 0.0 if car.team_id == 0 else math.pi
        car.speed = 0.0
        car.yaw_rate = 0.0
        car.fuel = config.initial_fuel
        car.jump_window = 0
        car.jump_cooldown = 0
    world.phase = Phase.PLAY
    return world


# ---------------------------------------------------------------------------
# controller decoding
# ---------------------------------------------------------------------------

def _clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else (hi if value > hi else value)


def _decode(controller: VirtualControllerState) -> tuple[float, float, float, bool, bool, bool]:
    stick = controller.get(_STEER, (0.0, 0.0))
    steer = _clamp(float(stick[0]), -1.0, 1.0)
    accel = _clamp(float(controller.get(_ACCEL, 0.0)), 0.0, 1.0)
    brake = _clamp(float(controller.get(_BRAKE, 0.0)), 0.0, 1.0)
    jump = float(controller.get(_JUMP, 0.0)) >= 0.5
    boost = float(controller.get(_BOOST, 0.0)) >= 0.5
    handbrake = float(controller.get(_HANDBRAKE, 0.0)) >= 0.5
    return steer, accel, brake, jump, boost, handbrake


NEUTRAL_CONTROLLER = VirtualControllerState.neutral(DEFAULT_GAME_MAPPING)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def step(
    world: SimWorld,
    controllers: Mapping[int, VirtualControllerState],
    config: Optional[ArenaConfig] = None,
) -> tuple[SimWorld, list[SimEvent]]:
    """Advance exactly one tick (Δt = 1/120 s). Mutates and returns world.

    On a Kickoff/GoalScored tick the reset consumes the tick (controllers
    ignored, no physics) and a "kickoff" event is emitted.
    """
    config = config or world.config
    if world.phase == Phase.ENDED:
        raise ValueError("match has ended")
    events: list[SimEvent] = []

    if world.phase in (Phase.KICKOFF, Phase.GOAL_SCORED):
        reset_kickoff(world, config)
        world.tick += 1
        events.append(SimEvent("kickoff", world.tick))
        _check_clock(world, config, events)
        return world, events

    dt = config.dt
    next_tick = world.tick + 1

    # --- cars ---
    for index, car in enumerate(world.cars):
        controller = controllers.get(index, NEUTRAL_CONTROLLER)
        steer, accel, brake, jump, boost, handbrake = _decode(controller)

        if car.jump_window > 0:
            car.jump_window -= 1
        if car.jump_cooldown > 0:
            car.jump_cooldown -= 1
        if jump and car.jump_cooldown == 0:
            car.jump_window = int(round(config.jump_window_seconds * config.tick_rate))
            car.jump_cooldown = int(round(config.jump_cooldown_seconds * config.tick_rate))

        boosting = boost and car.fuel > 0.0

        # longitudinal: thrust while driven, friction only when coasting
        if accel > 0.0 or brake > 0.0 or boosting:
            thrust = accel * config.car_acceleration - brake * config.brake_deceleration
            if boosting:
                thrust += config.boost_thrust
            car.speed += thrust * dt
        else:
            car.speed = _toward_zero(car.speed, config.friction * dt)
        if handbrake:
            car.speed = _toward_zero(car.speed, config.handbrake_grip_loss * dt)
        car.speed = _clamp(
            car.speed,
            -config.max_speed * config.reverse_speed_factor,
            config.max_speed,
        )

        # steer -1 is full left (counterclockwise, heading increases)
        turn = config.turn_rate * (config.handbrake_turn_multiplier if handbrake else 1.0)
        car.yaw_rate = -steer * turn
        car.heading += car.yaw_rate * dt
        car.x += math.cos(car.heading) * car.speed * dt
        car.y += math.sin(car.heading) * car.speed * dt
        car.x = _clamp(car.x, -config.half_length + config.car_radius,
                       config.half_length - config.car_radius)
        car.y = _clamp(car.y, -config.half_width + config.car_radius,
                       config.half_width - config.car_radius)

        # fuel ledger: fuel' = clamp(fuel - drain·[boosting] + recharge·[pickup])
        delta = -config.boost_drain_rate * dt if boosting else 0.0
        for pad in world.pads:
            if pad.respawn > 0:
                continue
            if (car.x - pad.x) ** 2 + (car.y - pad.y) ** 2 <= config.pad_radius ** 2:
                pad.respawn = int(round(config.pad_respawn_seconds * config.tick_rate))
                delta += config.pad_recharge
                events.append(SimEvent("pad_pickup", next_tick, car=index, pad=pad.pad_id))
        car.fuel = _clamp(car.fuel + delta, 0.0, config.fuel_capacity)

    for pad in world.pads:
        if pad.respawn > 0:
            pad.respawn -= 1

    # --- ball ---
    ball = world.ball
    airborne = ball.h > 0.0 or ball.vh > 0.0
    if airborne:
        ball.vh -= config.gravity * dt
    else:
        planar = math.hypot(ball.vx, ball.vy)
        if planar > 0.0:
            scale = _toward_zero(planar, config.ball_friction * dt) / planar
            ball.vx *= scale
            ball.vy *= scale
    ball.x += ball.vx * dt
    ball.y += ball.vy * dt
    ball.h += ball.vh * dt
    if ball.h <= 0.0:
        ball.h = 0.0
        if ball.vh < 0.0:
            bounced = -ball.vh * config.ball_restitution
            ball.vh = bounced if bounced > config.settle_speed else 0.0

    in_goal_mouth = abs(ball.y) <= config.goal_width / 2.0
    wall_x = config.half_length - config.ball_radius
    wall_y = config.half_width - config.ball_radius
    if not in_goal_mouth:
        if ball.x > wall_x:
            ball.x = wall_x
            ball.vx = -abs(ball.vx) * config.ball_restitution
        elif ball.x < -wall_x:
            ball.x = -wall_x
            ball.vx = abs(ball.vx) * config.ball_restitution
    if ball.y > wall_y:
        ball.y = wall_y
        ball.vy = -abs(ball.vy) * config.ball_restitution
    elif ball.y < -wall_y:
        ball.y = -wall_y
        ball.vy = abs(ball.vy) * config.ball_restitution

    # --- car-ball hits ---
    reach = config.car_radius + config.ball_radius
    for index, car in enumerate(world.cars):
        if ball.h > config.contact_height:
            continue
        dx = ball.x - car.x
        dy = ball.y - car.y
        dist = math.hypot(dx, dy)
        if dist > reach:
            continue
        if dist > 0.0:
            nx, ny = dx / dist, dy / dist
        else:
            nx, ny = math.cos(car.heading), math.sin(car.heading)
        cvx = math.cos(car.heading) * car.speed
        cvy = math.sin(car.heading) * car.speed
        approach = (cvx - ball.vx) * nx + (cvy - ball.vy) * ny
        if approach > 0.0:
            impulse = (1.0 + config.ball_restitution) * approach
            ball.vx += nx * impulse
            ball.vy += ny * impulse
            speed = math.hypot(ball.vx, ball.vy)
            if speed > config.ball_max_speed:
                scale = config.ball_max_speed / speed
                ball.vx *= scale
                ball.vy *= scale
            if car.jump_window > 0:
                ball.vh = max(ball.vh, config.jump_hit_strength)
        # de-penetrate along the contact normal
        ball.x = car.x + nx * (reach + 1e-9)
        ball.y = car.y + ny * (reach + 1e-9)

    # --- goals --- (re-check the mouth: hits above may have moved the ball)
    if abs(ball.y) <= config.goal_width / 2.0:
        scorer = None
        if ball.x >= config.half_length:
            scorer = 0  # team 0 attacks +x
        elif ball.x <= -config.half_length:
            scorer = 1
        if scorer is not None:
            world.scores[scorer] += 1
            world.phase = Phase.GOAL_SCORED
            events.append(SimEvent("goal", next_tick, team=scorer))

    world.tick = next_tick
    _check_clock(world, config, events)
    return world, events


def _toward_zero(value: float, amount: float) -> float:
    if value > 0.0:
        return max(0.0, value - amount)
    if value < 0.0:
        return min(0.0, value + amount)
    return 0.0


def _check_clock(world: SimWorld, config: ArenaConfig, events: list[SimEvent]) -> None:
    if world.seconds_elapsed >= config.match_seconds:
        tied = world.scores[0] == world.scores[1]
        if config.golden_goal and tied:
            return  # sudden death: play on until the next goal
        world.phase = Phase.ENDED
        events.append(SimEvent("match_end", world.tick))


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def snapshot_state(world: SimWorld) -> GameState:
    """Project the sim into the protocol schema (pure; world untouched)."""
    ball = world.ball
    cars = tuple(
        CarState(
            physics=Physics(
                location=Vec3(car.x, car.y, 0.0),
                rotation=Rotation(0.0, normalize_angle(car.heading), 0.0),
                velocity=Vec3(
                    math.cos(car.heading) * car.speed,
                    math.sin(car.heading) * car.speed,
                    0.0,
                ),
                angular_velocity=Vec3(0.0, 0.0, car.yaw_rate),
            ),
            team_id=car.team_id,
            demolished=False,
            ground_contact=True,
            jumped=car.jump_window > 0,
            boost=car.fuel,
            is_bot=car.is_bot,
        )
        for car in world.cars
    )
    return GameState(
        ball=BallState(
            location=Vec3(ball.x, ball.y, ball.h),
            rotation=Rotation(0.0, 0.0, 0.0),
            velocity=Vec3(ball.vx, ball.vy, ball.vh),
            angular_velocity=Vec3(0.0, 0.0, 0.0),
        ),
        cars=cars,
        teams=(TeamInfo(0, world.scores[0]), TeamInfo(1, world.scores[1])),
        info=GameInfo(seconds_elapsed=world.seconds_elapsed),
        pads=tuple(
            BoostPadState(
                pad_id=pad.pad_id,
                active=pad.respawn == 0,
                respawn_remaining=pad.respawn / world.config.tick_rate,
            )
            for pad in world.pads
        ),
        ui=UiState.IN_GAME if world.phase == Phase.PLAY else UiState.OTHER,
        tick=world.tick,
    )


# ---------------------------------------------------------------------------
# input logs and replay
# ---------------------------------------------------------------------------

LOG_FORMAT = "sharedpad-controller-log"


def controller_record(tick: int, car: int, controller: VirtualControllerState) -> dict:
    return {
        "type": "controller",
        "tick": tick,
        "car": car,
        "elements": {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in controller.values},
    }


def log_header(config: ArenaConfig) -> dict:
    return {
        "type": "header",
        "format": LOG_FORMAT,
        "version": 1,
        "tick_rate": config.tick_rate,
        "seed": config.seed,
    }


def write_input_log(stream: TextIO, config: ArenaConfig, records: Iterable[dict]) -> None:
    stream.write(json.dumps(log_header(config), separators=(",", ":")) + "\n")
    for record in records:
        stream.write(json.dumps(record, separators=(",", ":")) + "\n")


def controller_from_elements(elements: dict) -> VirtualControllerState:
    return VirtualControllerState(tuple(
        (key, tuple(value) if isinstance(value, list) else float(value))
        for key, value in elements.items()
    ))


def read_input_log(lines: Iterable[str], config: ArenaConfig) -> dict[int, dict[int, VirtualControllerState]]:
    """Parse controller records into {tick: {car: state}}; validates header."""
    per_tick: dict[int, dict[int, VirtualControllerState]] = {}
    header_seen = False
    for n, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"log line {n + 1}: malformed JSON ({exc})") from None
        kind = record.get("type")
        if kind == "header":
            header_seen = True
            if record.get("tick_rate") != config.tick_rate:
                raise ReplayError(
                    f"log tick rate {record.get('tick_rate')!r} does not match "
                    f"config tick rate {config.tick_rate}"
                )
        elif kind == "controller":
            try:
                tick = int(record["tick"])
                car = int(record["car"])
                controller = controller_from_elements(record["elements"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ReplayError(f"log line {n + 1}: bad controller record ({exc})") from None
            per_tick.setdefault(tick, {})[car] = controller
        # other record kinds (inputs, frames, events) are ignored here
    if not header_seen:
        raise ReplayError("log has no header record")
    return per_tick


def trace_hasher(config: ArenaConfig) -> "hashlib._Hash":
    digest = hashlib.sha256()
    digest.update(config.fingerprint().encode("utf-8"))
    return digest


def replay(
    log: Union[Iterable[str], Mapping[int, Mapping[int, VirtualControllerState]]],
    config: ArenaConfig,
    *,
    ticks: Optional[int] = None,
) -> tuple[SimWorld, str]:
    """Re-run a match from a controller log; returns (world, trace hash).

    Controller state is sticky: a car missing a record at some tick keeps its
    previous state, mirroring how a physical pad reports. ``ticks`` defaults
    to one past the last record (so an empty dict replays nothing unless a
    tick count is given).
    """
    if isinstance(log, Mapping):
        per_tick = {t: dict(cars) for t, cars in log.items()}
    else:
        per_tick = read_input_log(log, config)
    if ticks is None:
        ticks = (max(per_tick) + 1) if per_tick else 0

    world = new_world(config)
    digest = trace_hasher(config)
    digest.update(encode_state(snapshot_state(world)))
    current: dict[int, VirtualControllerState] = {}
    while world.tick < ticks and world.phase != Phase.ENDED:
        for car, controller in per_tick.get(world.tick, {}).items():
            current[car] = controller
        step(world, current, config)
        digest.update(encode_state(snapshot_state(world)))
    return world, digest.hexdigest()
