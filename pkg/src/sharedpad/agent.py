"""The software copilot: scheduled inference, masking, built-in heuristic.

The agent sees GameState snapshots, produces an 8-component action vector on
a fixed cadence (default: every 15 ticks, anchored at tick 0), and repeats
the last vector between inferences. Its vector is masked down to the actions
actually assigned to the copilot before arbitration — the agent has no other
path into the game.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

from .model import ARENA_ACTIONS, Assignment, InputEntry, Role
from .protocol import DerivedFeatures, GameState, compute_derived, normalize_angle

WarningHook = Callable[[str], None]


@dataclass(frozen=True)
class AgentActionVector:
    """a_bot: full action vector over the car's control surface."""

    throttle: float = 0.0   # [-1, 1], sign-split into Accelerate/Brake
    steer: float = 0.0      # [-1, 1], -1 = full left
    pitch: float = 0.0      # [-1, 1] (unused by the planar arena)
    yaw: float = 0.0        # [-1, 1] (unused)
    roll: float = 0.0       # [-1, 1] (unused)
    jump: float = 0.0       # {0, 1}
    boost: float = 0.0      # {0, 1}
    handbrake: float = 0.0  # {0, 1}

    def __post_init__(self) -> None:
        for name in ("throttle", "steer", "pitch", "yaw", "roll"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)
                    and -1.0 <= value <= 1.0):
                raise ValueError(f"{name} out of [-1, 1]: {value!r}")
        for name in ("jump", "boost", "handbrake"):
            if getattr(self, name) not in (0.0, 1.0):
                raise ValueError(f"{name} must be 0 or 1")


NEUTRAL_VECTOR = AgentActionVector()


@dataclass(frozen=True)
class AgentPolicy:
    """A deterministic decision function plus its identity and parameters.

    ``decide`` receives the latest snapshot, derived features for the agent's
    car, and the pilot's latest entries (empty unless an interpreted-influence
    agent is configured; the built-in agents ignore them).
    """

    id: str
    decide: Callable[[GameState, DerivedFeatures, Sequence[InputEntry]], AgentActionVector]
    car_index: int = 0
    params: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class AgentSchedule:
    period: int = 15
    last_vector: AgentActionVector = NEUTRAL_VECTOR
    last_inference_tick: int = -1

    def __post_init__(self) -> None:
        if not isinstance(self.period, int) or self.period < 1:
            raise ValueError(f"inference period must be an int >= 1, got {self.period!r}")


def schedule_tick(
    sched: AgentSchedule,
    tick: int,
    state: GameState,
    policy: AgentPolicy,
    pilot_entries: Sequence[InputEntry] = (),
    on_warning: Optional[WarningHook] = None,
) -> tuple[AgentActionVector, AgentSchedule]:
    """Run inference on cadence ticks, repeat the stored vector otherwise.

    Inference is anchored at tick ≡ 0 (mod period) so runs are reproducible
    regardless of when the agent joined. A failing policy degrades to the
    stored vector (no control dropout) and reports a warning.
    """
    if tick < sched.last_inference_tick:
        raise ValueError(f"tick {tick} precedes last inference tick {sched.last_inference_tick}")
    if tick % sched.period != 0:
        return sched.last_vector, sched
    try:
        features = compute_derived(state, policy.car_index)
        vector = policy.decide(state, features, pilot_entries)
    except Exception as exc:
        if on_warning is not None:
            on_warning(f"agent policy {policy.id!r} failed at tick {tick} ({exc}); "
                       f"repeating last vector")
        vector = sched.last_vector
    return vector, replace(sched, last_vector=vector, last_inference_tick=tick)


def mask_actions(
    vec: AgentActionVector,
    assignment: Mapping[str, Assignment],
    tick: int,
    *,
    role: Role = Role.COPILOT,
    source: str = "agent",
) -> list[InputEntry]:
    """Project the vector onto the arena actions assigned to the agent's role.

    Throttle sign-splits: non-negative drives Accelerate, negative drives
    Brake by magnitude — the unused half emits an explicit 0 like a released
    trigger. pitch/yaw/roll have no arena counterpart and are dropped.
    """
    allowed = (
        (Assignment.COPILOT_ONLY, Assignment.OVERLAPPING)
        if role is Role.COPILOT
        else (Assignment.PILOT_ONLY, Assignment.OVERLAPPING)
    )
    values = {
        "Steer": vec.steer,
        "Accelerate": vec.throttle if vec.throttle >= 0 else 0.0,
        "Brake": -vec.throttle if vec.throttle < 0 else 0.0,
        "Jump": vec.jump,
        "Boost": vec.boost,
        "Handbrake": vec.handbrake,
    }
    entries = []
    for action, value in values.items():
        if assignment.get(action) in allowed:
            entries.append(InputEntry(
                action=ARENA_ACTIONS[action],
                value=value,
                tick=tick,
                role=role,
                confidence=1.0,
                source=source,
            ))
    return entries


# ---------------------------------------------------------------------------
# built-in heuristic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeuristicParams:
    """Tunables for the chase-and-shoot heuristic."""

    goal_x: float = 60.0          # x of the goal the agent attacks
    behind_distance: float = 6.0  # aim point offset behind the ball
    k_steer: float = 2.0          # proportional steering gain (per radian)
    boost_cone: float = 0.3       # radians of alignment required to boost
    boost_reserve: float = 10.0   # fuel floor below which boost is saved
    jump_radius: float = 6.0      # distance within which a pop hit is tried
    jump_max_ball_height: float = 2.0
    drift_angle: float = 2.0      # radians of error beyond which to handbrake


def heuristic_policy(
    state: GameState,
    features: DerivedFeatures,
    params: HeuristicParams,
    car_index: int = 0,
) -> AgentActionVector:
    """Deterministic chase-and-shoot.

    Aim for the point behind the ball on the ball-to-goal line. Facing within
    90° of the aim point: full throttle, steering proportional to the bearing
    error (steer < 0 turns left). Facing away: reverse at half throttle with
    steering saturated (three-point turn). Boost only when well aligned with
    fuel to spare; jump for a pop hit when close to a low ball; handbrake when
    the required turn is sharp.
    """
    car = state.cars[car_index]
    ball = state.ball.location
    to_goal_x = params.goal_x - ball.x
    to_goal_y = 0.0 - ball.y
    span = math.hypot(to_goal_x, to_goal_y)
    if span > 0.0:
        ux, uy = to_goal_x / span, to_goal_y / span
    else:
        ux, uy = (1.0 if params.goal_x >= 0 else -1.0), 0.0
    target_x = ball.x - ux * params.behind_distance
    target_y = ball.y - uy * params.behind_distance

    desired = math.atan2(target_y - car.physics.location.y,
                         target_x - car.physics.location.x)
    error = normalize_angle(desired - car.physics.rotation.yaw)

    if abs(error) <= math.pi / 2.0:
        throttle = 1.0
        steer = max(-1.0, min(1.0, -params.k_steer * error))
    else:
        throttle = -0.5
        steer = -1.0 if error > 0 else 1.0
    boost = 1.0 if (abs(error) < params.boost_cone
                    and car.boost > params.boost_reserve) else 0.0
    jump = 1.0 if (features.distance_car_ball < params.jump_radius
                   and ball.z < params.jump_max_ball_height) else 0.0
    handbrake = 1.0 if abs(error) > params.drift_angle else 0.0
    return AgentActionVector(throttle=throttle, steer=steer, jump=jump,
                             boost=boost, handbrake=handbrake)


def make_heuristic_agent(
    params: HeuristicParams = HeuristicParams(),
    car_index: int = 0,
    policy_id: str = "chase",
) -> AgentPolicy:
    def decide(state: GameState, features: DerivedFeatures,
               pilot_entries: Sequence[InputEntry]) -> AgentActionVector:
        return heuristic_policy(state, features, params, car_index)

    return AgentPolicy(id=policy_id, decide=decide, car_index=car_index,
                       params={"heuristic": params})


def make_idle_agent(car_index: int = 0, policy_id: str = "idle") -> AgentPolicy:
    def decide(state, features, pilot_entries) -> AgentActionVector:
        return NEUTRAL_VECTOR

    return AgentPolicy(id=policy_id, decide=decide, car_index=car_index)
