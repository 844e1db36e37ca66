"""Copilot agent: inference cadence, failure fallback, masking, heuristic."""
import math

import pytest

from sharedpad.agent import (
    AgentActionVector,
    AgentPolicy,
    AgentSchedule,
    HeuristicParams,
    NEUTRAL_VECTOR,
    heuristic_policy,
    make_heuristic_agent,
    make_idle_agent,
    mask_actions,
    schedule_tick,
)
from sharedpad.model import Assignment, Role, all_assigned
from sharedpad.protocol import (
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
    compute_derived,
)


def _physics(x=0.0, y=0.0, z=0.0, yaw=0.0, vx=0.0, vy=0.0):
    return Physics(
        location=Vec3(x, y, z),
        rotation=Rotation(0.0, yaw, 0.0),
        velocity=Vec3(vx, vy, 0.0),
        angular_velocity=Vec3(0.0, 0.0, 0.0),
    )


def make_state(tick=0, ball=(0.0, 0.0, 0.0), car0=(0.0, 0.0, 0.0), boost=100.0):
    cars = (
        CarState(physics=_physics(x=car0[0], y=car0[1], yaw=car0[2]), team_id=0,
                 demolished=False, ground_contact=True, jumped=False,
                 boost=boost, is_bot=False),
        CarState(physics=_physics(x=40.0, yaw=math.pi), team_id=1,
                 demolished=False, ground_contact=True, jumped=False,
                 boost=33.0, is_bot=True),
    )
    return GameState(
        ball=BallState(
            location=Vec3(*ball),
            rotation=Rotation(0.0, 0.0, 0.0),
            velocity=Vec3(0.0, 0.0, 0.0),
            angular_velocity=Vec3(0.0, 0.0, 0.0),
        ),
        cars=cars,
        teams=(TeamInfo(0, 0), TeamInfo(1, 0)),
        info=GameInfo(seconds_elapsed=tick / 120),
        pads=(BoostPadState(0, True, 0.0),),
        ui=UiState.IN_GAME,
        tick=tick,
    )


def counting_policy(counter, vector=None):
    def decide(state, features, pilot_entries):
        counter.append(state.tick)
        return vector or NEUTRAL_VECTOR
    return AgentPolicy(id="probe", decide=decide)


# --- cadence ---

def test_inference_runs_only_on_period_boundaries():
    calls = []
    policy = counting_policy(calls)
    sched = AgentSchedule(period=15)
    for t in range(150):
        _, sched = schedule_tick(sched, t, make_state(tick=t), policy)
    assert calls == [0, 15, 30, 45, 60, 75, 90, 105, 120, 135]
    assert len(calls) == 10


def test_vector_is_constant_between_inferences():
    ticks = iter(range(1000))
    def decide(state, features, pilot_entries):
        return AgentActionVector(steer=next(ticks) / 100)
    policy = AgentPolicy(id="drift", decide=decide)
    sched = AgentSchedule(period=15)
    out = []
    for t in range(45):
        vec, sched = schedule_tick(sched, t, make_state(tick=t), policy)
        out.append(vec.steer)
    assert out[0:15] == [0.0] * 15
    assert out[15:30] == [0.01] * 15
    assert out[30:45] == [0.02] * 15


def test_cadence_is_anchored_to_absolute_tick():
    # joining mid-match does not shift the boundary: ticks 7..14 repeat the
    # default vector, the first inference lands on tick 15
    calls = []
    policy = counting_policy(calls)
    sched = AgentSchedule(period=15)
    for t in range(7, 31):
        _, sched = schedule_tick(sched, t, make_state(tick=t), policy)
    assert calls == [15, 30]


def test_non_boundary_tick_returns_stored_vector_unchanged():
    stored = AgentActionVector(throttle=0.5)
    sched = AgentSchedule(period=15, last_vector=stored, last_inference_tick=0)
    vec, after = schedule_tick(sched, 7, make_state(tick=7),
                               counting_policy([]))
    assert vec is stored
    assert after is sched  # no new schedule object off-cadence


def test_tick_regression_is_rejected():
    sched = AgentSchedule(period=15, last_inference_tick=30)
    with pytest.raises(ValueError):
        schedule_tick(sched, 15, make_state(tick=15), counting_policy([]))


def test_period_must_be_positive_int():
    with pytest.raises(ValueError):
        AgentSchedule(period=0)
    with pytest.raises(ValueError):
        AgentSchedule(period=1.5)


def test_failing_policy_repeats_last_vector_and_warns():
    good = AgentActionVector(throttle=1.0, steer=-0.25)
    flaky_calls = []
    def decide(state, features, pilot_entries):
        flaky_calls.append(state.tick)
        if len(flaky_calls) > 1:
            raise RuntimeError("sensor dropout")
        return good
    policy = AgentPolicy(id="flaky", decide=decide)
    warnings = []
    sched = AgentSchedule(period=15)
    vec, sched = schedule_tick(sched, 0, make_state(), policy,
                               on_warning=warnings.append)
    assert vec == good and not warnings
    vec, sched = schedule_tick(sched, 15, make_state(tick=15), policy,
                               on_warning=warnings.append)
    assert vec == good  # degraded to the stored vector, not neutral
    assert len(warnings) == 1
    assert "flaky" in warnings[0] and "15" in warnings[0]
    # the schedule still advances so the next boundary is clean
    assert sched.last_inference_tick == 15


def test_failure_without_warning_hook_is_silent():
    policy = AgentPolicy(id="boom", decide=lambda s, f, p: 1 / 0)
    vec, _ = schedule_tick(AgentSchedule(period=5), 0, make_state(), policy)
    assert vec == NEUTRAL_VECTOR


# --- masking onto the assignment ---

def test_mask_splits_throttle_sign_into_accelerate_and_brake():
    assignment = all_assigned(Assignment.COPILOT_ONLY)
    fwd = {e.action.name: e.value
           for e in mask_actions(AgentActionVector(throttle=0.7), assignment, tick=3)}
    assert fwd["Accelerate"] == 0.7
    assert fwd["Brake"] == 0.0  # explicit released value, not an omission
    rev = {e.action.name: e.value
           for e in mask_actions(AgentActionVector(throttle=-0.4), assignment, tick=3)}
    assert rev["Accelerate"] == 0.0
    assert rev["Brake"] == pytest.approx(0.4)


def test_mask_covers_all_six_arena_actions_when_fully_assigned():
    assignment = all_assigned(Assignment.COPILOT_ONLY)
    vec = AgentActionVector(throttle=1.0, steer=-0.5, jump=1.0, boost=1.0,
                            handbrake=1.0)
    entries = mask_actions(vec, assignment, tick=9)
    assert {e.action.name for e in entries} == {
        "Steer", "Accelerate", "Brake", "Jump", "Boost", "Handbrake"}
    by_name = {e.action.name: e for e in entries}
    assert by_name["Steer"].value == -0.5
    assert all(e.tick == 9 and e.role is Role.COPILOT and e.source == "agent"
               and e.confidence == 1.0 for e in entries)


def test_mask_filters_actions_not_assigned_to_the_role():
    assignment = dict(all_assigned(Assignment.PILOT_ONLY))
    assignment["Boost"] = Assignment.COPILOT_ONLY
    assignment["Steer"] = Assignment.OVERLAPPING
    vec = AgentActionVector(throttle=1.0, steer=1.0, boost=1.0)
    names = {e.action.name for e in mask_actions(vec, assignment, tick=0)}
    assert names == {"Boost", "Steer"}  # overlapping counts for the copilot


def test_mask_respects_pilot_role_argument():
    assignment = dict(all_assigned(Assignment.COPILOT_ONLY))
    assignment["Jump"] = Assignment.PILOT_ONLY
    entries = mask_actions(AgentActionVector(jump=1.0), assignment, tick=0,
                           role=Role.PILOT, source="trainer")
    assert [e.action.name for e in entries] == ["Jump"]
    assert entries[0].role is Role.PILOT and entries[0].source == "trainer"


# --- built-in policies ---

def chase_vector(state, params=None, car_index=0):
    params = params or HeuristicParams()
    features = compute_derived(state, car_index)
    return heuristic_policy(state, features, params, car_index)


def test_chase_drives_straight_at_ball_on_goal_line():
    state = make_state(ball=(10.0, 0.0, 0.0))  # car at origin facing +x
    vec = chase_vector(state)
    assert vec.throttle == 1.0
    assert vec.steer == 0.0
    assert vec.handbrake == 0.0


def test_chase_aims_behind_the_ball_on_the_goal_line():
    # independently recompute the aim point: 6 units behind the ball along
    # the ball-to-goal line; steering is -k * bearing error to that point
    params = HeuristicParams(k_steer=0.5)  # low gain so the clamp stays out
    state = make_state(ball=(20.0, 8.0, 0.0))
    vec = chase_vector(state, params=params)
    to_goal = (params.goal_x - 20.0, -8.0)
    span = math.hypot(*to_goal)
    target = (20.0 - params.behind_distance * to_goal[0] / span,
              8.0 - params.behind_distance * to_goal[1] / span)
    expected_error = math.atan2(target[1], target[0])  # car at origin, yaw 0
    assert vec.steer == pytest.approx(-params.k_steer * expected_error)
    # the aim point is behind the ball, so it tilts past the raw ball bearing
    assert expected_error > math.atan2(8.0, 20.0)


def test_chase_steers_left_for_target_on_the_left():
    # small positive bearing error -> steer negative (left), proportional
    state = make_state(ball=(30.0, 3.0, 0.0))
    vec = chase_vector(state)
    assert -1.0 < vec.steer < 0.0
    assert vec.throttle == 1.0


def test_chase_reverses_when_target_is_behind():
    state = make_state(ball=(-20.0, 0.1, 0.0))  # behind the car, goal ahead
    vec = chase_vector(state)
    assert vec.throttle == -0.5
    assert vec.steer in (-1.0, 1.0)
    assert vec.handbrake == 1.0  # |error| near pi exceeds the drift angle


def test_chase_boosts_only_with_fuel_reserve():
    aligned = make_state(ball=(10.0, 0.0, 0.0), boost=100.0)
    assert chase_vector(aligned).boost == 1.0
    broke = make_state(ball=(10.0, 0.0, 0.0), boost=5.0)
    assert chase_vector(broke).boost == 0.0


def test_chase_jumps_for_a_close_low_ball():
    near = make_state(ball=(3.0, 0.0, 0.5))
    assert chase_vector(near).jump == 1.0
    high = make_state(ball=(3.0, 0.0, 5.0))
    assert chase_vector(high).jump == 0.0
    far = make_state(ball=(30.0, 0.0, 0.5))
    assert chase_vector(far).jump == 0.0


def test_chase_goal_x_flips_attack_direction():
    # defending copilot of team 1 aims at the -x goal
    state = make_state(ball=(10.0, 0.0, 0.0))
    vec = chase_vector(state, params=HeuristicParams(goal_x=-60.0))
    # aim point is now on the far side of the ball (x = 10 + 6)
    assert vec.throttle == 1.0


def test_chase_handles_ball_exactly_at_goal_center():
    state = make_state(ball=(60.0, 0.0, 0.0))
    vec = chase_vector(state)  # degenerate ball-to-goal span
    assert vec.throttle == 1.0 and vec.steer == 0.0


def test_make_heuristic_agent_identity_and_determinism():
    agent = make_heuristic_agent()
    assert agent.id == "chase" and agent.car_index == 0
    state = make_state(ball=(12.0, -4.0, 0.0))
    features = compute_derived(state, 0)
    a = agent.decide(state, features, ())
    b = agent.decide(state, features, ())
    assert a == b


def test_make_heuristic_agent_respects_car_index():
    agent = make_heuristic_agent(HeuristicParams(goal_x=-60.0), car_index=1,
                                 policy_id="opponent")
    assert agent.car_index == 1 and agent.id == "opponent"
    state = make_state(ball=(10.0, 0.0, 0.0))
    vec = agent.decide(state, compute_derived(state, 1), ())
    assert vec.throttle == 1.0  # car 1 at +40 facing -x, ball ahead of it


def test_idle_agent_is_neutral():
    agent = make_idle_agent()
    assert agent.id == "idle"
    state = make_state(ball=(5.0, 5.0, 0.0))
    assert agent.decide(state, compute_derived(state, 0), ()) == NEUTRAL_VECTOR
    entries = mask_actions(agent.decide(state, compute_derived(state, 0), ()),
                           all_assigned(Assignment.COPILOT_ONLY), tick=0)
    assert all(e.value == 0.0 for e in entries)
