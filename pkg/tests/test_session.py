"""Session runtime: config, sources, pipeline order, logging, replay, export."""
import json
import time

import pytest

from sharedpad.arena import ArenaConfig, Phase
from sharedpad.errors import ConfigError, ReplayError
from sharedpad.model import Assignment, Role, all_assigned, parse_assignment_value
from sharedpad.session import (
    IdleSource,
    LOG_DIR_ENV,
    MatchEngine,
    Mode,
    QueueSource,
    ScriptedSource,
    SessionConfig,
    TickLog,
    export_augmented_log,
    load_config,
    replay_log,
    resolve_log_path,
    run_match,
    write_augmented_log,
)


def short_config(seconds=0.5, **overrides):
    config = SessionConfig(arena=ArenaConfig(match_seconds=seconds))
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


# --- config validation ---

def test_default_config_is_valid():
    SessionConfig().validate()


def test_all_idle_sources_rejected():
    config = short_config(pilot_source="idle", copilot_source="idle")
    with pytest.raises(ConfigError, match="no input sources"):
        config.validate()


def test_partial_automation_needs_an_agent():
    config = short_config(mode=Mode.PARTIAL_AUTOMATION,
                          pilot_source="remote", copilot_source="remote")
    with pytest.raises(ConfigError, match="agent"):
        config.validate()


def test_human_cooperation_needs_two_humans():
    config = short_config(mode=Mode.HUMAN_COOPERATION,
                          pilot_source="remote", copilot_source="agent:chase")
    with pytest.raises(ConfigError, match="two human"):
        config.validate()


def test_hybrid_needs_one_of_each():
    config = short_config(mode=Mode.HYBRID,
                          pilot_source="agent:chase", copilot_source="agent:idle")
    with pytest.raises(ConfigError, match="human"):
        config.validate()
    ok = short_config(mode=Mode.HYBRID,
                      pilot_source="remote", copilot_source="agent:chase")
    ok.validate()


def test_unknown_agent_id_rejected():
    config = short_config(copilot_source="agent:deep_rl")
    with pytest.raises(ConfigError, match="deep_rl"):
        config.validate()


def test_unknown_source_grammar_rejected():
    config = short_config(pilot_source="telepathy")
    with pytest.raises(ConfigError, match="telepathy"):
        config.validate()


def test_unknown_opponent_rejected():
    config = short_config(opponent="mirror")
    with pytest.raises(ConfigError, match="mirror"):
        config.validate()


def test_agent_period_must_be_positive_int():
    with pytest.raises(ConfigError):
        short_config(agent_period=0).validate()
    with pytest.raises(ConfigError):
        short_config(agent_period=2.5).validate()


def test_unknown_agent_param_rejected():
    config = short_config(agent_params={"aggression": 2.0})
    with pytest.raises(ConfigError, match="aggression"):
        config.validate()


def test_heuristic_params_default_goal_tracks_attack_sign():
    config = short_config()
    assert config.heuristic_params(1.0).goal_x == config.arena.half_length
    assert config.heuristic_params(-1.0).goal_x == -config.arena.half_length
    pinned = short_config(agent_params={"goal_x": 10.0})
    assert pinned.heuristic_params(-1.0).goal_x == 10.0


def test_taxonomy_label_tracks_assignment():
    assert short_config().taxonomy_label() == "reciprocal"
    config = short_config(assignment=all_assigned(Assignment.PILOT_ONLY))
    config.assignment["Boost"] = Assignment.COPILOT_ONLY
    assert config.taxonomy_label() == "disjoint"


def test_log_header_carries_the_session_description():
    header = short_config(seconds=2.0).log_header()
    assert header["format"] == "sharedpad-session-log"
    assert header["mode"] == "partial_automation"
    assert header["label"] == "reciprocal"
    assert header["tick_rate"] == 120
    assert header["match_seconds"] == 2.0
    assert header["sources"] == {"pilot": "idle", "copilot": "agent:chase"}
    assert header["mappings"]["pilot"]["RightTrigger"] == "Accelerate"
    assert header["policies"]["Steer"] == "average"
    assert header["arena"]["half_length"] == 60.0


# --- INI config files ---

FULL_INI = """
[session]
mode = hybrid
pilot = remote
copilot = agent:chase
opponent = idle
match_seconds = 1.5
log = out.ndjson

[arena]
seed = 7
golden_goal = true
half_length = 50

[mapping.pilot]
LeftStick = Steer
RightTrigger = Accelerate
LeftTrigger = Brake
A = Jump
B = Boost
X = Handbrake

[assignment]
Steer = overlapping
Accelerate = pilot
Brake = pilot
Jump = copilot
Boost = copilot
Handbrake = overlapping

[policies]
Steer = average
Jump = binary
Boost = override:low_fuel

[agent]
period = 30
k_steer = 1.5
"""


def test_load_config_full_ini(tmp_path):
    path = tmp_path / "session.ini"
    path.write_text(FULL_INI)
    config = load_config(path)
    assert config.mode is Mode.HYBRID
    assert config.pilot_source == "remote"
    assert config.copilot_source == "agent:chase"
    assert config.opponent == "idle"
    assert config.log_path == "out.ndjson"
    assert config.arena.match_seconds == 1.5
    assert config.arena.seed == 7
    assert config.arena.golden_goal is True
    assert config.arena.half_length == 50.0
    assert config.assignment["Accelerate"] is Assignment.PILOT_ONLY
    assert config.assignment["Jump"] is Assignment.COPILOT_ONLY
    assert config.taxonomy_label() == "hybrid"
    assert config.agent_period == 30
    assert config.agent_params == {"k_steer": 1.5}
    from sharedpad.arbitrator import ContinuousAverage, OverrideByAgent
    assert isinstance(config.policies["Steer"], ContinuousAverage)
    assert isinstance(config.policies["Boost"], OverrideByAgent)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.ini")


def test_load_config_malformed(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("mode = hybrid\n")  # options before any section header
    with pytest.raises(ConfigError, match="malformed"):
        load_config(path)


def test_load_config_unknown_arena_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[arena]\nwind_speed = 3\n")
    with pytest.raises(ConfigError, match="wind_speed"):
        load_config(path)


def test_load_config_unknown_mode(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[session]\nmode = freestyle\n")
    with pytest.raises(ConfigError, match="freestyle"):
        load_config(path)


def test_load_config_bad_number(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[arena]\nseed = soon\n")
    with pytest.raises(ConfigError, match="seed"):
        load_config(path)


def test_load_config_invalid_arena_value(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[arena]\ntick_rate = 60\n")
    with pytest.raises(ConfigError):
        load_config(path)


# --- input sources ---

def test_idle_source_reports_untouched_pad():
    assert IdleSource().poll(0) == {}


def test_queue_source_lifecycle():
    source = QueueSource()
    assert source.poll(0) is None  # nothing connected yet
    source.set_state("RightTrigger", 0.75)
    assert source.poll(1) == {"RightTrigger": 0.75}
    snapshot = source.poll(2)
    snapshot["RightTrigger"] = 0.0  # callers get a copy
    assert source.poll(3) == {"RightTrigger": 0.75}
    source.set_state("LeftStick", [0.5, -0.5])
    assert source.poll(4)["LeftStick"] == (0.5, -0.5)
    source.disconnect()
    assert source.poll(5) is None
    source.connect()
    assert source.poll(6) == {}  # state was dropped with the connection


def test_scripted_source_is_sticky_and_can_disconnect():
    source = ScriptedSource([
        (0, {"A": 1.0}),
        (10, {"A": 0.0, "B": 1.0}),
        (20, None),
    ])
    assert source.poll(0) == {"A": 1.0}
    assert source.poll(5) == {"A": 1.0}
    assert source.poll(12) == {"A": 0.0, "B": 1.0}
    assert source.poll(20) is None
    assert source.poll(99) is None


def test_scripted_source_applies_skipped_records():
    source = ScriptedSource([(0, {"A": 1.0}), (3, {"A": 0.25})])
    # polling far past both records must land on the latest one
    assert source.poll(50) == {"A": 0.25}


def test_scripted_source_from_file(tmp_path):
    path = tmp_path / "pilot.ndjson"
    path.write_text(
        '{"tick": 0, "states": {"RightTrigger": 1.0, "LeftStick": [0.5, 0.0]}}\n'
        '{"tick": 8, "disconnect": true}\n'
    )
    source = ScriptedSource.from_file(path)
    assert source.poll(0) == {"RightTrigger": 1.0, "LeftStick": (0.5, 0.0)}
    assert source.poll(8) is None


def test_scripted_source_rejects_bad_lines(tmp_path):
    path = tmp_path / "bad.ndjson"
    path.write_text('{"states": {"A": 1.0}}\n')  # no tick
    with pytest.raises(ConfigError, match="bad.ndjson:1"):
        ScriptedSource.from_file(path)
    with pytest.raises(ConfigError, match="cannot read"):
        ScriptedSource.from_file(tmp_path / "absent.ndjson")


# --- engine pipeline ---

def test_pipeline_stages_fire_in_order_every_tick():
    trace = []
    config = short_config(seconds=0.1)  # 12 ticks
    run_match(config, stage_hook=lambda tick, stage: trace.append((tick, stage)))
    stages = ["interpret", "agent", "arbitrate", "apply", "step"]
    expected = [(t, s) for t in range(12) for s in stages]
    assert trace == expected


def test_engine_logs_one_frame_and_two_controllers_per_tick():
    config = short_config(seconds=0.25)  # 30 ticks
    _, log = run_match(config)
    frames = log.frame_records()
    assert [f["tick"] for f in frames] == list(range(30))
    controllers = [r for r in log.records if r["type"] == "controller"]
    assert len(controllers) == 60  # cars 0 and 1, every tick
    assert {r["car"] for r in controllers} == {0, 1}


def test_match_result_duration_and_scores_consistent():
    result, log = run_match(short_config(seconds=0.5))
    assert result.duration_seconds == pytest.approx(0.5)
    goals = [e for e in result.events if e.kind == "goal"]
    assert result.scores[0] == sum(1 for g in goals if g.team == 0)
    assert result.scores[1] == sum(1 for g in goals if g.team == 1)
    assert result.goal_differential == result.scores[0] - result.scores[1]
    as_dict = result.as_dict()
    assert as_dict["scores"] == {"0": result.scores[0], "1": result.scores[1]}
    assert len(as_dict["goals"]) == len(goals)


def test_pilot_inputs_flow_into_log_and_frames():
    # the copilot seat stays disconnected, so the pilot's values pass through
    config = short_config(seconds=0.1, mode=Mode.HUMAN_COOPERATION,
                          pilot_source="remote", copilot_source="remote",
                          opponent="idle")
    pilot = QueueSource()
    pilot.set_state("RightTrigger", 1.0)
    _, log = run_match(config, sources={Role.PILOT: pilot})
    inputs = log.input_records()
    accel = [r for r in inputs if r["action"] == "Accelerate" and r["role"] == "pilot"]
    assert len(accel) == 12  # held the whole match, recorded every tick
    assert all(r["value"] == 1.0 and r["source"] == "pilot" for r in accel)
    # zero-valued actions are not recorded as inputs
    assert not any(r["action"] == "Jump" and r["role"] == "pilot" for r in inputs)
    frame = log.frame_records()[5]
    assert frame["values"]["Accelerate"] == 1.0
    assert frame["roles"]["Accelerate"] == ["pilot"]


def test_match_continues_when_a_source_disconnects():
    # liveness: a vanishing pilot contributes nothing but never stalls play
    config = short_config(seconds=0.5, pilot_source="remote", opponent="idle",
                          copilot_source="agent:idle")
    pilot = ScriptedSource([(0, {"RightTrigger": 1.0}), (20, None)])
    result, log = run_match(config, sources={Role.PILOT: pilot})
    assert result.duration_seconds == pytest.approx(0.5)
    assert [f["tick"] for f in log.frame_records()] == list(range(60))
    held = [r for r in log.input_records() if r["action"] == "Accelerate"]
    assert [r["tick"] for r in held] == list(range(20))  # nothing after the drop
    assert log.frame_records()[30]["values"]["Accelerate"] == 0.0


def test_goal_reset_tick_suspends_interpretation():
    config = short_config(seconds=1.0, opponent="idle", copilot_source="agent:idle",
                          pilot_source="remote")

    class CountingSource:
        def __init__(self):
            self.polled = []
        def poll(self, tick):
            self.polled.append(tick)
            return {}

    pilot = CountingSource()
    engine = MatchEngine(config, sources={Role.PILOT: pilot})
    engine.world.ball.x = config.arena.half_length - 0.05
    engine.world.ball.vx = 30.0
    events = engine.tick()
    assert any(e.kind == "goal" for e in events)
    goal_tick = engine.world.tick
    assert engine.world.phase == Phase.GOAL_SCORED

    polled_before = list(pilot.polled)
    events = engine.tick()  # the reset tick: ui is not IN_GAME, work is gated
    assert any(e.kind == "kickoff" for e in events)
    assert pilot.polled == polled_before  # not polled while suspended
    assert engine.world.phase == Phase.PLAY
    assert engine.world.tick == goal_tick + 1
    # the suspended tick still logged a (neutral) frame to keep the log dense
    assert engine.log.frame_records()[-1]["tick"] == goal_tick
    assert set(engine.log.frame_records()[-1]["values"].values()) == {0.0}


def test_agent_copilot_drives_the_shared_car():
    config = short_config(seconds=0.25, opponent="idle")  # copilot agent:chase
    result, log = run_match(config)
    frame = log.frame_records()[16]  # past the first inference
    assert frame["values"]["Accelerate"] == 1.0  # chase floors it at kickoff
    assert any(r["role"] == "copilot" and r["source"] == "agent:chase"
               for r in log.input_records())


def test_paced_run_sleeps_to_wall_clock():
    config = short_config(seconds=0.05)  # 6 ticks = 50 ms
    start = time.monotonic()
    run_match(config, headless=False)
    elapsed = time.monotonic() - start
    assert elapsed >= 0.04
    assert elapsed < 1.0


# --- tick log mechanics ---

def test_tick_log_rejects_out_of_order_records():
    log = TickLog({"tick_rate": 120})
    log.add_input(5, Role.PILOT, "pilot", "Jump", 1.0)
    with pytest.raises(ValueError, match="ordered"):
        log.add_input(4, Role.PILOT, "pilot", "Jump", 1.0)


def test_tick_log_rejects_duplicate_frames():
    log = TickLog({"tick_rate": 120})
    log.add_frame(0, {"Jump": 0.0}, {})
    with pytest.raises(ValueError, match="duplicate"):
        log.add_frame(0, {"Jump": 0.0}, {})


def test_tick_log_write_read_round_trip(tmp_path):
    config = short_config(seconds=0.1)
    _, log = run_match(config)
    path = tmp_path / "match.ndjson"
    log.write(path)
    loaded = TickLog.read(path)
    assert loaded.header == log.header
    assert loaded.records == log.records


def test_tick_log_read_requires_header(tmp_path):
    path = tmp_path / "headless.ndjson"
    path.write_text('{"type": "frame", "tick": 0, "values": {}}\n')
    with pytest.raises(ReplayError, match="header"):
        TickLog.read(path)


def test_tick_log_read_rejects_malformed(tmp_path):
    path = tmp_path / "broken.ndjson"
    path.write_text("{nope\n")
    with pytest.raises(ReplayError):
        TickLog.read(path)


def test_log_dir_env_var_redirects_relative_paths(tmp_path, monkeypatch):
    monkeypatch.setenv(LOG_DIR_ENV, str(tmp_path / "logs"))
    assert resolve_log_path("a.ndjson") == tmp_path / "logs" / "a.ndjson"
    absolute = tmp_path / "elsewhere.ndjson"
    assert resolve_log_path(absolute) == absolute
    monkeypatch.delenv(LOG_DIR_ENV)
    assert resolve_log_path("a.ndjson") == resolve_log_path("a.ndjson")


def test_run_match_writes_log_into_env_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(LOG_DIR_ENV, str(tmp_path))
    config = short_config(seconds=0.1, log_path="nested/run.ndjson")
    run_match(config)
    assert (tmp_path / "nested" / "run.ndjson").exists()
    loaded = TickLog.read(tmp_path / "nested" / "run.ndjson")
    assert loaded.header["format"] == "sharedpad-session-log"


# --- replay ---

def test_replay_reproduces_the_match_bit_for_bit():
    config = short_config(seconds=2.0, opponent="chase")
    result, log = run_match(config)
    replayed, digest = replay_log(log, config.arena)
    assert replayed.scores == result.scores
    assert replayed.duration_seconds == result.duration_seconds
    assert [e for e in replayed.events if e.kind == "goal"] == [
        e for e in result.events if e.kind == "goal"]
    _, digest_again = replay_log(log, config.arena)
    assert digest == digest_again


def test_replay_rejects_foreign_tick_rate():
    _, log = run_match(short_config(seconds=0.1))
    log.header["tick_rate"] = 60
    with pytest.raises(ReplayError, match="tick rate"):
        replay_log(log, ArenaConfig())


def test_replay_detects_tampered_inputs():
    config = short_config(seconds=1.0)
    _, log = run_match(config)
    _, clean = replay_log(log, config.arena)
    for record in log.records:
        if record["type"] == "controller" and record["tick"] == 30 and record["car"] == 0:
            record["elements"]["A"] = 1.0  # forge a jump press
            break
    _, tampered = replay_log(log, config.arena)
    assert tampered != clean


# --- augmented export ---

def test_export_augmented_log_shows_both_controllers():
    config = short_config(
        seconds=0.25, mode=Mode.HUMAN_COOPERATION, opponent="idle",
        pilot_source="remote", copilot_source="remote")
    pilot = ScriptedSource([(0, {"RightTrigger": 1.0}), (10, {})])
    copilot = ScriptedSource([(0, {"B": 1.0}), (20, {})])
    _, log = run_match(config, sources={Role.PILOT: pilot, Role.COPILOT: copilot})
    overlay = export_augmented_log(log)
    assert [r["tick"] for r in overlay] == list(range(30))  # dense stream
    assert all(r["type"] == "overlay" for r in overlay)
    assert overlay[5]["pilot"] == [["RightTrigger", 1.0]]
    assert overlay[5]["copilot"] == [["B", 1.0]]
    assert overlay[15]["pilot"] == []  # released
    assert overlay[15]["copilot"] == [["B", 1.0]]
    assert overlay[25] == {"type": "overlay", "tick": 25, "pilot": [], "copilot": []}


def test_export_maps_actions_back_through_each_roles_layout():
    from sharedpad.model import ControllerMapping
    config = short_config(
        seconds=0.1, mode=Mode.HUMAN_COOPERATION, opponent="idle",
        pilot_source="remote", copilot_source="remote")
    # copilot plays boost on Y instead of B
    config.mappings[Role.COPILOT] = ControllerMapping.of(
        ("LeftStick", "Steer"), ("RightTrigger", "Accelerate"),
        ("LeftTrigger", "Brake"), ("A", "Jump"), ("Y", "Boost"),
        ("X", "Handbrake"))
    copilot = ScriptedSource([(0, {"Y": 1.0})])
    _, log = run_match(config, sources={Role.PILOT: IdleSource(),
                                        Role.COPILOT: copilot})
    overlay = export_augmented_log(log)
    assert overlay[3]["copilot"] == [["Y", 1.0]]


def test_write_augmented_log_file(tmp_path):
    _, log = run_match(short_config(seconds=0.1))
    path = write_augmented_log(log, tmp_path / "overlay.ndjson")
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["type"] == "overlay_header"
    assert header["mappings"]["pilot"]["A"] == "Jump"
    records = [json.loads(line) for line in lines[1:]]
    assert [r["tick"] for r in records] == list(range(12))
