"""Session orchestration: config loading, the tick loop, and match logs.

One orchestration context owns the tick loop and all mutable state. Input
sources (scripted files, remote clients, software agents) feed entries into
the per-tick pipeline:

    interpret -> agent -> arbitrate -> apply -> step

and everything observable (inputs, merged frames, controller states, events)
lands in an append-only TickLog that suffices to replay the match.
"""
from __future__ import annotations

import configparser
import enum
import json
import os
import time
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Protocol, Sequence, Union

from .agent import (
    AgentPolicy,
    AgentSchedule,
    HeuristicParams,
    make_heuristic_agent,
    make_idle_agent,
    mask_actions,
    schedule_tick,
)
from .arbitrator import (
    MergedActionFrame,
    Policy,
    VirtualControllerState,
    arbitrate_frame,
    default_policy_table,
    frame_to_commands,
    normalize_policy_table,
    parse_policy,
    validate_policies,
    virtual_apply,
    BinaryDisjunction,
    ContinuousAverage,
    OverrideByAgent,
    SelectPriority,
)
from .arena import (
    ArenaConfig,
    Phase,
    SimEvent,
    SimWorld,
    controller_from_elements,
    controller_record,
    new_world,
    snapshot_state,
    step,
    trace_hasher,
)
from .errors import ConfigError, ReplayError
from .interpreter import InterpreterContext, interpret_states
from .model import (
    ARENA_ACTIONS,
    Assignment,
    ControllerMapping,
    DEFAULT_GAME_MAPPING,
    InputEntry,
    Intensity,
    Role,
    all_assigned,
    classify_assignment,
    parse_assignment_value,
    resolve_element,
    validate_assignment,
    validate_mapping,
)
from .protocol import GameState, encode_state, suspend_on_pause

LOG_DIR_ENV = "SHAREDPAD_LOG_DIR"

StageHook = Callable[[int, str], None]
Broadcaster = Callable[[GameState, MergedActionFrame, Sequence[SimEvent]], None]


class Mode(enum.Enum):
    HUMAN_COOPERATION = "human_cooperation"
    PARTIAL_AUTOMATION = "partial_automation"
    HYBRID = "hybrid"


# ---------------------------------------------------------------------------
# input sources
# ---------------------------------------------------------------------------

class InputSource(Protocol):
    def poll(self, tick: int) -> Optional[Mapping[str, Intensity]]:
        """Latest element states at a tick boundary; None while disconnected."""


class IdleSource:
    """A connected device that never gets touched."""

    def poll(self, tick: int) -> Optional[Mapping[str, Intensity]]:
        return {}


class QueueSource:
    """Fed by a remote client; latest state at the tick boundary wins."""

    def __init__(self) -> None:
        self._states: dict[str, Intensity] = {}
        self._connected = False

    def connect(self) -> None:
        self._connected = True

    def disconnect(self) -> None:
        self._connected = False
        self._states.clear()

    def set_state(self, element_id: str, intensity: Intensity) -> None:
        if isinstance(intensity, list):
            intensity = tuple(intensity)
        self._states[element_id] = intensity
        self._connected = True

    def poll(self, tick: int) -> Optional[Mapping[str, Intensity]]:
        if not self._connected:
            return None
        return dict(self._states)


class ScriptedSource:
    """Replays device snapshots from (tick, states) records, sticky per tick.

    A record may carry ``disconnect: true`` instead of states, after which
    the source stops contributing (used by the liveness tests).
    """

    def __init__(self, records: Iterable[tuple[int, Optional[Mapping[str, Intensity]]]]):
        self._records = sorted(records, key=lambda r: r[0])
        self._cursor = 0
        self._states: dict[str, Intensity] = {}
        self._connected = True

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedSource":
        records: list[tuple[int, Optional[dict]]] = []
        try:
            with open(path, "r", encoding="utf-8") as handle:
                for n, line in enumerate(handle):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                        tick = int(obj["tick"])
                    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                        raise ConfigError(f"{path}:{n + 1}: bad script record ({exc})") from None
                    if obj.get("disconnect"):
                        records.append((tick, None))
                    else:
                        states = {
                            k: (tuple(v) if isinstance(v, list) else v)
                            for k, v in dict(obj.get("states", {})).items()
                        }
                        records.append((tick, states))
        except OSError as exc:
            raise ConfigError(f"cannot read input script {path}: {exc}") from None
        return cls(records)

    def poll(self, tick: int) -> Optional[Mapping[str, Intensity]]:
        while self._cursor < len(self._records) and self._records[self._cursor][0] <= tick:
            _, states = self._records[self._cursor]
            if states is None:
                self._connected = False
            else:
                self._states = dict(states)
            self._cursor += 1
        if not self._connected:
            return None
        return dict(self._states)


def _source_kind(spec: str) -> str:
    if spec == "idle":
        return "idle"
    if spec in ("remote", "local") or spec.startswith(("remote:", "local:")):
        return "human"
    if spec.startswith("script:"):
        return "human"
    if spec.startswith("agent:"):
        return "agent"
    raise ConfigError(
        f"unknown source {spec!r} (want idle, remote, local[:id], script:<path>, agent:<id>)"
    )


AGENT_IDS = ("chase", "idle")


# ---------------------------------------------------------------------------
# session config
# ---------------------------------------------------------------------------

def _policy_str(policy: Policy) -> str:
    if isinstance(policy, BinaryDisjunction):
        return "binary"
    if isinstance(policy, ContinuousAverage):
        return "average"
    if isinstance(policy, SelectPriority):
        return f"select:{policy.priority.value}"
    if isinstance(policy, OverrideByAgent):
        return f"override:{policy.predicate}"
    raise TypeError(f"unknown policy {policy!r}")


@dataclass
class SessionConfig:
    mode: Mode = Mode.PARTIAL_AUTOMATION
    pilot_source: str = "idle"
    copilot_source: str = "agent:chase"
    mappings: dict[Role, ControllerMapping] = field(
        default_factory=lambda: {Role.PILOT: DEFAULT_GAME_MAPPING,
                                 Role.COPILOT: DEFAULT_GAME_MAPPING})
    assignment: dict[str, Assignment] = field(
        default_factory=lambda: all_assigned(Assignment.OVERLAPPING))
    policies: dict[str, Policy] = field(default_factory=default_policy_table)
    arena: ArenaConfig = field(default_factory=ArenaConfig)
    opponent: str = "chase"
    agent_period: int = 15
    agent_params: dict[str, float] = field(default_factory=dict)
    log_path: Optional[str] = None

    def validate(self) -> None:
        kinds = {role: _source_kind(spec) for role, spec in self.sources().items()}
        humans = sum(1 for k in kinds.values() if k == "human")
        agents = sum(1 for k in kinds.values() if k == "agent")
        if humans + agents == 0:
            raise ConfigError("no input sources configured (both roles idle)")
        if self.mode is Mode.PARTIAL_AUTOMATION and agents < 1:
            raise ConfigError("partial_automation needs at least one agent source")
        if self.mode is Mode.HUMAN_COOPERATION and humans < 2:
            raise ConfigError("human_cooperation needs two human sources")
        if self.mode is Mode.HYBRID and (humans < 1 or agents < 1):
            raise ConfigError("hybrid needs a human and an agent source")
        for role, spec in self.sources().items():
            if kinds[role] == "agent":
                agent_id = spec.split(":", 1)[1]
                if agent_id not in AGENT_IDS:
                    raise ConfigError(f"unknown agent policy {agent_id!r} "
                                      f"(available: {', '.join(AGENT_IDS)})")
        for role in (Role.PILOT, Role.COPILOT):
            mapping = self.mappings.get(role)
            if mapping is None:
                raise ConfigError(f"no mapping for {role.value}")
            validate_mapping(mapping, ARENA_ACTIONS).raise_for_violations(
                f"mapping.{role.value}")
        validate_assignment(self.assignment, ARENA_ACTIONS).raise_for_violations("assignment")
        validate_policies(self.policy_table(), ARENA_ACTIONS).raise_for_violations("policies")
        if self.opponent not in ("chase", "idle"):
            raise ConfigError(f"unknown opponent {self.opponent!r} (want chase or idle)")
        if not isinstance(self.agent_period, int) or self.agent_period < 1:
            raise ConfigError(f"agent period must be an int >= 1, got {self.agent_period!r}")
        known = {f.name for f in dataclass_fields(HeuristicParams)}
        for key in self.agent_params:
            if key not in known:
                raise ConfigError(f"unknown agent parameter {key!r}")

    def sources(self) -> dict[Role, str]:
        return {Role.PILOT: self.pilot_source, Role.COPILOT: self.copilot_source}

    def policy_table(self) -> dict[str, Policy]:
        return normalize_policy_table(self.policies, ARENA_ACTIONS)

    def heuristic_params(self, attack_sign: float = 1.0) -> HeuristicParams:
        params = dict(self.agent_params)
        params.setdefault("goal_x", attack_sign * self.arena.half_length)
        return HeuristicParams(**params)

    def taxonomy_label(self) -> str:
        return classify_assignment(self.assignment)

    def log_header(self) -> dict:
        return {
            "type": "header",
            "format": "sharedpad-session-log",
            "version": 1,
            "mode": self.mode.value,
            "label": self.taxonomy_label(),
            "tick_rate": self.arena.tick_rate,
            "match_seconds": self.arena.match_seconds,
            "seed": self.arena.seed,
            "opponent": self.opponent,
            "sources": {role.value: spec for role, spec in self.sources().items()},
            "mappings": {
                role.value: self.mappings[role].as_dict()
                for role in (Role.PILOT, Role.COPILOT)
            },
            "assignment": {name: mode.value for name, mode in self.assignment.items()},
            "policies": {name: _policy_str(p) for name, p in self.policy_table().items()},
            "arena": json.loads(self.arena.fingerprint()),
        }


# --- config file parsing ---

def _coerce(raw: str, target_type: type, where: str) -> Any:
    raw = raw.strip()
    try:
        if target_type is bool:
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path: Union[str, Path]) -> SessionConfig:
    """Parse and validate a session config file (INI-style sections)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # element ids and action names are case-sensitive
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> SessionConfig:
    config = SessionConfig()

    if parser.has_section("session"):
        session = parser["session"]
        if "mode" in session:
            try:
                config.mode = Mode(session["mode"].strip().lower())
            except ValueError:
                raise ConfigError(f"unknown mode {session['mode']!r}") from None
        config.pilot_source = session.get("pilot", config.pilot_source).strip()
        config.copilot_source = session.get("copilot", config.copilot_source).strip()
        if "log" in session:
            config.log_path = session["log"].strip()
        if "opponent" in session:
            config.opponent = session["opponent"].strip().lower()

    arena_kwargs: dict[str, Any] = {}
    if parser.has_section("arena"):
        arena_fields = {f.name: f for f in dataclass_fields(ArenaConfig)}
        types = {"tick_rate": int, "seed": int, "golden_goal": bool}
        for key, raw in parser["arena"].items():
            if key == "opponent":  # accepted here as well for convenience
                config.opponent = raw.strip().lower()
                continue
            if key not in arena_fields:
                raise ConfigError(f"[arena] unknown setting {key!r}")
            target = types.get(key, float)
            arena_kwargs[key] = _coerce(raw, target, f"[arena] {key}")
    if parser.has_option("session", "match_seconds"):
        arena_kwargs["match_seconds"] = _coerce(
            parser["session"]["match_seconds"], float, "[session] match_seconds")
    try:
        config.arena = ArenaConfig(**arena_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[arena] {exc}") from None

    for role in (Role.PILOT, Role.COPILOT):
        section = f"mapping.{role.value}"
        if parser.has_section(section):
            bindings = []
            for element_spec, action in parser[section].items():
                bindings.append((resolve_element(element_spec), action.strip()))
            config.mappings[role] = ControllerMapping(tuple(bindings))

    if parser.has_section("assignment"):
        config.assignment = {
            action: parse_assignment_value(raw)
            for action, raw in parser["assignment"].items()
        }

    if parser.has_section("policies"):
        for action, raw in parser["policies"].items():
            config.policies[action] = parse_policy(raw)

    if parser.has_section("agent"):
        for key, raw in parser["agent"].items():
            if key == "period":
                config.agent_period = _coerce(raw, int, "[agent] period")
            else:
                config.agent_params[key] = _coerce(raw, float, f"[agent] {key}")

    config.validate()
    return config


# ---------------------------------------------------------------------------
# tick log
# ---------------------------------------------------------------------------

class TickLog:
    """Append-only match log: inputs, merged frames, controllers, events.

    Input records are written for activations only (non-zero values); the
    per-tick controller records carry the complete state the arena consumed,
    which is what replay needs.
    """

    def __init__(self, header: dict):
        self.header = dict(header)
        self.records: list[dict] = []
        self._last_tick = -1
        self._last_frame_tick = -1

    def _advance(self, tick: int) -> None:
        if tick < self._last_tick:
            raise ValueError(f"tick {tick} after tick {self._last_tick} (log must be ordered)")
        self._last_tick = tick

    def add_input(self, tick: int, role: Role, source: str, action: str, value: float) -> None:
        self._advance(tick)
        self.records.append({"type": "input", "tick": tick, "role": role.value,
                             "source": source, "action": action, "value": value})

    def add_frame(self, tick: int, values: Mapping[str, float],
                  contributors: Mapping[str, Iterable[Role]]) -> None:
        self._advance(tick)
        if tick <= self._last_frame_tick:
            raise ValueError(f"duplicate frame record for tick {tick}")
        self._last_frame_tick = tick
        record: dict[str, Any] = {"type": "frame", "tick": tick, "values": dict(values)}
        roles = {action: sorted(r.value for r in who)
                 for action, who in contributors.items() if who}
        if roles:
            record["roles"] = roles
        self.records.append(record)

    def add_controller(self, tick: int, car: int, controller: VirtualControllerState) -> None:
        self._advance(tick)
        self.records.append(controller_record(tick, car, controller))

    def add_event(self, event: SimEvent) -> None:
        self._advance(event.tick)
        record = {"type": "event", "kind": event.kind, "tick": event.tick}
        if event.team is not None:
            record["team"] = event.team
        if event.car is not None:
            record["car"] = event.car
        if event.pad is not None:
            record["pad"] = event.pad
        self.records.append(record)

    # --- views ---

    def frame_records(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "frame"]

    def input_records(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "input"]

    def event_records(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "event"]

    def controller_states(self) -> dict[int, dict[int, VirtualControllerState]]:
        per_tick: dict[int, dict[int, VirtualControllerState]] = {}
        for r in self.records:
            if r["type"] == "controller":
                per_tick.setdefault(r["tick"], {})[r["car"]] = (
                    controller_from_elements(r["elements"]))
        return per_tick

    # --- persistence ---

    def write(self, path: Union[str, Path]) -> Path:
        path = resolve_log_path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(self.header, separators=(",", ":")) + "\n")
            for record in self.records:
                handle.write(json.dumps(record, separators=(",", ":")) + "\n")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "TickLog":
        header: Optional[dict] = None
        records: list[dict] = []
        try:
            with open(path, "r", encoding="utf-8") as handle:
                for n, line in enumerate(handle):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise ReplayError(f"{path}:{n + 1}: malformed JSON ({exc})") from None
                    if obj.get("type") == "header":
                        header = obj
                    else:
                        records.append(obj)
        except OSError as exc:
            raise ReplayError(f"cannot read log {path}: {exc}") from None
        if header is None:
            raise ReplayError(f"{path}: no header record")
        log = cls(header)
        log.records = records
        if records:
            log._last_tick = max(r.get("tick", 0) for r in records)
        return log


def resolve_log_path(path: Union[str, Path]) -> Path:
    """Relative log paths land in $SHAREDPAD_LOG_DIR when it is set."""
    path = Path(path)
    base = os.environ.get(LOG_DIR_ENV)
    if base and not path.is_absolute():
        return Path(base) / path
    return path


# ---------------------------------------------------------------------------
# match results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    scores: tuple[int, int]
    goal_differential: int  # scored − conceded for the pilot's team (team 0)
    duration_seconds: float
    events: tuple[SimEvent, ...]

    def as_dict(self) -> dict:
        return {
            "scores": {"0": self.scores[0], "1": self.scores[1]},
            "goal_differential": self.goal_differential,
            "duration_seconds": self.duration_seconds,
            "goals": [
                {"team": e.team, "tick": e.tick}
                for e in self.events if e.kind == "goal"
            ],
        }


def _result_from(world: SimWorld, events: Sequence[SimEvent]) -> MatchResult:
    scores = (world.scores[0], world.scores[1])
    return MatchResult(
        scores=scores,
        goal_differential=scores[0] - scores[1],
        duration_seconds=world.seconds_elapsed,
        events=tuple(events),
    )


# ---------------------------------------------------------------------------
# the engine
# ---------------------------------------------------------------------------

_ALL_COPILOT = all_assigned(Assignment.COPILOT_ONLY)


class MatchEngine:
    """Owns one match: world, sources, schedules, controller, log."""

    def __init__(
        self,
        config: SessionConfig,
        *,
        sources: Optional[Mapping[Role, InputSource]] = None,
        stage_hook: Optional[StageHook] = None,
        broadcaster: Optional[Broadcaster] = None,
    ):
        config.validate()
        self.config = config
        self.world = new_world(config.arena)
        self.policies = config.policy_table()
        self.stage_hook = stage_hook
        self.broadcaster = broadcaster
        self.warnings: list[str] = []

        self.sources: dict[Role, InputSource] = {}
        self.contexts: dict[Role, InterpreterContext] = {}
        self.agents: dict[Role, tuple[AgentPolicy, AgentSchedule]] = {}
        for role, spec in config.sources().items():
            kind = _source_kind(spec)
            if kind == "idle":
                continue
            if kind == "agent":
                agent_id = spec.split(":", 1)[1]
                if agent_id == "chase":
                    policy = make_heuristic_agent(config.heuristic_params(1.0), car_index=0)
                else:
                    policy = make_idle_agent(car_index=0)
                self.agents[role] = (policy, AgentSchedule(period=config.agent_period))
                continue
            if sources and role in sources:
                self.sources[role] = sources[role]
            elif spec.startswith("script:"):
                self.sources[role] = ScriptedSource.from_file(spec.split(":", 1)[1])
            else:
                self.sources[role] = QueueSource()
            self.contexts[role] = InterpreterContext(
                role=role,
                mapping=config.mappings[role],
                assignment=config.assignment,
            )
        if sources:  # injected sources for roles the config calls remote/local
            for role, source in sources.items():
                if role not in self.sources:
                    self.sources[role] = source
                    self.contexts.setdefault(role, InterpreterContext(
                        role=role, mapping=config.mappings[role],
                        assignment=config.assignment))

        self.controller = VirtualControllerState.neutral(DEFAULT_GAME_MAPPING)
        self.opp_controller = VirtualControllerState.neutral(DEFAULT_GAME_MAPPING)
        if config.opponent == "chase":
            self.opp_agent: Optional[AgentPolicy] = make_heuristic_agent(
                config.heuristic_params(-1.0), car_index=1, policy_id="opponent")
        else:
            self.opp_agent = None
        self.opp_schedule = AgentSchedule(period=config.agent_period)
        self.opp_policies = default_policy_table(ARENA_ACTIONS)

        self.log = TickLog(config.log_header())
        self.events: list[SimEvent] = [SimEvent("kickoff", 0)]
        self.log.add_event(self.events[0])
        self.last_entries: list[InputEntry] = []
        self.last_frame: Optional[MergedActionFrame] = None

    # -- helpers --

    def _stage(self, tick: int, name: str) -> None:
        if self.stage_hook is not None:
            self.stage_hook(tick, name)

    def _warn(self, message: str) -> None:
        self.warnings.append(message)

    # -- one tick of the pipeline --

    def tick(self) -> list[SimEvent]:
        t = self.world.tick
        state = snapshot_state(self.world)
        suspended = suspend_on_pause(state.ui)
        entries: list[InputEntry] = []

        self._stage(t, "interpret")
        if not suspended:
            for role, source in self.sources.items():
                states = source.poll(t)
                if states is None:
                    continue  # disconnected: contributes nothing, play on
                entries.extend(interpret_states(states, t, self.contexts[role]))

        self._stage(t, "agent")
        if not suspended:
            pilot_entries = tuple(e for e in entries if e.role is Role.PILOT)
            for role, (policy, sched) in list(self.agents.items()):
                vector, new_sched = schedule_tick(
                    sched, t, state, policy,
                    pilot_entries=pilot_entries, on_warning=self._warn)
                self.agents[role] = (policy, new_sched)
                entries.extend(mask_actions(
                    vector, self.config.assignment, t,
                    role=role, source=f"agent:{policy.id}"))

        self._stage(t, "arbitrate")
        frame = arbitrate_frame(entries, self.policies, ARENA_ACTIONS,
                                tick=t, state=state, on_warning=self._warn)

        self._stage(t, "apply")
        self.controller = virtual_apply(frame_to_commands(frame), self.controller)
        if self.opp_agent is not None and not suspended:
            opp_vector, self.opp_schedule = schedule_tick(
                self.opp_schedule, t, state, self.opp_agent, on_warning=self._warn)
            opp_entries = mask_actions(opp_vector, _ALL_COPILOT, t, source="opponent")
            opp_frame = arbitrate_frame(opp_entries, self.opp_policies, ARENA_ACTIONS, tick=t)
            self.opp_controller = virtual_apply(
                frame_to_commands(opp_frame), self.opp_controller)

        self._stage(t, "step")
        _, events = step(self.world, {0: self.controller, 1: self.opp_controller},
                         self.config.arena)

        for entry in entries:
            if entry.value != 0:
                self.log.add_input(t, entry.role, entry.source,
                                   entry.action.name, entry.value)
        self.log.add_frame(t, frame.values, frame.contributors)
        self.log.add_controller(t, 0, self.controller)
        self.log.add_controller(t, 1, self.opp_controller)
        for event in events:
            self.log.add_event(event)
        self.events.extend(events)
        self.last_entries = entries
        self.last_frame = frame

        if self.broadcaster is not None:
            self.broadcaster(snapshot_state(self.world), frame, events)
        return events

    # -- whole match --

    def run(self, *, paced: bool = False) -> tuple[MatchResult, TickLog]:
        dt = self.config.arena.dt
        deadline = time.monotonic()
        try:
            while self.world.phase != Phase.ENDED:
                self.tick()
                if paced:
                    deadline += dt
                    delay = deadline - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
        except Exception:
            self._flush_log()  # keep the partial log for post-mortem
            raise
        result = _result_from(self.world, self.events)
        self._flush_log()
        return result, self.log

    def _flush_log(self) -> None:
        if self.config.log_path:
            self.log.write(self.config.log_path)


def run_match(
    config: SessionConfig,
    *,
    headless: bool = True,
    sources: Optional[Mapping[Role, InputSource]] = None,
    stage_hook: Optional[StageHook] = None,
    broadcaster: Optional[Broadcaster] = None,
) -> tuple[MatchResult, TickLog]:
    """Run one match start to finish; returns the result and its log."""
    engine = MatchEngine(config, sources=sources, stage_hook=stage_hook,
                         broadcaster=broadcaster)
    return engine.run(paced=not headless)


# ---------------------------------------------------------------------------
# replay and export
# ---------------------------------------------------------------------------

def replay_log(log: TickLog, arena_config: ArenaConfig) -> tuple[MatchResult, str]:
    """Re-run a match from its TickLog; returns (result, trace hash).

    Consumes the per-tick controller records (sticky between records), so the
    outcome must match the original run bit for bit.
    """
    if log.header.get("tick_rate") != arena_config.tick_rate:
        raise ReplayError(
            f"log tick rate {log.header.get('tick_rate')!r} does not match "
            f"config tick rate {arena_config.tick_rate}")
    per_tick = log.controller_states()
    world = new_world(arena_config)
    digest = trace_hasher(arena_config)
    digest.update(encode_state(snapshot_state(world)))
    events: list[SimEvent] = [SimEvent("kickoff", 0)]
    current: dict[int, VirtualControllerState] = {}
    last_tick = max(per_tick, default=-1)
    while world.phase != Phase.ENDED and world.tick <= last_tick:
        current.update(per_tick.get(world.tick, {}))
        _, new_events = step(world, current, arena_config)
        events.extend(new_events)
        digest.update(encode_state(snapshot_state(world)))
    return _result_from(world, events), digest.hexdigest()


def export_augmented_log(log: TickLog) -> list[dict]:
    """Per-tick dual-controller overlay records derived from the log.

    Each record lists, separately for pilot and copilot, the controller
    elements that were active that tick (element id + value), mapping actions
    back through each role's recorded element layout. Idle ticks yield two
    empty lists, so the stream is dense and renderable as-is.
    """
    mappings = log.header.get("mappings", {})
    inverse: dict[str, dict[str, str]] = {}
    for role_name, element_map in mappings.items():
        inverse[role_name] = {action: element for element, action in element_map.items()}

    by_tick: dict[int, dict[str, list[list]]] = {}
    for record in log.input_records():
        role = record["role"]
        element = inverse.get(role, {}).get(record["action"], record["action"])
        by_tick.setdefault(record["tick"], {}).setdefault(role, []).append(
            [element, record["value"]])

    frames = log.frame_records()
    total = (frames[-1]["tick"] + 1) if frames else 0
    out = []
    for tick in range(total):
        active = by_tick.get(tick, {})
        out.append({
            "type": "overlay",
            "tick": tick,
            "pilot": active.get("pilot", []),
            "copilot": active.get("copilot", []),
        })
    return out


def write_augmented_log(log: TickLog, path: Union[str, Path]) -> Path:
    path = resolve_log_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        header = {"type": "overlay_header",
                  "mappings": log.header.get("mappings", {})}
        handle.write(json.dumps(header, separators=(",", ":")) + "\n")
        for record in export_augmented_log(log):
            handle.write(json.dumps(record, separators=(",", ":")) + "\n")
    return path
