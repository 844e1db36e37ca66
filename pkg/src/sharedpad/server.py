"""WebSocket session server.

Runs matches back to back and speaks the NDJSON envelope protocol: every
WebSocket text message is one ``{"type", "payload"}`` line. Clients claim a
role with ``hello``, stream ``input`` messages, and may stage a ``config``
change that takes effect at the next match boundary (validation feedback is
immediate via ``config_result``).
"""
from __future__ import annotations

import asyncio
import contextlib
from typing import Any, Mapping, Optional

from websockets.asyncio.server import ServerConnection, broadcast, serve

from .arbitrator import parse_policy
from .arena import ArenaConfig, Phase, snapshot_state
from .errors import ConfigError, ProtocolError
from .model import (
    ControllerMapping,
    Role,
    SUBDIVISION_PRESETS,
    parse_assignment_value,
    resolve_element,
)
from .protocol import (
    decode_input_payload,
    decode_message,
    encode_message,
    state_to_payload,
)
from .session import (
    MatchEngine,
    Mode,
    QueueSource,
    SessionConfig,
    _source_kind,
)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8765


def default_server_config() -> SessionConfig:
    """Remote pilot plus built-in copilot agent, everything shared."""
    return SessionConfig(mode=Mode.PARTIAL_AUTOMATION,
                         pilot_source="remote", copilot_source="agent:chase")


# ---------------------------------------------------------------------------
# config payloads
# ---------------------------------------------------------------------------

def config_from_payload(base: SessionConfig, payload: Any) -> SessionConfig:
    """Overlay a config message onto ``base`` and validate the result.

    The payload mirrors the config file sections; omitted parts keep the
    running values, so a UI can send just an assignment edit.
    """
    if not isinstance(payload, Mapping):
        raise ConfigError("config payload must be an object")
    unknown = set(payload) - {"mode", "pilot", "copilot", "opponent", "preset",
                              "assignment", "policies", "mappings", "arena", "agent"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    config = SessionConfig(
        mode=base.mode,
        pilot_source=base.pilot_source,
        copilot_source=base.copilot_source,
        mappings=dict(base.mappings),
        assignment=dict(base.assignment),
        policies=dict(base.policies),
        arena=base.arena,
        opponent=base.opponent,
        agent_period=base.agent_period,
        agent_params=dict(base.agent_params),
        log_path=base.log_path,
    )
    try:
        if "mode" in payload:
            config.mode = Mode(str(payload["mode"]).lower())
    except ValueError:
        raise ConfigError(f"unknown mode {payload['mode']!r}") from None
    if "pilot" in payload:
        config.pilot_source = str(payload["pilot"])
    if "copilot" in payload:
        config.copilot_source = str(payload["copilot"])
    if "opponent" in payload:
        config.opponent = str(payload["opponent"]).lower()
    if "preset" in payload:
        name = str(payload["preset"])
        if name not in SUBDIVISION_PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        config.assignment = dict(SUBDIVISION_PRESETS[name])
    if "assignment" in payload:
        if not isinstance(payload["assignment"], Mapping):
            raise ConfigError("assignment must be an object")
        config.assignment = {
            str(action): parse_assignment_value(str(raw))
            for action, raw in payload["assignment"].items()
        }
    if "policies" in payload:
        if not isinstance(payload["policies"], Mapping):
            raise ConfigError("policies must be an object")
        for action, raw in payload["policies"].items():
            config.policies[str(action)] = parse_policy(str(raw))
    if "mappings" in payload:
        if not isinstance(payload["mappings"], Mapping):
            raise ConfigError("mappings must be an object")
        for role_name, element_map in payload["mappings"].items():
            try:
                role = Role(role_name)
            except ValueError:
                raise ConfigError(f"unknown role {role_name!r}") from None
            if not isinstance(element_map, Mapping):
                raise ConfigError(f"mapping for {role_name} must be an object")
            config.mappings[role] = ControllerMapping(tuple(
                (resolve_element(str(element)), str(action))
                for element, action in element_map.items()
            ))
    if "arena" in payload:
        if not isinstance(payload["arena"], Mapping):
            raise ConfigError("arena must be an object")
        merged = {k: getattr(base.arena, k) for k in base.arena.__dataclass_fields__}
        merged.update(payload["arena"])
        try:
            config.arena = ArenaConfig(**merged)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"arena: {exc}") from None
    if "agent" in payload:
        if not isinstance(payload["agent"], Mapping):
            raise ConfigError("agent must be an object")
        params = dict(payload["agent"])
        if "period" in params:
            period = params.pop("period")
            if not isinstance(period, int) or isinstance(period, bool):
                raise ConfigError("agent period must be an integer")
            config.agent_period = period
        config.agent_params.update({str(k): float(v) for k, v in params.items()})

    config.validate()
    return config


def describe_config(config: SessionConfig) -> dict:
    """The session description sent in welcome and config broadcasts."""
    header = config.log_header()
    return {
        "mode": header["mode"],
        "label": header["label"],
        "tick_rate": header["tick_rate"],
        "sources": header["sources"],
        "mappings": header["mappings"],
        "assignment": header["assignment"],
        "policies": header["policies"],
        "presets": sorted(SUBDIVISION_PRESETS),
    }


# ---------------------------------------------------------------------------
# the server
# ---------------------------------------------------------------------------

class SessionServer:
    """One shared-control session; matches run back to back while clients
    come and go. ``matches`` bounds the number of matches (None = forever).
    """

    def __init__(
        self,
        config: Optional[SessionConfig] = None,
        *,
        host: str = DEFAULT_HOST,
        port: int = DEFAULT_PORT,
        matches: Optional[int] = None,
    ):
        self.config = config or default_server_config()
        self.config.validate()
        self.host = host
        self.port = port
        self.matches = matches
        self.bound_port: Optional[int] = None
        self.connections: set[ServerConnection] = set()
        self.claims: dict[ServerConnection, Role] = {}
        self.queues: dict[Role, QueueSource] = {}
        self.pending_config: Optional[SessionConfig] = None
        self.engine: Optional[MatchEngine] = None
        self.ready = asyncio.Event()
        self._stop = asyncio.Event()

    # -- client handling --

    def _claimable(self) -> set[Role]:
        return {role for role, spec in self.config.sources().items()
                if _source_kind(spec) == "human"}

    async def _handle(self, connection: ServerConnection) -> None:
        self.connections.add(connection)
        try:
            async for message in connection:
                if isinstance(message, bytes):
                    message = message.decode("utf-8", errors="replace")
                for line in message.splitlines():
                    if line.strip():
                        await self._handle_line(connection, line)
        finally:
            self.connections.discard(connection)
            role = self.claims.pop(connection, None)
            if role is not None and role not in self.claims.values():
                queue = self.queues.get(role)
                if queue is not None:
                    queue.disconnect()

    async def _handle_line(self, connection: ServerConnection, line: str) -> None:
        try:
            msg_type, payload = decode_message(line)
            if msg_type == "hello":
                await self._on_hello(connection, payload)
            elif msg_type == "input":
                self._on_input(connection, payload)
            elif msg_type == "config":
                await self._on_config(connection, payload)
            else:
                raise ProtocolError(f"unsupported message type {msg_type!r}")
        except (ProtocolError, ConfigError) as exc:
            await connection.send(encode_message("error", {"message": str(exc)}))

    async def _on_hello(self, connection: ServerConnection, payload: Any) -> None:
        role_name = "pilot"
        if isinstance(payload, Mapping) and "role" in payload:
            role_name = str(payload["role"])
        try:
            role = Role(role_name)
        except ValueError:
            raise ProtocolError(f"unknown role {role_name!r}") from None
        if role not in self._claimable():
            raise ProtocolError(
                f"role {role.value} is not remote-controllable in this session")
        self.claims[connection] = role
        queue = self.queues.get(role)
        if queue is not None:
            queue.connect()
        await connection.send(encode_message("welcome", {
            "role": role.value,
            **describe_config(self.config),
        }))

    def _on_input(self, connection: ServerConnection, payload: Any) -> None:
        role = self.claims.get(connection)
        if role is None:
            raise ProtocolError("send hello before input")
        queue = self.queues.get(role)
        if queue is None:
            return  # between matches; nothing to feed yet
        if isinstance(payload, Mapping) and "states" in payload:
            states = payload["states"]
            if not isinstance(states, Mapping):
                raise ProtocolError("input states must be an object")
            for element, intensity in states.items():
                queue.set_state(str(element), intensity)
            return
        if isinstance(payload, Mapping) and "player" not in payload:
            payload = {**payload, "player": role.value}
        _player, element, intensity, _tick = decode_input_payload(payload)
        queue.set_state(element, intensity)

    async def _on_config(self, connection: ServerConnection, payload: Any) -> None:
        try:
            staged = config_from_payload(self.config, payload)
        except ConfigError as exc:
            await connection.send(encode_message("config_result", {
                "ok": False,
                "violations": [str(exc)],
                "label": None,
            }))
            return
        self.pending_config = staged
        await connection.send(encode_message("config_result", {
            "ok": True,
            "violations": [],
            "label": staged.taxonomy_label(),
        }))

    # -- match loop --

    def _broadcast(self, line: str) -> None:
        if self.connections:
            broadcast(self.connections, line)

    async def _run_match(self) -> None:
        if self.pending_config is not None:
            self.config = self.pending_config
            self.pending_config = None
        for role in self._claimable():
            existing = self.queues.get(role)
            self.queues[role] = existing if existing is not None else QueueSource()
        for role in list(self.queues):
            if role not in self._claimable():
                del self.queues[role]
        self.engine = MatchEngine(self.config, sources=dict(self.queues))
        self._broadcast(encode_message("config", describe_config(self.config)))

        engine = self.engine
        dt = self.config.arena.dt
        loop = asyncio.get_running_loop()
        deadline = loop.time()
        while engine.world.phase != Phase.ENDED and not self._stop.is_set():
            events = engine.tick()
            state_line = encode_message(
                "state", state_to_payload(snapshot_state(engine.world)))
            self._broadcast(state_line)
            if engine.last_frame is not None:
                frame = engine.last_frame
                self._broadcast(encode_message("frame", {
                    "tick": frame.tick,
                    "values": dict(frame.values),
                    "roles": {a: sorted(r.value for r in who)
                              for a, who in frame.contributors.items() if who},
                }))
            for event in events:
                self._broadcast(encode_message("event", {
                    "kind": event.kind, "team": event.team, "tick": event.tick,
                }))
            deadline += dt
            delay = deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)  # behind: step without sleeping, keep serving
        self._broadcast(encode_message("result", engine_result(engine)))

    async def run(self) -> None:
        async with serve(self._handle, self.host, self.port) as server:
            sockets = getattr(server, "sockets", None) or []
            for sock in sockets:
                self.bound_port = sock.getsockname()[1]
                break
            self.ready.set()
            played = 0
            while not self._stop.is_set():
                await self._run_match()
                played += 1
                if self.matches is not None and played >= self.matches:
                    break
        self.ready.clear()

    def stop(self) -> None:
        self._stop.set()


def engine_result(engine: MatchEngine) -> dict:
    return {
        "scores": {"0": engine.world.scores[0], "1": engine.world.scores[1]},
        "duration_seconds": engine.world.seconds_elapsed,
        "warnings": len(engine.warnings),
    }


async def serve_session(
    config: Optional[SessionConfig] = None,
    *,
    host: str = DEFAULT_HOST,
    port: int = DEFAULT_PORT,
    matches: Optional[int] = None,
) -> None:
    await SessionServer(config, host=host, port=port, matches=matches).run()


def run_server(config: Optional[SessionConfig] = None, *,
               host: str = DEFAULT_HOST, port: int = DEFAULT_PORT) -> None:
    with contextlib.suppress(KeyboardInterrupt):
        asyncio.run(serve_session(config, host=host, port=port))
