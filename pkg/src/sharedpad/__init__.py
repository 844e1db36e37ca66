"""sharedpad: two players, one virtual gamepad.

Middleware that merges a pilot's and a copilot's inputs (human or software
agent) into a single virtual controller, per game action and per configured
merging policy, plus a deterministic car-ball arena, a WebSocket session
server, and the statistical helpers used to compare control-sharing setups.
"""
from .errors import (
    ConfigError,
    EncodingError,
    ProtocolError,
    ReplayError,
    SchemaError,
)
from .model import (
    ARENA_ACTIONS,
    Assignment,
    ControllerMapping,
    DEFAULT_GAME_MAPPING,
    ElementKind,
    GameActionDescriptor,
    InputCommand,
    InputElement,
    InputEntry,
    Role,
    STANDARD_PAD,
    SUBDIVISION_PRESETS,
    ValueKind,
    classify_assignment,
    resolve_element,
    validate_assignment,
    validate_mapping,
)
from .interpreter import InterpreterContext, interpret, interpret_states
from .arbitrator import (
    BinaryDisjunction,
    ContinuousAverage,
    MergedActionFrame,
    OverrideByAgent,
    SelectPriority,
    VirtualControllerState,
    arbitrate_frame,
    frame_to_commands,
    parse_policy,
    virtual_apply,
)
from .protocol import (
    DerivedFeatures,
    GameState,
    compute_derived,
    decode_message,
    decode_state,
    encode_message,
    encode_state,
    normalize_angle,
)
from .arena import ArenaConfig, SimWorld, new_world, replay, snapshot_state, step
from .agent import (
    AgentActionVector,
    AgentPolicy,
    AgentSchedule,
    HeuristicParams,
    make_heuristic_agent,
    make_idle_agent,
    mask_actions,
    schedule_tick,
)
from .session import (
    MatchEngine,
    MatchResult,
    Mode,
    SessionConfig,
    TickLog,
    export_augmented_log,
    load_config,
    replay_log,
    run_match,
)
from .stats import (
    PairedSamples,
    bh_adjust,
    goal_differential,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "ARENA_ACTIONS",
    "AgentActionVector",
    "AgentPolicy",
    "AgentSchedule",
    "ArenaConfig",
    "Assignment",
    "BinaryDisjunction",
    "ConfigError",
    "ContinuousAverage",
    "ControllerMapping",
    "DEFAULT_GAME_MAPPING",
    "DerivedFeatures",
    "ElementKind",
    "EncodingError",
    "GameActionDescriptor",
    "GameState",
    "HeuristicParams",
    "InputCommand",
    "InputElement",
    "InputEntry",
    "InterpreterContext",
    "MatchEngine",
    "MatchResult",
    "MergedActionFrame",
    "Mode",
    "OverrideByAgent",
    "PairedSamples",
    "ProtocolError",
    "ReplayError",
    "Role",
    "STANDARD_PAD",
    "SUBDIVISION_PRESETS",
    "SchemaError",
    "SelectPriority",
    "SessionConfig",
    "SimWorld",
    "TickLog",
    "ValueKind",
    "VirtualControllerState",
    "arbitrate_frame",
    "bh_adjust",
    "classify_assignment",
    "compute_derived",
    "decode_message",
    "decode_state",
    "encode_message",
    "encode_state",
    "export_augmented_log",
    "frame_to_commands",
    "goal_differential",
    "interpret",
    "interpret_states",
    "load_config",
    "make_heuristic_agent",
    "make_idle_agent",
    "mask_actions",
    "new_world",
    "normalize_angle",
    "parse_policy",
    "replay",
    "replay_log",
    "resolve_element",
    "run_match",
    "schedule_tick",
    "snapshot_state",
    "step",
    "validate_assignment",
    "validate_mapping",
    "virtual_apply",
    "wilcoxon_signed_rank",
]
