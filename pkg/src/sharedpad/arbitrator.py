"""Per-tick merging of pilot/copilot entries into one virtual controller.

Each game action carries a merging policy. Per tick, the arbitrator merges
all entries for an action through its policy into a single value, renders
the merged frame onto the game's default element layout, and applies it to
the virtual controller — the only object the game ever reads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import ConfigError, ProtocolError
from .model import (
    ARENA_ACTIONS,
    ControllerMapping,
    DEFAULT_GAME_MAPPING,
    ElementKind,
    GameActionDescriptor,
    InputCommand,
    InputEntry,
    Intensity,
    Role,
    ValidationResult,
    ValueKind,
)
from .protocol import GameState


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryDisjunction:
    """Emit 1 iff any entry is non-zero (inclusive disjunction)."""


@dataclass(frozen=True)
class ContinuousAverage:
    """Emit the arithmetic mean of the entry values."""


@dataclass(frozen=True)
class SelectPriority:
    """The priority role's entry wins outright; the other role is a fallback."""

    priority: Role


@dataclass(frozen=True)
class OverrideByAgent:
    """While the predicate holds over the game state, only copilot entries
    reach the base policy; otherwise everything does.
    """

    predicate: str
    base: Optional[Union[BinaryDisjunction, ContinuousAverage, SelectPriority]] = None


Policy = Union[BinaryDisjunction, ContinuousAverage, SelectPriority, OverrideByAgent]

#: Override predicates, evaluated against the latest snapshot. Conventions
#: follow the arena: the pilot's team is 0 and defends x < 0, car 0 is the
#: shared car.
PREDICATES: dict[str, Callable[[GameState], bool]] = {
    "always": lambda state: True,
    "never": lambda state: False,
    "ball_in_own_half": lambda state: state.ball.location.x < 0.0,
    "low_fuel": lambda state: state.cars[0].boost < 20.0,
}

WarningHook = Callable[[str], None]


def merge_binary(entries: Iterable[InputEntry]) -> float:
    return 1.0 if any(e.value != 0 for e in entries) else 0.0


def merge_average(entries: Sequence[InputEntry]) -> float:
    if not entries:
        return 0.0
    return math.fsum(e.value for e in entries) / len(entries)


def _pick(entries: Sequence[InputEntry]) -> InputEntry:
    # Newest tick wins; then highest confidence; then source id order.
    return sorted(entries, key=lambda e: (-e.tick, -e.confidence, e.source))[0]


def merge_select(entries: Sequence[InputEntry], priority: Role) -> float:
    if not entries:
        return 0.0
    preferred = [e for e in entries if e.role is priority]
    pool = preferred or list(entries)
    return _pick(pool).value


def merge_override(
    entries: Sequence[InputEntry],
    base: Policy,
    predicate: Callable[[GameState], bool],
    state: Optional[GameState],
    on_warning: Optional[WarningHook] = None,
) -> float:
    """Filter-then-merge: predicate true -> copilot entries only."""
    value, _roles = _merge_override(entries, base, predicate, state, on_warning)
    return value


def _merge_override(entries, base, predicate, state, on_warning):
    try:
        if state is None:
            raise ValueError("no game state snapshot available")
        active = bool(predicate(state))
    except Exception as exc:  # fall back to base over all entries
        if on_warning is not None:
            on_warning(f"override predicate failed ({exc}); using base policy")
        active = False
    pool = [e for e in entries if e.role is Role.COPILOT] if active else list(entries)
    return _apply(base, pool, state, on_warning)


def _apply(
    policy: Policy,
    entries: Sequence[InputEntry],
    state: Optional[GameState],
    on_warning: Optional[WarningHook],
) -> tuple[float, frozenset]:
    """Run one policy; also report which roles actually contributed."""
    if isinstance(policy, BinaryDisjunction):
        return merge_binary(entries), frozenset(e.role for e in entries)
    if isinstance(policy, ContinuousAverage):
        return merge_average(entries), frozenset(e.role for e in entries)
    if isinstance(policy, SelectPriority):
        if not entries:
            return 0.0, frozenset()
        preferred = [e for e in entries if e.role is policy.priority]
        pool = preferred or list(entries)
        return _pick(pool).value, frozenset(e.role for e in pool)
    if isinstance(policy, OverrideByAgent):
        predicate = PREDICATES.get(policy.predicate)
        if predicate is None:
            raise ConfigError(f"unknown override predicate {policy.predicate!r}")
        base = policy.base
        if base is None:
            raise ConfigError("override policy missing its base (table not normalized)")
        return _merge_override(entries, base, predicate, state, on_warning)
    raise TypeError(f"unknown policy {policy!r}")


# ---------------------------------------------------------------------------
# policy table
# ---------------------------------------------------------------------------

def default_policy(kind: ValueKind) -> Policy:
    return BinaryDisjunction() if kind is ValueKind.BINARY else ContinuousAverage()


def default_policy_table(
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
) -> dict[str, Policy]:
    return {name: default_policy(desc.kind) for name, desc in profile.items()}


def parse_policy(text: str) -> Policy:
    """Config syntax: binary | average | select:<role> | override:<predicate>."""
    text = text.strip().lower()
    if text == "binary":
        return BinaryDisjunction()
    if text == "average":
        return ContinuousAverage()
    if text.startswith("select:"):
        role_name = text.split(":", 1)[1].strip()
        try:
            role = Role(role_name)
        except ValueError:
            raise ConfigError(f"select policy needs a role, got {role_name!r}") from None
        return SelectPriority(role)
    if text.startswith("override:"):
        predicate = text.split(":", 1)[1].strip()
        if predicate not in PREDICATES:
            raise ConfigError(f"unknown override predicate {predicate!r}")
        return OverrideByAgent(predicate)
    raise ConfigError(f"unknown policy {text!r}")


def _base_ok(policy: Policy, kind: ValueKind) -> bool:
    if isinstance(policy, SelectPriority):
        return True
    if kind is ValueKind.BINARY:
        return isinstance(policy, BinaryDisjunction)
    return isinstance(policy, ContinuousAverage)


def normalize_policy_table(
    policies: Mapping[str, Policy],
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
) -> dict[str, Policy]:
    """Fill unlisted actions with kind defaults and resolve override bases."""
    table: dict[str, Policy] = {}
    for name, desc in profile.items():
        policy = policies.get(name, default_policy(desc.kind))
        if isinstance(policy, OverrideByAgent) and policy.base is None:
            policy = OverrideByAgent(policy.predicate, default_policy(desc.kind))
        table[name] = policy
    for name in policies:
        if name not in profile:
            table[name] = policies[name]  # carried through so validation can flag it
    return table


def validate_policies(
    policies: Mapping[str, Policy],
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
) -> ValidationResult:
    violations = []
    for name in profile:
        if name not in policies:
            violations.append(f"{name} has no policy")
    for name, policy in policies.items():
        desc = profile.get(name)
        if desc is None:
            violations.append(f"unknown action {name!r}")
            continue
        inner = policy.base if isinstance(policy, OverrideByAgent) else policy
        if isinstance(policy, OverrideByAgent):
            if policy.predicate not in PREDICATES:
                violations.append(f"{name}: unknown predicate {policy.predicate!r}")
            if inner is None:
                continue  # resolved to the kind default at normalization
            if isinstance(inner, OverrideByAgent):
                violations.append(f"{name}: override cannot wrap another override")
                continue
        if inner is not None and not _base_ok(inner, desc.kind):
            violations.append(
                f"{name}: {type(inner).__name__} does not fit a {desc.kind.value} action"
            )
    return ValidationResult(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MergedActionFrame:
    """One merged value per profile action for one tick."""

    tick: int
    values: Mapping[str, float]
    contributors: Mapping[str, frozenset]

    def value(self, action: str) -> float:
        return self.values[action]


def arbitrate_frame(
    entries: Sequence[InputEntry],
    policies: Mapping[str, Policy],
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
    *,
    tick: int = 0,
    state: Optional[GameState] = None,
    on_warning: Optional[WarningHook] = None,
) -> MergedActionFrame:
    """Merge one tick's entries into exactly one value per profile action.

    Actions with no entries come out neutral (0). Entries naming an action
    outside the profile indicate a wiring bug upstream and raise.
    """
    by_action: dict[str, list[InputEntry]] = {name: [] for name in profile}
    for entry in entries:
        bucket = by_action.get(entry.action.name)
        if bucket is None:
            raise ProtocolError(f"entry for unknown action {entry.action.name!r}")
        bucket.append(entry)

    values: dict[str, float] = {}
    contributors: dict[str, frozenset] = {}
    for name, desc in profile.items():
        policy = policies[name]
        value, roles = _apply(policy, by_action[name], state, on_warning)
        if not desc.contains(value):
            raise ProtocolError(
                f"policy for {name!r} produced {value!r} outside its domain"
            )
        values[name] = value
        contributors[name] = roles
    return MergedActionFrame(tick=tick, values=values, contributors=contributors)


# ---------------------------------------------------------------------------
# virtual controller
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualControllerState:
    """Current intensity of every emulated output element."""

    values: tuple[tuple[str, Intensity], ...] = ()

    @classmethod
    def neutral(cls, mapping: ControllerMapping = DEFAULT_GAME_MAPPING) -> "VirtualControllerState":
        return cls(tuple((el.id, el.neutral) for el in mapping.elements()))

    def get(self, element_id: str, default: Intensity = 0.0) -> Intensity:
        for key, value in self.values:
            if key == element_id:
                return value
        return default

    def as_dict(self) -> dict[str, Intensity]:
        return dict(self.values)


def frame_to_commands(
    frame: MergedActionFrame,
    mapping: ControllerMapping = DEFAULT_GAME_MAPPING,
) -> list[InputCommand]:
    """Render a merged frame onto the game's default element layout.

    Every mapped element gets a command (untouched actions render neutral),
    so the virtual controller always reflects the whole frame.
    """
    commands = []
    for element, action in mapping.bindings:
        value = frame.values.get(action, 0.0)
        if element.kind is ElementKind.STICK:
            intensity: Intensity = (value, 0.0)
        elif element.kind is ElementKind.BUTTON_PAIR:
            intensity = (1.0, 0.0) if value < 0 else ((0.0, 1.0) if value > 0 else (0.0, 0.0))
        elif element.kind is ElementKind.BUTTON:
            # buttons only take 0/1; continuous values bound to a button
            # render as pressed at half intensity or more
            intensity = 1.0 if value >= 0.5 else 0.0
        else:
            intensity = value
        commands.append(InputCommand(element, intensity))
    return commands


def virtual_apply(
    commands: Sequence[InputCommand],
    state: VirtualControllerState,
) -> VirtualControllerState:
    """Apply commands to the controller; later commands win per element."""
    merged = dict(state.values)
    for cmd in commands:
        merged[cmd.element.id] = cmd.intensity
    return VirtualControllerState(tuple(merged.items()))
