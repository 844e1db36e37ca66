"""Per-player command interpretation.

Raw device samples become per-action ``InputEntry`` values according to the
player's mapping and the session's action assignment. Interpretation is pure:
same command + same context -> same entry.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .model import (
    ARENA_ACTIONS,
    Assignment,
    ControllerMapping,
    ElementKind,
    GameActionDescriptor,
    InputCommand,
    InputElement,
    InputEntry,
    Intensity,
    KIND_COMPATIBILITY,
    Role,
    ValueKind,
    validate_assignment,
    validate_mapping,
)

#: Magnitudes at or below these snap to exactly 0 before normalization.
TRIGGER_DEAD_ZONE = 0.02
STICK_DEAD_ZONE = 0.05

_ROLE_MODES = {
    Role.PILOT: (Assignment.PILOT_ONLY, Assignment.OVERLAPPING),
    Role.COPILOT: (Assignment.COPILOT_ONLY, Assignment.OVERLAPPING),
}


@dataclass(frozen=True)
class InterpreterContext:
    """Everything needed to interpret one player's raw input stream."""

    role: Role
    mapping: ControllerMapping
    assignment: Mapping[str, Assignment]
    profile: Mapping[str, GameActionDescriptor] = field(default_factory=lambda: dict(ARENA_ACTIONS))
    source: str = ""
    trigger_dead_zone: float = TRIGGER_DEAD_ZONE
    stick_dead_zone: float = STICK_DEAD_ZONE

    def __post_init__(self) -> None:
        validate_mapping(self.mapping, self.profile).raise_for_violations("mapping")
        validate_assignment(self.assignment, self.profile).raise_for_violations("assignment")
        if not (0.0 <= self.trigger_dead_zone < 1.0 and 0.0 <= self.stick_dead_zone < 1.0):
            raise ValueError("dead-zones must lie in [0, 1)")
        if not self.source:
            object.__setattr__(self, "source", self.role.value)

    def permits(self, action: str) -> bool:
        return self.assignment[action] in _ROLE_MODES[self.role]


def normalize_element_value(kind: ElementKind, target: ValueKind, intensity: Intensity) -> float:
    """Map a raw element intensity onto an action's value domain.

    Sticks contribute their horizontal axis; a button pair reads as
    positive minus negative, so both-pressed cancels to 0.
    """
    if kind not in KIND_COMPATIBILITY[target]:
        raise ValueError(f"{kind.value} element cannot drive a {target.value} action")
    if kind is ElementKind.STICK:
        return float(intensity[0])
    if kind is ElementKind.BUTTON_PAIR:
        negative, positive = intensity
        return float(positive) - float(negative)
    return float(intensity)


def apply_dead_zone(element: InputElement, intensity: Intensity, ctx: InterpreterContext) -> Intensity:
    if element.kind is ElementKind.TRIGGER:
        return 0.0 if abs(intensity) <= ctx.trigger_dead_zone else intensity
    if element.kind is ElementKind.STICK:
        return tuple(0.0 if abs(axis) <= ctx.stick_dead_zone else axis for axis in intensity)
    return intensity


def interpret(cmd: InputCommand, ctx: InterpreterContext, tick: int) -> Optional[InputEntry]:
    """One raw sample -> one entry, or None when it cannot contribute.

    None means the element is unmapped or the action is not assigned to this
    player's role. A released or dead-zoned element still yields a value-0
    entry — downstream merging relies on explicit zeros.
    """
    action = ctx.mapping.action_for(cmd.element.id)
    if action is None:
        return None
    if not ctx.permits(action):
        return None
    descriptor = ctx.profile[action]
    intensity = apply_dead_zone(cmd.element, cmd.intensity, ctx)
    value = normalize_element_value(cmd.element.kind, descriptor.kind, intensity)
    return InputEntry(
        action=descriptor,
        value=value,
        tick=tick,
        role=ctx.role,
        confidence=1.0,
        source=ctx.source,
    )


def interpret_states(
    states: Mapping[str, Intensity],
    tick: int,
    ctx: InterpreterContext,
) -> list[InputEntry]:
    """Interpret a full device snapshot for one tick.

    Every bound element is sampled; elements absent from ``states`` count as
    released (neutral), so each permitted action gets an entry every tick.
    Button-pair elements read their member buttons from the snapshot.
    """
    entries = []
    for element, _action in ctx.mapping.bindings:
        if element.kind is ElementKind.BUTTON_PAIR:
            neg, pos = element.members
            intensity: Intensity = (float(states.get(neg, 0.0)), float(states.get(pos, 0.0)))
        else:
            intensity = states.get(element.id, element.neutral)
        entry = interpret(InputCommand(element, intensity), ctx, tick)
        if entry is not None:
            entries.append(entry)
    return entries
