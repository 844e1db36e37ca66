"""Core input model: elements, actions, entries, mappings, assignments.

Everything here is an immutable value object. Constructors validate their
domain invariants, so downstream code (interpreter, arbitrator, session)
can assume any instance it receives is well-formed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import ConfigError


class Role(enum.Enum):
    PILOT = "pilot"
    COPILOT = "copilot"


class ElementKind(enum.Enum):
    BUTTON = "button"
    TRIGGER = "trigger"
    STICK = "stick"          # axis pair, each axis in [-1, 1]
    BUTTON_PAIR = "button_pair"  # two buttons acting as one bipolar element


class ValueKind(enum.Enum):
    BINARY = "binary"        # {0, 1}
    UNIPOLAR = "unipolar"    # [0, 1]
    BIPOLAR = "bipolar"      # [-1, 1]


class Assignment(enum.Enum):
    PILOT_ONLY = "pilot"
    COPILOT_ONLY = "copilot"
    OVERLAPPING = "overlap"


# Which physical element kinds may feed which action value kinds.
KIND_COMPATIBILITY: dict[ValueKind, frozenset[ElementKind]] = {
    ValueKind.BINARY: frozenset({ElementKind.BUTTON}),
    ValueKind.UNIPOLAR: frozenset({ElementKind.TRIGGER, ElementKind.BUTTON}),
    ValueKind.BIPOLAR: frozenset({ElementKind.STICK, ElementKind.BUTTON_PAIR}),
}


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

Intensity = Union[float, tuple]


@dataclass(frozen=True, slots=True)
class InputElement:
    """One addressable control on a physical device.

    ``members`` is only populated for BUTTON_PAIR elements and names the
    (negative, positive) constituent buttons.
    """

    id: str
    kind: ElementKind
    members: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("element id must be non-empty")
        if self.kind is ElementKind.BUTTON_PAIR:
            if len(self.members) != 2 or self.members[0] == self.members[1]:
                raise ValueError("button pair needs two distinct member buttons")
        elif self.members:
            raise ValueError(f"{self.kind.value} element does not take members")

    @property
    def neutral(self) -> Intensity:
        if self.kind in (ElementKind.STICK, ElementKind.BUTTON_PAIR):
            return (0.0, 0.0)
        return 0.0


def pair_element(negative: str, positive: str) -> InputElement:
    """Two buttons fused into one bipolar element (negative+positive)."""
    return InputElement(
        id=f"{negative}+{positive}",
        kind=ElementKind.BUTTON_PAIR,
        members=(negative, positive),
    )


def _pad() -> dict[str, InputElement]:
    elems = {}
    for name in (
        "A", "B", "X", "Y",
        "LeftBumper", "RightBumper", "Start", "Back",
        "DPadUp", "DPadDown", "DPadLeft", "DPadRight",
        "LeftThumb", "RightThumb",
    ):
        elems[name] = InputElement(name, ElementKind.BUTTON)
    for name in ("LeftTrigger", "RightTrigger"):
        elems[name] = InputElement(name, ElementKind.TRIGGER)
    for name in ("LeftStick", "RightStick"):
        elems[name] = InputElement(name, ElementKind.STICK)
    return elems


#: Standard gamepad profile; element ids are unique within the profile.
STANDARD_PAD: dict[str, InputElement] = _pad()


def resolve_element(spec: str, profile: Mapping[str, InputElement] = STANDARD_PAD) -> InputElement:
    """Look up an element by id; ``Left+Right`` builds a button pair."""
    spec = spec.strip()
    if "+" in spec:
        neg, _, pos = spec.partition("+")
        neg, pos = neg.strip(), pos.strip()
        for part in (neg, pos):
            el = profile.get(part)
            if el is None:
                raise ConfigError(f"unknown element {part!r} in pair {spec!r}")
            if el.kind is not ElementKind.BUTTON:
                raise ConfigError(f"pair member {part!r} is not a button")
        return pair_element(neg, pos)
    el = profile.get(spec)
    if el is None:
        raise ConfigError(f"unknown element {spec!r}")
    return el


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class GameActionDescriptor:
    """One abstract game action the virtual controller can drive."""

    name: str
    kind: ValueKind

    def contains(self, value: float) -> bool:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        if not math.isfinite(value):
            return False
        if self.kind is ValueKind.BINARY:
            return value in (0.0, 1.0)
        if self.kind is ValueKind.UNIPOLAR:
            return 0.0 <= value <= 1.0
        return -1.0 <= value <= 1.0

    @property
    def neutral(self) -> float:
        return 0.0


#: The car-ball arena's action profile.
ARENA_ACTIONS: dict[str, GameActionDescriptor] = {
    d.name: d
    for d in (
        GameActionDescriptor("Steer", ValueKind.BIPOLAR),
        GameActionDescriptor("Accelerate", ValueKind.UNIPOLAR),
        GameActionDescriptor("Brake", ValueKind.UNIPOLAR),
        GameActionDescriptor("Jump", ValueKind.BINARY),
        GameActionDescriptor("Boost", ValueKind.BINARY),
        GameActionDescriptor("Handbrake", ValueKind.BINARY),
    )
}


# ---------------------------------------------------------------------------
# raw commands and interpreted entries
# ---------------------------------------------------------------------------

def _check_intensity(element: InputElement, intensity: Intensity) -> None:
    kind = element.kind
    if kind is ElementKind.BUTTON:
        if intensity not in (0.0, 1.0):
            raise ValueError(f"button intensity must be 0 or 1, got {intensity!r}")
        return
    if kind is ElementKind.TRIGGER:
        if not isinstance(intensity, (int, float)) or isinstance(intensity, bool):
            raise ValueError(f"trigger intensity must be a number, got {intensity!r}")
        if not (math.isfinite(intensity) and 0.0 <= intensity <= 1.0):
            raise ValueError(f"trigger intensity out of [0, 1]: {intensity!r}")
        return
    if not (isinstance(intensity, tuple) and len(intensity) == 2):
        raise ValueError(f"{kind.value} intensity must be a 2-tuple, got {intensity!r}")
    lo = -1.0 if kind is ElementKind.STICK else 0.0
    for axis in intensity:
        if isinstance(axis, bool) or not isinstance(axis, (int, float)):
            raise ValueError(f"axis value must be a number, got {axis!r}")
        if kind is ElementKind.BUTTON_PAIR and axis not in (0.0, 1.0):
            raise ValueError(f"pair member state must be 0 or 1, got {axis!r}")
        if not (math.isfinite(axis) and lo <= axis <= 1.0):
            raise ValueError(f"axis value out of range: {axis!r}")


@dataclass(frozen=True)
class InputCommand:
    """One raw sample read from a physical device."""

    element: InputElement
    intensity: Intensity

    def __post_init__(self) -> None:
        if isinstance(self.intensity, list):
            object.__setattr__(self, "intensity", tuple(self.intensity))
        _check_intensity(self.element, self.intensity)


@dataclass(frozen=True)
class InputEntry:
    """One interpreted contribution to a game action, ready for merging."""

    action: GameActionDescriptor
    value: float
    tick: int
    role: Role
    confidence: float = 1.0
    source: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.tick, int) or isinstance(self.tick, bool) or self.tick < 0:
            raise ValueError(f"tick must be a non-negative int, got {self.tick!r}")
        if not self.action.contains(self.value):
            raise ValueError(
                f"value {self.value!r} outside {self.action.kind.value} domain "
                f"of action {self.action.name!r}"
            )
        if not (isinstance(self.confidence, (int, float))
                and math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence out of [0, 1]: {self.confidence!r}")
        if not isinstance(self.role, Role):
            raise ValueError(f"role must be a Role, got {self.role!r}")


# ---------------------------------------------------------------------------
# mappings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControllerMapping:
    """Partial map from one player's device elements to game actions."""

    bindings: tuple[tuple[InputElement, str], ...] = ()

    @classmethod
    def of(cls, *pairs: tuple[Union[str, InputElement], str]) -> "ControllerMapping":
        resolved = tuple(
            (el if isinstance(el, InputElement) else resolve_element(el), action)
            for el, action in pairs
        )
        return cls(resolved)

    def action_for(self, element_id: str) -> Optional[str]:
        for el, action in self.bindings:
            if el.id == element_id:
                return action
        return None

    def element_for(self, action: str) -> Optional[InputElement]:
        for el, bound in self.bindings:
            if bound == action:
                return el
        return None

    def elements(self) -> tuple[InputElement, ...]:
        return tuple(el for el, _ in self.bindings)

    def as_dict(self) -> dict[str, str]:
        return {el.id: action for el, action in self.bindings}


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()
    label: Optional[str] = None

    def raise_for_violations(self, what: str) -> None:
        if not self.ok:
            raise ConfigError(f"invalid {what}: " + "; ".join(self.violations))


def validate_mapping(
    mapping: ControllerMapping,
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
) -> ValidationResult:
    """Check a mapping against an action profile.

    An empty mapping is valid (that player simply contributes nothing).
    """
    violations = []
    seen: set[str] = set()
    for el, action in mapping.bindings:
        if el.id in seen:
            violations.append(f"element {el.id!r} mapped twice")
        seen.add(el.id)
        desc = profile.get(action)
        if desc is None:
            violations.append(f"unknown action {action!r}")
            continue
        if el.kind not in KIND_COMPATIBILITY[desc.kind]:
            violations.append(
                f"{el.kind.value} element {el.id!r} cannot drive "
                f"{desc.kind.value} action {action!r}"
            )
    return ValidationResult(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# assignments and taxonomy
# ---------------------------------------------------------------------------

def classify_assignment(assignment: Mapping[str, Assignment]) -> str:
    """Taxonomy label: reciprocal / disjoint / hybrid.

    Reciprocal means every action is shared by both players; disjoint means
    no action is; anything in between is hybrid.
    """
    overlapping = [a for a in assignment.values() if a is Assignment.OVERLAPPING]
    if len(overlapping) == len(assignment):
        return "reciprocal"
    if not overlapping:
        return "disjoint"
    return "hybrid"


def validate_assignment(
    assignment: Mapping[str, Assignment],
    profile: Mapping[str, GameActionDescriptor] = ARENA_ACTIONS,
) -> ValidationResult:
    """Every profile action must be assigned exactly one of the three modes."""
    violations = []
    for name in profile:
        if name not in assignment:
            violations.append(f"{name} unassigned")
    for name, mode in assignment.items():
        if name not in profile:
            violations.append(f"unknown action {name!r}")
        if not isinstance(mode, Assignment):
            violations.append(f"bad assignment for {name!r}: {mode!r}")
    if violations:
        return ValidationResult(False, tuple(violations))
    return ValidationResult(True, (), classify_assignment(assignment))


_ASSIGNMENT_LETTERS = {
    "p": Assignment.PILOT_ONLY,
    "pilot": Assignment.PILOT_ONLY,
    "c": Assignment.COPILOT_ONLY,
    "copilot": Assignment.COPILOT_ONLY,
    "o": Assignment.OVERLAPPING,
    "overlap": Assignment.OVERLAPPING,
    "overlapping": Assignment.OVERLAPPING,
}


def parse_assignment_value(text: str) -> Assignment:
    try:
        return _ASSIGNMENT_LETTERS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown assignment {text!r} (want pilot/copilot/overlap)") from None


def _preset(steer: str, acc: str, brake: str, jump: str, boost: str, hand: str) -> dict[str, Assignment]:
    letters = dict(zip(
        ("Steer", "Accelerate", "Brake", "Jump", "Boost", "Handbrake"),
        (steer, acc, brake, jump, boost, hand),
    ))
    return {name: parse_assignment_value(letter) for name, letter in letters.items()}


#: Action subdivisions observed in the user study, one per participant pair.
SUBDIVISION_PRESETS: dict[str, dict[str, Assignment]] = {
    "P1": _preset("P", "P", "C", "O", "P", "C"),
    "P2": _preset("P", "P", "P", "C", "C", "C"),
    "P3": _preset("O", "P", "P", "C", "C", "C"),
    "P4": _preset("P", "P", "C", "C", "P", "C"),
    "P5": _preset("P", "P", "P", "O", "C", "P"),
    "P6": _preset("P", "C", "C", "C", "C", "C"),
    "P7": _preset("P", "P", "P", "C", "P", "P"),
    "P8": _preset("P", "P", "C", "C", "C", "C"),
    "P9": _preset("P", "C", "C", "C", "C", "C"),
    "P10": _preset("P", "P", "P", "C", "C", "C"),
    "P11": _preset("P", "C", "C", "P", "P", "C"),
    "P12": _preset("C", "C", "C", "P", "P", "C"),
    "P13": _preset("C", "P", "C", "C", "P", "C"),
}


#: Default wheel/pedal-style pad layout for the arena actions.
DEFAULT_GAME_MAPPING = ControllerMapping.of(
    ("LeftStick", "Steer"),
    ("RightTrigger", "Accelerate"),
    ("LeftTrigger", "Brake"),
    ("A", "Jump"),
    ("B", "Boost"),
    ("X", "Handbrake"),
)


def all_assigned(mode: Assignment) -> dict[str, Assignment]:
    """Uniform assignment over the arena profile (handy default/config)."""
    return {name: mode for name in ARENA_ACTIONS}
