"""
Machine description module for the automata laboratory.

This module defines the single device description shared by every simulator: input
alphabets, storage specifications (one worktape, j stacks or j counters), transition
rules and the machine itself. It validates machine descriptions against the model's
invariants, reads and writes the JSON machine file format, and tokenizes input text
over a machine's alphabet.

Machine values are immutable after construction and safe to share across concurrent
simulations.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, Sequence, Tuple

# Reserved tokens
ENDMARKER = "$"
BLANK = "#"
KAPPA = "κ"
LEFT_MARKER = "⊢"
EMPTY = "⊥"
ZERO = "0"
NONZERO = "+"
WILDCARD = "*"

RESERVED = {ENDMARKER, BLANK, LEFT_MARKER, EMPTY, WILDCARD}


class Timing(str, Enum):
    REAL_TIME = "real-time"
    ONE_WAY = "one-way"


class Mode(str, Enum):
    DETERMINISTIC = "deterministic"
    NONDETERMINISTIC = "nondeterministic"
    ALTERNATING = "alternating"
    PROBABILISTIC = "probabilistic"


class StorageKind(str, Enum):
    WORKTAPE = "worktape"
    STACKS = "stacks"
    COUNTERS = "counters"


class Label(str, Enum):
    EXISTENTIAL = "existential"
    UNIVERSAL = "universal"


class InputAction(str, Enum):
    ADVANCE = "advance"
    STAY = "stay"


class Move(str, Enum):
    LEFT = "L"
    RIGHT = "R"
    STAY = "S"


class MachineError(ValueError):
    """Base class for malformed machine descriptions."""


class MachineParseError(MachineError):
    def __init__(self, message: str, locus: str):
        super().__init__(f"{locus}: {message}")
        self.locus = locus


class MachineReferenceError(MachineError):
    def __init__(self, message: str, locus: str):
        super().__init__(f"{locus}: {message}")
        self.locus = locus


class MachineValidationError(MachineError):
    def __init__(self, diagnostics: List["Diagnostic"]):
        super().__init__(
            "; ".join(diagnostic.message for diagnostic in diagnostics)
        )
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of input tokens. The endmarker is never a member."""

    symbols: Tuple[str, ...]

    @property
    def padded(self) -> bool:
        return KAPPA in self.symbols

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class StorageSpec:
    """Storage of a machine.

    For a worktape, `alphabet` is the worktape alphabet (blank included) and `count`
    is 1. For stacks it is the stack alphabet shared by all `count` stacks. Counters
    have no alphabet.
    """

    kind: StorageKind
    count: int = 1
    alphabet: Tuple[str, ...] = ()

    def observation_domain(self) -> Tuple[str, ...]:
        """Return the concrete values one observation component can take."""
        if self.kind is StorageKind.WORKTAPE:
            return self.alphabet
        if self.kind is StorageKind.STACKS:
            return self.alphabet + (EMPTY,)
        return (ZERO, NONZERO)


@dataclass(frozen=True)
class TransitionRule:
    """One transition.

    `observe` has one component per storage unit: the scanned worktape symbol, the
    top of each stack (or EMPTY), or the zero-test of each counter (ZERO/NONZERO).
    `storage_action` mirrors it: a worktape rule carries `(write, move)`, a stack rule
    one of "push:<x>", "pop", "noop" per stack, a counter rule one of "inc", "dec",
    "noop" per counter. WILDCARD matches any observation; as a worktape write it keeps
    the scanned symbol.
    """

    source: str
    read: str
    observe: Tuple[str, ...]
    target: str
    input_action: InputAction
    storage_action: Tuple[str, ...]
    weight: Fraction | None = None

    def matches(self, observation: Tuple[str, ...]) -> bool:
        for wanted, seen in zip(self.observe, observation):
            if wanted != WILDCARD and wanted != seen:
                return False
        return True


@dataclass(frozen=True)
class Machine:
    name: str
    timing: Timing
    mode: Mode
    input_alphabet: Alphabet
    storage: StorageSpec
    states: Tuple[str, ...]
    initial: str
    accepting: frozenset
    transitions: Tuple[TransitionRule, ...]
    labels: Mapping[str, Label] = field(default_factory=dict)

    @cached_property
    def rule_index(self) -> Dict[Tuple[str, str], Tuple[TransitionRule, ...]]:
        """Rules grouped by (state, read symbol)."""
        index: Dict[Tuple[str, str], List[TransitionRule]] = {}
        for rule in self.transitions:
            index.setdefault((rule.source, rule.read), []).append(rule)
        return {key: tuple(rules) for key, rules in index.items()}

    def label(self, state: str) -> Label:
        return self.labels.get(state, Label.EXISTENTIAL)

    @property
    def branching(self) -> bool:
        return self.mode is not Mode.DETERMINISTIC


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    rule: int | None = None


def _overlaps(first: Tuple[str, ...], second: Tuple[str, ...]) -> bool:
    return all(
        a == b or a == WILDCARD or b == WILDCARD for a, b in zip(first, second)
    )


def _concrete_observations(
    spec: StorageSpec, observe: Tuple[str, ...]
) -> List[Tuple[str, ...]]:
    domain = spec.observation_domain()
    choices = [domain if value == WILDCARD else (value,) for value in observe]
    return list(product(*choices))


def _check_action(
    machine: Machine, index: int, rule: TransitionRule
) -> List[Diagnostic]:
    spec = machine.storage
    found = []
    if spec.kind is StorageKind.WORKTAPE:
        if len(rule.storage_action) != 2:
            return [
                Diagnostic(
                    "arity", f"rule {index}: worktape action needs (write, move)", index
                )
            ]
        write, move = rule.storage_action
        if write != WILDCARD and write not in spec.alphabet:
            found.append(
                Diagnostic(
                    "symbol", f"rule {index}: writes unknown symbol {write!r}", index
                )
            )
        if move not in {m.value for m in Move}:
            found.append(
                Diagnostic("action", f"rule {index}: unknown move {move!r}", index)
            )
        # Cell 0 holds the origin marker and no other cell ever does.
        if write == LEFT_MARKER:
            found.append(
                Diagnostic(
                    "left-wall", f"rule {index}: writes the origin marker", index
                )
            )
        elif (
            LEFT_MARKER in spec.alphabet
            and write != WILDCARD
            and rule.observe[0] in (LEFT_MARKER, WILDCARD)
        ):
            found.append(
                Diagnostic(
                    "left-wall",
                    f"rule {index}: can overwrite the origin marker",
                    index,
                )
            )
        if move == Move.LEFT.value:
            if LEFT_MARKER not in spec.alphabet:
                found.append(
                    Diagnostic(
                        "left-wall",
                        f"rule {index}: moves Left without a {LEFT_MARKER} origin marker",
                        index,
                    )
                )
            elif rule.observe[0] in (LEFT_MARKER, WILDCARD):
                found.append(
                    Diagnostic(
                        "left-wall",
                        f"rule {index}: can move Left from the origin cell",
                        index,
                    )
                )
        return found
    if len(rule.storage_action) != spec.count:
        return [
            Diagnostic(
                "arity",
                f"rule {index}: expected {spec.count} storage actions, "
                f"got {len(rule.storage_action)}",
                index,
            )
        ]
    for unit, (action, seen) in enumerate(zip(rule.storage_action, rule.observe)):
        if spec.kind is StorageKind.STACKS:
            if action.startswith("push:"):
                if action[5:] not in spec.alphabet:
                    found.append(
                        Diagnostic(
                            "symbol",
                            f"rule {index}: pushes unknown symbol {action[5:]!r}",
                            index,
                        )
                    )
            elif action == "pop":
                if seen in (EMPTY, WILDCARD):
                    found.append(
                        Diagnostic(
                            "pop-empty",
                            f"rule {index}: pop on stack {unit} may fire on an empty stack",
                            index,
                        )
                    )
            elif action != "noop":
                found.append(
                    Diagnostic(
                        "action", f"rule {index}: unknown stack action {action!r}", index
                    )
                )
        else:
            if action == "dec":
                if seen in (ZERO, WILDCARD):
                    found.append(
                        Diagnostic(
                            "dec-zero",
                            f"rule {index}: dec on counter {unit} may fire at zero",
                            index,
                        )
                    )
            elif action not in ("inc", "noop"):
                found.append(
                    Diagnostic(
                        "action",
                        f"rule {index}: unknown counter action {action!r}",
                        index,
                    )
                )
    return found


def validate_machine(machine: Machine) -> List[Diagnostic]:
    """Check a machine against every invariant of the model.

    Args:
        machine: The machine to check.

    Returns:
        A list of diagnostics; empty if and only if the machine is valid.

    Notes:
        Each diagnostic names the violated invariant (its `code`) and, where one rule is
        at fault, the rule's index in `machine.transitions`.
    """
    diagnostics: List[Diagnostic] = []
    spec = machine.storage
    states = set(machine.states)

    for symbol in machine.input_alphabet:
        if symbol in RESERVED:
            diagnostics.append(
                Diagnostic("alphabet", f"reserved token {symbol!r} in input alphabet")
            )
    if machine.input_alphabet.padded and machine.timing is not Timing.REAL_TIME:
        diagnostics.append(
            Diagnostic("alphabet", f"{KAPPA} is only allowed in padded real-time machines")
        )
    if spec.count < 1:
        diagnostics.append(Diagnostic("storage", "storage count must be at least 1"))
    if spec.kind is StorageKind.WORKTAPE:
        if spec.count != 1:
            diagnostics.append(Diagnostic("storage", "exactly one worktape is allowed"))
        if BLANK not in spec.alphabet:
            diagnostics.append(
                Diagnostic("storage", f"worktape alphabet must contain blank {BLANK!r}")
            )
    elif spec.kind is StorageKind.STACKS and BLANK in spec.alphabet:
        diagnostics.append(
            Diagnostic("storage", "blank belongs only to worktape alphabets")
        )
    if machine.initial not in states:
        diagnostics.append(
            Diagnostic("reference", f"initial state {machine.initial!r} is undeclared")
        )
    for state in sorted(machine.accepting - states):
        diagnostics.append(
            Diagnostic("reference", f"accepting state {state!r} is undeclared")
        )
    for state, label in machine.labels.items():
        if state not in states:
            diagnostics.append(
                Diagnostic("reference", f"label on undeclared state {state!r}")
            )
        if machine.mode is not Mode.ALTERNATING and label is not Label.EXISTENTIAL:
            diagnostics.append(
                Diagnostic(
                    "label", f"state {state!r}: universal label outside alternating mode"
                )
            )

    width = 1 if spec.kind is StorageKind.WORKTAPE else spec.count
    domain = set(spec.observation_domain()) | {WILDCARD}
    readable = set(machine.input_alphabet.symbols) | {ENDMARKER}
    for index, rule in enumerate(machine.transitions):
        for state in (rule.source, rule.target):
            if state not in states:
                diagnostics.append(
                    Diagnostic(
                        "reference", f"rule {index}: undeclared state {state!r}", index
                    )
                )
        if rule.read not in readable:
            diagnostics.append(
                Diagnostic("symbol", f"rule {index}: reads unknown {rule.read!r}", index)
            )
        if len(rule.observe) != width:
            diagnostics.append(
                Diagnostic(
                    "arity",
                    f"rule {index}: expected {width} observations, got {len(rule.observe)}",
                    index,
                )
            )
            continue
        for value in rule.observe:
            if value not in domain:
                diagnostics.append(
                    Diagnostic(
                        "symbol", f"rule {index}: unknown observation {value!r}", index
                    )
                )
        if (
            machine.timing is Timing.REAL_TIME
            and rule.input_action is not InputAction.ADVANCE
        ):
            diagnostics.append(
                Diagnostic(
                    "real-time", f"rule {index}: real-time rules must advance", index
                )
            )
        if machine.mode is Mode.PROBABILISTIC:
            if rule.weight is None or rule.weight <= 0:
                diagnostics.append(
                    Diagnostic(
                        "weight", f"rule {index}: needs a positive rational weight", index
                    )
                )
        elif rule.weight is not None:
            diagnostics.append(
                Diagnostic(
                    "weight", f"rule {index}: weight outside probabilistic mode", index
                )
            )
        diagnostics.extend(_check_action(machine, index, rule))

    positions = {id(rule): index for index, rule in enumerate(machine.transitions)}
    for (state, symbol), rules in machine.rule_index.items():
        if len(rules) < 2 and machine.mode is not Mode.PROBABILISTIC:
            continue
        if any(len(rule.observe) != width for rule in rules):
            continue
        if machine.mode is Mode.PROBABILISTIC:
            seen = set()
            for rule in rules:
                for observation in _concrete_observations(spec, rule.observe):
                    if observation in seen:
                        continue
                    seen.add(observation)
                    total = sum(
                        (r.weight or Fraction(0) for r in rules if r.matches(observation)),
                        Fraction(0),
                    )
                    if total != 1:
                        diagnostics.append(
                            Diagnostic(
                                "weight",
                                f"state {state!r} on {symbol!r} observing "
                                f"{observation}: weights sum to {total} ≠ 1",
                                positions[id(rule)],
                            )
                        )
            continue
        for i, first in enumerate(rules):
            for second in rules[i + 1:]:
                if not _overlaps(first.observe, second.observe):
                    continue
                if machine.mode is Mode.DETERMINISTIC:
                    diagnostics.append(
                        Diagnostic(
                            "determinism",
                            f"state {state!r} on {symbol!r}: nondeterministic fan-out "
                            f"in deterministic mode (rules {positions[id(first)]} "
                            f"and {positions[id(second)]})",
                            positions[id(second)],
                        )
                    )
                elif (
                    machine.mode is Mode.ALTERNATING and state not in machine.labels
                ):
                    diagnostics.append(
                        Diagnostic(
                            "label",
                            f"branching state {state!r} carries no "
                            "existential/universal label",
                            positions[id(second)],
                        )
                    )
    return _dedupe(diagnostics)


def _dedupe(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    unique = []
    seen = set()
    for diagnostic in diagnostics:
        if diagnostic.message not in seen:
            seen.add(diagnostic.message)
            unique.append(diagnostic)
    return unique


def tokenize(machine: Machine, text: str | Sequence[str]) -> Tuple[str, ...]:
    """Split input text into tokens of the machine's input alphabet.

    Args:
        machine: Machine whose alphabet defines the tokens.
        text: Raw input text, or an already tokenized sequence.

    Returns:
        The token tuple.

    Raises:
        MachineError: If the text contains a symbol outside the alphabet.

    Notes:
        Run-length notation `x^n` repeats token x n times (`a^5000`). Whitespace is
        ignored; multi-character tokens such as "a10" are matched longest-first.
    """
    if not isinstance(text, str):
        tokens = tuple(text)
        unknown = [t for t in tokens if t not in machine.input_alphabet]
        if unknown:
            raise MachineError(f"symbol {unknown[0]!r} is not in the input alphabet")
        return tokens
    symbols = sorted(machine.input_alphabet.symbols, key=len, reverse=True)
    tokens: List[str] = []
    position = 0
    text = re.sub(r"\s+", "", text)
    while position < len(text):
        for symbol in symbols:
            if text.startswith(symbol, position):
                position += len(symbol)
                repeat = re.match(r"\^(\d+)", text[position:])
                if repeat:
                    tokens.extend([symbol] * int(repeat.group(1)))
                    position += repeat.end()
                else:
                    tokens.append(symbol)
                break
        else:
            raise MachineError(
                f"symbol at offset {position} ({text[position:position + 8]!r}) "
                "is not in the input alphabet"
            )
    return tuple(tokens)


def _rule_to_dict(rule: TransitionRule) -> Dict:
    entry = {
        "from": rule.source,
        "read": rule.read,
        "observe": list(rule.observe),
        "to": rule.target,
        "input_action": rule.input_action.value,
        "storage_action": list(rule.storage_action),
    }
    if rule.weight is not None:
        entry["weight"] = str(rule.weight)
    return entry


def serialize_machine(machine: Machine) -> str:
    """Render a machine in the JSON machine file format (UTF-8, indented)."""
    params: Dict = {"count": machine.storage.count}
    if machine.storage.alphabet:
        params["alphabet"] = list(machine.storage.alphabet)
    states = []
    for state in machine.states:
        entry = {"id": state}
        if state in machine.labels:
            entry["label"] = machine.labels[state].value
        states.append(entry)
    document = {
        "name": machine.name,
        "timing": machine.timing.value,
        "mode": machine.mode.value,
        "input_alphabet": list(machine.input_alphabet.symbols),
        "storage": {"kind": machine.storage.kind.value, "params": params},
        "states": states,
        "initial": machine.initial,
        "accepting": sorted(machine.accepting),
        "transitions": [_rule_to_dict(rule) for rule in machine.transitions],
    }
    return json.dumps(document, indent=2, ensure_ascii=False)


def _require(tree: Dict, key: str, locus: str):
    if not isinstance(tree, dict) or key not in tree:
        raise MachineParseError(f"missing field {key!r}", locus)
    return tree[key]


def _enum(kind, value, locus: str):
    try:
        return kind(value)
    except ValueError:
        allowed = ", ".join(member.value for member in kind)
        raise MachineParseError(f"{value!r} is not one of {allowed}", locus) from None


def _string_list(value, locus: str) -> Tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise MachineParseError("expected a list of strings", locus)
    return tuple(value)


def parse_machine(text: str, validate: bool = True) -> Machine:
    """Read a machine from the JSON machine file format.

    Args:
        text: File content.
        validate: If True, validation diagnostics are raised as an error.

    Returns:
        The parsed machine.

    Raises:
        MachineParseError: Malformed JSON (locus "line N") or a missing/ill-typed field
            (locus is the field path, e.g. "transitions[3].to").
        MachineReferenceError: A transition names an undeclared state or symbol.
        MachineValidationError: The machine violates a model invariant.
    """
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise MachineParseError(e.msg, f"line {e.lineno}") from None

    name = _require(tree, "name", "name")
    timing = _enum(Timing, _require(tree, "timing", "timing"), "timing")
    mode = _enum(Mode, _require(tree, "mode", "mode"), "mode")
    alphabet = Alphabet(
        _string_list(_require(tree, "input_alphabet", "input_alphabet"), "input_alphabet")
    )
    storage_tree = _require(tree, "storage", "storage")
    kind = _enum(StorageKind, _require(storage_tree, "kind", "storage.kind"), "storage.kind")
    params = storage_tree.get("params", {}) if isinstance(storage_tree, dict) else {}
    count = params.get("count", 1)
    if not isinstance(count, int):
        raise MachineParseError("expected an integer", "storage.params.count")
    storage = StorageSpec(
        kind, count, _string_list(params.get("alphabet", []), "storage.params.alphabet")
    )

    states: List[str] = []
    labels: Dict[str, Label] = {}
    for i, entry in enumerate(_require(tree, "states", "states")):
        state = _require(entry, "id", f"states[{i}].id")
        states.append(state)
        if "label" in entry:
            labels[state] = _enum(Label, entry["label"], f"states[{i}].label")
    declared = set(states)
    initial = _require(tree, "initial", "initial")
    accepting = frozenset(_string_list(_require(tree, "accepting", "accepting"), "accepting"))
    for state in [initial, *sorted(accepting)]:
        if state not in declared:
            raise MachineReferenceError(f"undeclared state {state!r}", "initial/accepting")

    readable = set(alphabet.symbols) | {ENDMARKER}
    transitions = []
    for i, entry in enumerate(_require(tree, "transitions", "transitions")):
        locus = f"transitions[{i}]"
        source = _require(entry, "from", f"{locus}.from")
        target = _require(entry, "to", f"{locus}.to")
        for key, state in (("from", source), ("to", target)):
            if state not in declared:
                raise MachineReferenceError(f"undeclared state {state!r}", f"{locus}.{key}")
        read = _require(entry, "read", f"{locus}.read")
        if read not in readable:
            raise MachineReferenceError(f"unknown input symbol {read!r}", f"{locus}.read")
        weight = entry.get("weight")
        if weight is not None:
            try:
                weight = Fraction(str(weight))
            except ValueError:
                raise MachineParseError(
                    f"bad rational {weight!r}", f"{locus}.weight"
                ) from None
        transitions.append(
            TransitionRule(
                source=source,
                read=read,
                observe=_string_list(
                    _require(entry, "observe", f"{locus}.observe"), f"{locus}.observe"
                ),
                target=target,
                input_action=_enum(
                    InputAction,
                    _require(entry, "input_action", f"{locus}.input_action"),
                    f"{locus}.input_action",
                ),
                storage_action=_string_list(
                    _require(entry, "storage_action", f"{locus}.storage_action"),
                    f"{locus}.storage_action",
                ),
                weight=weight,
            )
        )

    machine = Machine(
        name=name,
        timing=timing,
        mode=mode,
        input_alphabet=alphabet,
        storage=storage,
        states=tuple(states),
        initial=initial,
        accepting=accepting,
        transitions=tuple(transitions),
        labels=labels,
    )
    if validate:
        diagnostics = validate_machine(machine)
        if diagnostics:
            logging.error(f"Machine {name} failed validation: {diagnostics[0].message}")
            raise MachineValidationError(diagnostics)
    return machine
