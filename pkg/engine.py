"""
Execution engine for the automata laboratory.

This module runs machines described by `machine_model`:

- deterministic runs with traces, per-step space usage and per-position pause counts,
- the budget-bounded configuration graph of a branching machine (`explore`),
- least-fixpoint AND-OR evaluation of that graph (`decide_bounded`),
- exact acceptance probabilities of real-time probabilistic machines.

Every operation is a pure function of its arguments; machines are never mutated.
The endmarker is appended by the engine and the verdict is the accepting status of
the state entered by the transition that consumes it.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, NamedTuple, Sequence, Set, Tuple

from machine_model import (
    BLANK,
    EMPTY,
    ENDMARKER,
    LEFT_MARKER,
    NONZERO,
    WILDCARD,
    ZERO,
    InputAction,
    Label,
    Machine,
    Mode,
    Move,
    StorageKind,
    Timing,
    TransitionRule,
    tokenize,
)

DEFAULT_MAX_CONFIGURATIONS = 2_000_000
DEFAULT_MAX_STATIONARY_STEPS = 1_000_000


class EngineError(RuntimeError):
    """Base class for failures while executing a machine."""


class EngineTrap(EngineError):
    """An invalid storage action fired at runtime."""


class SearchLimitError(EngineError):
    """The configuration graph grew past the configured maximum."""


class StepLimitError(EngineError):
    """A deterministic run kept pausing on one input symbol past the configured maximum."""


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    BUDGET_EXCEEDED = "budget-exceeded"


class Configuration(NamedTuple):
    """Instantaneous description of a machine.

    `storage` is `(cells, head)` for a worktape (trailing blanks stripped), a tuple of
    stack contents (bottom first) for stacks, or a tuple of counter values.
    """

    state: str
    position: int
    storage: tuple


@dataclass(frozen=True)
class SpaceProfile:
    max_usage: int
    per_step_usage: Tuple[int, ...]


@dataclass(frozen=True)
class RunResult:
    verdict: Verdict
    steps: int
    space_profile: SpaceProfile
    trace: Tuple[Configuration, ...] | None = None
    pauses: Tuple[int, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


@dataclass
class ReachabilityGraph:
    """Budget-bounded configuration graph of one machine on one input."""

    initial: Configuration
    successors: Dict[Configuration, Tuple[Configuration, ...]] = field(
        default_factory=dict
    )
    pruned_nodes: Set[Configuration] = field(default_factory=set)
    halting_position: int = 0
    max_usage: int = 0

    @property
    def pruned(self) -> bool:
        return bool(self.pruned_nodes)

    def __len__(self) -> int:
        return len(self.successors)

    def halted(self, config: Configuration) -> bool:
        return config.position == self.halting_position


def _prepare(machine: Machine, word) -> Tuple[str, ...]:
    return tokenize(machine, word) + (ENDMARKER,)


def initial_configuration(machine: Machine) -> Configuration:
    spec = machine.storage
    if spec.kind is StorageKind.WORKTAPE:
        storage = ((LEFT_MARKER,), 0) if LEFT_MARKER in spec.alphabet else ((), 0)
    elif spec.kind is StorageKind.STACKS:
        storage = tuple(() for _ in range(spec.count))
    else:
        storage = tuple(0 for _ in range(spec.count))
    return Configuration(machine.initial, 0, storage)


def usage(machine: Machine, storage: tuple) -> int:
    """Space used by a storage content.

    Worktape usage is the head's displacement from the origin cell, not the number
    of nonblank cells. Stacks count summed heights; counters count summed values.
    """
    kind = machine.storage.kind
    if kind is StorageKind.WORKTAPE:
        return storage[1]
    if kind is StorageKind.STACKS:
        return sum(len(stack) for stack in storage)
    return sum(storage)


def observe(machine: Machine, storage: tuple) -> Tuple[str, ...]:
    kind = machine.storage.kind
    if kind is StorageKind.WORKTAPE:
        cells, head = storage
        return (cells[head] if head < len(cells) else BLANK,)
    if kind is StorageKind.STACKS:
        return tuple(stack[-1] if stack else EMPTY for stack in storage)
    return tuple(NONZERO if value else ZERO for value in storage)


def _apply_storage(machine: Machine, storage: tuple, rule: TransitionRule) -> tuple:
    kind = machine.storage.kind
    if kind is StorageKind.WORKTAPE:
        cells, head = storage
        write, move = rule.storage_action
        if write != WILDCARD:
            cells = list(cells)
            if head >= len(cells):
                cells.extend([BLANK] * (head + 1 - len(cells)))
            cells[head] = write
            while cells and cells[-1] == BLANK:
                cells.pop()
            cells = tuple(cells)
        if move == Move.LEFT.value:
            if head == 0:
                raise EngineTrap(
                    f"{machine.name}: {rule.source} moved Left of the origin cell"
                )
            head -= 1
        elif move == Move.RIGHT.value:
            head += 1
        return (cells, head)
    if kind is StorageKind.STACKS:
        stacks = list(storage)
        for index, action in enumerate(rule.storage_action):
            if action == "pop":
                if not stacks[index]:
                    raise EngineTrap(
                        f"{machine.name}: {rule.source} popped empty stack {index}"
                    )
                stacks[index] = stacks[index][:-1]
            elif action.startswith("push:"):
                stacks[index] = stacks[index] + (action[5:],)
        return tuple(stacks)
    counters = list(storage)
    for index, action in enumerate(rule.storage_action):
        if action == "inc":
            counters[index] += 1
        elif action == "dec":
            if counters[index] == 0:
                raise EngineTrap(
                    f"{machine.name}: {rule.source} decremented zero counter {index}"
                )
            counters[index] -= 1
    return tuple(counters)


def applicable(
    machine: Machine, config: Configuration, symbol: str
) -> Tuple[TransitionRule, ...]:
    """Rules enabled in `config` while the input head scans `symbol`."""
    rules = machine.rule_index.get((config.state, symbol), ())
    if not rules:
        return ()
    observation = observe(machine, config.storage)
    return tuple(rule for rule in rules if rule.matches(observation))


def apply_rule(
    machine: Machine, config: Configuration, rule: TransitionRule
) -> Configuration:
    position = config.position
    if rule.input_action is InputAction.ADVANCE:
        position += 1
    return Configuration(
        rule.target, position, _apply_storage(machine, config.storage, rule)
    )


def successors(
    machine: Machine, config: Configuration, tape: Sequence[str]
) -> List[Tuple[TransitionRule, Configuration]]:
    if config.position >= len(tape):
        return []
    return [
        (rule, apply_rule(machine, config, rule))
        for rule in applicable(machine, config, tape[config.position])
    ]


def _only_rule(machine: Machine, rules: Tuple[TransitionRule, ...]) -> TransitionRule:
    if len(rules) > 1:
        raise EngineError(
            f"{machine.name}: {len(rules)} rules apply in state {rules[0].source}"
        )
    return rules[0]


def _guard_pauses(machine: Machine, count: int, position: int, limit: int):
    if count > limit:
        logging.error(f"{machine.name}: {count} stationary steps at input position {position}")
        raise StepLimitError(
            f"{machine.name}: more than {limit} stationary steps at input position {position}"
        )


def run_deterministic(
    machine: Machine,
    word,
    trace: bool = False,
    max_stationary: int = DEFAULT_MAX_STATIONARY_STEPS,
) -> RunResult:
    """Run a deterministic machine on one input.

    Args:
        machine: A deterministic machine.
        word: Input text (tokenized with `tokenize`) or token sequence, without the
            endmarker.
        trace: If True, record every configuration of the run.
        max_stationary: Guard on the stationary steps spent at one input position.

    Returns:
        RunResult with verdict, step count, space profile, optional trace and the
        number of stationary steps spent at each input position.

    Raises:
        EngineError: If the machine is not deterministic.
        EngineTrap: If an invalid storage action fires.
        StepLimitError: If a run pauses more than `max_stationary` steps on one
            symbol without repeating a configuration.

    Notes:
        A one-way run that revisits a configuration loops forever and is rejected.
        A real-time run with no applicable rule falls into an implicit rejecting sink
        that still reads out the input, so `steps == len(word) + 1` always holds.
    """
    if machine.mode is not Mode.DETERMINISTIC:
        raise EngineError(f"{machine.name} is {machine.mode.value}, not deterministic")
    tape = _prepare(machine, word)
    halting = len(tape)
    config = initial_configuration(machine)
    steps = 0
    per_step = [usage(machine, config.storage)]
    pauses = [0] * halting
    configs = [config] if trace else None
    seen: Set[Configuration] = set()

    while config.position < halting:
        rules = applicable(machine, config, tape[config.position])
        if not rules:
            break
        rule = _only_rule(machine, rules)
        if rule.input_action is InputAction.STAY:
            if config in seen:
                logging.info(f"{machine.name}: loop detected at step {steps}")
                break
            seen.add(config)
            pauses[config.position] += 1
            _guard_pauses(machine, pauses[config.position], config.position, max_stationary)
        else:
            seen.clear()
        config = apply_rule(machine, config, rule)
        steps += 1
        per_step.append(usage(machine, config.storage))
        if trace:
            configs.append(config)

    halted = config.position == halting
    if not halted and machine.timing is Timing.REAL_TIME:
        # Implicit sink: consume the rest of the input, storage untouched.
        remaining = halting - config.position
        steps += remaining
        per_step.extend([per_step[-1]] * remaining)
    verdict = (
        Verdict.ACCEPT if halted and config.state in machine.accepting else Verdict.REJECT
    )
    return RunResult(
        verdict=verdict,
        steps=steps,
        space_profile=SpaceProfile(max(per_step), tuple(per_step)),
        trace=tuple(configs) if trace else None,
        pauses=tuple(pauses),
    )


def feed(
    machine: Machine,
    config: Configuration,
    symbol: str,
    max_stationary: int = DEFAULT_MAX_STATIONARY_STEPS,
) -> Configuration | None:
    """Drive a deterministic machine until it advances past `symbol`.

    Returns the configuration right after the advancing step, or None if the machine
    gets stuck or loops while scanning `symbol`. Raises StepLimitError past
    `max_stationary` stationary steps.
    """
    seen: Set[Configuration] = set()
    while True:
        rules = applicable(machine, config, symbol)
        if not rules:
            return None
        rule = _only_rule(machine, rules)
        following = apply_rule(machine, config, rule)
        if rule.input_action is InputAction.ADVANCE:
            return following
        if config in seen:
            return None
        seen.add(config)
        _guard_pauses(machine, len(seen), config.position, max_stationary)
        config = following


def finish(machine: Machine, config: Configuration | None) -> Verdict:
    """Verdict of a deterministic machine that sees the endmarker in `config`."""
    if config is None:
        return Verdict.REJECT
    halted = feed(machine, config, ENDMARKER)
    if halted is not None and halted.state in machine.accepting:
        return Verdict.ACCEPT
    return Verdict.REJECT


def prefix_verdicts(machine: Machine, word) -> List[Verdict]:
    """Verdicts on every prefix `word[:i]`, i = 0..len(word), in one pass.

    The run is forked onto the endmarker each time it reaches a new input position.
    """
    if machine.mode is not Mode.DETERMINISTIC:
        raise EngineError(f"{machine.name} is {machine.mode.value}, not deterministic")
    tokens = tokenize(machine, word)
    config = initial_configuration(machine)
    verdicts = []
    for symbol in tokens:
        verdicts.append(finish(machine, config))
        if config is not None:
            config = feed(machine, config, symbol)
    verdicts.append(finish(machine, config))
    return verdicts


def explore(
    machine: Machine,
    word,
    budget: int | None = None,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> ReachabilityGraph:
    """Build the configuration graph reachable on `word` within a space budget.

    Args:
        machine: Any machine.
        word: Input text or token sequence, without the endmarker.
        budget: Maximum space usage a configuration may have; None for unbounded.
        max_configurations: Guard on the number of distinct configurations.

    Returns:
        ReachabilityGraph whose `successors` maps every reached configuration to its
        in-budget successors. Configurations with at least one successor over budget
        are collected in `pruned_nodes`.

    Raises:
        ValueError: If the budget is negative.
        SearchLimitError: If the graph exceeds `max_configurations`.
    """
    if budget is not None and budget < 0:
        raise ValueError(f"budget must be non-negative, got {budget}")
    tape = _prepare(machine, word)
    start = initial_configuration(machine)
    graph = ReachabilityGraph(initial=start, halting_position=len(tape))
    graph.max_usage = usage(machine, start.storage)
    frontier = deque([start])
    graph.successors[start] = ()
    while frontier:
        config = frontier.popleft()
        kept = []
        for _, following in successors(machine, config, tape):
            space = usage(machine, following.storage)
            if budget is not None and space > budget:
                graph.pruned_nodes.add(config)
                continue
            if following not in kept:
                kept.append(following)
            if following not in graph.successors:
                if len(graph.successors) >= max_configurations:
                    logging.warning(
                        f"{machine.name}: search stopped at {max_configurations} "
                        "configurations"
                    )
                    raise SearchLimitError(
                        f"more than {max_configurations} configurations reachable"
                    )
                graph.successors[following] = ()
                graph.max_usage = max(graph.max_usage, space)
                frontier.append(following)
        graph.successors[config] = tuple(kept)
    return graph


def winning_set(machine: Machine, graph: ReachabilityGraph) -> Set[Configuration]:
    """Least fixpoint of AND-OR acceptance over a configuration graph.

    Halted configurations in accepting states seed the set. An existential
    configuration joins once one successor has joined; a universal one joins once
    all of its successors have, provided it has at least one and none was pruned.
    Cycles that never reach acceptance stay outside the set.
    """
    predecessors: Dict[Configuration, List[Configuration]] = {}
    remaining: Dict[Configuration, int] = {}
    worklist = deque()
    accepted: Set[Configuration] = set()
    for config, following in graph.successors.items():
        for target in following:
            predecessors.setdefault(target, []).append(config)
        if machine.label(config.state) is Label.UNIVERSAL:
            remaining[config] = len(following)
        if graph.halted(config) and config.state in machine.accepting:
            accepted.add(config)
            worklist.append(config)
    while worklist:
        config = worklist.popleft()
        for parent in predecessors.get(config, ()):
            if parent in accepted:
                continue
            if parent in remaining:
                if parent in graph.pruned_nodes:
                    continue
                remaining[parent] -= 1
                if remaining[parent] > 0:
                    continue
            accepted.add(parent)
            worklist.append(parent)
    return accepted


def decide_bounded(
    machine: Machine,
    word,
    budget: int | None = None,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> Decision:
    """Decide acceptance within a space budget.

    Args:
        machine: A deterministic, nondeterministic or alternating machine.
        word: Input text or token sequence, without the endmarker.
        budget: Space budget in cells; None means unbounded.
        max_configurations: Guard on the explored graph.

    Returns:
        ACCEPT if an accepting computation tree exists whose configurations all use
        at most `budget` cells, BUDGET_EXCEEDED if none exists but the search had to
        prune configurations, REJECT otherwise.

    Raises:
        ValueError: If the budget is negative or the machine is probabilistic.
    """
    if machine.mode is Mode.PROBABILISTIC:
        raise ValueError(
            f"{machine.name} is probabilistic; use acceptance_probability"
        )
    graph = explore(machine, word, budget, max_configurations)
    if graph.initial in winning_set(machine, graph):
        return Decision.ACCEPT
    if graph.pruned:
        return Decision.BUDGET_EXCEEDED
    return Decision.REJECT


def acceptance_probability(machine: Machine, word) -> Fraction:
    """Exact probability that a real-time probabilistic machine accepts `word`.

    Path weights multiply along a run; configurations reached by several paths are
    merged. Runs with no applicable rule reject.

    Raises:
        ValueError: If the machine is not probabilistic or not real-time.
        EngineError: If the path masses do not sum to exactly 1.
    """
    if machine.mode is not Mode.PROBABILISTIC:
        raise ValueError(f"{machine.name} is not probabilistic")
    if machine.timing is not Timing.REAL_TIME:
        raise ValueError(
            f"{machine.name}: acceptance probability needs a real-time machine"
        )
    tape = _prepare(machine, word)
    distribution: Dict[Configuration, Fraction] = {
        initial_configuration(machine): Fraction(1)
    }
    rejected = Fraction(0)
    for symbol in tape:
        following: Dict[Configuration, Fraction] = {}
        for config, mass in distribution.items():
            rules = applicable(machine, config, symbol)
            if not rules:
                rejected += mass
                continue
            for rule in rules:
                target = apply_rule(machine, config, rule)
                following[target] = following.get(target, Fraction(0)) + mass * rule.weight
        distribution = following
    accepted = sum(
        (mass for config, mass in distribution.items() if config.state in machine.accepting),
        Fraction(0),
    )
    total = rejected + sum(distribution.values(), Fraction(0))
    if total != 1:
        raise EngineError(f"{machine.name}: path mass {total} ≠ 1")
    return accepted
