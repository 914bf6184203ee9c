"""
Space metering for the automata laboratory.

Three space semantics are measured here:

- Strong: maximum usage over all configurations reachable on any input of length n.
- Middle: maximum usage over all configurations reachable on an accepted input.
- Weak: minimum, over accepting computations, of the maximum usage along one.

Measurements run under a cap. Reachability that had to be cut at the cap is
reported through `Measurement.truncated` instead of being guessed.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Iterable, Tuple

from engine import (
    DEFAULT_MAX_CONFIGURATIONS,
    Decision,
    decide_bounded,
    explore,
    winning_set,
)
from machine_model import Machine, Mode

EXHAUSTIVE_MAX_ALPHABET = 3
EXHAUSTIVE_MAX_LENGTH = 14


class SpaceMode(str, Enum):
    STRONG = "strong"
    MIDDLE = "middle"
    WEAK = "weak"


class ExhaustiveGuardError(ValueError):
    """Exhaustive enumeration requested beyond the supported input space."""


@dataclass(frozen=True)
class Measurement:
    space: int | None
    truncated: bool = False


LOGLOG_MACHINES = frozenset({"njk", "njk-rt"})


def default_cap(n: int, factor: int = 4, offset: int = 2) -> int:
    """Default space cap for inputs of length n: factor * (ceil(log2(n + 2)) + offset)."""
    return factor * (math.ceil(math.log2(n + 2)) + offset)


def loglog_cap(n: int, offset: int = 2) -> int:
    """Space cap for machines guessing a modulus: ceil(log2(ceil(log2(n + 2)) + 2)) + offset.

    The least modulus separating two counts whose sum is n is at most log2(n) + 2,
    and its bit length plus the blank cell past it always fits under this cap.
    """
    return math.ceil(math.log2(math.ceil(math.log2(n + 2)) + 2)) + offset


def cap_for(machine: Machine, n: int, factor: int = 4, offset: int = 2) -> int:
    """Default cap for `machine` on inputs of length n."""
    if machine.name in LOGLOG_MACHINES:
        return loglog_cap(n, offset)
    return default_cap(n, factor, offset)


def _deepen(
    machine: Machine, word, cap: int, max_configurations: int
) -> Tuple[Decision, int | None]:
    if cap < 0:
        raise ValueError(f"cap must be non-negative, got {cap}")
    for budget in range(cap + 1):
        decision = decide_bounded(machine, word, budget, max_configurations)
        if decision is Decision.ACCEPT:
            return decision, budget
        if decision is Decision.REJECT:
            # Nothing was pruned, so larger budgets see the same graph.
            return decision, None
    return Decision.BUDGET_EXCEEDED, None


def decide_within(
    machine: Machine,
    word,
    cap: int,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> Decision:
    """Decide acceptance within `cap` cells by trying budgets 0, 1, ..., cap.

    A guessing machine explored at the full cap builds every guess the cap allows;
    deepening stops at the first budget with an accepting computation instead.
    """
    return _deepen(machine, word, cap, max_configurations)[0]


def measure_weak_space(
    machine: Machine,
    word,
    cap: int,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> int | None:
    """Smallest budget s <= cap under which the machine accepts `word`.

    Budgets are tried in increasing order from 0. Returns None if the machine does
    not accept within the cap.
    """
    return _deepen(machine, word, cap, max_configurations)[1]


def measure_middle_space(
    machine: Machine,
    word,
    cap: int,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> Measurement:
    """Maximum usage over every configuration reachable on an accepted input.

    Rejecting branches of an accepted input count. Acceptance is decided on the
    graph bounded by `cap`; `space` is None when the input is not accepted there.
    """
    if cap < 0:
        raise ValueError(f"cap must be non-negative, got {cap}")
    graph = explore(machine, word, cap, max_configurations)
    if machine.mode is Mode.PROBABILISTIC:
        accepted = any(
            graph.halted(config) and config.state in machine.accepting
            for config in graph.successors
        )
    else:
        accepted = graph.initial in winning_set(machine, graph)
    if not accepted:
        return Measurement(None, graph.pruned)
    if graph.pruned:
        logging.info(f"{machine.name}: middle space truncated at cap {cap}")
    return Measurement(graph.max_usage, graph.pruned)


def measure_strong_space(
    machine: Machine,
    n: int,
    cap: int,
    inputs: Iterable | None = None,
    exhaustive: bool = False,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> Measurement:
    """Maximum usage over all configurations reachable on inputs of length n.

    Args:
        machine: Machine to measure.
        n: Input length.
        cap: Space cap for reachability.
        inputs: Explicit inputs of length n (token sequences or text).
        exhaustive: Enumerate every input of length n instead.
        max_configurations: Guard on each explored graph.

    Returns:
        Measurement whose `truncated` flag is set if any graph was cut at the cap.

    Raises:
        ExhaustiveGuardError: If exhaustive mode is requested for an alphabet larger
            than three symbols with n above 14 (unary alphabets are always allowed).
    """
    symbols = machine.input_alphabet.symbols
    if exhaustive:
        if len(symbols) > 1 and (
            len(symbols) > EXHAUSTIVE_MAX_ALPHABET or n > EXHAUSTIVE_MAX_LENGTH
        ):
            logging.warning(
                f"{machine.name}: exhaustive strong space refused for "
                f"|alphabet|={len(symbols)}, n={n}"
            )
            raise ExhaustiveGuardError(
                f"exhaustive enumeration needs |alphabet| <= {EXHAUSTIVE_MAX_ALPHABET} "
                f"and n <= {EXHAUSTIVE_MAX_LENGTH}, or a unary alphabet"
            )
        inputs = product(symbols, repeat=n)
    elif inputs is None:
        raise ValueError("pass explicit inputs or set exhaustive")
    space = 0
    truncated = False
    for word in inputs:
        graph = explore(machine, word, cap, max_configurations)
        space = max(space, graph.max_usage)
        truncated = truncated or graph.pruned
    return Measurement(space, truncated)


def measure(
    machine: Machine,
    word,
    mode: SpaceMode,
    cap: int,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> Measurement:
    """Measure one input under the given space mode.

    Strong mode on a single input measures that input's reachable space; sweeps over
    a length take the maximum across their inputs.
    """
    mode = SpaceMode(mode)
    if mode is SpaceMode.WEAK:
        return Measurement(measure_weak_space(machine, word, cap, max_configurations))
    if mode is SpaceMode.MIDDLE:
        return measure_middle_space(machine, word, cap, max_configurations)
    return measure_strong_space(
        machine, len(word), cap, [word], max_configurations=max_configurations
    )
