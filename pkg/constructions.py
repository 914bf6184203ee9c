"""
Machine constructions for the automata laboratory.

Builders in this module return validated `Machine` values for every device studied
by the lab:

- the unary real-time counter machine for L_D,
- the κ-padding transform that turns a one-way machine into a real-time one,
- the three-track nondeterministic machine for {a^j b^k | j != k} and its padded form,
- the two-stack machine for the even-reversed-binaries language and its
  probabilistic one-stack counterpart,
- the j-counter machines for L_j and their probabilistic one-counter counterparts,
- small fixtures for padding and the alternating engine.

Builders are pure; every call returns a fresh, immutable machine.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

from engine import explore, run_deterministic
from machine_model import (
    BLANK,
    EMPTY,
    ENDMARKER,
    KAPPA,
    LEFT_MARKER,
    WILDCARD,
    ZERO,
    Alphabet,
    InputAction,
    Label,
    Machine,
    MachineValidationError,
    Mode,
    Move,
    StorageKind,
    StorageSpec,
    Timing,
    TransitionRule,
    validate_machine,
)
from oracles import least_distinguishing_modulus

RIGHT_MARKER = "⊣"
HALF = Fraction(1, 2)

L, R, S = Move.LEFT.value, Move.RIGHT.value, Move.STAY.value


class _Builder:
    """Accumulates states and rules of a machine in declaration order."""

    def __init__(self, name, timing, mode, alphabet, storage: StorageSpec):
        self.name = name
        self.timing = timing
        self.mode = mode
        self.alphabet = Alphabet(tuple(alphabet))
        self.storage = storage
        self.states: Dict[str, None] = {}
        self.rules: List[TransitionRule] = []

    def state(self, name: str) -> str:
        self.states.setdefault(name, None)
        return name

    def add(
        self,
        source,
        read,
        observe,
        target,
        storage_action,
        advance=True,
        weight=None,
    ):
        if isinstance(observe, str):
            observe = (observe,)
        self.state(source)
        self.state(target)
        self.rules.append(
            TransitionRule(
                source=source,
                read=read,
                observe=tuple(observe),
                target=target,
                input_action=InputAction.ADVANCE if advance else InputAction.STAY,
                storage_action=tuple(storage_action),
                weight=weight,
            )
        )

    def build(self, initial, accepting, labels=None) -> Machine:
        self.state(initial)
        machine = Machine(
            name=self.name,
            timing=self.timing,
            mode=self.mode,
            input_alphabet=self.alphabet,
            storage=self.storage,
            states=tuple(self.states),
            initial=initial,
            accepting=frozenset(accepting),
            transitions=tuple(self.rules),
            labels=dict(labels or {}),
        )
        diagnostics = validate_machine(machine)
        if diagnostics:
            logging.error(f"Built machine {self.name} is invalid: {diagnostics[0].message}")
            raise MachineValidationError(diagnostics)
        return machine


def _keep(storage: StorageSpec) -> Tuple[str, ...]:
    if storage.kind is StorageKind.WORKTAPE:
        return (WILDCARD, S)
    return ("noop",) * storage.count


def _any(storage: StorageSpec) -> Tuple[str, ...]:
    width = 1 if storage.kind is StorageKind.WORKTAPE else storage.count
    return (WILDCARD,) * width


# L_D


def build_ld_machine() -> Machine:
    """Deterministic real-time machine for the unary language L_D.

    The worktape holds ⊢ b0 b1 ... ⊣, a counter in reverse binary. Four initial steps
    write ⊢0⊣. Each further sweep increments the counter on the way to ⊣ and checks on
    the way back whether it is a power of two. The input is accepted iff the
    endmarker arrives while the head is on ⊢ after a successful check. The head moves
    on every step.
    """
    tape = (BLANK, LEFT_MARKER, RIGHT_MARKER, "0", "1")
    b = _Builder(
        "ld",
        Timing.REAL_TIME,
        Mode.DETERMINISTIC,
        ("a",),
        StorageSpec(StorageKind.WORKTAPE, 1, tape),
    )
    a = "a"
    b.add("init", a, LEFT_MARKER, "init1", (WILDCARD, R))
    b.add("init1", a, BLANK, "init2", ("0", R))
    b.add("init2", a, BLANK, "init3", (RIGHT_MARKER, L))
    b.add("init3", a, "0", "check_no", (WILDCARD, L))
    for home in ("check_zero", "check_no"):
        b.add(home, a, LEFT_MARKER, "inc", (WILDCARD, R))
    b.add("inc", a, "1", "inc", ("0", R))
    b.add("inc", a, "0", "pass", ("1", R))
    b.add("inc", a, RIGHT_MARKER, "extend", ("1", R))
    b.add("extend", a, BLANK, "check_first", (RIGHT_MARKER, L))
    for bit in "01":
        b.add("pass", a, bit, "pass", (WILDCARD, R))
    b.add("pass", a, RIGHT_MARKER, "check_first", (WILDCARD, L))
    b.add("check_first", a, "1", "check_zero", (WILDCARD, L))
    b.add("check_first", a, "0", "check_no", (WILDCARD, L))
    b.add("check_zero", a, "0", "check_zero", (WILDCARD, L))
    b.add("check_zero", a, "1", "check_no", (WILDCARD, L))
    for bit in "01":
        b.add("check_no", a, bit, "check_no", (WILDCARD, L))
    b.add("check_zero", ENDMARKER, LEFT_MARKER, "accept", (WILDCARD, R))
    return b.build("init", {"accept"})


# Padding


@dataclass(frozen=True)
class PadParams:
    """Number of κ's inserted after every input symbol."""

    t: int = 0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"pause bound must be non-negative, got {self.t}")


def pad_string(word, params: PadParams | int):
    """Insert `t` κ's after every symbol of `word`.

    Strings are padded character by character and come back as strings; token
    sequences come back as tuples.
    """
    t = params.t if isinstance(params, PadParams) else PadParams(params).t
    if isinstance(word, str):
        return "".join(symbol + KAPPA * t for symbol in word)
    padded: List[str] = []
    for symbol in word:
        padded.append(symbol)
        padded.extend([KAPPA] * t)
    return tuple(padded)


def pad_machine(machine: Machine, name: str | None = None) -> Machine:
    """Real-time emulation of a one-way machine over Σ ∪ {κ}.

    The result is named `name`, or the original name with a `-kappa` suffix.

    The padded machine skips κ's freely after an advancing step of the original, and
    after a stationary step it must read a κ, on which it replays the original's
    transition on the last non-κ symbol. Any other symbol after a stationary step
    rejects. Storage is unchanged.

    Raises:
        ValueError: If the machine is already real-time or already uses κ.
    """
    if machine.timing is Timing.REAL_TIME:
        raise ValueError(f"{machine.name} is already real-time; nothing to pad")
    if KAPPA in machine.input_alphabet:
        raise ValueError(f"{machine.name} already reads {KAPPA}")
    spec = machine.storage
    probabilistic = machine.mode is Mode.PROBABILISTIC

    def go(state):
        return f"{state}|go"

    def stay(state, symbol):
        return f"{state}|stay|{symbol}"

    def target(rule, symbol):
        if rule.input_action is InputAction.ADVANCE:
            return go(rule.target)
        return stay(rule.target, symbol)

    b = _Builder(
        name or f"{machine.name}-kappa",
        Timing.REAL_TIME,
        machine.mode,
        machine.input_alphabet.symbols + (KAPPA,),
        spec,
    )
    labels = {}
    b.state(go(machine.initial))
    for state in machine.states:
        b.add(
            go(state),
            KAPPA,
            _any(spec),
            go(state),
            _keep(spec),
            weight=Fraction(1) if probabilistic else None,
        )
        labels[go(state)] = machine.label(state)
    for rule in machine.transitions:
        b.add(
            go(rule.source),
            rule.read,
            rule.observe,
            target(rule, rule.read),
            rule.storage_action,
            weight=rule.weight,
        )
    pending = sorted(
        {
            (rule.target, rule.read)
            for rule in machine.transitions
            if rule.input_action is InputAction.STAY
        }
    )
    for state, symbol in pending:
        b.state(stay(state, symbol))
        labels[stay(state, symbol)] = machine.label(state)
        for rule in machine.rule_index.get((state, symbol), ()):
            b.add(
                stay(state, symbol),
                KAPPA,
                rule.observe,
                target(rule, symbol),
                rule.storage_action,
                weight=rule.weight,
            )
    if machine.mode is not Mode.ALTERNATING:
        labels = {}
    else:
        labels = {state: label for state, label in labels.items() if label is Label.UNIVERSAL}
    return b.build(
        go(machine.initial), {go(state) for state in machine.accepting}, labels
    )


def max_pause(machine: Machine, word, budget: int | None = None) -> int:
    """Longest run of stationary steps the machine can make on `word`.

    Deterministic machines are measured on their single run. Branching machines are
    measured over every configuration reachable within `budget`; stationary cycles
    do not extend a run.
    """
    if machine.mode is Mode.DETERMINISTIC:
        pauses = run_deterministic(machine, word).pauses
        return max(pauses, default=0)
    graph = explore(machine, word, budget)
    longest: Dict = {}
    for root in graph.successors:
        if root in longest:
            continue
        stack = [(root, iter(graph.successors[root]))]
        on_path = {root}
        while stack:
            config, children = stack[-1]
            advanced = False
            for child in children:
                if child.position != config.position or child in on_path:
                    continue
                if child not in longest:
                    stack.append((child, iter(graph.successors[child])))
                    on_path.add(child)
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            on_path.discard(config)
            longest[config] = max(
                (
                    1 + longest.get(child, 0)
                    for child in graph.successors[config]
                    if child.position == config.position and child in longest
                ),
                default=0,
            )
    return max(longest.values(), default=0)


# Fixtures


def build_anbn_fixture() -> Machine:
    """One-way deterministic machine for {a^n b^n | n >= 1}.

    The a's are written as 1s; on the first b the head rewinds to ⊢ with stationary
    steps, then each b marks one 1.
    """
    b = _Builder(
        "fixture-anbn",
        Timing.ONE_WAY,
        Mode.DETERMINISTIC,
        ("a", "b"),
        StorageSpec(StorageKind.WORKTAPE, 1, (BLANK, LEFT_MARKER, "1", "x")),
    )
    b.add("start", "a", LEFT_MARKER, "count", (WILDCARD, R), advance=False)
    b.add("count", "a", BLANK, "count", ("1", R))
    b.add("count", "b", BLANK, "rewind", (WILDCARD, L), advance=False)
    b.add("rewind", "b", "1", "rewind", (WILDCARD, L), advance=False)
    b.add("rewind", "b", LEFT_MARKER, "match", (WILDCARD, R), advance=False)
    b.add("match", "b", "1", "match", ("x", R))
    b.add("match", ENDMARKER, BLANK, "accept", (WILDCARD, S))
    return b.build("start", {"accept"})


def build_asymmetric_fixture() -> Machine:
    """One-way nondeterministic machine for Σ^+ with a space-hungry rejecting branch.

    One branch accepts without touching the worktape; the other walks right on every
    step and rejects at the endmarker.
    """
    b = _Builder(
        "fixture-asym",
        Timing.ONE_WAY,
        Mode.NONDETERMINISTIC,
        ("a", "b"),
        StorageSpec(StorageKind.WORKTAPE, 1, (BLANK,)),
    )
    for x in ("a", "b"):
        b.add("start", x, BLANK, "lazy", (WILDCARD, S))
        b.add("start", x, BLANK, "walk", (WILDCARD, R))
        b.add("lazy", x, BLANK, "lazy", (WILDCARD, S))
    b.add("lazy", ENDMARKER, BLANK, "accept", (WILDCARD, S))
    b.add("walk", "a", BLANK, "walk_a", (WILDCARD, R), advance=False)
    b.add("walk_a", "a", BLANK, "walk", (WILDCARD, R))
    b.add("walk", "b", BLANK, "walk", (WILDCARD, R))
    return b.build("start", {"accept"})


def build_alternating_fixture() -> Machine:
    """One-way alternating machine: nonempty, even number of a's, first == last.

    A universal split checks the a-parity in the control and stores the first symbol
    on the worktape to compare it with each later symbol.
    """
    b = _Builder(
        "fixture-alt",
        Timing.ONE_WAY,
        Mode.ALTERNATING,
        ("a", "b"),
        StorageSpec(StorageKind.WORKTAPE, 1, (BLANK, LEFT_MARKER, "a", "b")),
    )
    for x in ("a", "b"):
        b.add("split", x, LEFT_MARKER, "even", (WILDCARD, S), advance=False)
        b.add("split", x, LEFT_MARKER, "mark", (WILDCARD, S), advance=False)
        b.add("mark", x, LEFT_MARKER, "store", (WILDCARD, R), advance=False)
        b.add("store", x, BLANK, "same", (x, S))
        for stored in ("a", "b"):
            for state in ("same", "differ"):
                b.add(
                    state, x, stored, "same" if x == stored else "differ", (WILDCARD, S)
                )
    b.add("even", "a", WILDCARD, "odd", (WILDCARD, S))
    b.add("even", "b", WILDCARD, "even", (WILDCARD, S))
    b.add("odd", "a", WILDCARD, "even", (WILDCARD, S))
    b.add("odd", "b", WILDCARD, "odd", (WILDCARD, S))
    b.add("even", ENDMARKER, WILDCARD, "accept", (WILDCARD, S))
    b.add("same", ENDMARKER, WILDCARD, "accept", (WILDCARD, S))
    return b.build("split", {"accept"}, {"split": Label.UNIVERSAL})


def build_fixtures() -> List[Machine]:
    return [build_anbn_fixture(), build_asymmetric_fixture(), build_alternating_fixture()]


# Three-track machine for {a^j b^k | j != k}


@dataclass(frozen=True)
class SweepParams:
    """Sweep discipline of the three-track machine.

    Every input symbol costs `c` one-directional head sweeps over the cells
    0..L+1, where L = ceil(log2 l) is the bit length of l - 1 for the guessed
    modulus l. The first three sweeps update and compare the counters; the rest
    are idle round trips, so the cost is c * ceil(log2 l) + k stationary steps.
    """

    c: int = 4

    def __post_init__(self):
        if self.c < 4 or self.c % 2:
            raise ValueError(f"sweep count must be even and at least 4, got {self.c}")

    @property
    def k(self) -> int:
        return self.c

    def stationary_steps(self, l: int) -> int:
        """Stationary steps per input symbol on the path that guessed modulus l."""
        if l < 2:
            raise ValueError(f"modulus must exceed 1, got {l}")
        return self.c * (l - 1).bit_length() + self.k


def _track(top, mid, bot) -> str:
    return f"{top}{mid}{bot}"


TRACKS = tuple(_track(*bits) for bits in product("01", repeat=3))


def build_njk_machine(params: SweepParams | None = None, guess: int | None = None) -> Machine:
    """One-way nondeterministic three-track machine for {a^j b^k | j != k}.

    Args:
        params: Sweep discipline; defaults to four sweeps per symbol.
        guess: If given, fix the modulus instead of guessing it, which yields the
            deterministic machine of that single path.

    Returns:
        The machine. Cell 0 holds ⊢; cells 1..L hold (top, middle, bottom) bit triples
        least significant first: top holds l - 1 for the guessed modulus l, middle
        counts a's and bottom counts b's modulo l.

    Notes:
        The modulus is guessed bit by bit while the first symbol is scanned. The
        endmarker is read with the head parked on ⊢ and the input is accepted iff
        the middle and bottom tracks differ.
    """
    params = params or SweepParams()
    c = params.c
    if guess is not None and guess < 2:
        raise ValueError(f"modulus must exceed 1, got {guess}")
    name = "njk" if guess is None else f"njk-l{guess}"
    mode = Mode.NONDETERMINISTIC if guess is None else Mode.DETERMINISTIC
    b = _Builder(
        name,
        Timing.ONE_WAY,
        mode,
        ("a", "b"),
        StorageSpec(StorageKind.WORKTAPE, 1, (BLANK, LEFT_MARKER) + TRACKS),
    )

    def seen_b(x, flag):
        return 1 if x == "b" or flag else 0

    # First symbol: step off ⊢, write the guess and seed the counter of x with 1.
    # The last guess cell moves onto the blank past it, so the first symbol pays
    # the same round trips as every later one.
    for x in ("a", "b"):
        b.add("start", x, LEFT_MARKER, f"g1.{x}", (WILDCARD, R), advance=False)
        first_mid, first_bot = ("1", "0") if x == "a" else ("0", "1")
        end = f"gend.{x}"
        b.add(end, x, BLANK, f"s2.{x}{seen_b(x, 0)}.e0", (WILDCARD, L), advance=False)
        if guess is None:
            for i, t in product((1, 2), "01"):
                seed = (first_mid, first_bot) if i == 1 else ("0", "0")
                b.add(f"g{i}.{x}", x, BLANK, f"g2.{x}", (_track(t, *seed), R), advance=False)
                if t == "1":
                    b.add(f"g{i}.{x}", x, BLANK, end, (_track(t, *seed), R), advance=False)
        else:
            bits = format(guess - 1, "b")[::-1]
            for i, t in enumerate(bits, start=1):
                written = _track(t, first_mid, first_bot) if i == 1 else _track(t, "0", "0")
                following = end if i == len(bits) else f"g{i + 1}.{x}"
                b.add(f"g{i}.{x}", x, BLANK, following, (written, R), advance=False)

    for x, flag in product(("a", "b"), (0, 1)):
        if x == "b" and not flag:
            continue
        tag = f"{x}{flag}"
        counter = 1 if x == "a" else 2

        # Sweep 1, rightward: increment the counter track, remember if it held l - 1.
        for carry, equal in product((0, 1), repeat=2):
            state = f"s1.{tag}.c{carry}e{equal}"
            for cell in TRACKS:
                bit = int(cell[counter])
                written = list(cell)
                written[counter] = str(bit ^ carry)
                target = f"s1.{tag}.c{bit & carry}e{int(equal and str(bit) == cell[0])}"
                b.add(state, x, cell, target, ("".join(written), R), advance=False)
            # A carry out of the top cell only happens when the counter held l - 1.
            if carry == 0 or equal:
                b.add(state, x, BLANK, f"s2.{tag}.e{equal}", (WILDCARD, L), advance=False)

        # Sweep 2, leftward: reset the counter track if it held l - 1.
        for equal in (0, 1):
            state = f"s2.{tag}.e{equal}"
            for cell in TRACKS:
                written = list(cell)
                if equal:
                    written[counter] = "0"
                b.add(state, x, cell, state, ("".join(written), L), advance=False)
            b.add(state, x, LEFT_MARKER, f"s3.{tag}.d0", (WILDCARD, R), advance=False)

        # Sweep 3, rightward: compare middle and bottom tracks.
        for differ in (0, 1):
            state = f"s3.{tag}.d{differ}"
            for cell in TRACKS:
                target = f"s3.{tag}.d{int(differ or cell[1] != cell[2])}"
                b.add(state, x, cell, target, (WILDCARD, R), advance=False)
            b.add(state, x, BLANK, f"s4.{tag}.d{differ}", (WILDCARD, L), advance=False)

        # Sweeps 4..c: idle round trips, then park on ⊢ and advance.
        for sweep, differ in product(range(4, c + 1), (0, 1)):
            state = f"s{sweep}.{tag}.d{differ}"
            if sweep % 2:
                for cell in TRACKS:
                    b.add(state, x, cell, state, (WILDCARD, R), advance=False)
                b.add(state, x, BLANK, f"s{sweep + 1}.{tag}.d{differ}", (WILDCARD, L), advance=False)
                continue
            for cell in TRACKS:
                b.add(state, x, cell, state, (WILDCARD, L), advance=False)
            if sweep == c:
                b.add(state, x, LEFT_MARKER, f"wait.{flag}.d{differ}", (WILDCARD, S))
            else:
                b.add(state, x, LEFT_MARKER, f"s{sweep + 1}.{tag}.d{differ}", (WILDCARD, R), advance=False)

    for flag, differ in product((0, 1), repeat=2):
        state = f"wait.{flag}.d{differ}"
        for y in ("a", "b"):
            if y == "a" and flag:
                continue
            b.add(state, y, LEFT_MARKER, f"s1.{y}{seen_b(y, flag)}.c1e1", (WILDCARD, R), advance=False)
        if differ:
            b.add(state, ENDMARKER, LEFT_MARKER, "accept", (WILDCARD, S))
    return b.build("start", {"accept"})


def build_njk_realtime(params: SweepParams | None = None) -> Machine:
    """Real-time κ-padded form of the three-track machine."""
    return pad_machine(build_njk_machine(params), name="njk-rt")


def pad_for_modulus(r: int, s: int, params: SweepParams | None = None):
    """Padded form of a^r b^s with the pause count of its least distinguishing modulus.

    Returns:
        The padded token tuple and the modulus, or None for the modulus when r == s
        (the word is then padded for the smallest modulus, 2).
    """
    params = params or SweepParams()
    modulus = least_distinguishing_modulus(r, s)
    t = params.stationary_steps(modulus or 2)
    return pad_string(("a",) * r + ("b",) * s, t), modulus


# Controller compilation


Outcome = Tuple


def compile_controller(
    name: str,
    mode: Mode,
    alphabet: Sequence[str],
    storage: StorageSpec,
    initial,
    step: Callable[[object, str, Tuple[str, ...]], Iterable[Outcome]],
    accepting: Callable[[object], bool],
    render: Callable[[object], str] = str,
) -> Machine:
    """Compile a finite controller over stacks or counters into a real-time machine.

    Args:
        name: Machine name.
        mode: DETERMINISTIC or PROBABILISTIC.
        alphabet: Input symbols.
        storage: Stack or counter storage.
        initial: Initial controller state (any hashable value).
        step: Maps (state, symbol, observation) to outcomes `(target, actions)` or
            `(target, actions, weight)`; no outcome means the machine rejects.
        accepting: Predicate on controller states.
        render: State naming function.

    Notes:
        Only states reachable from `initial` are compiled. Where every observation
        leads to the same outcomes and no outcome pops or decrements, a single
        wildcard rule is emitted.
    """
    b = _Builder(name, Timing.REAL_TIME, mode, alphabet, storage)
    observations = list(product(storage.observation_domain(), repeat=storage.count))
    seen = {initial}
    queue = deque([initial])
    b.state(render(initial))
    while queue:
        state = queue.popleft()
        for symbol in tuple(alphabet) + (ENDMARKER,):
            table = {}
            for observation in observations:
                outcomes = []
                for outcome in step(state, symbol, observation):
                    target, actions = outcome[0], tuple(outcome[1])
                    weight = outcome[2] if len(outcome) > 2 else None
                    outcomes.append((target, actions, weight))
                    if target not in seen:
                        seen.add(target)
                        queue.append(target)
                table[observation] = outcomes
            uniform = len({tuple(o) for o in table.values()}) == 1 and all(
                action in ("noop", "inc") or action.startswith("push:")
                for outcomes in table.values()
                for _, actions, _ in outcomes
                for action in actions
            )
            if uniform:
                table = {(WILDCARD,) * storage.count: table[observations[0]]}
            for observation, outcomes in table.items():
                for target, actions, weight in outcomes:
                    b.add(render(state), symbol, observation, render(target), actions, weight=weight)
    return b.build(render(initial), {render(s) for s in seen if accepting(s)})


# Even-reversed-binaries language


def _carry_next(kind: str, top: str, bit: str):
    """Reversed block bit against the stored forward block, least significant first."""
    if kind == "c1":
        if top == EMPTY:
            return ("ext", False) if bit == "1" else None
        if bit == top:
            return None
        return ("c1" if top == "1" else "c0", True)
    if kind == "c0" and top != EMPTY and bit == top:
        return ("c0", True)
    return None


_CARRY_DONE = {"c0", "ext"}

# (phase, stored bit, incoming bit) -> (phase, pop); forward block most significant first.
_SUCCESSOR = {
    ("start", "1", "1"): ("eq1", True),
    ("eq1", "1", "1"): ("eq1", True),
    ("eq1", "0", "0"): ("eq", True),
    ("eq1", "0", "1"): ("flip", True),
    ("eq1", "1", "0"): ("ovf", True),
    ("eq1", EMPTY, "0"): ("ovd", False),
    ("eq", "1", "1"): ("eq", True),
    ("eq", "0", "0"): ("eq", True),
    ("eq", "0", "1"): ("flip", True),
    ("flip", "1", "0"): ("flip", True),
    ("ovf", "1", "0"): ("ovf", True),
    ("ovf", EMPTY, "0"): ("ovd", False),
}

_SUCCESSOR_DONE = {"flip", "ovd"}

_ROLES = {"both": (0, 1), "pairs-odd": (0, None), "pairs-even": (None, 0)}


def _erb_step(role: str, state: str, symbol: str, observation) -> List[Outcome]:
    """One step of the block checker.

    Stack 1 holds the last forward block (least significant bit on top) and checks the
    following reversed block; stack 2 holds the last reversed block (most significant
    bit on top) and checks the following forward block. Role "pairs-odd" keeps only
    stack 1, "pairs-even" only stack 2.
    """
    first, second = _ROLES[role]
    actions = ["noop"] * len(observation)
    top1 = observation[first] if first is not None else None
    top2 = observation[second] if second is not None else None
    if state == "start":
        return [("b1", actions)] if symbol == "a" else []
    if state == "b1":
        if symbol != "0":
            return []
        if first is not None:
            actions[first] = "push:0"
        return [("b1-done", actions)]
    if state == "b1-done":
        if symbol != "a":
            return []
        return [("rev.c1.first" if first is not None else "rev.push.first", actions)]
    if state.startswith("rev."):
        _, kind, stage = state.split(".")
        if symbol in ("0", "1"):
            if first is not None:
                following = _carry_next(kind, top1, symbol)
                if following is None:
                    return []
                kind, pop = following
                if pop:
                    actions[first] = "pop"
            if second is not None:
                actions[second] = f"push:{symbol}"
            return [(f"rev.{kind}.{stage}", actions)]
        if first is not None and (kind not in _CARRY_DONE or top1 != EMPTY):
            return []
        if symbol == "a":
            return [("fwd.start" if second is not None else "fwd.push", actions)]
        if symbol == ENDMARKER and stage == "later":
            return [("accept", actions)]
        return []
    if state.startswith("fwd."):
        kind = state[4:]
        if symbol in ("0", "1"):
            if second is not None:
                following = _SUCCESSOR.get((kind, top2, symbol))
                if following is None:
                    return []
                kind, pop = following
                if pop:
                    actions[second] = "pop"
            if first is not None:
                actions[first] = f"push:{symbol}"
            return [(f"fwd.{kind}", actions)]
        if symbol != "a":
            return []
        if second is not None and (kind not in _SUCCESSOR_DONE or top2 != EMPTY):
            return []
        return [("rev.c1.later" if first is not None else "rev.push.later", actions)]
    return []


def build_erb_pda() -> Machine:
    """Deterministic real-time two-stack machine for the even-reversed-binaries language.

    Members are a(0)a(1)^R a(2)a(3)^R ... a(2k)a(2k+1)^R with k > 0, where (i) is the
    binary form of i and ^R reverses it.
    """
    return compile_controller(
        "erb",
        Mode.DETERMINISTIC,
        ("a", "0", "1"),
        StorageSpec(StorageKind.STACKS, 2, ("0", "1")),
        "start",
        lambda state, symbol, observation: _erb_step("both", state, symbol, observation),
        lambda state: state == "accept",
    )


def build_prob_erb_pda() -> Machine:
    """Probabilistic real-time one-stack machine for the even-reversed-binaries language.

    On the first symbol the machine rejects with probability 1/3 and otherwise runs
    one of two stack-1 or stack-2 checkers of the two-stack machine, each with
    probability 1/3. Members are accepted with probability 2/3, non-members with at
    most 1/3.
    """
    third = Fraction(1, 3)

    def step(state, symbol, observation):
        if state == "start":
            if symbol != "a" or observation != (EMPTY,):
                return []
            return [
                ("reject", ("noop",), third),
                ("odd:b1", ("noop",), third),
                ("even:b1", ("noop",), third),
            ]
        if state in ("accept", "reject"):
            return []
        prefix, inner = state.split(":", 1)
        role = "pairs-odd" if prefix == "odd" else "pairs-even"
        return [
            (target if target == "accept" else f"{prefix}:{target}", actions, Fraction(1))
            for target, actions in _erb_step(role, inner, symbol, observation)
        ]

    return compile_controller(
        "prob-erb",
        Mode.PROBABILISTIC,
        ("a", "0", "1"),
        StorageSpec(StorageKind.STACKS, 1, ("0", "1")),
        "start",
        step,
        lambda state: state == "accept",
    )


# L_j


def lj_symbol(x: int) -> str:
    return f"a{x}"


def _lj_fresh(level: int, counters: Tuple[int, ...]):
    if level == 1:
        return (1, counters[0])
    return (level, counters[0], False, False, _lj_fresh(level - 1, counters[1:]))


def _lj_counters(state) -> Tuple[int, ...]:
    if state[0] == 1:
        return (state[1],)
    return (state[1],) + _lj_counters(state[4])


def _lj_result(state) -> int:
    return state[1] if state[0] == 1 else _lj_result(state[4])


def _lj_ready(state, observation) -> bool:
    if state[0] == 1:
        return True
    _, extra, inside, first_seen, sub = state
    return (
        inside and first_seen and observation[extra] == ZERO and _lj_ready(sub, observation)
    )


def _lj_feed(state, x: int, observation, actions: List[str]):
    """Feed symbol a_x to a level checker; None rejects.

    A level-m checker reads words a_{m-1} w_1 a_{m-1} w_2 ... whose sub-words have
    indices 1, 2, ... The counter `extra` holds the previous sub-word's index; the
    first a_{m-2} of a sub-word is free and each later one decrements it, so it is
    zero exactly when the current sub-word's index is one larger.
    """
    level = state[0]
    if level == 1:
        if x != 0:
            return None
        actions[state[1]] = "inc"
        return state
    _, extra, inside, first_seen, sub = state
    if x > level - 1:
        return None
    if x == level - 1:
        if not inside:
            return (level, extra, True, False, sub)
        if not _lj_ready(state, observation):
            return None
        result = _lj_result(sub)
        pool = tuple(sorted([i for i in _lj_counters(sub) if i != result] + [extra]))
        return (level, result, True, False, _lj_fresh(level - 1, pool))
    if not inside:
        return None
    if x == level - 2:
        if first_seen:
            if observation[extra] == ZERO:
                return None
            actions[extra] = "dec"
        first_seen = True
    sub = _lj_feed(sub, x, observation, actions)
    if sub is None:
        return None
    return (level, extra, inside, first_seen, sub)


def _lj_name(state) -> str:
    if state == "accept":
        return state
    if state[0] == 1:
        return f"r{state[1]}"
    level, extra, inside, first_seen, sub = state
    return f"L{level}:e{extra}{'i' if inside else 's'}{int(first_seen)}[{_lj_name(sub)}]"


def build_lj_counters(j: int) -> Machine:
    """Deterministic real-time j-counter machine for L_j over a0..a{j-1}."""
    if j < 2:
        raise ValueError(f"L_j needs j >= 2, got {j}")

    def step(state, symbol, observation):
        if state == "accept":
            return []
        actions = ["noop"] * j
        if symbol == ENDMARKER:
            return [("accept", actions)] if _lj_ready(state, observation) else []
        following = _lj_feed(state, int(symbol[1:]), observation, actions)
        return [] if following is None else [(following, actions)]

    return compile_controller(
        f"lj{j}",
        Mode.DETERMINISTIC,
        tuple(lj_symbol(x) for x in range(j)),
        StorageSpec(StorageKind.COUNTERS, j),
        _lj_fresh(j, tuple(range(j))),
        step,
        lambda state: state == "accept",
        _lj_name,
    )


@dataclass(frozen=True)
class ErrorBound:
    """Exact acceptance probabilities of a probabilistic one-counter L_j machine."""

    paths: int
    member_probability: Fraction
    nonmember_bound: Fraction

    @property
    def reject_weight(self) -> Fraction:
        return 1 - self.member_probability

    @property
    def gap(self) -> Fraction:
        return min(self.member_probability - HALF, HALF - self.nonmember_bound)


def prob_lj_error_bound(j: int) -> ErrorBound:
    """Error bound of `build_prob_lj_counter(j)`.

    The machine runs 2^j - 2 checking paths. The accepting mass 1 - q sits at the
    midpoint of (1/2, P / (2(P - 1))), so members reach 1 - q and non-members, which
    fail at least one path, at most (1 - q)(P - 1)/P.
    """
    if j < 2:
        raise ValueError(f"L_j needs j >= 2, got {j}")
    paths = 2**j - 2
    member = HALF + Fraction(1, 4 * (paths - 1))
    bound = ErrorBound(paths, member, member * (paths - 1) / paths)
    assert bound.gap > 0
    return bound


def _prob_lj_paths(j: int):
    for level in range(2, j + 1):
        for pair in ("A", "B"):
            for regions in product((0, 1), repeat=j - level):
                yield (level, pair, regions)


def _path_step(j: int, path, state, x: int | None, zero: bool):
    """One step of a one-counter checking path; returns (state, action) or None.

    A path for level m checks consecutive sub-word pairs inside the level-m words
    whose index parities at levels m..j-1 match its region vector. Pair "A" counts up
    in odd sub-words and down in even ones, pair "B" the reverse. Outside its regions
    the counter drains, and a checked region must start from zero.
    """
    level, pair, regions = path
    last, parity, free = state
    if x is None:
        if last != 0:
            return None
    elif last == "start":
        if x != j - 1:
            return None
    elif last != 0 and x != last - 1:
        return None

    def checking(bits):
        return bits[0] == (0 if pair == "A" else 1)

    def active(bits):
        return tuple(bits[1:]) == regions

    if (x is None or x >= level - 1) and active(parity) and checking(parity) and not zero:
        return None
    if x is None:
        return ("accept", "noop")
    parity = list(parity)
    for offset, parity_level in enumerate(range(level - 1, j)):
        if parity_level == x:
            parity[offset] ^= 1
        elif parity_level < x:
            parity[offset] = 0
    if x == level - 1:
        free = True
    action = "noop"
    if not active(parity):
        action = "noop" if zero else "dec"
    elif x >= level and not zero:
        return None
    elif x == level - 2:
        if checking(parity):
            if free:
                free = False
            elif zero:
                return None
            else:
                action = "dec"
        else:
            action = "inc"
    return ((x, tuple(parity), free), action)


def build_prob_lj_counter(j: int) -> Machine:
    """Probabilistic real-time one-counter machine for L_j.

    The machine rejects up front with weight q and otherwise picks one of
    P = 2^j - 2 one-counter checking paths uniformly. Members accept with
    probability 1/2 + 1/(4(P - 1)) and non-members with at most 1/2 - 1/(4P), so
    the error gap around 1/2 is 1/(4(2^j - 2)). See `prob_lj_error_bound` for the
    exact values.
    """
    bound = prob_lj_error_bound(j)
    share = bound.member_probability / bound.paths
    paths = list(_prob_lj_paths(j))

    def step(state, symbol, observation):
        if state in ("accept", "reject"):
            return []
        zero = observation[0] == ZERO
        x = None if symbol == ENDMARKER else int(symbol[1:])
        if state == "start":
            if x != j - 1 or not zero:
                return []
            outcomes = [("reject", ("noop",), bound.reject_weight)]
            for path in paths:
                initial = ("start", (0,) * (j - path[0] + 1), False)
                following, action = _path_step(j, path, initial, x, zero)
                outcomes.append(((path, following), (action,), share))
            return outcomes
        path, inner = state
        result = _path_step(j, path, inner, x, zero)
        if result is None:
            return []
        following, action = result
        target = "accept" if following == "accept" else (path, following)
        return [(target, (action,), Fraction(1))]

    def render(state):
        if isinstance(state, str):
            return state
        (level, pair, regions), (last, parity, free) = state
        region = "".join(map(str, regions))
        return (
            f"m{level}{pair}{region}|{last}|{''.join(map(str, parity))}|{int(free)}"
        )

    return compile_controller(
        f"prob-lj{j}",
        Mode.PROBABILISTIC,
        tuple(lj_symbol(x) for x in range(j)),
        StorageSpec(StorageKind.COUNTERS, 1),
        "start",
        step,
        lambda state: state == "accept",
        render,
    )
