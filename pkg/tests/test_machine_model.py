"""
Unit tests for the machine model.

These tests cover validation diagnostics for every model invariant, input tokenization
with run-length notation, and the JSON machine file format: parse errors with their
locus, reference errors, and serialization back to an equivalent machine.
"""

import json
from fractions import Fraction

import pytest

from constructions import build_fixtures, build_ld_machine, build_prob_erb_pda
from machine_model import (
    Alphabet,
    InputAction,
    Machine,
    MachineError,
    MachineParseError,
    MachineReferenceError,
    MachineValidationError,
    Mode,
    StorageKind,
    StorageSpec,
    Timing,
    TransitionRule,
    parse_machine,
    serialize_machine,
    tokenize,
    validate_machine,
)

COUNTER_MACHINE = {
    "name": "counter-anbn",
    "timing": "real-time",
    "mode": "deterministic",
    "input_alphabet": ["a", "b"],
    "storage": {"kind": "counters", "params": {"count": 1}},
    "states": [{"id": "up"}, {"id": "down"}, {"id": "accept"}],
    "initial": "up",
    "accepting": ["accept"],
    "transitions": [
        {"from": "up", "read": "a", "observe": ["*"], "to": "up",
         "input_action": "advance", "storage_action": ["inc"]},
        {"from": "up", "read": "b", "observe": ["+"], "to": "down",
         "input_action": "advance", "storage_action": ["dec"]},
        {"from": "down", "read": "b", "observe": ["+"], "to": "down",
         "input_action": "advance", "storage_action": ["dec"]},
        {"from": "down", "read": "$", "observe": ["0"], "to": "accept",
         "input_action": "advance", "storage_action": ["noop"]},
    ],
}


def counter_rules(*rules):
    return Machine(
        name="m",
        timing=Timing.REAL_TIME,
        mode=Mode.DETERMINISTIC,
        input_alphabet=Alphabet(("a",)),
        storage=StorageSpec(StorageKind.COUNTERS, 1),
        states=("q", "r"),
        initial="q",
        accepting=frozenset({"r"}),
        transitions=tuple(rules),
    )


def rule(source="q", read="a", observe=("*",), target="r", action=("noop",), **kwargs):
    return TransitionRule(
        source, read, tuple(observe), target, InputAction.ADVANCE, tuple(action), **kwargs
    )


def codes(machine):
    return {diagnostic.code for diagnostic in validate_machine(machine)}


def test_builtin_fixtures_validate():
    """Built fixtures and constructions carry no diagnostics."""
    for machine in build_fixtures() + [build_ld_machine(), build_prob_erb_pda()]:
        assert validate_machine(machine) == []


def test_deterministic_fan_out_is_reported():
    """Two overlapping rules in deterministic mode give a determinism diagnostic."""
    machine = counter_rules(rule(), rule(observe=("0",), action=("inc",)))
    diagnostics = validate_machine(machine)
    assert [d.code for d in diagnostics] == ["determinism"]
    assert "nondeterministic fan-out in deterministic mode" in diagnostics[0].message


def test_disjoint_observations_are_deterministic():
    """Rules observing 0 and + on the same counter do not overlap."""
    machine = counter_rules(rule(observe=("0",)), rule(observe=("+",), action=("dec",)))
    assert validate_machine(machine) == []


def test_probabilistic_weights_must_sum_to_one():
    """Weights 1/2 + 1/3 leave a diagnostic naming the sum 5/6."""
    machine = Machine(
        name="p",
        timing=Timing.REAL_TIME,
        mode=Mode.PROBABILISTIC,
        input_alphabet=Alphabet(("a",)),
        storage=StorageSpec(StorageKind.COUNTERS, 1),
        states=("q", "r"),
        initial="q",
        accepting=frozenset({"r"}),
        transitions=(
            rule(weight=Fraction(1, 2)),
            rule(target="q", weight=Fraction(1, 3)),
        ),
    )
    messages = [d.message for d in validate_machine(machine)]
    assert any("weights sum to 5/6 ≠ 1" in message for message in messages)


def test_real_time_rules_must_advance():
    stay = TransitionRule("q", "a", ("*",), "r", InputAction.STAY, ("noop",))
    assert "real-time" in codes(counter_rules(stay))


def test_dec_on_zero_and_pop_on_empty_are_reported():
    """Storage actions that could fire on empty storage are rejected statically."""
    assert "dec-zero" in codes(counter_rules(rule(observe=("0",), action=("dec",))))
    stack_machine = Machine(
        name="s",
        timing=Timing.REAL_TIME,
        mode=Mode.DETERMINISTIC,
        input_alphabet=Alphabet(("a",)),
        storage=StorageSpec(StorageKind.STACKS, 1, ("x",)),
        states=("q", "r"),
        initial="q",
        accepting=frozenset(),
        transitions=(rule(observe=("⊥",), action=("pop",)),),
    )
    assert "pop-empty" in codes(stack_machine)


def test_left_move_needs_origin_marker():
    """A worktape without ⊢ must never move Left."""
    machine = Machine(
        name="w",
        timing=Timing.REAL_TIME,
        mode=Mode.DETERMINISTIC,
        input_alphabet=Alphabet(("a",)),
        storage=StorageSpec(StorageKind.WORKTAPE, 1, ("#", "1")),
        states=("q",),
        initial="q",
        accepting=frozenset(),
        transitions=(rule(target="q", observe=("1",), action=("*", "L")),),
    )
    assert "left-wall" in codes(machine)


def marked_tape(*rules):
    return Machine(
        name="w",
        timing=Timing.ONE_WAY,
        mode=Mode.NONDETERMINISTIC,
        input_alphabet=Alphabet(("a",)),
        storage=StorageSpec(StorageKind.WORKTAPE, 1, ("#", "⊢", "1")),
        states=("q", "r"),
        initial="q",
        accepting=frozenset(),
        transitions=rules,
    )


def test_origin_marker_stays_in_cell_zero():
    """Rules that could move the marker, or leave cell 0 without it, are rejected."""
    assert "left-wall" in codes(marked_tape(rule(observe=("⊢",), action=("*", "L"))))
    assert "left-wall" in codes(marked_tape(rule(observe=("*",), action=("*", "L"))))
    assert "left-wall" in codes(marked_tape(rule(observe=("#",), action=("⊢", "R"))))
    assert "left-wall" in codes(marked_tape(rule(observe=("⊢",), action=("1", "R"))))
    assert "left-wall" in codes(marked_tape(rule(observe=("*",), action=("#", "S"))))


def test_left_move_from_written_cell_is_valid():
    machine = marked_tape(
        TransitionRule("q", "a", ("⊢",), "r", InputAction.STAY, ("*", "R")),
        rule(source="r", observe=("#",), target="q", action=("1", "L")),
    )
    assert validate_machine(machine) == []


def test_reserved_tokens_and_undeclared_states():
    machine = Machine(
        name="bad",
        timing=Timing.REAL_TIME,
        mode=Mode.DETERMINISTIC,
        input_alphabet=Alphabet(("a", "$")),
        storage=StorageSpec(StorageKind.COUNTERS, 1),
        states=("q",),
        initial="start",
        accepting=frozenset({"r"}),
        transitions=(),
    )
    assert {"alphabet", "reference"} <= codes(machine)


def test_tokenize_run_length_and_multichar_tokens():
    """`x^n` repeats a token; multi-character tokens match longest-first."""
    machine = parse_machine(json.dumps(COUNTER_MACHINE))
    assert tokenize(machine, "a^3b") == ("a", "a", "a", "b")
    assert tokenize(machine, "a b") == ("a", "b")
    assert tokenize(machine, ["b", "a"]) == ("b", "a")
    lj_like = Machine(
        name="t",
        timing=Timing.REAL_TIME,
        mode=Mode.DETERMINISTIC,
        input_alphabet=Alphabet(("a1", "a10")),
        storage=StorageSpec(StorageKind.COUNTERS, 1),
        states=("q",),
        initial="q",
        accepting=frozenset(),
        transitions=(),
    )
    assert tokenize(lj_like, "a10a1^2") == ("a10", "a1", "a1")


def test_tokenize_unknown_symbol():
    machine = parse_machine(json.dumps(COUNTER_MACHINE))
    with pytest.raises(MachineError):
        tokenize(machine, "abc")


def test_parse_machine_reads_counter_machine():
    machine = parse_machine(json.dumps(COUNTER_MACHINE))
    assert machine.name == "counter-anbn"
    assert machine.timing is Timing.REAL_TIME
    assert machine.storage == StorageSpec(StorageKind.COUNTERS, 1)
    assert len(machine.transitions) == 4
    assert machine.accepting == frozenset({"accept"})


def test_parse_machine_malformed_json_reports_line():
    with pytest.raises(MachineParseError) as excinfo:
        parse_machine('{\n  "name": "x",\n  oops\n}')
    assert excinfo.value.locus == "line 3"


def test_parse_machine_missing_field_reports_path():
    tree = json.loads(json.dumps(COUNTER_MACHINE))
    del tree["transitions"][2]["to"]
    with pytest.raises(MachineParseError) as excinfo:
        parse_machine(json.dumps(tree))
    assert excinfo.value.locus == "transitions[2].to"


def test_parse_machine_undeclared_state():
    tree = json.loads(json.dumps(COUNTER_MACHINE))
    tree["transitions"][0]["to"] = "nowhere"
    with pytest.raises(MachineReferenceError) as excinfo:
        parse_machine(json.dumps(tree))
    assert excinfo.value.locus == "transitions[0].to"


def test_parse_machine_raises_validation_diagnostics():
    tree = json.loads(json.dumps(COUNTER_MACHINE))
    tree["transitions"][1]["observe"] = ["*"]
    with pytest.raises(MachineValidationError) as excinfo:
        parse_machine(json.dumps(tree))
    assert "dec-zero" in {d.code for d in excinfo.value.diagnostics}
    assert parse_machine(json.dumps(tree), validate=False).name == "counter-anbn"


def test_serialize_then_parse_preserves_machines():
    """Built-in machines survive a trip through the machine file format."""
    for machine in build_fixtures() + [build_prob_erb_pda()]:
        again = parse_machine(serialize_machine(machine))
        assert again.transitions == machine.transitions
        assert again.labels == machine.labels
        assert again.accepting == machine.accepting
