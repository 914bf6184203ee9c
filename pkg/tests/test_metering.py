"""
Unit tests for the space metering procedures.

Weak space is the cheapest accepting computation, middle space counts every
reachable configuration of an accepted input, and strong space counts every
reachable configuration of every input of a length. The asymmetric fixture keeps
the three apart.
"""

import pytest

from constructions import (
    build_alternating_fixture,
    build_asymmetric_fixture,
    build_ld_machine,
    build_njk_machine,
    build_njk_realtime,
)
from engine import Decision
from metering import (
    ExhaustiveGuardError,
    Measurement,
    SpaceMode,
    cap_for,
    decide_within,
    default_cap,
    loglog_cap,
    measure,
    measure_middle_space,
    measure_strong_space,
    measure_weak_space,
)
from oracles import least_distinguishing_modulus

ASYM = build_asymmetric_fixture()


def test_default_cap():
    """cap = 4 * (ceil(log2(n + 2)) + 2)."""
    assert default_cap(0) == 12
    assert default_cap(2) == 16
    assert default_cap(6) == 20
    assert default_cap(6, factor=2, offset=0) == 6


def test_weak_space_ignores_rejecting_branches():
    assert measure_weak_space(ASYM, "aab", cap=10) == 0


def test_middle_space_counts_rejecting_branches():
    assert measure_middle_space(ASYM, "aab", cap=10) == Measurement(4, False)


def test_middle_space_truncated_at_cap():
    assert measure_middle_space(ASYM, "aab", cap=3) == Measurement(3, True)


def test_middle_space_of_rejected_input():
    assert measure_middle_space(ASYM, "", cap=10).space is None


def test_weak_space_of_rejected_input():
    assert measure_weak_space(build_alternating_fixture(), "ab", cap=6) is None


def test_strong_space_exhaustive_over_length():
    """Every input of length 2 is explored; "aa" walks furthest."""
    assert measure_strong_space(ASYM, 2, cap=10, exhaustive=True) == Measurement(3, False)


def test_strong_space_explicit_inputs():
    measurement = measure_strong_space(ASYM, 2, cap=10, inputs=["ab", "bb"])
    assert measurement.space == 2


def test_strong_space_needs_inputs():
    with pytest.raises(ValueError):
        measure_strong_space(ASYM, 2, cap=10)


def test_exhaustive_guard():
    """Binary alphabets are enumerated only up to length 14; unary ones always."""
    with pytest.raises(ExhaustiveGuardError):
        measure_strong_space(ASYM, 15, cap=4, exhaustive=True)
    assert measure_strong_space(build_ld_machine(), 8, cap=4, exhaustive=True).space == 2


def test_deterministic_modes_collapse():
    """For a deterministic machine on an accepted input all three modes agree."""
    machine = build_ld_machine()
    values = {measure(machine, "a" * 14, mode, cap=16).space for mode in SpaceMode}
    assert values == {3}


def test_weak_space_of_guessing_machine_is_path_space():
    """Modulus 2 keeps one track cell, so the head only reaches the blank in cell 2."""
    assert measure_weak_space(build_njk_machine(), "aab", cap=6) == 2


def test_negative_cap():
    with pytest.raises(ValueError):
        measure_weak_space(ASYM, "a", cap=-1)


def test_loglog_cap():
    """cap = ceil(log2(ceil(log2(n + 2)) + 2)) + 2."""
    assert [loglog_cap(n) for n in (0, 2, 3, 5000, 65536)] == [4, 4, 5, 6, 7]
    assert loglog_cap(3, offset=0) == 3


def test_cap_for_picks_the_loglog_cap_for_guessing_machines():
    for n in (0, 7, 300):
        assert cap_for(build_njk_machine(), n) == loglog_cap(n)
        assert cap_for(build_njk_realtime(), n) == loglog_cap(n)
        assert cap_for(build_ld_machine(), n) == default_cap(n)
        assert cap_for(ASYM, n, factor=2, offset=1) == default_cap(n, 2, 1)


def test_loglog_cap_fits_every_least_modulus():
    """The guessed modulus needs its bit length plus one blank cell."""
    for total in range(1, 401):
        for r in range(total + 1):
            modulus = least_distinguishing_modulus(r, total - r)
            if modulus is not None:
                assert (modulus - 1).bit_length() + 1 <= loglog_cap(total)


def test_decide_within_deepens_up_to_the_cap():
    njk = build_njk_machine()
    assert decide_within(njk, "abb", loglog_cap(3)) is Decision.ACCEPT
    assert decide_within(njk, "ab", loglog_cap(2)) is Decision.BUDGET_EXCEEDED
    assert decide_within(build_alternating_fixture(), "aa", 0) is Decision.BUDGET_EXCEEDED
    assert decide_within(build_alternating_fixture(), "aa", 1) is Decision.ACCEPT
    assert decide_within(ASYM, "", 3) is Decision.REJECT


def test_decide_within_rejects_negative_cap():
    with pytest.raises(ValueError):
        decide_within(ASYM, "a", -1)
