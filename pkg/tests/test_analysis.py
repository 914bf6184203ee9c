"""
Unit tests for the experiment driver.

Covers length specs and input generators, space sweeps (sequential and in a process
pool), CSV and JSON report rendering, bound fitting and its order invariance, and
oracle equivalence audits including the enumeration count and guard.
"""

import math
import random

import pytest

from analysis import (
    AuditGuardError,
    LengthSpecError,
    SweepReport,
    SweepRow,
    compress,
    equivalence_audit,
    fit_bound,
    generate_inputs,
    hardest_jk_split,
    parse_lengths,
    read_report,
    space_sweep,
)
from constructions import (
    build_alternating_fixture,
    build_anbn_fixture,
    build_asymmetric_fixture,
    build_erb_pda,
    build_ld_machine,
    build_lj_counters,
    build_njk_machine,
    build_njk_realtime,
    build_prob_erb_pda,
    pad_machine,
)
from machine_model import KAPPA
from metering import SpaceMode
from oracles import LanguageId, erb_member, least_distinguishing_modulus


def rows(*spaces):
    return [
        SweepRow(n, "a" * n, "strong", space, "accept")
        for n, space in spaces
    ]


def test_parse_lengths():
    assert parse_lengths("members:5") == ("members", [5])
    assert parse_lengths("range:2:10:4") == ("lengths", [2, 6, 10])
    assert parse_lengths("pow2:4:40") == ("lengths", [4, 8, 16, 32])


@pytest.mark.parametrize("spec", ["members", "range:1:5", "range:1:5:0", "pow2:a:4", "steps:3", "members:-1"])
def test_parse_lengths_rejects_malformed_specs(spec):
    with pytest.raises(LengthSpecError):
        parse_lengths(spec)


def test_compress():
    assert compress(("a",) * 5000) == "a^5000"
    assert compress(("a", "a", "b")) == "aab"
    assert compress(("a1", "a0", "a0", "a0", "a0")) == "a1a0^4"


def test_hardest_jk_split():
    r, s = hardest_jk_split(13)
    assert r + s == 13
    assert least_distinguishing_modulus(r, s) == max(
        least_distinguishing_modulus(i, 13 - i) for i in range(14)
    )
    with pytest.raises(LengthSpecError):
        hardest_jk_split(0)


def test_generate_unary_and_ld_inputs():
    machine = build_ld_machine()
    assert [item.n for item in generate_inputs(machine, "unary", "members:3")] == [1, 2, 3]
    assert [item.n for item in generate_inputs(machine, "ld", "members:3")] == [8, 14, 28]
    assert [item.n for item in generate_inputs(machine, "ld", "range:1:30:1")] == [8, 14, 28]


def test_generate_member_inputs():
    erb = generate_inputs(build_erb_pda(), "erb", "members:2")
    assert "".join(erb[0][1]) == erb_member(1)
    lj = generate_inputs(build_lj_counters(2), "lj2", "members:3")
    assert [item.n for item in lj] == [2, 5, 9]
    largest = generate_inputs(build_lj_counters(2), "lj2", "range:6:8:1")
    assert [item.n for item in largest] == [5]


def test_generate_jk_hard_pads_for_kappa_machines():
    inputs = generate_inputs(build_njk_realtime(), "jk-hard", "range:3:3:1")
    (n, tokens, _), = inputs
    assert tokens.count(KAPPA) > 0
    assert n == len(tokens)


def test_generate_file_inputs(tmp_path):
    path = tmp_path / "inputs.json"
    path.write_text('["a^3b^3", {"input": "ab", "label": "short"}]')
    inputs = generate_inputs(build_anbn_fixture(), f"file:{path}", "members:1")
    assert inputs == [(6, ("a",) * 3 + ("b",) * 3, None), (2, ("a", "b"), "short")]


def test_file_labels_reach_the_report(tmp_path):
    """Tests that labels from an input file are carried into the CSV and JSON reports."""
    path = tmp_path / "inputs.json"
    path.write_text('[{"input": "a^2b^2", "label": "balanced"}, "ab"]')
    machine = build_anbn_fixture()
    inputs = generate_inputs(machine, f"file:{path}", "members:1")
    report = space_sweep(machine, SpaceMode.WEAK, inputs, generator="file")
    assert [row.label for row in report.rows] == [None, "balanced"]
    lines = report.to_csv().splitlines()
    assert lines[3] == "2,ab,weak,2,accept,"
    assert lines[4] == "4,aabb,weak,3,accept,balanced"
    assert read_report(report.to_csv()).rows == report.rows
    assert read_report(report.to_json()).rows == report.rows


def test_generate_unknown_generator():
    with pytest.raises(LengthSpecError):
        generate_inputs(build_ld_machine(), "primes", "members:2")


def test_space_sweep_on_ld_members():
    machine = build_ld_machine()
    inputs = generate_inputs(machine, "ld", "members:4")
    report = space_sweep(machine, SpaceMode.WEAK, inputs, generator="ld")
    assert [row.n for row in report.rows] == [8, 14, 28, 62]
    assert all(row.verdict == "accept" for row in report.rows)
    assert report.rows[0].space == 2
    assert report.rows[0].input == "a^8"
    assert report.machine == "ld"
    assert report.timestamp


def test_space_sweep_on_branching_machine():
    machine = build_asymmetric_fixture()
    inputs = [(2, ("a", "a")), (1, ("b",)), (0, ())]
    weak = space_sweep(machine, SpaceMode.WEAK, inputs, cap=10)
    assert [(row.n, row.space, row.verdict) for row in weak.rows] == [
        (0, None, "reject"),
        (1, 0, "accept"),
        (2, 0, "accept"),
    ]
    middle = space_sweep(machine, SpaceMode.MIDDLE, inputs, cap=10)
    assert [row.space for row in middle.rows] == [None, 1, 3]


def test_space_sweep_probabilistic_machine():
    machine = build_prob_erb_pda()
    inputs = [(len(erb_member(1)), tuple(erb_member(1)))]
    report = space_sweep(machine, SpaceMode.STRONG, inputs)
    assert report.rows[0].verdict == "accept"
    with pytest.raises(ValueError):
        space_sweep(machine, SpaceMode.WEAK, inputs)


def test_space_sweep_in_process_pool_is_order_stable():
    machine = build_ld_machine()
    inputs = generate_inputs(machine, "unary", "range:1:12:1")
    shuffled = list(inputs)
    random.Random(7).shuffle(shuffled)
    pooled = space_sweep(machine, SpaceMode.STRONG, shuffled, jobs=2)
    sequential = space_sweep(machine, SpaceMode.STRONG, inputs)
    assert pooled.rows == sequential.rows


def test_report_csv_and_json():
    report = SweepReport("ld", "weak", "ld", None, "2026-01-01T00:00:00+00:00", rows((8, 2), (9, None)))
    text = report.to_csv()
    lines = text.splitlines()
    assert lines[0].startswith("# machine=ld")
    assert lines[1] == "# created=2026-01-01T00:00:00+00:00"
    assert lines[2] == "n,input,mode,space,verdict,label"
    assert lines[3] == "8,aaaaaaaa,strong,2,accept,"
    assert lines[4] == "9,aaaaaaaaa,strong,,accept,"
    assert read_report(text) == report
    assert read_report(report.to_json()) == report


def test_report_csv_body_is_deterministic():
    first = SweepReport("ld", "weak", "ld", 8, "2026-01-01", rows((8, 2)))
    second = SweepReport("ld", "weak", "ld", 8, "2026-02-02", rows((8, 2)))
    assert first.to_csv().splitlines()[2:] == second.to_csv().splitlines()[2:]


def test_truncated_rows_survive_csv():
    report = SweepReport("m", "middle", "unary", 3, "t", [SweepRow(3, "aab", "middle", 3, "accept", True)])
    assert read_report(report.to_csv()).rows[0].truncated


def test_fit_bound_log():
    report = SweepReport("ld", "weak", "ld", rows=rows((8, 3), (16, 8), (64, 6)))
    fit = fit_bound(report, "log")
    assert fit.max_ratio == 2.0
    assert fit.witness.n == 16
    assert fit.rows_used == 3


def test_fit_bound_with_offset_and_floor():
    report = SweepReport("ld", "weak", "ld", rows=rows((1, 5), (4, 6), (16, 10), (9, None)))
    fit = fit_bound(report, "loglog", offset=2)
    assert fit.rows_used == 2
    assert fit.max_ratio == 4.0
    assert fit.witness.n == 4


def test_fit_bound_roots():
    report = SweepReport("lj3", "strong", "lj3", rows=rows((8, 6), (27, 6)))
    assert math.isclose(fit_bound(report, "root3").max_ratio, 3.0)
    assert fit_bound(report, "linear").max_ratio == 6 / 8
    assert math.isclose(fit_bound(report, "sqrt").max_ratio, 6 / math.sqrt(8))


def test_fit_bound_errors():
    with pytest.raises(ValueError):
        fit_bound(SweepReport("m", "weak", "g", rows=rows((1, 1))), "log")
    with pytest.raises(ValueError):
        fit_bound(SweepReport("m", "weak", "g", rows=rows((4, 1))), "cubic")


def test_fit_bound_is_invariant_under_row_order():
    base = rows((8, 4), (16, 8), (32, 10), (64, 12), (128, 14))
    expected = fit_bound(SweepReport("m", "weak", "g", rows=base), "log")
    for seed in range(5):
        shuffled = list(base)
        random.Random(seed).shuffle(shuffled)
        assert fit_bound(SweepReport("m", "weak", "g", rows=shuffled), "log") == expected


def test_audit_ld_machine_passes():
    result = equivalence_audit(build_ld_machine(), LanguageId.LD, 70)
    assert result.passed
    assert result.checked == 71


def test_audit_enumerates_every_string():
    """|Σ|^0 + ... + |Σ|^max_len strings are checked on success."""
    result = equivalence_audit(build_erb_pda(), LanguageId.ERB, 8)
    assert result.passed
    assert result.checked == sum(3**i for i in range(9))


def test_audit_lj_machine_over_tokens():
    result = equivalence_audit(build_lj_counters(2), LanguageId.LJ, 10, j=2)
    assert result.passed
    assert result.checked == 2**11 - 1


def test_audit_branching_and_probabilistic_machines():
    assert equivalence_audit(build_prob_erb_pda(), LanguageId.ERB, 6).passed
    alt = build_alternating_fixture()
    result = equivalence_audit(alt, LanguageId.JK, 4)
    assert not result.passed
    assert result.counterexample == "a"


def test_audit_reports_shortest_counterexample():
    """The a^n b^n fixture disagrees with L_{j!=k} first on "a"."""
    result = equivalence_audit(build_anbn_fixture(), LanguageId.JK, 6)
    assert not result.passed
    assert result.counterexample == "a"
    assert result.checked == 2


def test_audit_padded_machine_with_explicit_alphabet():
    padded = pad_machine(build_anbn_fixture())
    result = equivalence_audit(padded, LanguageId.JK, 3, alphabet=["a", "b"])
    assert result.counterexample == "a"


def test_audit_guard():
    with pytest.raises(AuditGuardError):
        equivalence_audit(build_erb_pda(), LanguageId.ERB, 12, max_strings=1000)


def test_guessing_machine_sweep_uses_loglog_cap():
    """Accepted rows take the weak space as their verdict; the rest are decided anew."""
    report = space_sweep(
        build_njk_machine(), SpaceMode.WEAK, [(3, tuple("aab")), (2, tuple("ab"))]
    )
    by_input = {row.input: row for row in report.rows}
    assert by_input["aab"].space == 2
    assert by_input["aab"].verdict == "accept"
    assert by_input["ab"].space is None
    assert by_input["ab"].verdict == "budget-exceeded"


def test_audit_guessing_machine_within_loglog_cap():
    result = equivalence_audit(build_njk_machine(), LanguageId.JK, 5)
    assert result.passed
    assert result.checked == 2**6 - 1
