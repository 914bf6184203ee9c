"""
Experiment driver for the automata laboratory.

This module turns single measurements into experiments:

- `space_sweep` measures a machine over generated inputs and collects a SweepReport,
- `fit_bound` fits the smallest constant c with space <= c * f(n) + offset,
- `equivalence_audit` compares machine verdicts with a language oracle on every
  string up to a length.

Reports are written as CSV (with a comment header carrying the timestamp) and as a
JSON mirror. Sweep rows are independent and may be measured in a process pool.
"""

import csv
import io
import json
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from itertools import groupby, product
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

from config import load_inputs
from constructions import SweepParams, pad_for_modulus
from engine import (
    DEFAULT_MAX_CONFIGURATIONS,
    Decision,
    acceptance_probability,
    feed,
    finish,
    initial_configuration,
    run_deterministic,
    Verdict,
)
from machine_model import KAPPA, Machine, Mode, tokenize
from metering import SpaceMode, cap_for, decide_within, measure
from oracles import (
    LanguageId,
    erb_member,
    is_member,
    ld_members_up_to,
    least_distinguishing_modulus,
    lj_member,
)

CSV_FIELDS = ("n", "input", "mode", "space", "verdict", "label")
DEFAULT_MAX_STRINGS = 2_000_000


class LengthSpecError(ValueError):
    """Malformed length specification."""


class AuditGuardError(ValueError):
    """An exhaustive audit would enumerate too many strings."""


class SweepInput(NamedTuple):
    n: int
    tokens: Tuple[str, ...]
    label: str | None = None


@dataclass(frozen=True)
class SweepRow:
    n: int
    input: str
    mode: str
    space: int | None
    verdict: str
    truncated: bool = False
    label: str | None = None


@dataclass
class SweepReport:
    machine: str
    mode: str
    generator: str
    cap: int | None = None
    timestamp: str = ""
    rows: List[SweepRow] = field(default_factory=list)

    def to_csv(self) -> str:
        """Render the report as CSV; only the comment header carries the timestamp."""
        out = io.StringIO()
        out.write(f"# machine={self.machine} mode={self.mode} generator={self.generator} "
                  f"cap={'default' if self.cap is None else self.cap}\n")
        out.write(f"# created={self.timestamp}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in self.rows:
            space = "" if row.space is None else str(row.space)
            if row.truncated:
                space += "+"
            writer.writerow((row.n, row.input, row.mode, space, row.verdict, row.label or ""))
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, ensure_ascii=False)


@dataclass(frozen=True)
class BoundFit:
    bound: str
    max_ratio: float
    witness: SweepRow
    offset: float = 0
    rows_used: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, ensure_ascii=False)


@dataclass(frozen=True)
class AuditResult:
    passed: bool
    counterexample: str | None
    checked: int


def compress(tokens: Sequence[str]) -> str:
    """Render tokens with runs of four or more written as `x^n`."""
    parts = []
    for token, run in groupby(tokens):
        count = len(list(run))
        parts.append(f"{token}^{count}" if count >= 4 else token * count)
    return "".join(parts)


def parse_lengths(spec: str) -> Tuple[str, List[int]]:
    """Parse a length spec.

    Returns:
        ("members", [count]) for `members:<count>`, or ("lengths", [...]) for
        `range:<lo>:<hi>:<step>` and `pow2:<lo>:<hi>` (powers of two in [lo, hi]).

    Raises:
        LengthSpecError: If the length spec is malformed.
    """
    parts = spec.split(":")
    try:
        numbers = [int(part) for part in parts[1:]]
    except ValueError:
        raise LengthSpecError(f"non-numeric field in length spec {spec!r}") from None
    if any(number < 0 for number in numbers):
        raise LengthSpecError(f"negative field in length spec {spec!r}")
    kind = parts[0]
    if kind == "members" and len(numbers) == 1:
        return "members", numbers
    if kind == "range" and len(numbers) == 3 and numbers[2] > 0:
        lo, hi, step = numbers
        return "lengths", list(range(lo, hi + 1, step))
    if kind == "pow2" and len(numbers) == 2:
        lo, hi = numbers
        lengths = []
        power = 1
        while power <= hi:
            if power >= lo:
                lengths.append(power)
            power *= 2
        return "lengths", lengths
    raise LengthSpecError(
        f"bad length spec {spec!r}; use members:<count>, range:<lo>:<hi>:<step> "
        "or pow2:<lo>:<hi>"
    )


def hardest_jk_split(n: int) -> Tuple[int, int]:
    """Split n = r + s, r != s, maximizing the least distinguishing modulus."""
    best = None
    for r in range(n + 1):
        modulus = least_distinguishing_modulus(r, n - r)
        if modulus is not None and (best is None or modulus > best[0]):
            best = (modulus, r)
    if best is None:
        raise LengthSpecError(f"no a^r b^s with r != s and r + s = {n}")
    return best[1], n - best[1]


def _largest_member(
    member: Callable[[int], str], n: int, size: Callable[[str], int]
) -> str | None:
    found = None
    k = 1
    while True:
        word = member(k)
        if size(word) > n:
            return found
        found = word
        k += 1


def generate_inputs(
    machine: Machine, generator: str, spec: str, params: SweepParams | None = None
) -> List[SweepInput]:
    """Produce sweep inputs: length, tokens and the label given in an input file.

    Generators: `unary`, `ld`, `erb`, `lj<j>`, `jk-hard` and `file:<path>`. With
    `members:<count>` the first count members (or lengths 1..count for `unary` and
    `jk-hard`) are produced; with explicit lengths each generator yields one input
    per length, skipping lengths it cannot fill. Inputs for machines reading κ are
    padded by the pause count of their least distinguishing modulus (jk-hard only).
    """
    params = params or SweepParams()
    labels = None
    if generator.startswith("file:"):
        entries = load_inputs(generator[5:])
        words = [entry["input"] for entry in entries]
        labels = [entry["label"] for entry in entries]
    else:
        kind, values = parse_lengths(spec)
        if generator == "unary":
            symbol = machine.input_alphabet.symbols[0]
            lengths = range(1, values[0] + 1) if kind == "members" else values
            words = [(symbol,) * n for n in lengths]
        elif generator == "ld":
            if kind == "members":
                members = []
                limit = 64
                while len(members) < values[0]:
                    members = ld_members_up_to(limit)
                    limit *= 2
                lengths = members[: values[0]]
            else:
                members = set(ld_members_up_to(max(values, default=0)))
                lengths = [n for n in values if n in members]
            words = [("a",) * n for n in lengths]
        elif generator == "jk-hard":
            lengths = range(1, values[0] + 1) if kind == "members" else values
            words = []
            for n in lengths:
                r, s = hardest_jk_split(n)
                if KAPPA in machine.input_alphabet:
                    word, _ = pad_for_modulus(r, s, params)
                else:
                    word = ("a",) * r + ("b",) * s
                words.append(word)
        else:
            match = re.fullmatch(r"lj(\d+)", generator)
            if generator == "erb":
                member = erb_member
            elif match:
                member = lambda k, j=int(match.group(1)): lj_member(j, k)  # noqa: E731
            else:
                raise LengthSpecError(f"unknown generator {generator!r}")
            if kind == "members":
                words = [member(k) for k in range(1, values[0] + 1)]
            else:
                words = []
                for n in values:
                    word = _largest_member(member, n, lambda w: len(tokenize(machine, w)))
                    if word is not None and word not in words:
                        words.append(word)
    inputs = []
    for word, label in zip(words, labels or [None] * len(words)):
        tokens = tokenize(machine, word)
        inputs.append(SweepInput(len(tokens), tokens, label))
    return inputs


def _verdict(machine: Machine, tokens, cap: int, max_configurations: int) -> str:
    if machine.mode is Mode.DETERMINISTIC:
        return run_deterministic(machine, tokens).verdict.value
    if machine.mode is Mode.PROBABILISTIC:
        return "accept" if acceptance_probability(machine, tokens) > Fraction(1, 2) else "reject"
    return decide_within(machine, tokens, cap, max_configurations).value


def measure_row(job) -> SweepRow:
    """Measure one sweep input; `job` is (machine, tokens, mode, cap, max_configurations, label)."""
    machine, tokens, mode, cap, max_configurations, label = job
    mode = SpaceMode(mode)
    if machine.mode is Mode.DETERMINISTIC:
        run = run_deterministic(machine, tokens)
        accepted = run.accepted
        space = run.space_profile.max_usage
        if mode is not SpaceMode.STRONG and not accepted:
            space = None
        return SweepRow(
            len(tokens), compress(tokens), mode.value, space, run.verdict.value, label=label
        )
    measurement = measure(machine, tokens, mode, cap, max_configurations)
    if mode is SpaceMode.WEAK and measurement.space is not None:
        verdict = Decision.ACCEPT.value
    else:
        verdict = _verdict(machine, tokens, cap, max_configurations)
    return SweepRow(
        len(tokens),
        compress(tokens),
        mode.value,
        measurement.space,
        verdict,
        measurement.truncated,
        label,
    )


def space_sweep(
    machine: Machine,
    mode: SpaceMode,
    inputs: Sequence[Tuple],
    generator: str = "explicit",
    cap: int | None = None,
    cap_factor: int = 4,
    cap_offset: int = 2,
    jobs: int = 1,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> SweepReport:
    """Measure a machine on every input and collect the rows sorted by n.

    Args:
        machine: Machine to measure.
        mode: Space mode.
        inputs: (n, tokens) pairs or `SweepInput` values, e.g. from `generate_inputs`.
        generator: Generator id recorded in the report.
        cap: Fixed space cap; None uses `cap_for(machine, n)` per row.
        cap_factor: Factor of the default cap.
        cap_offset: Offset of the default cap.
        jobs: Worker processes; rows are measured in a process pool when above 1.
        max_configurations: Guard on each explored configuration graph.
    """
    mode = SpaceMode(mode)
    if machine.mode is Mode.PROBABILISTIC and mode is SpaceMode.WEAK:
        raise ValueError(f"{machine.name}: weak space needs a non-probabilistic machine")
    work = [
        (
            machine,
            tuple(tokens),
            mode.value,
            cap if cap is not None else cap_for(machine, n, cap_factor, cap_offset),
            max_configurations,
            label,
        )
        for n, tokens, label in (SweepInput(*item) for item in inputs)
    ]
    logging.info(f"Sweeping {machine.name} in {mode.value} mode over {len(work)} inputs")
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(measure_row, work))
    else:
        rows = [measure_row(job) for job in work]
    truncated = sum(row.truncated for row in rows)
    if truncated:
        logging.warning(f"{machine.name}: {truncated} rows truncated at the cap")
    return SweepReport(
        machine=machine.name,
        mode=mode.value,
        generator=generator,
        cap=cap,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        rows=sorted(rows, key=lambda row: (row.n, row.input)),
    )


def read_report(text: str) -> SweepReport:
    """Read a report from its CSV or JSON rendering."""
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        rows = [SweepRow(**row) for row in data.pop("rows")]
        return SweepReport(rows=rows, **data)
    meta: Dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                meta[key] = value
        elif line.strip():
            body.append(line)
    rows = []
    for record in csv.DictReader(body):
        space = record["space"]
        truncated = space.endswith("+")
        space = space.rstrip("+")
        rows.append(
            SweepRow(
                int(record["n"]),
                record["input"],
                record["mode"],
                int(space) if space else None,
                record["verdict"],
                truncated,
                record.get("label") or None,
            )
        )
    cap = meta.get("cap", "default")
    return SweepReport(
        machine=meta.get("machine", ""),
        mode=meta.get("mode", ""),
        generator=meta.get("generator", ""),
        cap=None if cap == "default" else int(cap),
        timestamp=meta.get("created", ""),
        rows=rows,
    )


def bound_function(bound: str) -> Callable[[int], float]:
    """Bound family by name: log, loglog, sqrt, root<j>, linear.

    Each function returns 0 below its domain floor, which excludes the row from fits.
    """
    if bound == "log":
        return lambda n: math.log2(n) if n >= 2 else 0.0
    if bound == "loglog":
        return lambda n: math.log2(math.log2(n)) if n >= 4 else 0.0
    if bound == "sqrt":
        return lambda n: math.sqrt(n) if n >= 1 else 0.0
    if bound == "linear":
        return lambda n: float(n)
    match = re.fullmatch(r"root(\d+)", bound)
    if match and int(match.group(1)) >= 1:
        j = int(match.group(1))
        return lambda n: n ** (1 / j) if n >= 1 else 0.0
    raise ValueError(f"unknown bound {bound!r}; use log, loglog, sqrt, root<j> or linear")


def fit_bound(report: SweepReport, bound: str, offset: float = 0) -> BoundFit:
    """Smallest c with space <= c * f(n) + offset over the report's rows.

    Rows without a space value or with f(n) = 0 are skipped. Among rows of equal
    ratio the witness is the one with the smallest (n, input), so the fit does not
    depend on row order.

    Raises:
        ValueError: If no row survives filtering.
    """
    f = bound_function(bound)
    scored = [
        ((row.space - offset) / f(row.n), row)
        for row in report.rows
        if row.space is not None and f(row.n) > 0
    ]
    if not scored:
        raise ValueError(f"no rows with space and n above the {bound} domain floor")
    best_ratio = max(ratio for ratio, _ in scored)
    witness = min(
        (row for ratio, row in scored if ratio == best_ratio),
        key=lambda row: (row.n, row.input),
    )
    return BoundFit(bound, best_ratio, witness, offset, len(scored))


def _audit_count(size: int, max_len: int) -> int:
    return sum(size**length for length in range(max_len + 1))


def equivalence_audit(
    machine: Machine,
    language: LanguageId,
    max_len: int,
    alphabet: Sequence[str] | None = None,
    j: int | None = None,
    max_strings: int = DEFAULT_MAX_STRINGS,
    max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
) -> AuditResult:
    """Compare machine verdicts with an oracle on every string up to `max_len`.

    Strings are enumerated by length, then in alphabet order, so a reported
    counterexample is a shortest one. Deterministic machines share work across
    prefixes; branching machines are decided within `cap_for(machine, n)`, and
    probabilistic machines accept with probability above 1/2.

    Raises:
        AuditGuardError: If more than `max_strings` strings would be checked.
    """
    symbols = tuple(alphabet or machine.input_alphabet.symbols)
    total = _audit_count(len(symbols), max_len)
    if total > max_strings:
        logging.warning(f"Audit of {machine.name} refused: {total} strings")
        raise AuditGuardError(
            f"{total} strings up to length {max_len} exceed the limit of {max_strings}"
        )
    logging.info(f"Auditing {machine.name} against {language} up to length {max_len}")
    checked = 0

    def disagree(word, accepted) -> bool:
        return accepted != is_member(language, word, j)

    if machine.mode is Mode.DETERMINISTIC:
        level = [((), initial_configuration(machine))]
        for length in range(max_len + 1):
            following = []
            for word, config in level:
                checked += 1
                if disagree(word, finish(machine, config) is Verdict.ACCEPT):
                    return _failed(machine, word, checked)
                if length < max_len:
                    for symbol in symbols:
                        step = feed(machine, config, symbol) if config is not None else None
                        following.append((word + (symbol,), step))
            level = following
    else:
        for length in range(max_len + 1):
            for word in product(symbols, repeat=length):
                checked += 1
                if machine.mode is Mode.PROBABILISTIC:
                    accepted = acceptance_probability(machine, word) > Fraction(1, 2)
                else:
                    decision = decide_within(
                        machine, word, cap_for(machine, length), max_configurations
                    )
                    accepted = decision is Decision.ACCEPT
                if disagree(word, accepted):
                    return _failed(machine, word, checked)
    logging.info(f"Audit of {machine.name} passed on {checked} strings")
    return AuditResult(True, None, checked)


def _failed(machine: Machine, word, checked: int) -> AuditResult:
    rendered = "".join(word)
    logging.info(f"Audit of {machine.name} failed on {rendered!r}")
    return AuditResult(False, rendered, checked)
