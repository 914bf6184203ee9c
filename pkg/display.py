"""
Table display module for the automata laboratory.

This module renders sweep reports, bound fits, audit results, machine listings and
machine summaries as tables using the rich library. Verdicts are colored (green for
accept, red for reject, yellow when a space budget cut the search short), and
missing values are shown as 'N/A'.
"""

from typing import List

from rich.console import Console
from rich.table import Table

from analysis import AuditResult, BoundFit, SweepReport
from engine import RunResult
from machine_model import Label, Machine, StorageKind


def format_verdict(verdict: str | None) -> str:
    """
    Formats a verdict with color styling.

    Args:
        verdict: "accept", "reject", "budget-exceeded" or None.

    Returns:
        The formatted string with color tags if applicable.
    """
    if verdict is None:
        return "N/A"
    if verdict == "accept":
        return "[green]accept[/]"
    elif verdict == "reject":
        return "[red]reject[/]"
    else:
        return f"[yellow]{verdict}[/]"


def format_space(space: int | None, truncated: bool = False) -> str:
    """Formats a space value; truncated measurements get a yellow '+' suffix."""
    if space is None:
        return "N/A"
    if truncated:
        return f"{space}[yellow]+[/]"
    return str(space)


def _console(console: Console | None) -> Console:
    if console is None:
        console = Console(highlight=False, markup=True)
    return console


def _shorten(text: str, width: int = 48) -> str:
    if len(text) <= width:
        return text
    return text[: width - 3] + "..."


def display_report(
    report: SweepReport, console: Console = None, debug: bool = False
) -> None:
    """
    Displays a sweep report, one row per input.

    Args:
        report: Report produced by `analysis.space_sweep`.
        console: An optional existing Console instance; if None, a new one is created.
        debug: If True, prints additional plain text output for test detection.

    Notes:
        - Columns: n, Input, Mode, Space, Verdict.
        - Long inputs are shortened to keep the table readable.
    """
    console = _console(console)
    cap = "default" if report.cap is None else str(report.cap)
    table = Table(
        show_header=True,
        title=f"{report.machine} ({report.mode} space, generator {report.generator}, cap {cap})",
    )
    columns = [
        ("n", "right"),
        ("Input", "left"),
        ("Mode", "left"),
        ("Space", "right"),
        ("Verdict", "left"),
    ]
    for col_name, justify in columns:
        table.add_column(col_name, justify=justify)

    if debug:
        print("Headers: " + ", ".join(col_name for col_name, _ in columns))

    column_formatters = {
        "n": lambda row: str(row.n),
        "Input": lambda row: _shorten(row.input),
        "Mode": lambda row: row.mode,
        "Space": lambda row: format_space(row.space, row.truncated),
        "Verdict": lambda row: format_verdict(row.verdict),
    }
    for row in report.rows:
        cells = [column_formatters[col](row) for col, _ in columns]
        if debug:
            print("Row: " + ", ".join(cells))
        table.add_row(*cells)

    console.print(table)


def display_fit(fit: BoundFit, console: Console = None) -> None:
    """Displays a bound fit with its witness row."""
    console = _console(console)
    table = Table(show_header=True, title=f"Fit against {fit.bound}")
    table.add_column("Bound", justify="left")
    table.add_column("Max ratio", justify="right")
    table.add_column("Offset", justify="right")
    table.add_column("Rows", justify="right")
    table.add_column("Witness n", justify="right")
    table.add_column("Witness input", justify="left")
    table.add_column("Witness space", justify="right")
    table.add_row(
        fit.bound,
        f"{fit.max_ratio:.4f}",
        f"{fit.offset:g}",
        str(fit.rows_used),
        str(fit.witness.n),
        _shorten(fit.witness.input),
        format_space(fit.witness.space, fit.witness.truncated),
    )
    console.print(table)


def display_audit(
    machine: str, language: str, result: AuditResult, console: Console = None
) -> None:
    console = _console(console)
    table = Table(show_header=True, title=f"Audit of {machine} against {language}")
    table.add_column("Result", justify="left")
    table.add_column("Strings checked", justify="right")
    table.add_column("Counterexample", justify="left")
    if result.passed:
        table.add_row("[green]pass[/]", str(result.checked), "")
    else:
        shown = result.counterexample if result.counterexample else "ε"
        table.add_row("[red]fail[/]", str(result.checked), shown)
    console.print(table)


def _storage_summary(machine: Machine) -> str:
    spec = machine.storage
    if spec.kind is StorageKind.WORKTAPE:
        return f"worktape over {{{', '.join(spec.alphabet)}}}"
    noun = "stack" if spec.kind is StorageKind.STACKS else "counter"
    return f"{spec.count} {noun}{'s' if spec.count != 1 else ''}"


def display_machines(machines: List[Machine], console: Console = None) -> None:
    """Displays one row per machine: name, timing, mode, storage and size."""
    console = _console(console)
    table = Table(show_header=True, title="Machines")
    columns = [
        ("Name", "left"),
        ("Timing", "left"),
        ("Mode", "left"),
        ("Storage", "left"),
        ("Alphabet", "left"),
        ("States", "right"),
        ("Rules", "right"),
    ]
    for col_name, justify in columns:
        table.add_column(col_name, justify=justify)
    for machine in machines:
        table.add_row(
            machine.name,
            machine.timing.value,
            machine.mode.value,
            _storage_summary(machine),
            " ".join(machine.input_alphabet.symbols),
            str(len(machine.states)),
            str(len(machine.transitions)),
        )
    console.print(table)


def display_machine(machine: Machine, console: Console = None, rules: bool = False) -> None:
    """
    Displays a summary of one machine.

    Args:
        machine: Machine to describe.
        console: An optional existing Console instance; if None, a new one is created.
        rules: If True, also lists every transition rule.
    """
    console = _console(console)
    table = Table(show_header=False, title=machine.name)
    table.add_column("Field", justify="left")
    table.add_column("Value", justify="left")
    table.add_row("Timing", machine.timing.value)
    table.add_row("Mode", machine.mode.value)
    table.add_row("Storage", _storage_summary(machine))
    table.add_row("Input alphabet", " ".join(machine.input_alphabet.symbols))
    table.add_row("States", str(len(machine.states)))
    table.add_row("Initial", machine.initial)
    table.add_row("Accepting", ", ".join(sorted(machine.accepting)))
    table.add_row("Rules", str(len(machine.transitions)))
    universal = sorted(
        state for state, label in machine.labels.items() if label is Label.UNIVERSAL
    )
    if universal:
        table.add_row("Universal", ", ".join(universal))
    console.print(table)

    if not rules:
        return
    listing = Table(show_header=True, title="Transitions")
    for col_name in ("From", "Read", "Observe", "To", "Input", "Storage", "Weight"):
        listing.add_column(col_name, justify="left")
    for rule in machine.transitions:
        listing.add_row(
            rule.source,
            rule.read,
            " ".join(rule.observe),
            rule.target,
            rule.input_action.value,
            " ".join(rule.storage_action),
            "" if rule.weight is None else str(rule.weight),
        )
    console.print(listing)


def display_trace(run: RunResult, console: Console = None) -> None:
    """Displays the configurations of a traced deterministic run."""
    console = _console(console)
    table = Table(show_header=True, title="Trace")
    table.add_column("Step", justify="right")
    table.add_column("State", justify="left")
    table.add_column("Position", justify="right")
    table.add_column("Storage", justify="left")
    table.add_column("Usage", justify="right")
    usages = run.space_profile.per_step_usage
    for step, config in enumerate(run.trace or ()):
        table.add_row(
            str(step),
            config.state,
            str(config.position),
            str(config.storage),
            str(usages[step]) if step < len(usages) else "",
        )
    console.print(table)
