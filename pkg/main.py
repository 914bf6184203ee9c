#!/usr/bin/env python3
"""
Main script for the automata laboratory CLI.

Runs built-in or file-defined machines on single inputs, computes exact acceptance
probabilities, measures strong, middle and weak space, sweeps machines over generated
inputs, fits space bounds to sweep reports, audits machines against membership
oracles and pads machines with κ. Logs key operations and errors to
'automata_lab.log' for monitoring and debugging purposes.

Exit codes: 0 on accept or pass, 1 on reject or fail, 2 on usage errors.
"""

import argparse
import copy
import logging
import os
import re
import sys
from fractions import Fraction
from typing import Dict, List

from rich import print as rprint

from analysis import (
    equivalence_audit,
    fit_bound,
    generate_inputs,
    read_report,
    space_sweep,
)
from config import DEFAULT_SETTINGS, load_settings
from constructions import (
    SweepParams,
    build_njk_machine,
    build_njk_realtime,
    pad_machine,
)
from display import (
    display_audit,
    display_fit,
    display_machine,
    display_machines,
    display_report,
    display_trace,
)
from engine import (
    Decision,
    EngineError,
    acceptance_probability,
    run_deterministic,
)
from machine_model import Machine, MachineError, Mode, tokenize
from machine_store import (
    builtin_machines,
    export_machines,
    resolve_machine,
    save_machine_file,
)
from metering import SpaceMode, cap_for, decide_within, measure, measure_strong_space
from oracles import LanguageId, is_member, parse_language

# Configure logging at module level
logging.basicConfig(
    level=logging.INFO,
    filename='automata_lab.log',
    format='%(asctime)s - %(levelname)s - %(message)s',
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def get_machine(name: str, settings: Dict[str, dict]) -> Machine:
    """Resolve a machine name, building the three-track machines with the configured sweep count."""
    c = settings["sweep"]["c"]
    if c != SweepParams().c and name in ("njk", "njk-rt"):
        params = SweepParams(c)
        return build_njk_machine(params) if name == "njk" else build_njk_realtime(params)
    return resolve_machine(name)


def expand_runs(text: str, language: LanguageId) -> str:
    """Expand `x^n` run-length notation in oracle input (L_j runs repeat whole tokens)."""
    token = r"(a\d+)" if language is LanguageId.LJ else r"(.)"
    return re.sub(token + r"\^(\d+)", lambda m: m.group(1) * int(m.group(2)), text)


def _cap(
    args: argparse.Namespace, settings: Dict[str, dict], machine: Machine, n: int
) -> int:
    if args.cap is not None:
        return args.cap
    return cap_for(machine, n, settings["cap"]["factor"], settings["cap"]["offset"])


def cmd_run(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    word = tokenize(machine, args.input)
    if machine.mode is Mode.PROBABILISTIC:
        return cmd_prob(args, settings)
    if machine.mode is Mode.DETERMINISTIC:
        result = run_deterministic(machine, word, trace=args.trace)
        logging.info(
            f"Run of {machine.name} on {len(word)} symbols: {result.verdict.value}, "
            f"{result.steps} steps"
        )
        if args.trace:
            display_trace(result)
        rprint(
            f"{result.verdict.value}, steps={result.steps}, "
            f"space={result.space_profile.max_usage}"
        )
        return EXIT_OK if result.accepted else EXIT_FAIL
    cap = _cap(args, settings, machine, len(word))
    decision = decide_within(
        machine, word, cap, settings["search"]["max_configurations"]
    )
    logging.info(f"Bounded decision of {machine.name} within {cap} cells: {decision.value}")
    rprint(f"{decision.value}, cap={cap}")
    return EXIT_OK if decision is Decision.ACCEPT else EXIT_FAIL


def cmd_prob(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    probability = acceptance_probability(machine, tokenize(machine, args.input))
    logging.info(f"Acceptance probability of {machine.name}: {probability}")
    rprint(str(probability))
    return EXIT_OK if probability > Fraction(1, 2) else EXIT_FAIL


def cmd_measure(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    word = tokenize(machine, args.input)
    cap = _cap(args, settings, machine, len(word))
    max_configurations = settings["search"]["max_configurations"]
    if args.exhaustive:
        if args.mode != SpaceMode.STRONG.value:
            raise ValueError("--exhaustive applies to strong space only")
        measurement = measure_strong_space(
            machine, len(word), cap, exhaustive=True, max_configurations=max_configurations
        )
    else:
        measurement = measure(machine, word, args.mode, cap, max_configurations)
    logging.info(
        f"{args.mode} space of {machine.name} on {len(word)} symbols: {measurement.space}"
    )
    if measurement.space is None:
        rprint(f"space=N/A (not accepted within cap {cap})")
        return EXIT_FAIL
    suffix = f" [yellow](truncated at cap {cap})[/yellow]" if measurement.truncated else ""
    rprint(f"space={measurement.space}{suffix}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    inputs = generate_inputs(
        machine, args.generator, args.lengths, SweepParams(settings["sweep"]["c"])
    )
    if not inputs:
        logging.error(f"Generator {args.generator} produced no inputs for {args.lengths}")
        rprint("[red]No inputs to sweep.[/red]")
        return EXIT_USAGE
    report = space_sweep(
        machine,
        args.mode,
        inputs,
        generator=args.generator,
        cap=args.cap,
        cap_factor=settings["cap"]["factor"],
        cap_offset=settings["cap"]["offset"],
        jobs=args.jobs or settings["sweep"]["jobs"],
        max_configurations=settings["search"]["max_configurations"],
    )
    if args.out:
        directory = os.path.dirname(args.out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(report.to_csv())
        mirror = os.path.splitext(args.out)[0] + ".json"
        with open(mirror, "w", encoding="utf-8") as f:
            f.write(report.to_json())
        logging.info(f"Sweep report written to {args.out} and {mirror}")
    display_report(report)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    with open(args.report, "r", encoding="utf-8") as f:
        report = read_report(f.read())
    fit = fit_bound(report, args.bound, args.offset)
    logging.info(f"Fit of {report.machine} against {args.bound}: {fit.max_ratio}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(fit.to_json())
    display_fit(fit)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    language, j = parse_language(args.lang)
    alphabet: List[str] | None = None
    if args.alphabet:
        alphabet = [symbol.strip() for symbol in args.alphabet.split(",") if symbol.strip()]
    result = equivalence_audit(
        machine,
        language,
        args.maxlen,
        alphabet=alphabet,
        j=j,
        max_strings=settings["audit"]["max_strings"],
        max_configurations=settings["search"]["max_configurations"],
    )
    display_audit(machine.name, args.lang, result)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_oracle(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    language, j = parse_language(args.lang)
    member = is_member(language, expand_runs(args.input, language), j)
    rprint("member" if member else "non-member")
    return EXIT_OK if member else EXIT_FAIL


def cmd_pad(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    machine = get_machine(args.machine, settings)
    padded = pad_machine(machine)
    save_machine_file(padded, args.out)
    rprint(f"[green]Wrote {padded.name} to {args.out}[/green]")
    return EXIT_OK


def cmd_list_machines(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    display_machines([builder() for builder in builtin_machines().values()])
    return EXIT_OK


def cmd_export(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    written = export_machines(args.out or settings["fixtures_dir"])
    for name, path in written.items():
        rprint(f"{name}: {path}")
    return EXIT_OK


def cmd_show(args: argparse.Namespace, settings: Dict[str, dict]) -> int:
    display_machine(get_machine(args.machine, settings), rules=args.rules)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulation laboratory for space-bounded automata"
    )
    parser.add_argument(
        "--settings", default="settings.json", help="Path to the settings JSON file"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a machine on one input")
    run.add_argument("machine", help="Built-in machine name or machine file")
    run.add_argument("input", help="Input text; x^n repeats x n times")
    run.add_argument("--trace", action="store_true", help="Show every configuration")
    run.add_argument("--cap", type=int, help="Space cap for branching machines")
    run.set_defaults(handler=cmd_run)

    prob = commands.add_parser("prob", help="Exact acceptance probability")
    prob.add_argument("machine")
    prob.add_argument("input")
    prob.set_defaults(handler=cmd_prob)

    measure_cmd = commands.add_parser("measure", help="Measure space on one input")
    measure_cmd.add_argument("machine")
    measure_cmd.add_argument("input")
    measure_cmd.add_argument(
        "--mode", choices=[mode.value for mode in SpaceMode], default=SpaceMode.STRONG.value
    )
    measure_cmd.add_argument("--cap", type=int, help="Space cap (default from settings)")
    measure_cmd.add_argument(
        "--exhaustive",
        action="store_true",
        help="Strong space over every input of the same length",
    )
    measure_cmd.set_defaults(handler=cmd_measure)

    sweep = commands.add_parser("sweep", help="Measure space over generated inputs")
    sweep.add_argument("machine")
    sweep.add_argument(
        "--mode", choices=[mode.value for mode in SpaceMode], default=SpaceMode.STRONG.value
    )
    sweep.add_argument(
        "--generator", required=True, help="unary, ld, erb, lj<j>, jk-hard or file:<path>"
    )
    sweep.add_argument(
        "--lengths",
        default="members:8",
        help="members:<count>, range:<lo>:<hi>:<step> or pow2:<lo>:<hi>",
    )
    sweep.add_argument("--cap", type=int, help="Fixed space cap for every row")
    sweep.add_argument("--jobs", type=int, help="Worker processes")
    sweep.add_argument("--out", help="CSV report path; a JSON mirror is written beside it")
    sweep.set_defaults(handler=cmd_sweep)

    fit = commands.add_parser("fit", help="Fit a space bound to a sweep report")
    fit.add_argument("report", help="CSV or JSON sweep report")
    fit.add_argument("--bound", required=True, help="log, loglog, sqrt, root<j> or linear")
    fit.add_argument("--offset", type=float, default=0, help="Additive constant c2")
    fit.add_argument("--out", help="Write the fit as JSON")
    fit.set_defaults(handler=cmd_fit)

    audit = commands.add_parser("audit", help="Compare a machine with a language oracle")
    audit.add_argument("machine")
    audit.add_argument("--lang", required=True, help="ld, gcm, jk, jk-padded, erb or lj<j>")
    audit.add_argument("--maxlen", type=int, required=True)
    audit.add_argument("--alphabet", help="Comma-separated tokens (default: machine alphabet)")
    audit.set_defaults(handler=cmd_audit)

    oracle = commands.add_parser("oracle", help="Decide membership without simulation")
    oracle.add_argument("lang")
    oracle.add_argument("input")
    oracle.set_defaults(handler=cmd_oracle)

    pad = commands.add_parser("pad", help="Write the κ-padded form of a machine")
    pad.add_argument("machine")
    pad.add_argument("--out", required=True)
    pad.set_defaults(handler=cmd_pad)

    list_machines = commands.add_parser("list-machines", help="List built-in machines")
    list_machines.set_defaults(handler=cmd_list_machines)

    export = commands.add_parser("export", help="Write every built-in machine to a directory")
    export.add_argument("--out", help="Target directory (default from settings)")
    export.set_defaults(handler=cmd_export)

    show = commands.add_parser("show", help="Summarize a machine")
    show.add_argument("machine")
    show.add_argument("--rules", action="store_true", help="List every transition")
    show.set_defaults(handler=cmd_show)
    return parser


def main(argv: List[str] | None = None) -> int:
    """Main entry point for the automata laboratory CLI.

    Args:
        argv: Command-line arguments; None reads sys.argv.

    Returns:
        Exit code: 0 on accept or pass, 1 on reject or fail, 2 on usage errors.

    Notes:
        Machine, engine and guard errors are logged and reported in red, and map to
        exit code 2. argparse errors exit with code 2 on their own.
    """
    logging.info("Application starting.")
    args = build_parser().parse_args(argv)
    if os.path.exists(args.settings):
        settings = load_settings(args.settings)
    else:
        settings = copy.deepcopy(DEFAULT_SETTINGS)
    logging.info(f"Running command {args.command}.")
    try:
        return args.handler(args, settings)
    except (MachineError, EngineError, ValueError, OSError) as e:
        logging.error(f"Command {args.command} failed: {str(e)}")
        rprint(f"[red]Error: {e}[/red]")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
