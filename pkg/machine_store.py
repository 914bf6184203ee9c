"""
Machine file store for the automata laboratory.

This module reads and writes machine files (the JSON machine format of `machine_model`),
resolves machine names given on the command line to built-in builders or files, and
exports every built-in machine into a versioned fixtures directory. Writes are
serialized with a lock, and operations are logged for monitoring.
"""

import logging
import os
from threading import Lock
from typing import Callable, Dict

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
    build_prob_lj_counter,
)
from machine_model import Machine, MachineError, parse_machine, serialize_machine

FIXTURES_DIR = os.path.join("fixtures", "v1")
store_lock = Lock()


def builtin_machines() -> Dict[str, Callable[[], Machine]]:
    """Return the built-in machines as a mapping from name to zero-argument builder."""
    machines: Dict[str, Callable[[], Machine]] = {
        "ld": build_ld_machine,
        "njk": build_njk_machine,
        "njk-rt": build_njk_realtime,
        "erb": build_erb_pda,
        "prob-erb": build_prob_erb_pda,
        "fixture-anbn": build_anbn_fixture,
        "fixture-asym": build_asymmetric_fixture,
        "fixture-alt": build_alternating_fixture,
    }
    for j in (2, 3, 4):
        machines[f"lj{j}"] = lambda j=j: build_lj_counters(j)
        machines[f"prob-lj{j}"] = lambda j=j: build_prob_lj_counter(j)
    return machines


def load_machine_file(path: str) -> Machine:
    """Load and validate a machine file.

    Args:
        path: Path to a UTF-8 JSON machine file.

    Returns:
        The parsed machine.

    Raises:
        MachineError: If the file cannot be read or does not describe a valid machine.
    """
    logging.info(f"Loading machine file {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        logging.error(f"Error reading machine file {path}: {e}")
        raise MachineError(f"cannot read {path}: {e}") from e
    machine = parse_machine(text)
    logging.info(f"Machine {machine.name} loaded from {path}")
    return machine


def save_machine_file(machine: Machine, path: str) -> None:
    """Write a machine file, creating parent directories as needed."""
    logging.info(f"Saving machine {machine.name} to {path}")
    with store_lock:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(serialize_machine(machine))
            f.write("\n")
    logging.info(f"Machine {machine.name} saved")


def resolve_machine(name: str) -> Machine:
    """Resolve a built-in machine name or a path to a machine file.

    Raises:
        MachineError: If the name is neither a built-in machine nor a readable file.
    """
    machines = builtin_machines()
    if name in machines:
        return machines[name]()
    if name.endswith(".json") or os.path.exists(name):
        return load_machine_file(name)
    known = ", ".join(sorted(machines))
    raise MachineError(f"unknown machine {name!r}; built-in machines are {known}")


def export_machines(directory: str = FIXTURES_DIR) -> Dict[str, str]:
    """Write every built-in machine as `<name>.json` under `directory`.

    Returns:
        Mapping from machine name to the written path.
    """
    written = {}
    for name, builder in builtin_machines().items():
        path = os.path.join(directory, f"{name}.json")
        save_machine_file(builder(), path)
        written[name] = path
    logging.info(f"Exported {len(written)} machines to {directory}")
    return written
