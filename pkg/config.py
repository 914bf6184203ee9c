"""
Configuration management module.

This module loads the laboratory settings (space caps, sweep parameters, search and
audit guards, fixtures directory) and explicit sweep input lists from JSON files. It
handles missing or invalid files gracefully, warning the user and falling back to
defaults, so that every command runs with a complete settings dictionary.
"""

import copy
import json
from typing import Dict, List

from rich import print as rprint

DEFAULT_SETTINGS = {
    "cap": {"factor": 4, "offset": 2},
    "sweep": {"c": 4, "jobs": 1},
    "audit": {"max_strings": 2_000_000},
    "search": {"max_configurations": 2_000_000},
    "fixtures_dir": "fixtures/v1",
}

# Positive integers, except sweep.c which must also be even and at least 4.
_NUMERIC = {
    "cap": ("factor", "offset"),
    "sweep": ("c", "jobs"),
    "audit": ("max_strings",),
    "search": ("max_configurations",),
}


def load_inputs(file_path: str) -> List[Dict[str, str | None]]:
    """
    Load an explicit list of sweep inputs from a JSON file.

    Args:
        file_path: Path to the JSON file containing the inputs.

    Returns:
        A list of dictionaries, each with 'input' (str) and 'label' (str or None).

    Notes:
        The JSON file can contain either:
        - A list of strings (e.g., ["aabb", "a^8"]), converted to {"input": str, "label": None}.
        - A list of objects (e.g., [{"input": "a0a1a10a11", "label": "k=1"}]), where "input"
          is required and "label" is optional.
        Invalid entries are skipped with a warning. If the file is missing, unreadable, or
        contains invalid JSON, an error is printed, and an empty list is returned.
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, list):
            raise ValueError("Inputs must be a list")
        inputs = []
        for item in data:
            if isinstance(item, str):
                inputs.append({"input": item, "label": None})
            elif isinstance(item, dict) and isinstance(item.get("input"), str):
                label = item.get("label")
                if label is not None and not isinstance(label, str):
                    rprint(
                        f"[yellow]Warning: Invalid 'label' for input {item['input']}, must be a string. Ignoring label.[/yellow]"
                    )
                    label = None
                inputs.append({"input": item["input"], "label": label})
            else:
                rprint(
                    f"[yellow]Warning: Invalid input entry {item}, must be a string or an object with an 'input' string. Skipping.[/yellow]"
                )
        return inputs
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        rprint(f"[red]Error loading inputs from {file_path}: {e}[/red]")
        return []


def load_settings(file_path: str) -> Dict[str, dict | str]:
    """
    Load laboratory settings from a JSON file.

    Args:
        file_path: Path to the JSON file containing settings.

    Returns:
        Settings dictionary with 'cap', 'sweep', 'audit', 'search' and 'fixtures_dir' keys.

    Notes:
        Expected format:
        {
            "cap": {"factor": int, "offset": int},  # cap = factor * (ceil(log2(n + 2)) + offset)
            "sweep": {"c": int, "jobs": int},  # sweeps per symbol, worker processes
            "audit": {"max_strings": int},
            "search": {"max_configurations": int},
            "fixtures_dir": str
        }
        If the file is missing or invalid, a warning is printed, and default settings are returned.
        Missing sections or keys are filled with defaults. Numbers must be positive integers
        (sweep.c also even and at least 4); invalid values revert to the default with a warning.
    """
    defaults = copy.deepcopy(DEFAULT_SETTINGS)
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            settings = json.load(f)
        if not isinstance(settings, dict):
            raise ValueError("Settings must be an object")
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        rprint(
            f"[yellow]Warning: Could not load settings from {file_path}: {e}. Using default settings.[/yellow]"
        )
        return defaults

    for section, keys in _NUMERIC.items():
        if not isinstance(settings.get(section), dict):
            settings[section] = defaults[section]
            continue
        for key in keys:
            value = settings[section].get(key, defaults[section][key])
            valid = isinstance(value, int) and not isinstance(value, bool) and value > 0
            if valid and (section, key) == ("sweep", "c"):
                valid = value >= 4 and value % 2 == 0
            if not valid:
                rprint(
                    f"[yellow]Warning: Invalid {section}.{key} in settings. Using default {defaults[section][key]}.[/yellow]"
                )
                value = defaults[section][key]
            settings[section][key] = value
    if not isinstance(settings.get("fixtures_dir"), str):
        settings["fixtures_dir"] = defaults["fixtures_dir"]
    return settings
