"""
Unit tests for the configuration module.

This module contains tests for the `config.py` module, specifically the `load_inputs` and `load_settings`
functions, which load explicit sweep inputs and laboratory settings from JSON files. The tests verify that
the functions fall back to defaults and warn on malformed content instead of failing a command.
"""

from unittest.mock import patch

from config import DEFAULT_SETTINGS, load_inputs, load_settings


@patch('config.rprint')
def test_load_inputs_strings(mock_rprint, tmp_path):
    """Tests loading a JSON file with a list of input strings.

    Args:
        mock_rprint: Mocked rich.print function to verify no warnings/errors are printed.
        tmp_path: Pytest fixture providing a temporary directory.
    """
    file_path = tmp_path / "inputs.json"
    file_path.write_text('["aabb", "a^8"]')
    inputs = load_inputs(str(file_path))
    assert inputs == [
        {"input": "aabb", "label": None},
        {"input": "a^8", "label": None},
    ]
    mock_rprint.assert_not_called()


@patch('config.rprint')
def test_load_inputs_objects(mock_rprint, tmp_path):
    """Tests loading input objects with and without labels."""
    file_path = tmp_path / "inputs.json"
    file_path.write_text('[{"input": "a0a1a10a11", "label": "k=1"}, {"input": "ab"}]')
    inputs = load_inputs(str(file_path))
    assert inputs == [
        {"input": "a0a1a10a11", "label": "k=1"},
        {"input": "ab", "label": None},
    ]
    mock_rprint.assert_not_called()


@patch('config.rprint')
def test_load_inputs_invalid_entries(mock_rprint, tmp_path):
    """Tests that invalid entries are skipped and bad labels are dropped with warnings.

    Args:
        mock_rprint: Mocked rich.print function to verify warnings are printed.
        tmp_path: Pytest fixture providing a temporary directory.
    """
    file_path = tmp_path / "inputs.json"
    file_path.write_text('["ab", 42, {"label": "no input"}, {"input": "ba", "label": 7}]')
    inputs = load_inputs(str(file_path))
    assert inputs == [
        {"input": "ab", "label": None},
        {"input": "ba", "label": None},
    ]
    assert mock_rprint.call_count == 3
    mock_rprint.assert_any_call(
        "[yellow]Warning: Invalid input entry 42, must be a string or an object with an 'input' string. Skipping.[/yellow]"
    )
    mock_rprint.assert_any_call(
        "[yellow]Warning: Invalid 'label' for input ba, must be a string. Ignoring label.[/yellow]"
    )


@patch('config.rprint')
def test_load_inputs_not_a_list(mock_rprint, tmp_path):
    """Tests that a JSON object instead of a list yields no inputs and an error."""
    file_path = tmp_path / "inputs.json"
    file_path.write_text('{"input": "ab"}')
    assert load_inputs(str(file_path)) == []
    mock_rprint.assert_called_once_with(
        f"[red]Error loading inputs from {file_path}: Inputs must be a list[/red]"
    )


@patch('config.rprint')
def test_load_inputs_missing_file(mock_rprint, tmp_path):
    """Tests that a missing file returns an empty list and prints an error."""
    file_path = tmp_path / "missing.json"
    assert load_inputs(str(file_path)) == []
    mock_rprint.assert_called_once()
    assert "Error loading inputs" in mock_rprint.call_args[0][0]


@patch('config.rprint')
def test_load_settings_valid(mock_rprint, tmp_path):
    """Tests loading a complete, valid settings file."""
    file_path = tmp_path / "settings.json"
    file_path.write_text(
        '{"cap": {"factor": 2, "offset": 1}, "sweep": {"c": 6, "jobs": 4}, '
        '"audit": {"max_strings": 500}, "search": {"max_configurations": 1000}, '
        '"fixtures_dir": "out"}'
    )
    settings = load_settings(str(file_path))
    assert settings == {
        "cap": {"factor": 2, "offset": 1},
        "sweep": {"c": 6, "jobs": 4},
        "audit": {"max_strings": 500},
        "search": {"max_configurations": 1000},
        "fixtures_dir": "out",
    }
    mock_rprint.assert_not_called()


@patch('config.rprint')
def test_load_settings_fills_missing_sections(mock_rprint, tmp_path):
    """Tests that missing sections and keys are filled from the defaults silently."""
    file_path = tmp_path / "settings.json"
    file_path.write_text('{"cap": {"factor": 8}}')
    settings = load_settings(str(file_path))
    assert settings["cap"] == {"factor": 8, "offset": 2}
    assert settings["sweep"] == DEFAULT_SETTINGS["sweep"]
    assert settings["fixtures_dir"] == "fixtures/v1"
    mock_rprint.assert_not_called()


@patch('config.rprint')
def test_load_settings_invalid_values(mock_rprint, tmp_path):
    """Tests that an odd sweep count and a non-positive job count revert to defaults."""
    file_path = tmp_path / "settings.json"
    file_path.write_text('{"sweep": {"c": 5, "jobs": 0}, "audit": {"max_strings": true}}')
    settings = load_settings(str(file_path))
    assert settings["sweep"] == {"c": 4, "jobs": 1}
    assert settings["audit"] == {"max_strings": 2_000_000}
    assert mock_rprint.call_count == 3
    mock_rprint.assert_any_call(
        "[yellow]Warning: Invalid sweep.c in settings. Using default 4.[/yellow]"
    )


@patch('config.rprint')
def test_load_settings_invalid_json(mock_rprint, tmp_path):
    """Tests that invalid JSON falls back to the defaults with a warning."""
    file_path = tmp_path / "settings.json"
    file_path.write_text('{"cap": ')
    settings = load_settings(str(file_path))
    assert settings == DEFAULT_SETTINGS
    mock_rprint.assert_called_once()
    assert "Using default settings" in mock_rprint.call_args[0][0]


@patch('config.rprint')
def test_load_settings_does_not_alias_defaults(mock_rprint, tmp_path):
    """Tests that mutating returned defaults leaves DEFAULT_SETTINGS untouched."""
    settings = load_settings(str(tmp_path / "missing.json"))
    settings["cap"]["factor"] = 99
    assert DEFAULT_SETTINGS["cap"]["factor"] == 4
