import math

import numpy as np
import pytest

from lorenz5.exceptions import ConfigurationError
from lorenz5.parsers import ConfigFileParser, parse_grid, parse_number, parse_span, parse_state, parse_values


def test_config_file_values_are_typed():
    text = """
    # Melnikov run
    M = 2
    k = 0.25
    theta0 = pi/2
    --branch = +--
    format = "json"
    quiet = true
    T = none
    """
    parsed = ConfigFileParser.parse(text)
    assert parsed == {"M": 2, "k": 0.25, "theta0": "pi/2", "branch": "+--", "format": "json",
                      "quiet": True, "T": None}


@pytest.mark.parametrize("text", ["M 1", "M = 1\nM = 2", "1M = 3", " = 4"])
def test_config_file_errors(text):
    with pytest.raises(ConfigurationError):
        ConfigFileParser.parse(text)


@pytest.mark.parametrize("token, expected", [
    ("1.5", 1.5),
    ("pi", math.pi),
    ("2pi", 2 * math.pi),
    ("-pi", -math.pi),
    ("pi/2", math.pi / 2),
    ("0.5*pi", 0.5 * math.pi),
    ("3PI/4", 0.75 * math.pi),
    ("1e-3", 1e-3),
])
def test_parse_number(token, expected):
    assert parse_number(token) == pytest.approx(expected)


@pytest.mark.parametrize("token", ["", "tau", "pi/", "2pi3"])
def test_parse_number_errors(token):
    with pytest.raises(ConfigurationError):
        parse_number(token)


def test_parse_grid():
    grid = parse_grid("0:2pi:128")
    assert grid.size == 128
    assert grid[0] == 0.0
    assert grid[32] == pytest.approx(math.pi / 2)
    assert grid[-1] < 2 * math.pi
    assert parse_grid("0:1:0").size == 0


@pytest.mark.parametrize("spec", ["0:1", "0:1:x", "0:1:-2", "1:0:4"])
def test_parse_grid_errors(spec):
    with pytest.raises(ConfigurationError):
        parse_grid(spec)


def test_lists_states_and_spans():
    np.testing.assert_allclose(parse_values("1e-2, 1e-3,pi"), [1e-2, 1e-3, math.pi])
    assert parse_values("").size == 0
    np.testing.assert_array_equal(parse_state("1,0,1,1,0"), [1, 0, 1, 1, 0])
    with pytest.raises(ConfigurationError):
        parse_state("1,2,3")
    assert parse_span("-10:10") == [-10.0, 10.0]
    with pytest.raises(ConfigurationError):
        parse_span("0:1:2")
