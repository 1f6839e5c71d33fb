"""Parsers for the text inputs of the command line (config files, grids, lists)."""

import math
import re
from typing import Any, Dict, List

import numpy as np

from .exceptions import ConfigurationError


class ConfigFileParser:
    """Parser for flat ``key = value`` run configuration files.

    Example:
        # Melnikov profile at the default energy
        M = 1.0
        k = 0.5
        grid = 0:2pi:128
        format = json

    Keys are the long command-line flags without the leading dashes.
    Blank lines and lines starting with ``#`` are ignored.
    """

    KEY_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")

    @staticmethod
    def parse(text: str) -> Dict[str, Any]:
        """Parse configuration text into a dictionary.

        Args:
            text: Contents of a configuration file

        Returns:
            Mapping of keys to typed values

        Raises:
            ConfigurationError: On a line without ``=``, a bad key or a repeated key
        """
        result = {}
        for number, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith('#'):
                continue

            if '=' not in stripped:
                raise ConfigurationError(f"line {number}: expected 'key = value', got {stripped!r}")

            key, value = stripped.split('=', 1)
            key = key.strip().lstrip('-')
            if not ConfigFileParser.KEY_PATTERN.match(key):
                raise ConfigurationError(f"line {number}: invalid key {key!r}")
            if key in result:
                raise ConfigurationError(f"line {number}: duplicate key {key!r}")

            result[key] = ConfigFileParser._parse_value(value)

        return result

    @staticmethod
    def _parse_value(value: str) -> Any:
        """Parse a value into bool, None, int, float or str."""
        value = value.strip()

        # Strip matching quotes
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            return value[1:-1]

        if value.lower() == 'true':
            return True
        if value.lower() == 'false':
            return False
        if value.lower() in ('null', 'none', ''):
            return None

        try:
            return int(value)
        except ValueError:
            pass
        try:
            return float(value)
        except ValueError:
            pass

        return value


def parse_number(token: str) -> float:
    """Parse a float that may be written with ``pi`` (``2pi``, ``pi/2``, ``-0.5pi``)."""
    token = token.strip().lower().replace(" ", "")
    if not token:
        raise ConfigurationError("empty number")
    try:
        return float(token)
    except ValueError:
        pass

    match = re.fullmatch(r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/((?:\d+(?:\.\d*)?|\.\d+)))?", token)
    if not match:
        raise ConfigurationError(f"cannot parse number {token!r}")
    factor, divisor = match.groups()
    if factor in (None, "", "+"):
        scale = 1.0
    elif factor == "-":
        scale = -1.0
    else:
        scale = float(factor)
    value = scale * math.pi
    if divisor:
        value /= float(divisor)
    return value


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``start:stop:count`` into ``count`` uniform points of [start, stop).

    Args:
        spec: Grid string, e.g. ``0:2pi:128``

    Returns:
        Array of grid points (empty when count is 0)
    """
    parts = str(spec).split(':')
    if len(parts) != 3:
        raise ConfigurationError(f"grid must look like start:stop:count, got {spec!r}")
    start, stop = parse_number(parts[0]), parse_number(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise ConfigurationError(f"grid count must be an integer, got {parts[2]!r}")
    if count < 0:
        raise ConfigurationError("grid count must be non-negative")
    if count > 0 and not stop > start:
        raise ConfigurationError(f"grid stop must exceed start in {spec!r}")
    return np.linspace(start, stop, count, endpoint=False)


def parse_values(spec: str) -> np.ndarray:
    """Parse a comma separated list of numbers (``pi`` allowed); empty text gives an empty array."""
    spec = "" if spec is None else str(spec)
    items = [item for item in spec.split(',') if item.strip()]
    return np.array([parse_number(item) for item in items], dtype=float)


def parse_state(spec: str, dim: int = 5) -> np.ndarray:
    """Parse a comma separated phase-space point."""
    values = parse_values(spec)
    if values.shape != (dim,):
        raise ConfigurationError(f"expected {dim} comma separated values, got {spec!r}")
    return values


def parse_span(spec: str) -> List[float]:
    """Parse ``t0:t1`` into a two-element time span."""
    parts = str(spec).split(':')
    if len(parts) != 2:
        raise ConfigurationError(f"time span must look like t0:t1, got {spec!r}")
    return [parse_number(parts[0]), parse_number(parts[1])]
