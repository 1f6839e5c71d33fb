import json
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np
import pandas as pd

from .. import __version__

FORMATS = ("csv", "json")

# Seventeen significant digits round-trip every double
FLOAT_FORMAT = "%.17g"


def flatten_json(obj, prefix=""):
    """
    Flatten a nested metadata object into a single-level dictionary
    with dotted keys, e.g. {'integrator': {'rtol': 1e-10}} -> {'integrator.rtol': 1e-10}
    """
    flattened = {}

    if isinstance(obj, Mapping):
        for key, value in obj.items():
            current_key = f"{prefix}.{key}" if prefix else str(key)
            if isinstance(value, (Mapping, list, tuple)) and value:
                flattened.update(flatten_json(value, current_key))
            elif isinstance(value, (list, tuple)):
                flattened[current_key] = ""
            else:
                flattened[current_key] = value
    elif isinstance(obj, (list, tuple)):
        if all(not isinstance(item, (Mapping, list, tuple)) for item in obj):
            flattened[prefix] = ", ".join(_format_value(item) for item in obj)
        else:
            for i, item in enumerate(obj):
                flattened.update(flatten_json(item, f"{prefix}[{i}]"))
    else:
        flattened[prefix] = obj

    return flattened


def _format_value(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer, np.bool_)):
        return str(value.item())
    if value is None:
        return "none"
    return str(value)


def metadata_header(metadata: Mapping[str, Any]) -> str:
    """'# key = value' lines for the flattened metadata, version first."""
    lines = [f"# lorenz5_version = {__version__}"]
    for key, value in flatten_json(metadata).items():
        lines.append(f"# {key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _records(frame: pd.DataFrame):
    records = frame.to_dict(orient="records")
    for record in records:
        for key, value in record.items():
            if isinstance(value, float) and math.isnan(value):
                record[key] = None
    return records


def render_table(
    frame: pd.DataFrame,
    fmt: str = "csv",
    metadata: Optional[Mapping[str, Any]] = None,
    extra: Optional[Dict[str, pd.DataFrame]] = None,
    failure: Optional[str] = None,
) -> str:
    """Render a result table with its metadata.

    CSV: '#' metadata header, the main table, then each extra block as
    '# [name]' followed by its own table. JSON: one object with
    ``metadata``, ``rows`` and one key per extra block.
    A failure reason adds a final '# status = FAILED: ...' line (CSV) or
    ``status`` entry (JSON).
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown format '{fmt}'. Available formats: {list(FORMATS)}")
    metadata = dict(metadata or {})
    extra = extra or {}

    if fmt == "json":
        document = {"lorenz5_version": __version__, "metadata": metadata, "rows": _records(frame)}
        for name, block in extra.items():
            document[name] = _records(block)
        document["status"] = f"FAILED: {failure}" if failure else "ok"
        return json.dumps(document, indent=2, default=_json_default) + "\n"

    parts = [metadata_header(metadata), frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")]
    for name, block in extra.items():
        parts.append(f"# [{name}]\n")
        parts.append(block.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    if failure:
        parts.append(f"# status = FAILED: {failure}\n")
    return "".join(parts)


def write_table(
    frame: pd.DataFrame,
    out: Union[str, Path],
    fmt: str = "csv",
    metadata: Optional[Mapping[str, Any]] = None,
    extra: Optional[Dict[str, pd.DataFrame]] = None,
    failure: Optional[str] = None,
) -> str:
    """Render the table and save it to ``out``; returns the rendered text."""
    text = render_table(frame, fmt, metadata, extra, failure)
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return text
