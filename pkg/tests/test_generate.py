import json

import numpy as np
import pandas as pd
import pytest

from lorenz5 import __version__
from lorenz5.csv_generator.generate import flatten_json, metadata_header, render_table, write_table


def frame():
    return pd.DataFrame({"theta0": [0.0, 0.1], "numeric": [-1.2520865, 1 / 3], "flag": [True, False]})


def test_flatten_nested_metadata():
    flat = flatten_json({"params": {"M": 1.0, "grid": None}, "quad": {"T": 50}, "eps_values": [0.1, 0.01],
                         "empty": []})
    assert flat == {"params.M": 1.0, "params.grid": None, "quad.T": 50, "eps_values": "0.1, 0.01", "empty": ""}


def test_flatten_list_of_mappings():
    assert flatten_json({"rows": [{"a": 1}, {"a": 2}]}) == {"rows[0].a": 1, "rows[1].a": 2}


def test_metadata_header_lists_the_version_first():
    header = metadata_header({"params": {"eps": np.float64(0.1), "seed": np.int64(7), "T": None}})
    lines = header.splitlines()
    assert lines[0] == f"# lorenz5_version = {__version__}"
    assert "# params.eps = 0.1" in lines
    assert "# params.seed = 7" in lines
    assert "# params.T = none" in lines


def test_csv_keeps_seventeen_digits():
    text = render_table(frame(), "csv", {"command": "melnikov"})
    data = [line for line in text.splitlines() if not line.startswith("#")]
    assert data[0] == "theta0,numeric,flag"
    assert float(data[2].split(",")[1]) == 1 / 3


def test_csv_extra_blocks_and_failure_marker():
    zeros = pd.DataFrame({"theta0_star": [1.5707963267948966], "derivative": [1.25]})
    text = render_table(frame(), "csv", {}, extra={"zeros": zeros}, failure="quadrature")
    lines = text.splitlines()
    block = lines.index("# [zeros]")
    assert lines[block + 1] == "theta0_star,derivative"
    assert lines[-1] == "# status = FAILED: quadrature"


def test_json_document():
    document = json.loads(render_table(frame().assign(x=[np.nan, 1.0]), "json", {"seed": 1}))
    assert document["lorenz5_version"] == __version__
    assert document["metadata"] == {"seed": 1}
    assert document["rows"][0]["x"] is None
    assert document["rows"][1]["numeric"] == 1 / 3
    assert document["status"] == "ok"
    failed = json.loads(render_table(frame(), "json", failure="boom", extra={"zeros": frame()}))
    assert failed["status"] == "FAILED: boom"
    assert len(failed["zeros"]) == 2


def test_unknown_format():
    with pytest.raises(ValueError):
        render_table(frame(), "xlsx")


def test_write_table_is_reproducible(tmp_path):
    out = tmp_path / "nested" / "profile.csv"
    text = write_table(frame(), out, metadata={"seed": 1})
    assert out.read_text(encoding="utf-8") == text
    assert write_table(frame(), out, metadata={"seed": 1}) == text
