"""Config loading and result-table writers."""

import json
import logging
import os

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def load_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_text(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("Wrote %s", path)


def _plain(value):
    # numpy scalars -> python scalars so repr and json agree
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        return value.item()
    return value


def table_frame(columns, rows):
    """DataFrame of ``rows`` restricted to ``columns``; numeric cells must be finite."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    numeric = frame.select_dtypes("number").to_numpy(dtype=float)
    if not np.isfinite(numeric).all():
        raise ValueError("Table values must be finite.")
    return frame


def rows_to_csv(columns, rows):
    # floats are written with their shortest round-trip repr
    return table_frame(columns, rows).to_csv(index=False, lineterminator="\n")


def rows_to_json(columns, rows):
    records = table_frame(columns, rows).to_dict(orient="records")
    return json.dumps({"columns": list(columns), "rows": records}, indent=2, default=_plain) + "\n"


def write_table(path, columns, rows, fmt="csv"):
    """Write ``rows`` (mappings keyed by ``columns``) as CSV or JSON."""
    if fmt == "csv":
        text = rows_to_csv(columns, rows)
    elif fmt == "json":
        text = rows_to_json(columns, rows)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}.")
    save_text(path, text)
    return path


def write_metadata(path, metadata):
    """Sidecar ``<path>.meta.json`` describing how a table was produced."""
    meta_path = f"{path}.meta.json"
    save_text(meta_path, json.dumps(metadata, indent=2, sort_keys=True, default=_plain) + "\n")
    return meta_path


def dump_record(record):
    return json.dumps({k: _plain(v) for k, v in record.items()}, indent=2)
