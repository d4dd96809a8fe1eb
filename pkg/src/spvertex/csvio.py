"""CSV artifacts with fixed headers and 17-significant-digit floats."""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

HEADERS = {
    "samples": ["lambda_re", "lambda_im", "value_re", "value_im", "residual"],
    "zeros": ["zero_re", "zero_im", "on_centerline", "in_strip"],
    "verify": ["identity_id", "n", "L", "lambda_re", "lambda_im", "defect"],
    "thermo": ["n", "m", "region", "lambda", "kappa", "omega"],
    "compare": ["lambda", "kappa_L", "kappa_inf", "rel_err"],
}


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(kind: str, rows: Iterable[Sequence], path=None) -> str:
    """Render rows under the header for ``kind``; also write to ``path`` if given."""
    header = HEADERS[kind]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{kind} row has {len(row)} fields, expected {len(header)}")
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(kind: str, text: str) -> list:
    """Parse an artifact, checking the header; numeric fields come back as float."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != HEADERS[kind]:
        raise ValueError(f"unexpected header {header} for {kind}")
    out = []
    for row in reader:
        parsed = []
        for v in row:
            try:
                parsed.append(float(v))
            except ValueError:
                parsed.append(v)
        out.append(dict(zip(header, parsed)))
    return out
