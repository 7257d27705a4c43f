"""Serialization of results: JSON envelopes and CSV tables.

Complex numbers become [re, im] pairs in JSON and paired re_/im_ columns
in CSV. Output is deterministic: keys are sorted and floats are written
with repr precision.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, is_dataclass

import numpy as np

TOOL_VERSION = "0.1.0"
FORMAT_VERSION = "1"


def to_jsonable(obj):
    """Recursively convert numpy/complex/dataclass values to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class ResultEnvelope:
    config: dict
    results: dict
    diagnostics: list = field(default_factory=list)
    versions: dict = field(default_factory=lambda: {"tool": TOOL_VERSION,
                                                    "format": FORMAT_VERSION})

    def to_dict(self):
        return to_jsonable({"config": self.config, "results": self.results,
                            "diagnostics": self.diagnostics, "versions": self.versions})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["config"], d["results"], d["diagnostics"], d["versions"])


def matrix_json(M):
    """Row-major nested lists of [re, im]."""
    return to_jsonable(np.asarray(M, dtype=complex))


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(columns, rows):
    """RFC-4180 CSV text; complex entries expand to re_/im_ column pairs."""
    rows = [list(r) for r in rows]
    cplx = [any(isinstance(r[j], (complex, np.complexfloating)) for r in rows)
            for j in range(len(columns))]
    header = []
    for name, c in zip(columns, cplx):
        header += [f"re_{name}", f"im_{name}"] if c else [name]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        out = []
        for v, c in zip(r, cplx):
            if c:
                z = complex(v) if v is not None else complex("nan")
                out += [repr(z.real), repr(z.imag)]
            elif isinstance(v, (float, np.floating)):
                out.append(repr(float(v)))
            elif isinstance(v, (np.integer,)):
                out.append(str(int(v)))
            else:
                out.append("" if v is None else str(v))
        w.writerow(out)
    return buf.getvalue()


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))
