"""Serialization helpers: complex-number JSON encoding, RFC-4180 CSV, config hashing.

Complex values travel as "re+imj" strings (the format Python's complex()
constructor parses back), so JSON artifacts stay plain text.
"""

import csv
import hashlib
import json

import numpy as np


def encode_complex(z):
    """Encode a complex scalar as an "re+imj" string."""
    z = complex(z)
    return f"{z.real}{'+' if z.imag >= 0 else '-'}{abs(z.imag)}j"


def decode_complex(s):
    return complex(s)


def matrix_to_json(m):
    """Row-major nested list of "re+imj" strings."""
    m = np.asarray(m)
    return {
        "shape": list(m.shape),
        "entries": [encode_complex(z) for z in m.reshape(-1)],
    }


def matrix_from_json(obj):
    data = np.array([decode_complex(s) for s in obj["entries"]], dtype=complex)
    return data.reshape(obj["shape"])


def jsonable(x):
    """Recursively convert numpy scalars/arrays and complex values."""
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (complex, np.complexfloating)):
        return encode_complex(x)
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    return x


def write_json(path, obj):
    with open(path, "w", newline="") as f:
        json.dump(jsonable(obj), f, indent=2, sort_keys=False)
        f.write("\n")


def write_csv(path, rows, fieldnames=None):
    """RFC-4180 CSV (CRLF line endings, quoting as needed)."""
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames, quoting=csv.QUOTE_MINIMAL)
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k)) for k in fieldnames})


def _cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return encode_complex(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if v is None:
        return "none"
    return v


def config_hash(config):
    """sha256 of the canonical JSON form; echoed in summaries for reproducibility."""
    canon = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
