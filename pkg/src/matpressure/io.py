"""Family files and number formatting.

A family file is JSON::

    {"format-version": 1, "field": "real", "dimension": 2,
     "matrices": [[[1, 0], [0, 2]], [[3, 0], [0, 2]]]}

Complex entries are written as two-element ``[re, im]`` arrays.
"""

import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .matfam import MatrixFamily

FORMAT_VERSION = 1


def _entry(x, field):
    if isinstance(x, bool):
        raise InputError("matrix entries must be numbers")
    if isinstance(x, (int, float)):
        return complex(x) if field == "complex" else float(x)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        if field == "real" and x[1] != 0:
            raise InputError("complex entry in a real-field family")
        return complex(x[0], x[1]) if field == "complex" else float(x[0])
    raise InputError(f"bad matrix entry {x!r}")


def family_from_dict(doc):
    if not isinstance(doc, dict):
        raise InputError("family file must hold a JSON object")
    version = doc.get("format-version")
    if version != FORMAT_VERSION:
        raise InputError(f"unsupported format-version {version!r}; expected {FORMAT_VERSION}")
    field = doc.get("field", "real")
    if field not in ("real", "complex"):
        raise InputError(f"field must be 'real' or 'complex', got {field!r}")
    d = doc.get("dimension")
    mats = doc.get("matrices")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InputError(f"dimension must be a positive integer, got {d!r}")
    if not isinstance(mats, list) or not mats:
        raise InputError("matrices must be a non-empty list")
    out = []
    for i, M in enumerate(mats, 1):
        if not isinstance(M, list) or len(M) != d or any(
                not isinstance(r, list) or len(r) != d for r in M):
            raise InputError(f"matrix {i} is not {d} x {d}")
        out.append([[_entry(x, field) for x in row] for row in M])
    dtype = np.complex128 if field == "complex" else np.float64
    return MatrixFamily(np.array(out, dtype=dtype), field)


def load_family(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return family_from_dict(doc)


def family_to_dict(family):
    if family.field == "complex":
        mats = [[[[float(z.real), float(z.imag)] for z in row] for row in M]
                for M in family.matrices]
    else:
        mats = family.matrices.tolist()
    return {"format-version": FORMAT_VERSION, "field": family.field,
            "dimension": family.d, "matrices": mats}


def save_family(family, path):
    Path(path).write_text(json.dumps(family_to_dict(family)) + "\n")


def fmt_num(x):
    """17 significant digits; infinities as ``-inf`` / ``inf``."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def jsonable(obj):
    """Convert reports to JSON-ready structures; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt_num(x)
    return obj
