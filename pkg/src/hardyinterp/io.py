"""JSON serialization of points and sequences; deterministic CSV rows."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from importlib import metadata

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Point
from .sequences import PointSequence


def version_string():
    try:
        return "v" + metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "v0.0.0+unknown"


def point_to_json(a):
    """A point as a list of ``[re, im]`` pairs."""
    return [[float(z.real), float(z.imag)] for z in a.coords]


def point_from_json(obj, gap=None):
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgumentError("a point must be a list of [re, im] pairs")
    z = arr[:, 0] + 1j * arr[:, 1]
    if gap is None or (gap == 1.0 and not np.any(z)):
        return Point(z)     # the origin has no direction
    return Point.from_gap(z, gap)


def sequence_to_json(S):
    """``{"n", "points", "gaps", "metadata"}``; gaps keep points near the sphere exact."""
    return {"n": S.n, "points": [point_to_json(a) for a in S],
            "gaps": [float(a.gap) for a in S], "metadata": S.metadata}


def sequence_from_json(obj):
    """Inverse of :func:`sequence_to_json`; a bare list of points is also accepted.

    With ``gaps`` present, each listed point supplies a direction and the gap
    sets its distance to the sphere.
    """
    if isinstance(obj, list):
        obj = {"points": obj}
    if not isinstance(obj, dict) or "points" not in obj:
        raise InvalidArgumentError("sequence JSON needs a 'points' list")
    gaps = obj.get("gaps")
    pts = obj["points"]
    if gaps is not None and len(gaps) != len(pts):
        raise InvalidArgumentError("'gaps' and 'points' differ in length")
    out = [point_from_json(p, None if gaps is None else g)
           for p, g in zip(pts, gaps if gaps is not None else [None] * len(pts))]
    if "n" in obj and out and out[0].n != obj["n"]:
        raise InvalidArgumentError("declared n does not match the points")
    meta = dict(obj.get("metadata") or {"generator": "explicit", "N": len(out)})
    return PointSequence(out, meta)


def load_sequence(path):
    with open(path) as fh:
        return sequence_from_json(json.load(fh))


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def fmt(v):
    """Shortest round-trip text for CSV cells."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, dict):
        return canonical_json(v)
    return str(v)


def csv_text(columns, rows, version, chash):
    """CSV with ``version`` and ``config_hash`` appended to every row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns) + ["version", "config_hash"])
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns] + [version, chash])
    return buf.getvalue()


def write_csv(path, columns, rows, version, chash, append=False):
    text = csv_text(columns, rows, version, chash)
    if append:
        try:
            with open(path) as fh:
                has_header = bool(fh.readline())
        except FileNotFoundError:
            has_header = False
        if has_header:
            text = text.split("\n", 1)[1]
    with open(path, "a" if append else "w", newline="") as fh:
        fh.write(text)
