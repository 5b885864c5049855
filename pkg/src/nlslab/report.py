"""Deterministic CSV reports, JSON run manifests, and binary trajectory
persistence.

CSV dialect: comma separated, '.' decimal point, mandatory header row,
'#'-prefixed comment lines.  The body carries no timestamps, so re-running
the same manifest reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import math
import struct

import numpy as np

from .bench import fit_loglog
from .solver import Trajectory
from .torus import SpectralField, TorusGeometry

__all__ = [
    "format_value",
    "write_report",
    "read_report",
    "refit_report",
    "write_manifest",
    "read_manifest",
    "write_trajectory",
    "read_trajectory",
    "TRAJECTORY_MAGIC",
]

TRAJECTORY_MAGIC = b"NLSLTRJ1"


def format_value(v):
    """Deterministic cell text: shortest round-trip repr for floats."""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_report(report, path):
    """Write an ExperimentReport as CSV with a '#' comment footer."""
    lines = [",".join(report.columns)]
    for row in report.rows:
        lines.append(",".join(format_value(v) for v in row))
    lines.append("# name = %s" % report.name)
    lines.append("# params = %s" % json.dumps(report.params, sort_keys=True))
    lines.append("# seed = %d" % report.seed)
    lines.append("# trials = %d" % report.trials)
    lines.append("# slope = %s" % repr(report.slope))
    lines.append("# intercept = %s" % repr(report.intercept))
    lines.append("# residual = %s" % repr(report.residual))
    lines.append("# evidence_not_proof = %s" % report.evidence_not_proof)
    for key in sorted(report.footer):
        lines.append("# %s = %s" % (key, format_value(report.footer[key])))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError("cannot write report to %s: %s" % (path, exc)) from exc


def read_report(path):
    """Parse a report CSV back into (columns, rows, footer dict of strings)."""
    columns, rows, footer = None, [], {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    if "=" in line:
                        key, _, val = line[1:].partition("=")
                        footer[key.strip()] = val.strip()
                    continue
                if columns is None:
                    columns = line.split(",")
                else:
                    rows.append(tuple(line.split(",")))
    except OSError as exc:
        raise OSError("cannot read report from %s: %s" % (path, exc)) from exc
    if columns is None:
        raise ValueError("no header row in %s" % path)
    return columns, rows, footer


def refit_report(path):
    """Recompute the fitted slope from a report's rows.

    The fit regresses log(last numeric column) on log(x) where x is the
    first column, mapped through sqrt(1 + N^2) when that column is a dyadic
    block index N (footer key 'fit = block') and used directly otherwise.
    """
    columns, rows, footer = read_report(path)
    fit = footer.get("fit", "direct")
    xs, ys = [], []
    for row in rows:
        x = float(row[0])
        y = float(row[-1])
        if fit == "block":
            x = math.sqrt(1.0 + x ** 2)
        xs.append(x)
        ys.append(y)
    slope, intercept, resid = fit_loglog(xs, ys)
    return slope, intercept, resid


def write_manifest(path, argv, out_path):
    """JSON manifest recording exactly how a report was produced."""
    doc = {"format": 1, "argv": list(argv), "out": str(out_path)}
    try:
        with open(path, "w", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError("cannot write manifest to %s: %s" % (path, exc)) from exc


def read_manifest(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OSError("cannot read manifest from %s: %s" % (path, exc)) from exc
    if doc.get("format") != 1 or "argv" not in doc:
        raise ValueError("unrecognized manifest format in %s" % path)
    return doc


# ---------------------------------------------------------------------------
# binary trajectory dump: fixed header, then one little-endian complex64
# coefficient block per stored time


def write_trajectory(traj, path):
    geom = traj.geometry
    try:
        with open(path, "wb") as fh:
            fh.write(TRAJECTORY_MAGIC)
            fh.write(struct.pack("<II", 1, geom.d))
            fh.write(np.asarray(geom.thetas, dtype="<f8").tobytes())
            fh.write(np.asarray(geom.grid, dtype="<u4").tobytes())
            fh.write(struct.pack("<d", traj.coupling))
            fh.write(struct.pack("<Q", len(traj.times)))
            fh.write(np.asarray(traj.times, dtype="<f8").tobytes())
            for st in traj.states:
                fh.write(np.ascontiguousarray(st.coeffs, dtype="<c8").tobytes())
    except OSError as exc:
        raise OSError("cannot write trajectory to %s: %s" % (path, exc)) from exc


def read_trajectory(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError("cannot read trajectory from %s: %s" % (path, exc)) from exc
    if data[:8] != TRAJECTORY_MAGIC:
        raise ValueError("bad magic in %s" % path)
    off = 8
    version, d = struct.unpack_from("<II", data, off)
    off += 8
    if version != 1:
        raise ValueError("unsupported trajectory format version %d" % version)
    thetas = np.frombuffer(data, dtype="<f8", count=d, offset=off)
    off += 8 * d
    grid = np.frombuffer(data, dtype="<u4", count=d, offset=off)
    off += 4 * d
    (coupling,) = struct.unpack_from("<d", data, off)
    off += 8
    (nt,) = struct.unpack_from("<Q", data, off)
    off += 8
    times = np.frombuffer(data, dtype="<f8", count=nt, offset=off).copy()
    off += 8 * nt
    geom = TorusGeometry(d, tuple(float(t) for t in thetas), tuple(int(g) for g in grid))
    block = geom.npoints
    states = []
    for _ in range(nt):
        c = np.frombuffer(data, dtype="<c8", count=block, offset=off)
        off += 8 * block
        states.append(SpectralField(geom, c.astype(np.complex128).reshape(geom.grid)))
    return Trajectory(geom, times, states, coupling)
