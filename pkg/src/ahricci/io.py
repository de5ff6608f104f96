"""CSV persistence for metrics, trajectories and spectral reports.

Every file starts with one ``#`` metadata line of space-separated
``key=value`` pairs, followed by a comma-separated header and records.
Floats are written with ``repr`` so they round-trip exactly, which keeps
outputs byte-identical across runs and lets verdicts be recomputed from
saved files.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .geometry import RadialGrid, RotSymMetric

PathLike = Union[str, Path]

SNAPSHOT_COLUMNS = ("r", "phi", "psi")
TRAJECTORY_COLUMNS = ("t", "norm_c0_mu", "norm_c2_mu", "min_secT", "einstein_residual", "w_inf", "status")
SECTOR_COLUMNS = ("re_lambda", "im_lambda", "res_norm", "bound", "pass")
SPECTRUM_COLUMNS = ("re", "im")
SUMMARY_COLUMNS = ("experiment", "verdict", "key_metric")


class FormatError(ValueError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_metadata(meta: Dict[str, object]) -> str:
    parts = []
    for k, v in meta.items():
        s = _fmt(v)
        if any(c.isspace() for c in s) or "=" in s:
            raise FormatError(f"metadata value for {k!r} must not contain spaces or '='")
        parts.append(f"{k}={s}")
    return "# " + " ".join(parts)


def parse_metadata(line: str) -> Dict[str, str]:
    if not line.startswith("#"):
        raise FormatError("missing '#' metadata line")
    out = {}
    for tok in line[1:].split():
        if "=" not in tok:
            raise FormatError(f"bad metadata token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def render_csv(columns: Sequence[str], rows: Iterable[Dict[str, object]],
               meta: Dict[str, object]) -> str:
    """Text of a CSV file with metadata line, header and records (``\\n`` line ends)."""
    buf = _io.StringIO()
    buf.write(format_metadata(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Dict[str, object]],
              meta: Dict[str, object]) -> Path:
    path = Path(path)
    path.write_text(render_csv(columns, rows, meta), encoding="utf-8")
    return path


def read_csv(path: PathLike, columns: Sequence[str] = None) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    """``(metadata, records)``; checks the header against ``columns`` when given."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    meta = parse_metadata(lines[0])
    reader = csv.reader(lines[1:])
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{path}: missing header") from None
    if columns is not None and tuple(header) != tuple(columns):
        raise FormatError(f"{path}: header {header} does not match {list(columns)}")
    return meta, [dict(zip(header, rec)) for rec in reader]


# -- snapshots ---------------------------------------------------------------

def snapshot_meta(grid: RadialGrid) -> Dict[str, object]:
    return {"n": grid.n_dim, "r_max": grid.r_max, "nodes": grid.n_nodes}


def write_snapshot(path: PathLike, g: RotSymMetric) -> Path:
    rows = ({"r": r, "phi": p, "psi": s} for r, p, s in zip(g.grid.nodes, g.phi, g.psi))
    return write_csv(path, SNAPSHOT_COLUMNS, rows, snapshot_meta(g.grid))


def read_snapshot(path: PathLike) -> RotSymMetric:
    meta, rows = read_csv(path, SNAPSHOT_COLUMNS)
    try:
        n, r_max, nodes = int(meta["n"]), float(meta["r_max"]), int(meta["nodes"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: snapshot header needs n, r_max and nodes") from exc
    if len(rows) != nodes:
        raise FormatError(f"{path}: header says {nodes} nodes, found {len(rows)}")
    grid = RadialGrid(n, r_max, nodes)
    r = np.array([float(x["r"]) for x in rows])
    if np.max(np.abs(r - grid.nodes)) > 1e-9 * max(1.0, r_max):
        raise FormatError(f"{path}: radii are not the uniform grid of the header")
    return RotSymMetric(grid, np.array([float(x["phi"]) for x in rows]),
                        np.array([float(x["psi"]) for x in rows]))


# -- trajectories, spectra, summaries -----------------------------------------

def write_trajectory(path: PathLike, traj, meta: Dict[str, object]) -> Path:
    return write_csv(path, TRAJECTORY_COLUMNS, traj.rows(), meta)


def read_trajectory(path: PathLike) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    return read_csv(path, TRAJECTORY_COLUMNS)


def write_sector(path: PathLike, report, meta: Dict[str, object]) -> Path:
    return write_csv(path, SECTOR_COLUMNS, report.rows(), meta)


def write_spectrum(path: PathLike, eigenvalues: np.ndarray, meta: Dict[str, object]) -> Path:
    ev = np.asarray(eigenvalues, dtype=complex)
    return write_csv(path, SPECTRUM_COLUMNS, ({"re": z.real, "im": z.imag} for z in ev), meta)


def read_spectrum(path: PathLike) -> Tuple[Dict[str, str], np.ndarray]:
    meta, rows = read_csv(path, SPECTRUM_COLUMNS)
    return meta, np.array([complex(float(r["re"]), float(r["im"])) for r in rows])


def write_summary(path: PathLike, records: Iterable[Dict[str, object]], meta: Dict[str, object]) -> Path:
    return write_csv(path, SUMMARY_COLUMNS, records, meta)


def sha256_file(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
