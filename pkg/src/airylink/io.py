"""Deterministic CSV and metadata output.

Everything here is bit-reproducible: no timestamps, no machine-specific
fields, floats rendered with a fixed %.12g format, and files written with
'\n' line endings regardless of platform. Re-running a scenario must
produce byte-identical files; that property is part of the test suite.

The metadata sidecars reuse the config file syntax ([section] followed by
key = value lines) so they stay greppable and diffable alongside the
scenario files.
"""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path

import numpy as np

from .beams import Codebook
from .channels import ChannelMatrix
from .experiments import FieldCut, SweepResult
from .geometry import ScenarioConfig
from .optimizer import SearchOutcome
from .precoding import MetricsRecord
from .propagation import IntensityMap

__all__ = [
    "fmt",
    "scenario_hash",
    "write_sweep_csv",
    "write_channel_csv",
    "write_intensity_map",
    "write_trace_csv",
    "write_codebook_csv",
    "write_field_cut_csv",
    "write_metadata",
]


def fmt(x) -> str:
    """Canonical text form of one value (12 significant digits for floats)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return str(x)


def scenario_hash(scenario: ScenarioConfig) -> str:
    """Stable 12-hex-digit digest of everything that defines a scenario.

    Uses full-precision float repr so any parameter change, however small,
    changes the hash; independent of process, platform, and dict order.
    """
    parts = [
        f"carrier={scenario.carrier.frequency_hz!r}",
        f"array={scenario.array.n}:{scenario.array.spacing!r}",
        f"grid={scenario.grid.nx}:{scenario.grid.window!r}:{scenario.grid.apod_width!r}",
        f"noise={scenario.noise_power!r}",
        f"power={scenario.tx_power!r}",
        f"epsilon={scenario.rzf_epsilon!r}",
    ]
    for u in scenario.users:
        parts.append(f"user={u.x!r}:{u.z!r}:{u.label}")
    if scenario.obstacle is not None:
        o = scenario.obstacle
        parts.append(f"obstacle={o.depth!r}:{o.edge_x!r}:{o.blocked_side}")
    digest = hashlib.sha256("\n".join(parts).encode()).hexdigest()
    return digest[:12]


def _open_csv(path):
    f = Path(path).open("w", newline="")
    return f, csv.writer(f, lineterminator="\n")


def _metrics_row(tag: str, value: float, rec: MetricsRecord) -> list:
    k = rec.coupling_db.shape[0]
    sigma_max, sigma_min = rec.singular_values[0], rec.singular_values[-1]
    row = [
        tag,
        fmt(value),
        fmt(rec.condition_number),
        fmt(sigma_max),
        fmt(sigma_min),
        fmt(rec.alpha_power),
        fmt(rec.common_sinr_db),
        fmt(rec.sum_rate),
    ]
    row.extend(fmt(float(rec.coupling_db[i, j])) for i in range(k) for j in range(k))
    return row


def _metrics_header(sweep_variable: str, k: int) -> list:
    head = [
        "scenario",
        sweep_variable,
        "kappa",
        "sigma_max",
        "sigma_min",
        "alpha_power",
        "sinr_db",
        "sum_rate",
    ]
    head.extend(f"coupling_db_{i + 1}{j + 1}" for i in range(k) for j in range(k))
    return head


def write_sweep_csv(out_dir, stem: str, sweep: SweepResult,
                    scenario: ScenarioConfig) -> list:
    """One CSV per strategy: <stem>_<strategy>.csv, rows in sweep order.

    Column order: scenario hash, sweep value, kappa, sigma_max, sigma_min,
    alpha_power, sinr_db, sum_rate, then the K x K coupling powers in dB,
    row-major.
    """
    tag = scenario_hash(scenario)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k = next(iter(sweep.points[0][1].values())).coupling_db.shape[0]
    written = []
    for strategy in sweep.strategies:
        path = out_dir / f"{stem}_{strategy}.csv"
        f, w = _open_csv(path)
        with f:
            w.writerow(_metrics_header(sweep.sweep_variable, k))
            for value, recs in sweep.points:
                w.writerow(_metrics_row(tag, value, recs[strategy]))
        written.append(path)
    return written


def write_channel_csv(path, matrix: ChannelMatrix, scenario: ScenarioConfig) -> None:
    """Channel matrix with interleaved re/im columns plus a .meta sidecar."""
    path = Path(path)
    rows, cols = matrix.entries.shape
    f, w = _open_csv(path)
    with f:
        head = []
        for j in range(cols):
            head.extend((f"h_{j + 1}_re", f"h_{j + 1}_im"))
        w.writerow(head)
        for i in range(rows):
            row = []
            for j in range(cols):
                row.extend((fmt(float(matrix.entries[i, j].real)),
                            fmt(float(matrix.entries[i, j].imag))))
            w.writerow(row)
    write_metadata(
        path.with_suffix(path.suffix + ".meta"),
        {"channel": {
            "model": matrix.model,
            "kind": matrix.kind,
            "rows": rows,
            "cols": cols,
            "scenario": scenario_hash(scenario),
        }},
    )


def write_intensity_map(path, imap: IntensityMap, scenario: ScenarioConfig) -> None:
    """Plain dB matrix (rows = depth, columns = x) plus a .meta sidecar."""
    path = Path(path)
    f, w = _open_csv(path)
    with f:
        for row in imap.db:
            w.writerow(fmt(float(v)) for v in row)
    grid = scenario.grid
    meta = {
        "grid": {
            "nx": grid.nx,
            "window_m": grid.window,
            "apod_width_m": grid.apod_width,
        },
        "map": {
            "scenario": scenario_hash(scenario),
            "peak": imap.peak,
            "floor_db": imap.floor_db,
            "rows": len(imap.depths),
        },
        "depths": {"z_m": list(imap.depths)},
    }
    write_metadata(path.with_suffix(path.suffix + ".meta"), meta)


def write_trace_csv(path, outcome: SearchOutcome) -> None:
    """Full search trace, one evaluated candidate per row."""
    f, w = _open_csv(path)
    with f:
        w.writerow(["bending", "focal_m", "dtheta_deg", "h11_power", "feasible",
                    "rate", "stage"])
        for t in outcome.trace:
            w.writerow([
                fmt(t.bending),
                fmt(t.focal),
                fmt(math.degrees(t.dtheta)),
                fmt(t.h11_power),
                fmt(t.feasible),
                fmt(t.rate),
                t.stage,
            ])


def write_codebook_csv(path, book: Codebook) -> None:
    """Per-element phases in radians, one column per beam."""
    f, w = _open_csv(path)
    with f:
        w.writerow([f"beam_{j + 1}_phase_rad" for j in range(len(book.beams))])
        phases = np.column_stack([b.phases for b in book.beams])
        for row in phases:
            w.writerow(fmt(float(v)) for v in row)


def write_field_cut_csv(path, cut: FieldCut) -> None:
    """Transverse dB profiles of the two compared beams at the cut depth."""
    f, w = _open_csv(path)
    with f:
        w.writerow(["x_m", "reference_db", "tuned_db"])
        for x, a, b in zip(cut.xs, cut.db_reference, cut.db_tuned):
            w.writerow([fmt(float(x)), fmt(float(a)), fmt(float(b))])


def write_metadata(path, sections: dict) -> None:
    """Structured-text sidecar in the config syntax.

    `sections` maps section name -> {key: value}; a list value becomes one
    repeated `key = element` line per element (the users-section idiom).
    """
    lines = []
    for section, body in sections.items():
        lines.append(f"[{section}]")
        for key, value in body.items():
            if isinstance(value, (list, tuple)):
                lines.extend(f"{key} = {fmt(v)}" for v in value)
            else:
                lines.append(f"{key} = {fmt(value)}")
        lines.append("")
    Path(path).write_text("\n".join(lines), newline="\n")
