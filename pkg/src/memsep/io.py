"""CSV export helpers.

All floating-point values are written with 17 significant digits so that
files round-trip bit-faithfully, and all metadata rides in '#' comment lines
above a single header row.  Given identical inputs the writers produce
byte-identical files.
"""

from __future__ import annotations

import numpy as np


def fmt(value):
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, columns, rows, comments=()):
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_density_csv(path, values, *, N, dim, membrane, time):
    """Density snapshot: rows (site, value) with identifying header."""
    values = np.asarray(values, dtype=float)
    write_csv(path, ["site", "value"],
              [(i, v) for i, v in enumerate(values)],
              comments=[f"N={N} d={dim} membrane={membrane} time={fmt(time)}"])


def write_spectrum_csv(path, eigenvalues, *, N, dim, membrane):
    """Spectrum snapshot: rows (n, eigenvalue) with identifying header."""
    write_csv(path, ["n", "eigenvalue"],
              [(n, mu) for n, mu in enumerate(np.asarray(eigenvalues, float))],
              comments=[f"N={N} d={dim} membrane={membrane}"])


def write_series_csv(path, series, *, N, dim, membrane):
    """Observable series: one row per sample time, one column per pairing
    (plus martingale columns when tracked)."""
    names = sorted(series.pairings.keys())
    columns = ["time"] + names
    if series.martingales is not None:
        columns += [f"martingale_{n}" for n in names]
    rows = []
    for i, t in enumerate(series.times):
        row = [t] + [series.pairings[n][i] for n in names]
        if series.martingales is not None:
            row += [series.martingales[n][i] for n in names]
        rows.append(row)
    write_csv(path, columns, rows,
              comments=[f"N={N} d={dim} membrane={membrane}"])
