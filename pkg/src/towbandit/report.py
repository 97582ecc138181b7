"""CSV and gnuplot-script output.

Numbers are written with 12 significant digits (``format(x, '.12g')``), rows
end in ``\\n``, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import os
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .harness import AggregateCurve, ComparisonTable, RunTrace

CURVE_HEADER = ("play", "mean_cumulative_reward", "mean_n_b")
TRACE_HEADER = ("t", "machine", "reward", "cum_reward", "n_a", "n_b", "x_a")
VOLTAGE_HEADER = ("t", "machine", "reward", "delta_v", "voltage")
SWEEP_HEADER = ("value", "mean_cumulative_reward", "mean_n_b")


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _write(destination: Union[str, os.PathLike], header: Sequence[str], rows) -> Path:
    path = Path(destination)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def curve_rows(curve: AggregateCurve):
    for i, (c, nb) in enumerate(zip(curve.mean_cumulative_reward, curve.mean_n_b), start=1):
        yield (i, fmt(c), fmt(nb))


def emit_csv(data: Union[AggregateCurve, RunTrace, ComparisonTable],
             destination: Union[str, os.PathLike]) -> Path:
    """Write a curve, a run trace or a comparison table as CSV."""
    if isinstance(data, AggregateCurve):
        return _write(destination, CURVE_HEADER, curve_rows(data))
    if isinstance(data, RunTrace):
        rows = ((r.t, r.machine, fmt(r.reward), fmt(r.cum_reward), r.n_a, r.n_b, fmt(r.x_a))
                for r in data.rows)
        return _write(destination, TRACE_HEADER, rows)
    if isinstance(data, ComparisonTable):
        columns = [c.mean_cumulative_reward for c in data.curves]
        rows = ((i + 1, *(fmt(col[i]) for col in columns)) for i in range(data.plays))
        return _write(destination, ("play", *data.labels), rows)
    raise TypeError(f"cannot write {type(data).__name__} as CSV")


def emit_voltage_csv(trace: RunTrace, destination: Union[str, os.PathLike]) -> Path:
    rows = ((v.t, v.machine, fmt(v.reward), fmt(v.delta_v), fmt(v.voltage)) for v in trace.voltages)
    return _write(destination, VOLTAGE_HEADER, rows)


def emit_sweep_csv(results: Sequence[tuple[float, AggregateCurve]],
                   destination: Union[str, os.PathLike]) -> Path:
    """One row per swept value with the final-play means."""
    rows = ((fmt(v), fmt(c.mean_cumulative_reward[-1]), fmt(c.mean_n_b[-1])) for v, c in results)
    return _write(destination, SWEEP_HEADER, rows)


def read_curve_csv(source: Union[str, os.PathLike], label: str = "") -> AggregateCurve:
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CURVE_HEADER:
            raise ValueError(f"{source}: unexpected header {header}")
        rows = [(float(r[1]), float(r[2])) for r in reader]
    cum = np.array([r[0] for r in rows], dtype=float)
    nb = np.array([r[1] for r in rows], dtype=float)
    return AggregateCurve(cum, nb, samples=0, label=label)


def _quote(s: str) -> str:
    return "'" + str(s).replace("'", "''") + "'"


def emit_plot_script(csv_paths: Sequence[Union[str, os.PathLike]], destination: Union[str, os.PathLike],
                     titles: Sequence[str] | None = None, output: str | None = None) -> Path:
    """Write a gnuplot script drawing mean cumulative reward against plays, one line per CSV.

    Paths are written exactly as given, so pass paths relative to where the
    script will be run.
    """
    titles = list(titles) if titles is not None else [Path(p).stem for p in csv_paths]
    lines = [
        "# mean cumulative reward versus number of plays",
        "set datafile separator ','",
        "set key left top autotitle columnhead",
        "set xlabel 'number of plays'",
        "set ylabel 'sum of acquired rewards'",
    ]
    if output:
        lines += ["set terminal pngcairo size 800,600", f"set output {_quote(output)}"]
    series = [f"{_quote(str(p))} using 1:2 with lines title {_quote(t)}"
              for p, t in zip(csv_paths, titles)]
    if series:
        lines.append("plot " + ", \\\n     ".join(series))
    path = Path(destination)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
