"""CSV input parsing and the CSV / SVG / text outputs of a run."""
from __future__ import annotations

import csv
import datetime as _dt
import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from dyncause.dynamic import TvpcvSeries, WindowRecord
from dyncause.exceptions import MissingValue, NonMonotonicDates, ParseError
from dyncause.transform import Panel

PRECISION = 6


def _parse_date(text: str, line: int):
    s = text.strip()
    if not s:
        raise MissingValue("empty date label", line, 1)
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return _dt.date.fromisoformat(s)
    except ValueError:
        pass
    try:
        return _dt.datetime.fromisoformat(s)
    except ValueError:
        raise ParseError(f"date {s!r} is neither ISO-8601 nor an integer", line, 1) from None


def parse_csv(path) -> Panel:
    """Read a UTF-8 comma-separated file: header row, dates in column 1, numeric columns after."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("file is empty", 1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError("header needs a date column and at least one series", 1)
    names = header[1:]
    dates, values = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line)
        dates.append(_parse_date(row[0], line))
        parsed = []
        for col, cell in enumerate(row[1:], start=2):
            cell = cell.strip()
            if not cell:
                raise MissingValue("missing value", line, col)
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"cannot parse {cell!r} as a number", line, col) from None
            if not math.isfinite(v):
                raise MissingValue(f"non-finite value {cell!r}", line, col)
            parsed.append(v)
        values.append(parsed)
    if len({type(d) for d in dates}) > 1:
        raise ParseError("date column mixes integer and calendar labels")
    for i in range(1, len(dates)):
        if not dates[i - 1] < dates[i]:
            raise NonMonotonicDates(f"date {dates[i]} does not follow {dates[i - 1]}", i + 2, 1)
    if len(dates) < 2:
        raise ParseError("need at least two observations")
    return Panel(tuple(dates), tuple(names), np.array(values, dtype=float))


def level_tag(alpha: float) -> str:
    """Column suffix for a significance level: 0.05 -> '05', 0.10 -> '10'."""
    return f"{alpha * 100:g}".zfill(2)


def fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.{PRECISION}f}"


def printed_ratio(wald: float, cv: float) -> str:
    """TVpCV as printed: computed from the printed Wald and critical value so rows re-derive exactly."""
    w, c = float(fmt(wald) or "nan"), float(fmt(cv) or "nan")
    if not (c > 0) or math.isnan(w):
        return ""
    return fmt(w / c)


def _date_str(d) -> str:
    return d.isoformat() if hasattr(d, "isoformat") else str(d)


def results_header(levels: Sequence[float]) -> list[str]:
    tags = [level_tag(a) for a in levels]
    return (
        ["ssp_index", "start_date", "end_date", "p_star", "wald"]
        + [f"cv_{t}" for t in tags]
        + [f"tvpcv_{t}" for t in tags]
        + ["p_asymptotic", "status"]
    )


def result_row(rec: WindowRecord, levels: Sequence[float]) -> list[str]:
    return (
        [str(rec.ssp_index), _date_str(rec.start_date), _date_str(rec.end_date),
         "" if rec.p_star is None else str(rec.p_star), fmt(rec.wald)]
        + [fmt(rec.cv.get(a)) for a in levels]
        + [printed_ratio(rec.wald, rec.cv[a]) if a in rec.cv else "" for a in levels]
        + [fmt(rec.p_asymptotic), rec.status]
    )


def write_results_csv(series: TvpcvSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(results_header(series.levels))
        for rec in series.records:
            w.writerow(result_row(rec, series.levels))


def write_diagnostics_csv(rows: Iterable[tuple[str, object]], path) -> None:
    """``rows`` pairs a variable label with a DiagnosticsReport or an error message."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variables", "normality_pvalue", "arch_pvalue", "autocorrelation_pvalue", "advisory"])
        for label, rep in rows:
            if isinstance(rep, str):
                w.writerow([label, "", "", "", rep])
            else:
                w.writerow([label, fmt(rep.normality_pvalue), fmt(rep.arch_pvalue),
                            fmt(rep.autocorrelation_pvalue), rep.advisory])


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def render_svg(series: TvpcvSeries, title: str = "TVpCV per subsample", width: int = 800, height: int = 420) -> str:
    """Line chart of TVpCV per window: one polyline per level plus a reference line at 1."""
    left, right, top, bottom = 60, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    k = len(series.records)
    ratios = {a: series.ratios(a) for a in series.levels}
    finite = np.concatenate([r[np.isfinite(r)] for r in ratios.values()] + [np.array([1.0])])
    ymax = max(1.2, float(finite.max()) * 1.1)

    def sx(i: int) -> float:
        return left + (pw * i / (k - 1) if k > 1 else pw / 2)

    def sy(v: float) -> float:
        return top + ph * (1 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        f'<path class="axes" d="M{left},{top} V{top + ph} H{left + pw}" stroke="black" fill="none"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = ymax * frac
        out.append(
            f'<text x="{left - 6}" y="{sy(v) + 4:.1f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{v:.2f}</text>'
        )
    step = max(1, k // 10)
    for i in range(0, k, step):
        out.append(
            f'<text x="{sx(i):.1f}" y="{top + ph + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{series.records[i].ssp_index}</text>'
        )
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">subsample</text>'
    )
    out.append(
        f'<line class="reference" x1="{left}" y1="{sy(1.0):.2f}" x2="{left + pw}" y2="{sy(1.0):.2f}" '
        f'stroke="gray" stroke-dasharray="6,4"/>'
    )
    for j, alpha in enumerate(series.levels):
        pts = " ".join(
            f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(ratios[alpha]) if np.isfinite(v)
        )
        color = _COLORS[j % len(_COLORS)]
        out.append(
            f'<polyline class="tvpcv" data-alpha="{alpha:g}" points="{pts}" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{left + pw - 4}" y="{top + 14 + 14 * j}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12" fill="{color}">{alpha * 100:g}% level</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(series: TvpcvSeries, path, title: str = "TVpCV per subsample") -> None:
    Path(path).write_text(render_svg(series, title), encoding="utf-8")


def summary_text(series: TvpcvSeries, header_lines: Sequence[str] = ()) -> str:
    lines = list(header_lines)
    lines.append(f"scheme: {series.scheme}; minimum window S = {series.S}; windows: {len(series)}; "
                 f"analysed observations: {series.nobs}")
    lines.append("decision rule: reject non-causality when Wald > bootstrap critical value (TVpCV > 1)")
    lines.append("")
    for rec in series.records:
        span = f"SSP {rec.ssp_index:3d} [{_date_str(rec.start_date)} .. {_date_str(rec.end_date)}]"
        if not rec.ok and not rec.cv:
            lines.append(f"{span}: skipped ({rec.status})")
            continue
        parts = []
        for a in series.levels:
            verdict = "reject" if rec.rejects(a) else "accept"
            parts.append(f"{a * 100:g}%: {verdict}")
        extra = "" if rec.ok else f" ({rec.status})"
        lines.append(f"{span}: Wald={rec.wald:.3f} p*={rec.p_star} " + ", ".join(parts) + extra)
    for a in series.levels:
        n_rej = sum(rec.rejects(a) for rec in series.records)
        lines.append(f"rejections at {a * 100:g}%: {n_rej} of {len(series)}")
    return "\n".join(lines) + "\n"
