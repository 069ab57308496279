"""Serialization of analysis artifacts.

``dump_json_bytes`` is the single JSON writer for report payloads; the CLI
writes its file through it and the service streams the same bytes, which is
what keeps the two surfaces byte-identical for identical inputs. NaN is a
hard error here, never a silent token in the output.
"""

from __future__ import annotations

import csv
import io

import json

from .dataset import Dataset, summary
from .estimate import EstimationResult
from .inference import DelayProfile, SignificanceReport


def dump_json_bytes(payload: dict) -> bytes:
    text = json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")


def report_json_bytes(report: SignificanceReport) -> bytes:
    return dump_json_bytes(report.to_dict())


def sweep_csv_text(profile: DelayProfile) -> str:
    """Plot-ready table: one row per delay; gaps stay empty, never zero."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delay", "influence", "conditional", "base"])
    for point in profile.points:
        writer.writerow(
            [
                point.delay,
                "" if point.influence is None else repr(point.influence),
                "" if point.conditional is None else repr(point.conditional),
                repr(profile.base),
            ]
        )
    return buf.getvalue()


def _fmt_num(value: float | None, digits: int = 4) -> str:
    return "n/a" if value is None else f"{value:.{digits}g}"


def summary_markdown(
    ds: Dataset,
    report: SignificanceReport,
    profile: DelayProfile | None = None,
    estimation: EstimationResult | None = None,
) -> str:
    """Human-readable run digest written next to report.json."""
    lines: list[str] = []
    lines.append(f"# Analysis summary: {ds.name}")
    lines.append("")
    lines.append(f"- time points: {ds.length} ({ds.time_unit_label})")
    lines.append(f"- effect: {report.effect.label} ({report.effect.effect_type})")
    lines.append(f"- window: [{report.window.r}, {report.window.s}] index units")
    lines.append(f"- epsilon: {report.epsilon:g}")
    lines.append(
        f"- combined: base {_fmt_num(report.combined_base)} -> "
        f"conditional {_fmt_num(report.combined_cond)}"
        + (f" ({report.combined_reason})" if report.combined_reason else "")
    )
    lines.append("")
    lines.append("## Causes (ordered by significance)")
    lines.append("")
    lines.append("| event | elevation | eps_avg | occurrences | significant |")
    lines.append("|---|---|---|---|---|")
    for m in report.causes:
        eps = _fmt_num(m.eps_avg)
        if m.eps_avg is None and m.eps_reason:
            eps = f"n/a ({m.eps_reason})"
        lines.append(
            f"| {m.event.label} | {_fmt_num(m.elevation)} | {eps} "
            f"| {m.occurrence_count} | {'yes' if m.is_significant else 'no'} |"
        )
    if estimation is not None and estimation.skipped:
        lines.append("")
        lines.append("## Estimation skips")
        lines.append("")
        for entry in estimation.skipped:
            lines.append(f"- {entry['variable']}: {entry['reason']}")
    if profile is not None:
        lines.append("")
        lines.append("## Delay profile")
        lines.append("")
        defined = [
            (p.delay, p.influence) for p in profile.points if p.influence is not None
        ]
        if defined:
            peak = max(defined, key=lambda pair: abs(pair[1]))
            lines.append(
                f"- strongest combined influence {_fmt_num(peak[1])} at delay {peak[0]}"
            )
        lines.append(f"- delays swept: 0..{profile.max_delay} (see sweep.csv)")
    if report.warnings:
        lines.append("")
        lines.append("## Warnings")
        lines.append("")
        for w in report.warnings:
            lines.append(f"- {w}")
    lines.append("")
    return "\n".join(lines)


def dataset_summary_payload(ds: Dataset, bins: int | None = None) -> dict:
    return summary(ds) if bins is None else summary(ds, bins)
