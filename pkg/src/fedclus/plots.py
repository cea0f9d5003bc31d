"""Static SVG figures: ROC per algorithm, accuracy per round, latency bars.

Hand-written SVG 1.1 with fixed number formatting, so identical reports
give byte-identical files.
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .report import ExperimentReport

W, H = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 80, 40, 50, 70
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.0f}" y="30" text-anchor="middle" font-family="sans-serif" '
            f'font-size="18">{escape(title)}</text>',
            f'<text x="{W / 2:.0f}" y="{H - 20}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14">{escape(xlabel)}</text>',
            f'<text x="20" y="{H / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="14" '
            f'transform="rotate(-90 20 {H / 2:.0f})">{escape(ylabel)}</text>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>", ""])


class _Axes:
    def __init__(self, canvas: _Canvas, xlim, ylim, xticks, yticks):
        self.c = canvas
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
        self.pw, self.ph = pw, ph
        canvas.add(f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
        for t in xticks:
            x = self.px(t)
            canvas.add(f'<line x1="{_fmt(x)}" y1="{H - BOTTOM}" x2="{_fmt(x)}" y2="{H - BOTTOM + 5}" stroke="black"/>')
            canvas.add(
                f'<text x="{_fmt(x)}" y="{H - BOTTOM + 20}" text-anchor="middle" font-family="sans-serif" '
                f'font-size="12">{_tick(t)}</text>'
            )
        for t in yticks:
            y = self.py(t)
            canvas.add(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
            canvas.add(
                f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end" font-family="sans-serif" '
                f'font-size="12">{_tick(t)}</text>'
            )

    def px(self, x: float) -> float:
        span = (self.x1 - self.x0) or 1.0
        return LEFT + (x - self.x0) / span * self.pw

    def py(self, y: float) -> float:
        span = (self.y1 - self.y0) or 1.0
        return TOP + self.ph - (y - self.y0) / span * self.ph

    def polyline(self, xs, ys, color: str, width: float = 2.0, dash: str | None = None, cls: str = ""):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        klass = f' class="{cls}"' if cls else ""
        self.c.add(f'<polyline{klass} points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')


def _tick(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else f"{t:g}"


def _legend(canvas: _Canvas, names, colors):
    for i, (name, color) in enumerate(zip(names, colors)):
        y = TOP + 20 + 20 * i
        canvas.add(f'<rect x="{W - RIGHT - 190}" y="{y - 10}" width="14" height="14" fill="{color}"/>')
        canvas.add(
            f'<text x="{W - RIGHT - 170}" y="{y + 2}" font-family="sans-serif" font-size="13">{escape(name)}</text>'
        )


def roc_svg(report: ExperimentReport, algorithm: str) -> str:
    """ROC polylines for every seed of ``algorithm``; the first seed's KS point is annotated."""
    runs = report.runs_for(algorithm)
    c = _Canvas(f"ROC - {algorithm}", "False positive rate", "True positive rate")
    ax = _Axes(c, (0.0, 1.0), (0.0, 1.0), np.linspace(0, 1, 6), np.linspace(0, 1, 6))
    ax.polyline([0, 1], [0, 1], "#999999", 1.0, dash="6,4", cls="diagonal")
    for i, run in enumerate(runs):
        if not run.final.roc:
            continue
        fpr = [p[0] for p in run.final.roc]
        tpr = [p[1] for p in run.final.roc]
        ax.polyline(fpr, tpr, PALETTE[i % len(PALETTE)], 2.0, cls=f"roc seed-{run.seed}")
    if runs and runs[0].final.ks_point:
        fx, ty = runs[0].final.ks_point[:2]
        x, y0, y1 = ax.px(fx), ax.py(fx), ax.py(ty)
        c.add(f'<line class="ks" x1="{_fmt(x)}" y1="{_fmt(y0)}" x2="{_fmt(x)}" y2="{_fmt(y1)}" stroke="black" stroke-width="1.5"/>')
        c.add(f'<circle cx="{_fmt(x)}" cy="{_fmt(y1)}" r="4" fill="black"/>')
        c.add(
            f'<text class="ks-label" x="{_fmt(min(x + 8, W - RIGHT - 150))}" y="{_fmt(max(y1 - 8, TOP + 15))}" '
            f'font-family="sans-serif" font-size="13">KS={runs[0].final.ks:.3f} (seed {runs[0].seed})</text>'
        )
    _legend(c, [f"seed {r.seed}" for r in runs], [PALETTE[i % len(PALETTE)] for i in range(len(runs))])
    return c.render()


def accuracy_svg(report: ExperimentReport) -> str:
    """Seed-mean test accuracy against round, one line per algorithm."""
    algos = report.algorithms
    series = {}
    for a in algos:
        runs = report.runs_for(a)
        acc = np.array([[r.accuracy for r in run.rounds] for run in runs], dtype=np.float64)
        series[a] = ([r.round for r in runs[0].rounds], np.nanmean(acc, axis=0))
    max_round = max(max(x) for x, _ in series.values()) or 1
    allv = np.concatenate([v for _, v in series.values()])
    lo = float(np.floor(np.nanmin(allv) * 10) / 10) if allv.size else 0.0
    lo = min(lo, 0.9)
    yt = np.round(np.linspace(lo, 1.0, 6), 4)
    xt = np.unique(np.round(np.linspace(0, max_round, 6)))
    c = _Canvas("Test accuracy per round", "Round", "Accuracy (mean over seeds)")
    ax = _Axes(c, (0.0, float(max_round)), (lo, 1.0), xt, yt)
    colors = [PALETTE[i % len(PALETTE)] for i in range(len(algos))]
    for a, color in zip(algos, colors):
        xs, ys = series[a]
        ax.polyline(xs, ys, color, 2.0, cls=f"acc {a}")
    _legend(c, algos, colors)
    return c.render()


def latency_svg(report: ExperimentReport) -> str:
    """Grouped bars of modeled seconds per round, per algorithm and bandwidth profile."""
    algos = report.algorithms
    profiles = list(report.runs_for(algos[0])[0].latency)
    vals = {a: [report.runs_for(a)[0].latency[p] for p in profiles] for a in algos}
    top = max(max(v) for v in vals.values()) or 1.0
    c = _Canvas("Modeled communication latency per round", "Bandwidth profile", "Seconds per round")
    yt = np.round(np.linspace(0, top * 1.1, 6), 3)
    ax = _Axes(c, (0.0, float(len(profiles))), (0.0, top * 1.1), [], yt)
    group_w = ax.pw / max(len(profiles), 1)
    bar_w = group_w * 0.8 / len(algos)
    colors = [PALETTE[i % len(PALETTE)] for i in range(len(algos))]
    for pi, prof in enumerate(profiles):
        gx = LEFT + pi * group_w + group_w * 0.1
        for ai, a in enumerate(algos):
            v = vals[a][pi]
            y = ax.py(v)
            c.add(
                f'<rect class="bar {a}" x="{_fmt(gx + ai * bar_w)}" y="{_fmt(y)}" width="{_fmt(bar_w * 0.9)}" '
                f'height="{_fmt(H - BOTTOM - y)}" fill="{colors[ai]}"/>'
            )
            c.add(
                f'<text x="{_fmt(gx + (ai + 0.45) * bar_w)}" y="{_fmt(y - 4)}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{v:.2f}</text>'
            )
        c.add(
            f'<text x="{_fmt(LEFT + (pi + 0.5) * group_w)}" y="{H - BOTTOM + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(prof)}</text>'
        )
    _legend(c, algos, colors)
    return c.render()


def write_plots(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for a in report.algorithms:
        p = out / f"roc_{a}.svg"
        p.write_text(roc_svg(report, a), encoding="utf-8")
        written.append(p)
    for name, fn in (("accuracy_vs_round.svg", accuracy_svg), ("latency_bars.svg", latency_svg)):
        p = out / name
        p.write_text(fn(report), encoding="utf-8")
        written.append(p)
    return written
