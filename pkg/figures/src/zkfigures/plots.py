"""Figure rendering from solver artifacts.

Four figure kinds: decay-semilog (monitored functionals with the theoretical
envelope lines), convergence-loglog (error vs regularization strength with
the fitted order), gap-envelope (twin-run gap against its Gronwall envelope),
and lemma-table.  All constants shown in a figure are read from report.json,
never recomputed, so figures cannot disagree with the solver's own reports.
Rendering is deterministic: identical inputs give byte-identical images.
"""

from __future__ import annotations

import dataclasses

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, load_report, load_series, require

PLOT_FLOOR = 1e-300
FIGURE_KINDS = ("decay-semilog", "convergence-loglog", "gap-envelope", "lemma-table")

DECAY_SERIES = ("weighted", "ut_weighted", "h1", "h2_composite")


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    """One figure request: input artifacts, kind, output path, title."""

    kind: str
    inputs: tuple
    output: str
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


@dataclasses.dataclass
class FigureResult:
    path: str | None
    skipped: bool = False
    notice: str | None = None
    annotations: dict = dataclasses.field(default_factory=dict)


def _save(fig, out_path) -> None:
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_decay(series_path, report_path, out_path, title=None) -> FigureResult:
    """Semilog decay figure: measured functionals plus dashed envelope lines
    at the predicted rates, legend annotated with the fitted rates."""
    series = load_series(series_path)
    report = load_report(report_path, kind="decay")
    fits = require(report, "fits", report_path)
    predicted = require(report, "predicted_rates", report_path)
    window = require(report, "window", report_path)

    t = series["t"]
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    annotations = {}
    for name in DECAY_SERIES:
        if name not in series:
            raise SchemaError(f"series is missing column {name!r}")
        values = np.maximum(series[name], PLOT_FLOOR)
        fit = fits.get(name)
        if fit is None:
            label = name
        else:
            rate_text = f"{fit['fitted_rate']:.6g}"
            annotations[name] = rate_text
            label = (f"{name}: fitted {rate_text}"
                     f" (x{fit['margin']:.2f} of predicted)" if fit.get("margin")
                     else f"{name}: fitted {rate_text}")
        ax.semilogy(t, values, label=label, linewidth=1.2)

    # envelope lines anchored at the fit-window entry of the weighted series
    t0 = window[0]
    if t.size and np.any(t >= t0):
        i0 = int(np.argmax(t >= t0))
        mask = t >= t0
        for name, style in (("weighted", "--"), ("ut_weighted", ":")):
            rate = predicted.get(name)
            anchor = max(series[name][i0], PLOT_FLOOR)
            if rate is None or anchor <= PLOT_FLOOR:
                continue
            envelope = anchor * np.exp(-rate * (t[mask] - t[i0]))
            ax.semilogy(t[mask], envelope, style, color="k", linewidth=1.0,
                        label=f"envelope rate {rate:.6g}")

    ax.set_xlabel("t")
    ax.set_ylabel("functional value")
    ax.set_title(title or "Energy-functional decay")
    ax.legend(fontsize=7, loc="upper right")
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    _save(fig, out_path)
    return FigureResult(path=str(out_path), annotations=annotations)


def plot_convergence(report_path, out_path, title=None) -> FigureResult:
    """Log-log error against regularization strength with the fitted order."""
    report = load_report(report_path, kind="epsilon-convergence")
    conv = require(report, "convergence", report_path)
    values = np.asarray(conv["values"], dtype=float)
    errors = np.asarray(conv["errors"], dtype=float)
    if conv.get("degenerate") or not np.all(errors > 0):
        return FigureResult(path=None, skipped=True,
                            notice="degenerate convergence report (zero errors); figure skipped")
    order = conv["fitted_order"]
    refit = float(np.polyfit(np.log(values), np.log(errors), 1)[0])

    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    ax.loglog(values, errors, "o-", label="measured error")
    anchor = errors[0] / values[0] ** order
    ax.loglog(values, anchor * values ** order, "k--",
              label=f"fitted order {order:.3f}")
    ax.set_xlabel(conv.get("parameter", "parameter"))
    ax.set_ylabel("L2 difference at T")
    ax.set_title(title or "Vanishing-regularization convergence")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    _save(fig, out_path)
    return FigureResult(path=str(out_path), skipped=False,
                        annotations={"fitted_order": f"{order:.3f}",
                                     "refit_order": f"{refit:.3f}"})


def plot_gap_envelope(report_path, out_path, title=None) -> FigureResult:
    """Twin-run weighted gap against the calibrated Gronwall envelope."""
    report = load_report(report_path, kind="perturbation")
    pert = require(report, "perturbation", report_path)
    t = np.asarray(pert["times"], dtype=float)
    gap = np.maximum(np.asarray(pert["gap"], dtype=float), PLOT_FLOOR)

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.semilogy(t, gap, label="((1+x), w^2)(t)")
    if pert.get("envelope") is not None:
        env = np.maximum(np.asarray(pert["envelope"], dtype=float), PLOT_FLOOR)
        ax.semilogy(t, env, "k--", label="Gronwall envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted gap")
    satisfied = pert.get("bound_satisfied")
    ax.set_title(title or f"Continuous dependence (bound satisfied: {satisfied})")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    _save(fig, out_path)
    return FigureResult(path=str(out_path),
                        annotations={"bound_satisfied": str(satisfied)})


def plot_lemma_table(report_path, out_path, title=None) -> FigureResult:
    """Rendered table of the lemma-suite outcomes."""
    report = load_report(report_path, kind="lemmas")
    lemmas = require(report, "lemmas", report_path)
    rows = []
    for family in ("steklov", "interpolation", "comparison_ode"):
        entries = lemmas.get(family, [])
        passed = sum(bool(e.get("passed")) for e in entries)
        rows.append((family, f"{passed}/{len(entries)}"))
    rows.append(("total", f"{lemmas.get('n_pass')}/{lemmas.get('n_total')}"))

    fig, ax = plt.subplots(figsize=(4.6, 1.2 + 0.35 * len(rows)))
    ax.axis("off")
    table = ax.table(cellText=[[name, score] for name, score in rows],
                     colLabels=["lemma family", "checks passed"],
                     loc="center", cellLoc="left")
    table.scale(1.0, 1.3)
    ax.set_title(title or "Lemma suite")
    fig.tight_layout()
    _save(fig, out_path)
    return FigureResult(path=str(out_path),
                        annotations={name: score for name, score in rows})


def render(spec: FigureSpec) -> FigureResult:
    """Render one FigureSpec."""
    if spec.kind == "decay-semilog":
        return plot_decay(spec.inputs[0], spec.inputs[1], spec.output, title=spec.title)
    if spec.kind == "convergence-loglog":
        return plot_convergence(spec.inputs[0], spec.output, title=spec.title)
    if spec.kind == "gap-envelope":
        return plot_gap_envelope(spec.inputs[0], spec.output, title=spec.title)
    return plot_lemma_table(spec.inputs[0], spec.output, title=spec.title)
