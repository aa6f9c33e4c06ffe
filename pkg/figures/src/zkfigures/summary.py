"""Human-readable summary document assembled from an artifact directory."""

from __future__ import annotations

import os

from .schemas import SchemaError, load_report


def _smallness_section(doc) -> list[str]:
    s = doc["smallness"]
    lines = ["## Smallness verdict", ""]
    lines.append("| quantity | value |")
    lines.append("|---|---|")
    lines.append(f"| L | {s['L']:.6g} |")
    lines.append(f"| norm of u0 | {s['norm_u0']:.6g} |")
    lines.append(f"| J0 | {s['J0']:.6g} |")
    lines.append(f"| C1 | {s['C1']:.6g} |")
    lines.append(f"| K1 | {s['K1']:.6g} |")
    lines.append(f"| K2 | {s['K2']:.6g} |")
    lines.append(f"| chi | {s['chi']:.6g} |")
    lines.append(f"| margin (u0 condition) | {s['margins']['u0']:.3g} |")
    lines.append(f"| margin (J0 condition) | {s['margins']['J0']:.3g} |")
    verdict = s["verdict"]
    lines.append(f"| verdict | geometry {verdict['geometry']}, u0 {verdict['u0']}, "
                 f"J0 {verdict['J0']} -> **{verdict['overall']}** |")
    lines.append("")
    return lines


def _decay_section(doc) -> list[str]:
    lines = ["## Decay rates", ""]
    if doc.get("degenerate"):
        lines += ["Degenerate case: zero initial data, no fits.", ""]
        return lines
    lines.append("| functional | fitted rate | predicted rate | margin | r^2 |")
    lines.append("|---|---|---|---|---|")
    for name, fit in doc.get("fits", {}).items():
        lines.append(f"| {name} | {fit['fitted_rate']:.6g} | {fit['predicted_rate']:.6g} "
                     f"| {fit['margin']:.3g} | {fit['r_squared']:.6f} |")
    run = doc.get("run", {})
    lines.append("")
    lines.append(f"Run status: {run.get('status')} after {run.get('step_count')} steps; "
                 f"max energy residual {run.get('max_energy_residual'):.3e}. "
                 f"Fit window {doc.get('window')}.")
    if doc.get("outside_theorem"):
        lines.append("")
        lines.append("Labeled outside-theorem: the data fails the smallness conditions.")
    lines.append("")
    return lines


def _lemma_section(doc) -> list[str]:
    lemmas = doc["lemmas"]
    lines = ["## Lemma suite", ""]
    lines.append("| family | checks passed |")
    lines.append("|---|---|")
    for family in ("steklov", "interpolation", "comparison_ode"):
        entries = lemmas.get(family, [])
        passed = sum(bool(e.get("passed")) for e in entries)
        lines.append(f"| {family} | {passed}/{len(entries)} |")
    lines.append(f"| total | {lemmas.get('n_pass')}/{lemmas.get('n_total')} |")
    lines.append("")
    return lines


def build_summary(directory, filename: str = "summary.md") -> str:
    """Assemble summary.md from whatever reports the directory holds.

    Missing sections are noted rather than fatal; an empty directory yields a
    document stating that no reports were found.  Returns the output path.
    """
    directory = os.fspath(directory)
    lines = ["# Experiment summary", ""]
    found = False

    smallness_path = os.path.join(directory, "smallness.json")
    report_path = os.path.join(directory, "report.json")
    report = None
    if os.path.exists(report_path):
        try:
            report = load_report(report_path)
        except SchemaError as exc:
            lines += [f"report.json unreadable: {exc}", ""]

    if os.path.exists(smallness_path):
        try:
            doc = load_report(smallness_path)
            lines += _smallness_section(doc)
            found = True
        except (SchemaError, KeyError) as exc:
            lines += [f"smallness.json unreadable: {exc}", ""]
    elif report is not None and report.get("smallness"):
        lines += _smallness_section(report)
        found = True
    else:
        lines += ["## Smallness verdict", "", "No smallness report found.", ""]

    if report is not None and report.get("kind") == "decay":
        lines += _decay_section(report)
        found = True
    else:
        lines += ["## Decay rates", "", "No decay report found.", ""]

    if report is not None and report.get("kind") == "lemmas":
        lines += _lemma_section(report)
        found = True
    else:
        lemmas_path = os.path.join(directory, "lemmas.json")
        if os.path.exists(lemmas_path):
            lines += _lemma_section(load_report(lemmas_path))
            found = True
        else:
            lines += ["## Lemma suite", "", "No lemma report found.", ""]

    lines += ["## Figures", ""]
    images = sorted(f for f in os.listdir(directory) if f.endswith((".png", ".svg")))
    if images:
        for name in images:
            lines.append(f"- ![{name}]({name})")
        found = True
    else:
        lines.append("No figures found.")
    lines.append("")

    if not found:
        lines = ["# Experiment summary", "", "No reports found.", ""]

    out = os.path.join(directory, filename)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
    return out
