"""make-figures: render every figure an artifact directory supports."""

from __future__ import annotations

import argparse
import os
import sys

from .plots import plot_convergence, plot_decay, plot_gap_envelope, plot_lemma_table
from .schemas import SchemaError, load_report
from .summary import build_summary


def process_directory(directory) -> list[str]:
    """Render figures for the artifacts in `directory`; returns written paths."""
    written = []
    report_path = os.path.join(directory, "report.json")
    series_path = os.path.join(directory, "series.csv")
    if os.path.exists(report_path):
        kind = load_report(report_path).get("kind")
        if kind == "decay" and os.path.exists(series_path):
            res = plot_decay(series_path, report_path, os.path.join(directory, "decay.png"))
            written.append(res.path)
        elif kind == "epsilon-convergence":
            res = plot_convergence(report_path, os.path.join(directory, "convergence.png"))
            if res.skipped:
                print(f"notice: {res.notice}")
            else:
                written.append(res.path)
        elif kind == "perturbation":
            res = plot_gap_envelope(report_path, os.path.join(directory, "gap.png"))
            written.append(res.path)
        elif kind == "lemmas":
            res = plot_lemma_table(report_path, os.path.join(directory, "lemmas.png"))
            written.append(res.path)
    written.append(build_summary(directory))
    return [w for w in written if w]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="make-figures",
                                     description="Render figures and a summary from "
                                                 "a solver artifact directory")
    parser.add_argument("directory")
    args = parser.parse_args(argv)
    if not os.path.isdir(args.directory):
        print(f"error: {args.directory!r} is not a directory", file=sys.stderr)
        return 2
    try:
        written = process_directory(args.directory)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
