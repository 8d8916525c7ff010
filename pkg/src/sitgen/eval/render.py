"""Report emission: CSV documents and plain-text mean(std) tables."""

from __future__ import annotations

import io

from .protocol import EvalReport, LocalVsGlobalRow


def format_mean_std(mean: float, std: float, decimals: int = 2) -> str:
    return f"{mean:.{decimals}f}({std:.{decimals}f})"


def _metric_decimals(key: str) -> int:
    return 4 if key.endswith("auc") else 2


def report_csv(report: EvalReport) -> str:
    """Per-seed rows plus mean and std rows, one metric per column."""
    keys = sorted(report.mean)
    out = io.StringIO()
    out.write("row," + ",".join(keys) + "\n")
    for row in report.per_seed:
        cells = [repr(float(row.metrics[k])) for k in keys]
        out.write(f"seed={row.seed}," + ",".join(cells) + "\n")
    out.write("mean," + ",".join(repr(float(report.mean[k])) for k in keys) + "\n")
    out.write("std," + ",".join(repr(float(report.std[k])) for k in keys) + "\n")
    return out.getvalue()


def confusion_csv(report: EvalReport, branch: str) -> str:
    """C×C grid, rows = true class, columns = predicted class."""
    if branch not in report.confusion:
        raise KeyError(f"no confusion matrix for branch {branch!r}")
    matrix = report.confusion[branch]
    out = io.StringIO()
    header = ",".join(f"pred_{j}" for j in range(matrix.shape[1]))
    out.write("true," + header + "\n")
    for i, row in enumerate(matrix):
        out.write(f"{i}," + ",".join(str(int(v)) for v in row) + "\n")
    return out.getvalue()


def render_report_table(reports: list[EvalReport]) -> str:
    """Plain-text table over protocol cells: one row per (kind, C, branch),
    metric columns rendered as mean(std)."""
    if not reports:
        return "(no reports)\n"
    metric_suffixes = ["auc", "accuracy", "accuracy_at_k"]
    titles = {"auc": "AUC", "accuracy": "Accuracy", "accuracy_at_k": "Accuracy@K"}
    rows: list[list[str]] = []
    has_overlap = any("overlap" in r.mean for r in reports)
    for report in reports:
        for branch in report.branches:
            cells = [report.kind, f"C={report.c}", branch]
            for suffix in metric_suffixes:
                key = f"{branch}_{suffix}"
                if key in report.mean:
                    cells.append(
                        format_mean_std(
                            report.mean[key],
                            report.std[key],
                            _metric_decimals(suffix),
                        )
                    )
                else:
                    cells.append("-")
            if has_overlap:
                if branch == report.branches[0] and "overlap" in report.mean:
                    cells.append(
                        format_mean_std(report.mean["overlap"], report.std["overlap"])
                    )
                else:
                    cells.append("-")
            rows.append(cells)
    header = ["split", "subset", "branch"] + [titles[s] for s in metric_suffixes]
    if has_overlap:
        header.append("Overlap")
    widths = [
        max(len(header[j]), max(len(r[j]) for r in rows)) for j in range(len(header))
    ]
    out = io.StringIO()

    def emit(cells: list[str]) -> None:
        out.write("  ".join(c.ljust(widths[j]) for j, c in enumerate(cells)).rstrip())
        out.write("\n")

    emit(header)
    emit(["-" * w for w in widths])
    for cells in rows:
        emit(cells)
    return out.getvalue()


def local_vs_global_csv(rows: list[LocalVsGlobalRow]) -> str:
    out = io.StringIO()
    out.write("location,n_test,global_accuracy,local_accuracy\n")
    for row in rows:
        out.write(
            f"{row.location},{row.n_test},"
            f"{repr(float(row.global_accuracy))},{repr(float(row.local_accuracy))}\n"
        )
    return out.getvalue()


def render_local_vs_global(rows: list[LocalVsGlobalRow]) -> str:
    header = ["location", "n_test", "global", "local"]
    body = [
        [r.location, str(r.n_test), f"{r.global_accuracy:.2f}", f"{r.local_accuracy:.2f}"]
        for r in rows
    ]
    widths = [
        max(len(header[j]), max((len(r[j]) for r in body), default=0))
        for j in range(len(header))
    ]
    out = io.StringIO()
    for cells in [header, ["-" * w for w in widths], *body]:
        out.write("  ".join(c.ljust(widths[j]) for j, c in enumerate(cells)).rstrip())
        out.write("\n")
    return out.getvalue()
