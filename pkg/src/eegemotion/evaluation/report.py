"""RunReport persistence and cross-run comparison.

A report directory holds ``report.json`` (summary, config echo, seeds, per-trial
confusion counts), ``scores.csv`` and one ``confusion_<trial>.csv`` per trial.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

from ..corpus.storage import atomic_write_bytes
from .experiment import RunReport, TrialResult
from .stats import TTestResult, welch_t

REPORT_NAME = "report.json"
SCORES_NAME = "scores.csv"
REPORT_VERSION = 1

D_NOTE = ("cohen_d uses the pooled-SD convention (mean_a - mean_b) / sqrt((sd_a^2 + sd_b^2) / 2); "
          "much larger magnitudes quoted for similar mean/SD pairs are not reproducible "
          "with this convention")


class ReportFormatError(ValueError):
    pass


def scores_csv(report: RunReport) -> str:
    buf = io.StringIO()
    buf.write("trial,repeat,fold,f1_macro,f1_micro,accuracy\n")
    for t in report.trials:
        buf.write(f"{t.trial},{t.repeat},{t.fold},{t.f1_macro!r},{t.f1_micro!r},{t.accuracy!r}\n")
    return buf.getvalue()


def report_dict(report: RunReport) -> dict:
    return {
        "format_version": REPORT_VERSION,
        "summary": report.summary(),
        "config": report.config,
        "seeds": {"master": report.master_seed,
                  "trials": [t.seed for t in report.trials]},
        "k": report.k,
        "repeats": report.repeats,
        "n_classes": report.n_classes,
        "trials": [t.to_dict() for t in report.trials],
    }


def write_report(report: RunReport, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_bytes(out / SCORES_NAME, scores_csv(report).encode())
    for t in report.trials:
        atomic_write_bytes(out / f"confusion_{t.trial}.csv", t.confusion.to_csv().encode())
    payload = json.dumps(report_dict(report), indent=2, sort_keys=True).encode()
    atomic_write_bytes(out / REPORT_NAME, payload)
    return out / REPORT_NAME


def read_report(path: str | Path) -> RunReport:
    """Accepts the JSON file or the directory holding it."""
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_NAME
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, ValueError) as exc:
        raise ReportFormatError(f"{path}: unreadable report: {exc}") from exc
    try:
        if d["format_version"] != REPORT_VERSION:
            raise ReportFormatError(f"{path}: unsupported report version {d['format_version']}")
        trials = [TrialResult.from_dict(t) for t in d["trials"]]
        report = RunReport(trials, int(d["n_classes"]), int(d["seeds"]["master"]), int(d["k"]),
                           int(d["repeats"]), d.get("config", {}))
    except ReportFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportFormatError(f"{path}: malformed report: {exc!r}") from exc
    if not trials:
        raise ReportFormatError(f"{path}: report has no trials")
    return report


@dataclass
class Comparison:
    result: TTestResult
    table: str
    series_csv: str
    notes: list[str]


def _fmt_p(p: float) -> str:
    return "p < 0.0001" if p < 1e-4 else f"p = {p:.4f}"


def compare(report_a: RunReport, report_b: RunReport, name_a: str = "A",
            name_b: str = "B") -> Comparison:
    """Welch t-test on the macro-F1 score sets of two runs with the same trial structure."""
    if report_a.structure != report_b.structure:
        raise ValueError(f"trial structure mismatch: {len(report_a.trials)} trials "
                         f"vs {len(report_b.trials)} trials, or differing (repeat, fold) order")
    a, b = report_a.scores, report_b.scores
    res = welch_t(a, b)
    width = max(len(name_a), len(name_b), 3)
    lines = [
        f"{'run':<{width}}  {'mean F1 (%)':>12}  {'SD':>6}  {'n':>3}",
        f"{name_a:<{width}}  {a.mean:>12.2f}  {a.sd:>6.2f}  {len(a):>3d}",
        f"{name_b:<{width}}  {b.mean:>12.2f}  {b.sd:>6.2f}  {len(b):>3d}",
        f"Welch t({res.df:.2f}) = {res.t:.2f}, {_fmt_p(res.p)}",
        f"Cohen's d = {res.cohen_d:.2f}, 95% CI [{res.ci95_d[0]:.2f}, {res.ci95_d[1]:.2f}]",
    ]
    buf = io.StringIO()
    buf.write("run,trial,repeat,fold,f1_macro\n")
    for name, rep in ((name_a, report_a), (name_b, report_b)):
        for t in rep.trials:
            buf.write(f"{name},{t.trial},{t.repeat},{t.fold},{t.f1_macro!r}\n")
    return Comparison(res, "\n".join(lines), buf.getvalue(), [D_NOTE])
