"""Command-line entry point: synth | featurize | run | compare | gradcheck.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import SEED_MAX_SAMPLES, ConfigError, ExperimentConfig
from .corpus.features import featurize_epochset, truncate
from .corpus.storage import EpochSetFormatError, atomic_write_bytes, read_epochset, write_epochset
from .corpus.synth import synth_generate
from .evaluation.report import ReportFormatError, compare, read_report, write_report
from .evaluation.experiment import run_experiment
from .nn.gradcheck import CHECKED_KINDS, run_gradcheck
from .nn.network import NonFiniteError
from .signal_core import design_bandpass

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

log = logging.getLogger("eegemotion")


class DataError(Exception):
    pass


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", help="JSON experiment config; flags override it")
    g.add_argument("--seed", type=int, help="master seed (required where randomness is used)")
    g.add_argument("--out", metavar="DIR", help="output directory")
    g.add_argument("--threads", type=int, help="worker processes for independent fold trials")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    _common(common)
    parser = argparse.ArgumentParser(prog="eegemotion", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic epoch set")
    p.add_argument("--geometry", help="deap | seed | dens")
    p.add_argument("--classes", type=int, help="number of classes (default 3)")
    p.add_argument("--per-class", type=int, help="epochs per class (default 50)")
    p.add_argument("--snr-db", type=float, help="oscillation-to-background SNR in dB")

    p = sub.add_parser("featurize", parents=[common], help="spectrogram features of an epoch set")
    p.add_argument("epochset", nargs="?", help="epoch set directory")
    p.add_argument("--scaling", help="raw | log | log+minmax")
    p.add_argument("--bandpass", action="store_true", help="apply the 1-40 Hz order-5 bandpass")

    p = sub.add_parser("run", parents=[common], help="repeated K-fold experiment")
    p.add_argument("epochset", nargs="?", help="epoch set directory")
    p.add_argument("--model", help="reduced | full")
    p.add_argument("--scaling", help="raw | log | log+minmax")
    p.add_argument("--bandpass", action="store_true", help="apply the 1-40 Hz order-5 bandpass")
    p.add_argument("--k", type=int, help="folds per repeat (default 5)")
    p.add_argument("--repeats", type=int, help="repeats (default 5)")
    p.add_argument("--max-epochs", type=int, help="training epochs per trial")
    p.add_argument("--patience", type=int, help="early-stopping patience")
    p.add_argument("--batch-size", type=int, help="mini-batch size")
    p.add_argument("--learning-rate", type=float, help="Adam learning rate")

    p = sub.add_parser("compare", parents=[common], help="Welch t-test between two run reports")
    p.add_argument("report_a", help="report.json (or its directory) of run A")
    p.add_argument("report_b", help="report.json (or its directory) of run B")
    p.add_argument("--names", nargs=2, metavar=("A", "B"), help="labels for the two runs")

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient suite")
    # test hook: corrupt one layer kind's backward pass
    p.add_argument("--fault", choices=CHECKED_KINDS, help=argparse.SUPPRESS)
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if getattr(args, "config", None) else ExperimentConfig()
    bandpass = {} if getattr(args, "bandpass", False) else None
    return cfg.override(
        seed=getattr(args, "seed", None), out=getattr(args, "out", None),
        threads=getattr(args, "threads", None), geometry=getattr(args, "geometry", None),
        classes=getattr(args, "classes", None), per_class=getattr(args, "per_class", None),
        snr_db=getattr(args, "snr_db", None), epochset=getattr(args, "epochset", None),
        scaling=getattr(args, "scaling", None), model=getattr(args, "model", None),
        bandpass=bandpass,
        folds={"k": getattr(args, "k", None), "repeats": getattr(args, "repeats", None)},
        train={"max_epochs": getattr(args, "max_epochs", None),
               "patience": getattr(args, "patience", None),
               "batch_size": getattr(args, "batch_size", None),
               "learning_rate": getattr(args, "learning_rate", None)},
    )


def _require_out(cfg: ExperimentConfig) -> Path:
    if not cfg.out:
        raise ConfigError("an output directory is required (--out)")
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _load_epochs(cfg: ExperimentConfig):
    if not cfg.epochset:
        raise ConfigError("an epoch set directory is required")
    path = Path(cfg.epochset)
    if not path.is_dir():
        raise DataError(f"epoch set not found: {path}")
    epochs = read_epochset(path)
    if epochs.geometry.name == "seed":
        epochs = truncate(epochs, SEED_MAX_SAMPLES)
    return epochs


def cmd_synth(cfg: ExperimentConfig) -> int:
    seed = cfg.require_seed()
    geometry = cfg.resolve_geometry()
    synth = cfg.resolve_synth()
    out = _require_out(cfg)
    epochs = synth_generate(geometry, cfg.classes, cfg.per_class, seed, synth)
    try:
        write_epochset(epochs, out, config=cfg.echo())
    except OSError as exc:
        raise DataError(f"cannot write epoch set to {out}: {exc}") from exc
    g = epochs.geometry
    print(f"{len(epochs)} epochs, {g.n_channels} ch x {g.n_samples} samples @ {g.fs:g} Hz, "
          f"{cfg.classes} classes, scheme {epochs.scheme} -> {out}")
    return EXIT_OK


def _features(cfg: ExperimentConfig):
    epochs = _load_epochs(cfg)
    fs = epochs.geometry.fs
    scheme = cfg.resolve_scheme(_classes_in(epochs), epochs.scheme)
    plan = cfg.resolve_plan(fs)
    spec = cfg.resolve_bandpass(fs)
    bandpass = design_bandpass(spec) if spec is not None else None
    return epochs, scheme, plan, bandpass


def _classes_in(epochs) -> int:
    labels = {r.discrete_label for r in epochs.records if r.discrete_label is not None}
    return max(labels) + 1 if labels else 3


def cmd_featurize(cfg: ExperimentConfig) -> int:
    scaling = cfg.resolve_scaling()
    epochs, scheme, plan, bandpass = _features(cfg)
    out = _require_out(cfg)
    X, y = featurize_epochset(epochs, scheme, plan, scaling, bandpass)
    for name, arr in (("features.npy", X), ("labels.npy", y)):
        buf = io.BytesIO()
        np.save(buf, arr)
        atomic_write_bytes(out / name, buf.getvalue())
    n, bins, frames = X.shape
    summary = {"instances": n, "bins": bins, "frames": frames, "planes": 3,
               "stft": {"frame_size": plan.frame_size, "hop": plan.hop, "window": plan.window},
               "scheme": scheme.to_dict(), "config": cfg.echo()}
    atomic_write_bytes(out / "features.json", json.dumps(summary, indent=2, sort_keys=True).encode())
    print(f"{n} instances of {bins}×{frames}×3")
    return EXIT_OK


def cmd_run(cfg: ExperimentConfig) -> int:
    seed = cfg.require_seed()
    scaling = cfg.resolve_scaling()
    model = cfg.resolve_model()
    train_cfg = cfg.resolve_train()
    k, repeats = cfg.resolve_folds()
    out = _require_out(cfg)
    epochs, scheme, plan, bandpass = _features(cfg)
    report = run_experiment(epochs, scheme, plan, model, train_cfg, k, repeats, seed, scaling,
                            bandpass, workers=max(1, int(cfg.threads)), config_echo=cfg.echo())
    write_report(report, out)
    s = report.scores
    print(f"{len(s)} trials, macro-F1 {s.mean:.2f} (± {s.sd:.2f}) -> {out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    reports = []
    for path in (args.report_a, args.report_b):
        if not Path(path).exists():
            raise DataError(f"report not found: {path}")
        reports.append(read_report(path))
    names = getattr(args, "names", None) or ("A", "B")
    try:
        cmp = compare(reports[0], reports[1], names[0], names[1])
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(cmp.table)
    for note in cmp.notes:
        print(f"note: {note}")
    if cfg.out:
        out = _require_out(cfg)
        atomic_write_bytes(out / "series.csv", cmp.series_csv.encode())
        payload = {"ttest": cmp.result.to_dict(), "notes": cmp.notes,
                   "reports": [str(args.report_a), str(args.report_b)], "config": cfg.echo()}
        atomic_write_bytes(out / "comparison.json",
                           json.dumps(payload, indent=2, sort_keys=True).encode())
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    seed = 0 if cfg.seed is None else int(cfg.seed)
    report = run_gradcheck(seed=seed, fault=getattr(args, "fault", None))
    for line in report.lines():
        print(line)
    if report.passed:
        print(f"gradcheck PASS (tolerance {report.tolerance:g})")
        return EXIT_OK
    print(f"gradcheck FAIL: {', '.join(report.failed)}")
    return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        cfg = _load_config(args)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "featurize":
            return cmd_featurize(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "compare":
            return cmd_compare(args, cfg)
        return cmd_gradcheck(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, EpochSetFormatError, ReportFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonFiniteError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining validation failures come from the data (labels, shapes, splits)
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
