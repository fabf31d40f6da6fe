"""Controlled comparison: the same pipeline on an easy and a hard corpus.

Runs two repeated K-fold experiments that differ only in synthetic SNR, then
Welch-tests their macro-F1 score sets. The easier corpus should score higher
with p < 0.05.

    python scripts/compare_snr.py --easy -10 --hard -18 --out runs/snr
"""

import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from eegemotion.corpus import DENS, LabelScheme, SynthConfig, synth_generate
from eegemotion.evaluation import compare, run_experiment, write_report
from eegemotion.nn import ModelConfig, TrainConfig


@dataclass
class SnrComparison:
    easy_db: float = -10.0
    hard_db: float = -18.0
    per_class: int = 50
    seed: int = 11
    k: int = 5
    repeats: int = 2
    max_epochs: int = 2
    workers: int = 1


def run_at(snr_db: float, cfg: SnrComparison, out: Path):
    epochs = synth_generate(DENS, 3, cfg.per_class, cfg.seed, SynthConfig(snr_db=snr_db))
    report = run_experiment(epochs, LabelScheme(epochs.scheme), net_config=ModelConfig.reduced(),
                            train_config=TrainConfig(max_epochs=cfg.max_epochs, patience=cfg.max_epochs),
                            k=cfg.k, repeats=cfg.repeats, seed=cfg.seed, workers=cfg.workers,
                            config_echo={**asdict(cfg), "snr_db": snr_db})
    write_report(report, out)
    return report


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True)
    ap.add_argument("--easy", type=float, default=SnrComparison.easy_db)
    ap.add_argument("--hard", type=float, default=SnrComparison.hard_db)
    ap.add_argument("--repeats", type=int, default=SnrComparison.repeats)
    ap.add_argument("--workers", type=int, default=SnrComparison.workers)
    args = ap.parse_args()
    cfg = SnrComparison(easy_db=args.easy, hard_db=args.hard, repeats=args.repeats, workers=args.workers)
    out = Path(args.out)

    easy = run_at(cfg.easy_db, cfg, out / "easy")
    hard = run_at(cfg.hard_db, cfg, out / "hard")
    cmp = compare(easy, hard, f"{cfg.easy_db:g} dB", f"{cfg.hard_db:g} dB")
    print(cmp.table)
    (out / "comparison.json").write_text(json.dumps(cmp.result.to_dict(), indent=2, sort_keys=True))
    verdict = cmp.result.mean_a > cmp.result.mean_b and cmp.result.p < 0.05
    print("easy corpus scores higher at p < 0.05:", "yes" if verdict else "no")


if __name__ == "__main__":
    main()
