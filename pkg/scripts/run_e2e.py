"""Full repeated K-fold run on a synthetic DENS-geometry corpus.

Mirrors `eegemotion synth` + `eegemotion run` with the defaults used for the
acceptance run (3 classes x 50 epochs, reduced model, 5x5 folds, 2 epochs).

    python scripts/run_e2e.py --out runs/e2e --max-epochs 2
"""

import argparse
import logging
import time
from dataclasses import asdict, dataclass

from eegemotion.corpus import DENS, LabelScheme, SynthConfig, synth_generate
from eegemotion.evaluation import run_experiment, write_report
from eegemotion.nn import ModelConfig, TrainConfig


@dataclass
class E2EConfig:
    classes: int = 3
    per_class: int = 50
    snr_db: float = SynthConfig.snr_db
    corpus_seed: int = 7
    run_seed: int = 2024
    k: int = 5
    repeats: int = 5
    max_epochs: int = 2
    workers: int = 1


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True)
    for f, default in asdict(E2EConfig()).items():
        ap.add_argument("--" + f.replace("_", "-"), type=type(default), default=default)
    args = vars(ap.parse_args())
    out = args.pop("out")
    cfg = E2EConfig(**args)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    t0 = time.perf_counter()
    epochs = synth_generate(DENS, cfg.classes, cfg.per_class, cfg.corpus_seed, SynthConfig(snr_db=cfg.snr_db))
    report = run_experiment(epochs, LabelScheme(epochs.scheme), net_config=ModelConfig.reduced(),
                            train_config=TrainConfig(max_epochs=cfg.max_epochs, patience=cfg.max_epochs),
                            k=cfg.k, repeats=cfg.repeats, seed=cfg.run_seed, workers=cfg.workers,
                            config_echo=asdict(cfg))
    write_report(report, out)
    s = report.scores
    print(f"{len(s)} trials, macro-F1 {s.mean:.2f} ± {s.sd:.2f} in {time.perf_counter() - t0:.0f}s -> {out}")


if __name__ == "__main__":
    main()
