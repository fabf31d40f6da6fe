from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..corpus.features import featurize_epochset
from ..corpus.labels import LabelScheme
from ..corpus.records import EpochSet
from ..nn.network import ModelConfig, build_network, predict
from ..nn.train import TrainConfig, train
from ..signal_core import BiquadCascade, StftPlan
from .folds import make_folds
from .metrics import ConfusionMatrix, confusion, f1
from .stats import ScoreSet

log = logging.getLogger(__name__)


def trial_seed(master: int, repeat: int, fold: int) -> int:
    """Deterministic per-trial seed derived from (master, repeat, fold)."""
    return int(np.random.SeedSequence([master, repeat, fold]).generate_state(1)[0])


@dataclass
class TrialResult:
    trial: int
    repeat: int
    fold: int
    seed: int
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    f1_macro: float
    f1_micro: float
    f1_weighted: float
    accuracy: float
    stopped_epoch: int
    best_epoch: int

    def to_dict(self) -> dict:
        return {
            "trial": self.trial, "repeat": self.repeat, "fold": self.fold, "seed": self.seed,
            "n_train": self.n_train, "n_test": self.n_test,
            "confusion": self.confusion.counts.tolist(),
            "f1_macro": self.f1_macro, "f1_micro": self.f1_micro, "f1_weighted": self.f1_weighted,
            "accuracy": self.accuracy, "stopped_epoch": self.stopped_epoch,
            "best_epoch": self.best_epoch,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialResult":
        d = dict(d)
        d["confusion"] = ConfusionMatrix(np.asarray(d["confusion"]))
        return cls(**d)


@dataclass
class RunReport:
    trials: list[TrialResult]
    n_classes: int
    master_seed: int
    k: int
    repeats: int
    config: dict = field(default_factory=dict)

    @property
    def scores(self) -> ScoreSet:
        return ScoreSet(tuple(t.f1_macro for t in self.trials))

    def score_set(self, metric: str = "f1_macro") -> ScoreSet:
        return ScoreSet(tuple(getattr(t, metric) if metric != "accuracy" else 100.0 * t.accuracy
                              for t in self.trials))

    @property
    def structure(self) -> list[tuple[int, int]]:
        return [(t.repeat, t.fold) for t in self.trials]

    def pooled_confusion(self) -> ConfusionMatrix:
        total = self.trials[0].confusion
        for t in self.trials[1:]:
            total = total + t.confusion
        return total

    def summary(self) -> dict:
        s = self.scores
        return {"n_trials": len(self.trials), "f1_macro_mean": s.mean, "f1_macro_sd": s.sd,
                "f1_micro_mean": self.score_set("f1_micro").mean,
                "accuracy_mean": float(np.mean([t.accuracy for t in self.trials]))}


@dataclass(frozen=True)
class _TrialJob:
    repeat: int
    fold: int
    trial: int
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray


# module-level state shared with forked workers; avoids pickling the features per job
_SHARED: dict = {}


def _run_trial(job: _TrialJob) -> TrialResult:
    X, y = _SHARED["X"], _SHARED["y"]
    n_classes, model, tcfg = _SHARED["n_classes"], _SHARED["model"], _SHARED["train"]
    net = build_network((*X.shape[1:], 3), n_classes, model, seed=job.seed)
    best, history = train(net, X[job.train_idx], y[job.train_idx], replace(tcfg, seed=job.seed))
    y_true = y[job.test_idx]
    y_pred = predict(best, X[job.test_idx])
    conf = confusion(y_true, y_pred, n_classes)
    result = TrialResult(job.trial, job.repeat, job.fold, job.seed, int(job.train_idx.size),
                         int(job.test_idx.size), conf, f1(conf, "macro"), f1(conf, "micro"),
                         f1(conf, "weighted"), conf.accuracy, history.stopped_epoch,
                         history.best_epoch)
    log.info("trial %d (repeat %d fold %d): macro-F1 %.2f", job.trial, job.repeat, job.fold,
             result.f1_macro)
    return result


def run_features(X: np.ndarray, y: np.ndarray, n_classes: int,
                 net_config: ModelConfig = ModelConfig.reduced(),
                 train_config: TrainConfig = TrainConfig(), k: int = 5, repeats: int = 5,
                 seed: int = 0, workers: int = 1, config_echo: Optional[dict] = None) -> RunReport:
    """Repeated K-fold over pre-computed single-plane features ``X`` (n, bins, frames)."""
    plan = make_folds(len(y), k, repeats, seed)
    jobs = []
    for trial, (r, f) in enumerate(plan.trials()):
        train_idx, test_idx = plan.split(r, f)
        jobs.append(_TrialJob(r, f, trial, trial_seed(seed, r, f), train_idx, test_idx))
    _SHARED.update(X=X, y=y, n_classes=n_classes, model=net_config, train=train_config)
    try:
        if workers > 1:
            import multiprocessing as mp
            with ProcessPoolExecutor(workers, mp_context=mp.get_context("fork")) as pool:
                # map preserves submission order, so results do not depend on completion order
                trials = list(pool.map(_run_trial, jobs))
        else:
            trials = [_run_trial(job) for job in jobs]
    finally:
        _SHARED.clear()
    return RunReport(trials, n_classes, seed, k, repeats, dict(config_echo or {}))


def run_experiment(epochs: EpochSet, scheme: LabelScheme, plan: Optional[StftPlan] = None,
                   net_config: ModelConfig = ModelConfig.reduced(),
                   train_config: TrainConfig = TrainConfig(), k: int = 5, repeats: int = 5,
                   seed: int = 0, scaling: str = "log+minmax",
                   bandpass: Optional[BiquadCascade] = None, workers: int = 1,
                   config_echo: Optional[dict] = None) -> RunReport:
    """Featurize ``epochs`` and run the repeated K-fold protocol on the instances."""
    plan = plan or StftPlan.from_seconds(epochs.geometry.fs)
    t0 = time.perf_counter()
    X, y = featurize_epochset(epochs, scheme, plan, scaling, bandpass)
    log.info("featurized %d instances of %s in %.1fs", len(y), X.shape[1:], time.perf_counter() - t0)
    return run_features(X, y, scheme.n_classes, net_config, train_config, k, repeats, seed,
                        workers, config_echo)
