"""Experiment configuration: a JSON file, overridable field by field from the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

from .corpus.labels import LabelScheme
from .corpus.records import Geometry, get_geometry
from .corpus.synth import DEFAULT_SNR_DB, SynthConfig, scheme_for_classes
from .nn.network import ModelConfig
from .nn.train import TrainConfig
from .signal_core import SCALING_MODES, FilterSpec, StftPlan

# epochs longer than this at SEED geometry are cut to their first 80 s
SEED_MAX_SAMPLES = 16000


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    seed: Optional[int] = None
    geometry: Union[str, dict] = "dens"
    classes: int = 3
    per_class: int = 50
    snr_db: float = DEFAULT_SNR_DB
    scheme: dict = field(default_factory=dict)
    bandpass: Optional[dict] = None
    stft: dict = field(default_factory=dict)
    scaling: str = "log+minmax"
    model: Union[str, dict] = "reduced"
    train: dict = field(default_factory=dict)
    folds: dict = field(default_factory=lambda: {"k": 5, "repeats": 5})
    epochset: Optional[str] = None
    out: Optional[str] = None
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except ValueError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(d)

    def override(self, **values: Any) -> "ExperimentConfig":
        """Return a copy with every non-None value applied; nested dicts merge key by key."""
        d = self.to_dict()
        for key, value in values.items():
            if value is None:
                continue
            if key not in d:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(value, dict) and isinstance(d[key], dict):
                d[key] = {**d[key], **{k: v for k, v in value.items() if v is not None}}
            else:
                d[key] = value
        return ExperimentConfig.from_dict(d)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    def echo(self) -> dict:
        """Settings embedded in outputs; the output location is left out so that
        identical runs written to different directories stay byte-identical."""
        d = self.to_dict()
        d.pop("out")
        return d

    # resolution into library objects; every failure surfaces as ConfigError

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required (--seed or \"seed\" in the config file)")
        return int(self.seed)

    def resolve_geometry(self) -> Geometry:
        try:
            if isinstance(self.geometry, str):
                return get_geometry(self.geometry)
            g = self.geometry
            return Geometry(g.get("name", "custom"), int(g["channels"]), int(g["samples"]),
                            float(g["fs"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad geometry {self.geometry!r}: {exc}") from exc

    def resolve_scheme(self, classes: Optional[int] = None,
                       default_kind: Optional[str] = None) -> LabelScheme:
        classes = classes or self.classes
        d = dict(self.scheme)
        d.setdefault("kind", default_kind or scheme_for_classes(classes))
        if d["kind"] == "discrete":
            d.setdefault("n_discrete", classes)
        try:
            return LabelScheme(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad label scheme {self.scheme!r}: {exc}") from exc

    def resolve_plan(self, fs: float) -> StftPlan:
        try:
            base = StftPlan.from_seconds(fs)
            return StftPlan(int(self.stft.get("frame_size", base.frame_size)),
                            int(self.stft.get("hop", base.hop)),
                            self.stft.get("window", base.window))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad STFT settings {self.stft!r}: {exc}") from exc

    def resolve_bandpass(self, fs: float) -> Optional[FilterSpec]:
        if self.bandpass is None:
            return None
        b = self.bandpass
        try:
            spec = FilterSpec(int(b.get("order", 5)), float(b.get("low_hz", 1.0)),
                              float(b.get("high_hz", 40.0)), fs)
            spec.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad bandpass {b!r}: {exc}") from exc
        return spec

    def resolve_scaling(self) -> str:
        if self.scaling not in SCALING_MODES:
            raise ConfigError(f"unknown scaling {self.scaling!r}; expected one of {SCALING_MODES}")
        return self.scaling

    def resolve_model(self) -> ModelConfig:
        m = self.model
        if m == "full":
            return ModelConfig.full()
        if m == "reduced":
            return ModelConfig.reduced()
        if isinstance(m, dict):
            base = ModelConfig.full() if m.get("base") == "full" else ModelConfig.reduced()
            d = {**base.to_dict(), **{k: v for k, v in m.items() if k != "base"}}
            try:
                return ModelConfig.from_dict(d)
            except TypeError as exc:
                raise ConfigError(f"bad model settings: {exc}") from exc
        raise ConfigError(f"model must be 'full', 'reduced' or an object, got {m!r}")

    def resolve_train(self) -> TrainConfig:
        d = dict(self.train)
        if self.seed is not None:
            d.setdefault("seed", int(self.seed))
        if "max_epochs" in d and "patience" not in d:
            d["patience"] = min(TrainConfig.patience, int(d["max_epochs"]))
        try:
            return TrainConfig.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad train settings {self.train!r}: {exc}") from exc

    def resolve_folds(self) -> tuple[int, int]:
        try:
            k, repeats = int(self.folds.get("k", 5)), int(self.folds.get("repeats", 5))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad fold settings {self.folds!r}") from exc
        if k < 2 or repeats < 1:
            raise ConfigError(f"folds need k >= 2 and repeats >= 1, got {self.folds!r}")
        return k, repeats

    def resolve_synth(self) -> SynthConfig:
        return SynthConfig(snr_db=float(self.snr_db))
