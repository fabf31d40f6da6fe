"""Welch two-sample t-test, Cohen's d, and a self-contained Student t CDF.

The t CDF goes through the regularized incomplete beta function, evaluated
with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_CF_MAX_ITER = 500
_CF_EPS = 1e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz; converges for x < (a+1)/(a+b+2)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"betainc needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    half_tail = 0.5 * t_sf2(t, df)
    return 1.0 - half_tail if t >= 0 else half_tail


@dataclass(frozen=True)
class ScoreSet:
    """Per-trial F1 scores in percent."""

    scores: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(v) for v in self.scores)
        if not s:
            raise ValueError("empty score set")
        for v in s:
            if not (0.0 <= v <= 100.0):
                raise ValueError(f"score {v} outside [0, 100]")
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def sd(self) -> float:
        return float(np.std(self.scores, ddof=1)) if len(self.scores) > 1 else 0.0

    @classmethod
    def with_summary(cls, mean: float, sd: float, n: int = 25, seed: int = 0) -> "ScoreSet":
        """Scores whose sample mean and SD equal ``mean`` and ``sd`` exactly (up to rounding)."""
        if n < 2:
            raise ValueError("need n >= 2")
        z = np.random.default_rng(seed).standard_normal(n)
        z = (z - z.mean()) / z.std(ddof=1)
        return cls(tuple(mean + sd * z))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    cohen_d: float
    ci95_d: tuple[float, float]
    mean_a: float
    mean_b: float
    sd_a: float
    sd_b: float
    n_a: int
    n_b: int

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ci95_d"] = list(self.ci95_d)
        return d


def welch_t(a: ScoreSet | Sequence[float], b: ScoreSet | Sequence[float]) -> TTestResult:
    a = a if isinstance(a, ScoreSet) else ScoreSet(tuple(a))
    b = b if isinstance(b, ScoreSet) else ScoreSet(tuple(b))
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each score set needs at least 2 scores")
    ma, mb = a.mean, b.mean
    va, vb = a.sd ** 2, b.sd ** 2
    if va == 0.0 and vb == 0.0:
        if ma != mb:
            raise ValueError("both score sets have zero variance; t is undefined")
        # two identical constants: no evidence of a difference
        return TTestResult(0.0, float(na + nb - 2), 1.0, 0.0, (0.0, 0.0), ma, mb, 0.0, 0.0, na, nb)
    qa, qb = va / na, vb / nb
    se2 = qa + qb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 ** 2 / (qa ** 2 / (na - 1) + qb ** 2 / (nb - 1))
    p = min(1.0, max(0.0, t_sf2(t, df)))
    d = (ma - mb) / math.sqrt((va + vb) / 2.0)
    half = 1.96 * math.sqrt((na + nb) / (na * nb) + d * d / (2.0 * (na + nb - 2)))
    return TTestResult(t, df, p, d, (d - half, d + half), ma, mb, a.sd, b.sd, na, nb)
