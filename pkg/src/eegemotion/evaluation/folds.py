from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FoldPlan:
    k: int
    repeats: int
    seed: int
    n: int
    permutations: tuple[np.ndarray, ...]

    def folds(self, repeat: int) -> list[np.ndarray]:
        """Test-index arrays of one repeat; sizes differ by at most one."""
        return np.array_split(self.permutations[repeat], self.k)

    def split(self, repeat: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_idx, test_idx) for one trial, both sorted."""
        folds = self.folds(repeat)
        test = np.sort(folds[fold])
        train = np.sort(np.concatenate([f for i, f in enumerate(folds) if i != fold]))
        return train, test

    def trials(self):
        for r in range(self.repeats):
            for f in range(self.k):
                yield r, f


def make_folds(n: int, k: int = 5, repeats: int = 5, seed: int = 0) -> FoldPlan:
    """Repeated K-fold over ``n`` instances; every repeat gets a distinct seeded permutation."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n < k:
        raise ValueError(f"need at least k={k} instances, got {n}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    perms: list[np.ndarray] = []
    seen: set[bytes] = set()
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        perm = rng.permutation(n)
        # tiny n can collide; redraw from the same stream (deterministic)
        while perm.tobytes() in seen:
            perm = rng.permutation(n)
        seen.add(perm.tobytes())
        perms.append(perm)
    return FoldPlan(k, repeats, seed, n, tuple(perms))
