"""Seeded random brake-symmetric coefficient paths.

``B(t) = sum_j cos(j pi t) C_j + sin(j pi t) E_j`` with ``C_j`` block-diagonal
symmetric (commutes with ``N``) and ``E_j = [[0, F], [F^T, 0]]`` (anticommutes
with ``N``).  These satisfy ``B(1 + t) N = N B(1 - t)`` and ``B(t + 2) = B(t)``
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symplectic import CoefficientPath


@dataclass
class CorpusSample:
    seed: int
    index: int
    n: int
    order: int
    scale: float
    cos_blocks: np.ndarray
    sin_blocks: np.ndarray

    @property
    def path(self) -> CoefficientPath:
        return CoefficientPath.from_fourier(list(self.cos_blocks), list(self.sin_blocks), brake_symmetric=True)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "index": self.index,
            "n": self.n,
            "order": self.order,
            "scale": self.scale,
            "cos": self.cos_blocks.tolist(),
            "sin": self.sin_blocks.tolist(),
        }


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for one sample; independent of how many samples precede it."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _sym(rng: np.random.Generator, k: int) -> np.ndarray:
    X = rng.standard_normal((k, k))
    return 0.5 * (X + X.T)


def generate_sample(n: int, seed: int, index: int, scale: float = 2.0, order: int = 2) -> CorpusSample:
    rng = sample_rng(seed, index)
    C = np.zeros((order + 1, 2 * n, 2 * n))
    E = np.zeros((order, 2 * n, 2 * n))
    for j in range(order + 1):
        C[j, :n, :n] = _sym(rng, n)
        C[j, n:, n:] = _sym(rng, n)
    for j in range(order):
        F = rng.standard_normal((n, n))
        E[j, :n, n:] = F
        E[j, n:, :n] = F.T
    # higher harmonics are damped; the total size is a random fraction of scale
    weights = 1.0 / (1.0 + np.arange(order + 1)) ** 2
    C *= weights[:, None, None]
    E *= weights[1:, None, None]
    total = sum(np.linalg.norm(M, 2) for M in C) + sum(np.linalg.norm(M, 2) for M in E)
    target = scale * rng.uniform(0.5, 1.0)
    factor = target / total if total > 0 else 0.0
    return CorpusSample(int(seed), int(index), n, order, float(scale), C * factor, E * factor)


def generate_corpus(n: int, count: int, seed: int, scale: float = 2.0, order: int = 2) -> list[CorpusSample]:
    """``count`` samples; sample ``i`` depends only on ``(seed, i)``, and ``sup |B(t)| <= scale``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [generate_sample(n, seed, i, scale, order) for i in range(count)]


def mixed_corpus(count_per_n: int, seed: int, scales=(0.5, 2.0, 8.0), dims=(1, 2, 3)) -> list[CorpusSample]:
    """Samples over several dimensions and scales, cycling the scales within each dimension."""
    out = []
    for n in dims:
        for i in range(count_per_n):
            out.append(generate_sample(n, seed + 1000 * n, i, scales[i % len(scales)]))
    return out
