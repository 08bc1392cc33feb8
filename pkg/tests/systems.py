"""Seeded generators of coefficient paths with sign structure, shared by the property and acceptance tests."""

import numpy as np
from scipy.integrate import trapezoid

from maslov_brake.corpus import generate_sample
from maslov_brake.symplectic import CoefficientPath


def _rng(tag, seed):
    return np.random.Generator(np.random.Philox(key=[tag, seed]))


def positive_s22_path(seed, n=None, scale=2.0):
    """Brake-symmetric corpus path with the lower-right block lifted to be positive definite."""
    n = n or 1 + seed % 3
    base = generate_sample(n, 900 + seed, seed, scale).path
    lift = base.norm_bound(0.0, 1.0) + 0.25
    shift = np.zeros((2 * n, 2 * n))
    shift[n:, n:] = lift * np.eye(n)
    return base.shifted_by(CoefficientPath.constant(shift))


def _gram_path(G):
    # B(t) = G(t) G(t)^T with G(t) = G0 + cos(pi t) G1 + sin(pi t) G2
    def func(t):
        c, s = np.cos(np.pi * t), np.sin(np.pi * t)
        Gt = G[0][None] + c[:, None, None] * G[1][None] + s[:, None, None] * G[2][None]
        return Gt @ np.transpose(Gt, (0, 2, 1))

    return func


def semipositive_path(seed, n=None, scale=1.5):
    """``B(t) >= 0`` with ``int B > 0``; every third path has pointwise rank below ``2n``."""
    rng = _rng(1, seed)
    n = n or 1 + seed % 3
    rank = 2 * n if seed % 3 else max(1, n)
    G = rng.standard_normal((3, 2 * n, rank)) * np.sqrt(scale / (2 * n))
    path = CoefficientPath(n, _gram_path(G), representation="gram")
    return path


def integral_min_eig(B, samples=513):
    t = np.linspace(0.0, 1.0, samples)
    return float(np.min(np.linalg.eigvalsh(trapezoid(B(t), x=t, axis=0))))


def monotone_pair(seed, n=None, scale=2.0):
    """``(B1, B2)`` with ``B1(t) - B2(t) >= delta I`` for a positive ``delta``."""
    rng = _rng(2, seed)
    n = n or 1 + seed % 3
    B2 = generate_sample(n, 500 + seed, seed, scale).path
    G = rng.standard_normal((3, 2 * n, 2 * n)) * 0.3
    delta = 0.1 + rng.uniform(0.0, 1.0)
    gram = _gram_path(G)
    extra = CoefficientPath(n, lambda t: gram(t) + delta * np.eye(2 * n)[None], representation="gram")
    return B2.shifted_by(extra), B2
