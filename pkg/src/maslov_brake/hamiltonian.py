"""Polynomial Hamiltonians ``1/2 (Bz, z) + H(z)`` with ``N``-symmetry and their cutoff versions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, PreconditionError
from .symplectic import J_matrix, N_matrix

KINDS = ("first-order", "second-order-odd", "second-order-neumann")


@dataclass(frozen=True)
class Term:
    """``coeff * |z_part|^power`` (``radial``) or ``coeff * sum_i z_i^power`` (``coord``)."""

    shape: str
    power: int
    coeff: float

    def __post_init__(self):
        if self.shape not in ("radial", "coord"):
            raise ConfigError(f"unknown term shape {self.shape!r}")
        if self.power < 3 or (self.shape == "coord" and self.power % 2):
            raise ConfigError("terms need power >= 3 (even for coordinate terms)")


@dataclass
class HamiltonianSpec:
    """``H_hat(z) = 1/2 z.Bz + sum_terms(z restricted to part)``.

    ``part`` selects the coordinates the nonlinearity sees: ``full``, ``first``
    (the first ``n``) or ``second`` (the last ``n``).  For the second-order kinds
    the phase coordinates are ``(x, -x')`` (odd) or ``(x', x)`` (Neumann), so the
    nonlinearity is ``V`` on the position block and ``B`` holds the kinetic part.
    """

    n: int
    B: np.ndarray
    terms: tuple
    kind: str = "first-order"
    part: str = "full"
    name: str = "custom"
    r0: float = 1.0

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        if self.B.shape != (2 * self.n, 2 * self.n):
            raise ConfigError(f"B must be {2 * self.n}x{2 * self.n}")
        if not np.allclose(self.B, self.B.T, atol=1e-14):
            raise ConfigError("B must be symmetric")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}")
        if self.part not in ("full", "first", "second"):
            raise ConfigError(f"unknown part {self.part!r}")
        self.terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        if not self.terms:
            raise ConfigError("at least one nonlinear term is required")

    # ---- geometry ---------------------------------------------------------

    @property
    def mu(self) -> float:
        """Superquadratic exponent: the smallest power among the terms."""
        return float(min(t.power for t in self.terms))

    @property
    def norm_B(self) -> float:
        return float(np.linalg.norm(self.B, 2))

    def _slice(self) -> slice:
        n = self.n
        return {"full": slice(0, 2 * n), "first": slice(0, n), "second": slice(n, 2 * n)}[self.part]

    # ---- evaluators (rows of z are points) -----------------------------------

    def H(self, z) -> np.ndarray:
        """Nonlinear part ``H(z)``."""
        z = np.atleast_2d(z)
        w = z[:, self._slice()]
        r2 = np.sum(w * w, axis=1)
        out = np.zeros(len(z))
        for t in self.terms:
            if t.shape == "radial":
                out += t.coeff * r2 ** (t.power / 2)
            else:
                out += t.coeff * np.sum(w ** t.power, axis=1)
        return out

    def grad(self, z) -> np.ndarray:
        z = np.atleast_2d(z)
        sl = self._slice()
        w = z[:, sl]
        r2 = np.sum(w * w, axis=1)
        g = np.zeros_like(w)
        for t in self.terms:
            if t.shape == "radial":
                g += (t.coeff * t.power * r2 ** (t.power / 2 - 1))[:, None] * w
            else:
                g += t.coeff * t.power * w ** (t.power - 1)
        out = np.zeros_like(z, dtype=float)
        out[:, sl] = g
        return out

    def hess(self, z) -> np.ndarray:
        z = np.atleast_2d(z)
        sl = self._slice()
        w = z[:, sl]
        m = w.shape[1]
        r2 = np.sum(w * w, axis=1)
        h = np.zeros((len(z), m, m))
        eye = np.eye(m)
        for t in self.terms:
            p = t.power
            if t.shape == "radial":
                h += (t.coeff * p * r2 ** (p / 2 - 1))[:, None, None] * eye
                if p != 2:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        fac = np.where(r2 > 0, t.coeff * p * (p - 2) * r2 ** (p / 2 - 2), 0.0)
                    h += fac[:, None, None] * np.einsum("qi,qj->qij", w, w)
            else:
                h += t.coeff * p * (p - 1) * (w ** (p - 2))[:, :, None] * eye
        out = np.zeros((len(z), 2 * self.n, 2 * self.n))
        out[:, sl, sl] = h
        return out

    def point_derivatives(self, z: np.ndarray, hessian: bool = True):
        """Gradient and Hessian of ``H`` at a single point (the hot path of the integrators)."""
        sl = self._slice()
        w = z[sl]
        r2 = float(w @ w)
        g = np.zeros_like(w)
        h = np.zeros((len(w), len(w))) if hessian else None
        for t in self.terms:
            p, c = t.power, t.coeff
            if t.shape == "radial":
                f = c * p * r2 ** (p / 2 - 1)
                g += f * w
                if hessian:
                    h[np.diag_indices_from(h)] += f
                    if r2 > 0:
                        h += (c * p * (p - 2) * r2 ** (p / 2 - 2)) * np.outer(w, w)
            else:
                g += c * p * w ** (p - 1)
                if hessian:
                    h[np.diag_indices_from(h)] += c * p * (p - 1) * w ** (p - 2)
        G = np.zeros(2 * self.n)
        G[sl] = g
        if not hessian:
            return G, None
        Hm = np.zeros((2 * self.n, 2 * self.n))
        Hm[sl, sl] = h
        return G, Hm

    def energy(self, z) -> np.ndarray:
        z = np.atleast_2d(z)
        return 0.5 * np.einsum("qi,ij,qj->q", z, self.B, z) + self.H(z)

    def field(self, z: np.ndarray) -> np.ndarray:
        """``J (Bz + H'(z))`` for a single point."""
        return J_matrix(self.n) @ (self.B @ z + self.grad(z)[0])

    def full_hessian(self, z) -> np.ndarray:
        return self.B + self.hess(z)

    # ---- hypotheses ---------------------------------------------------------

    def check_conditions(self, seed: int = 0, samples: int = 400) -> dict:
        """Sampled checks of symmetry, superquadratic growth, ``o(|z|^2)`` at 0 and positivity."""
        rng = np.random.Generator(np.random.Philox(seed))
        n2 = 2 * self.n
        Nm = N_matrix(self.n)
        z = rng.standard_normal((samples, n2)) * rng.uniform(0.05, 5.0, (samples, 1))
        Hz = self.H(z)
        sym = float(np.max(np.abs(self.H(z @ Nm.T) - Hz) / np.maximum(1.0, np.abs(Hz))))
        far = z / np.linalg.norm(z, axis=1, keepdims=True) * rng.uniform(self.r0, 4 * self.r0 + 4, (samples, 1))
        Hf = self.H(far)
        gz = np.sum(self.grad(far) * far, axis=1)
        mu = self.mu
        h2 = bool(np.all((Hf > 0) & (mu * Hf <= gz * (1 + 1e-12))))
        small = []
        for r in (1e-2, 1e-3, 1e-4):
            u = z[:20] / np.linalg.norm(z[:20], axis=1, keepdims=True) * r
            small.append(float(np.max(self.H(u))) / r**2)
        ev_B = np.linalg.eigvalsh(self.B)
        Bblock = self.B.copy()
        Bblock[: self.n, self.n :] = 0
        Bblock[self.n :, : self.n] = 0
        return {
            "H1_symmetry": sym <= 1e-10,
            "H1_violation": sym,
            "H2_superquadratic": h2 and mu > 2,
            "H3_small": small[-1] < 1e-3 and small[-1] <= small[0],
            "H4_nonnegative": bool(np.all(Hz >= 0)),
            "B_semipositive": bool(ev_B.min() >= -1e-12),
            "B_block_diagonal": bool(np.allclose(Bblock, self.B)),
            "mu": mu,
        }

    def require_conditions(self, seed: int = 0) -> dict:
        c = self.check_conditions(seed)
        bad = [k for k in ("H1_symmetry", "H2_superquadratic", "H3_small", "H4_nonnegative", "B_semipositive", "B_block_diagonal") if not c[k]]
        if bad:
            raise PreconditionError(f"Hamiltonian {self.name!r} fails {bad}")
        return c

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "B": self.B.tolist(),
            "terms": [[t.shape, t.power, t.coeff] for t in self.terms],
            "kind": self.kind,
            "part": self.part,
            "r0": self.r0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        allowed = {"name", "n", "B", "terms", "kind", "part", "r0"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown Hamiltonian fields {sorted(unknown)}")
        try:
            n = int(d["n"])
            return cls(
                n,
                np.asarray(d.get("B", np.zeros((2 * n, 2 * n))), dtype=float),
                tuple(_term(t) for t in d["terms"]),
                d.get("kind", "first-order"),
                d.get("part", "full"),
                d.get("name", "custom"),
                float(d.get("r0", 1.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed Hamiltonian description: {exc}") from exc


def _term(t) -> Term:
    # terms come as [shape, power, coeff] or {"shape": ..., "power": ..., "coeff": ...}
    if isinstance(t, dict):
        extra = set(t) - {"shape", "power", "coeff"}
        if extra:
            raise ConfigError(f"unknown term fields {sorted(extra)}")
        return Term(str(t["shape"]), int(t["power"]), float(t.get("coeff", 1.0)))
    s, p, c = t
    return Term(str(s), int(p), float(c))


def builtin(name: str, n: int = 1) -> HamiltonianSpec:
    """Catalog: ``quartic-first-order``, ``quartic-plus-B``, ``second-order-x4``, ``second-order-even-poly``.

    The second-order entries use the odd-Dirichlet coordinates; see
    :func:`second_order_spec` for the Neumann form.
    """
    z = np.zeros((2 * n, 2 * n))
    if name == "quartic-first-order":
        return HamiltonianSpec(n, z, (Term("radial", 4, 1.0),), name=name)
    if name == "quartic-plus-B":
        B = z.copy()
        B[:n, :n] = np.eye(n)
        return HamiltonianSpec(n, B, (Term("radial", 4, 1.0),), name=name)
    if name == "second-order-x4":
        return second_order_spec((Term("radial", 4, 1.0),), n, "odd", name)
    if name == "second-order-even-poly":
        return second_order_spec((Term("radial", 4, 0.25), Term("radial", 6, 1.0 / 6.0)), n, "odd", name)
    raise ConfigError(f"unknown builtin Hamiltonian {name!r}")


BUILTINS = ("quartic-first-order", "quartic-plus-B", "second-order-x4", "second-order-even-poly")


def second_order_spec(v_terms, n: int = 1, variant: str = "odd", name: str = "second-order") -> HamiltonianSpec:
    """First-order form of ``x'' + V'(x) = 0`` for ``V = sum(v_terms)``.

    ``odd``: ``w = (x, -x')``, ``K = 1/2|y|^2 + V(x)``, boundary ``x(0) = x(tau/2) = 0``.
    ``neumann``: ``z = (x', x)``, ``B = diag(I, 0)``, boundary ``x'(0) = x'(tau/2) = 0``.
    """
    B = np.zeros((2 * n, 2 * n))
    if variant in ("odd", "odd-dirichlet"):
        B[n:, n:] = np.eye(n)
        return HamiltonianSpec(n, B, tuple(v_terms), "second-order-odd", "first", name)
    if variant == "neumann":
        B[:n, :n] = np.eye(n)
        return HamiltonianSpec(n, B, tuple(v_terms), "second-order-neumann", "second", name)
    raise ConfigError(f"unknown second-order variant {variant!r}")


def position(spec: HamiltonianSpec, z: np.ndarray) -> np.ndarray:
    """Configuration coordinates ``x`` of phase points (second-order kinds), else ``z`` itself."""
    z = np.atleast_2d(z)
    n = spec.n
    if spec.kind == "second-order-odd":
        return z[:, :n]
    if spec.kind == "second-order-neumann":
        return z[:, n:]
    return z


# ---------------------------------------------------------------------------
# cutoff Hamiltonian
# ---------------------------------------------------------------------------


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _bump_d(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos]) / u[pos] ** 2
    return out


@dataclass
class TruncationSpec:
    """``H_K = chi(|z|) H + (1 - chi(|z|)) R_K |z|^4`` with a smooth step ``chi`` on ``[K, K + 1]``."""

    base: HamiltonianSpec
    K: float
    R_K: float
    chi: str = "exp(-1/u) partition"
    details: dict = field(default_factory=dict)

    def chi_value(self, r) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.K + 1.0 - np.asarray(r), np.asarray(r) - self.K
        fa, fb = _bump(a), _bump(b)
        s = fa + fb
        chi = fa / s
        dchi = (-_bump_d(a) * fb - fa * _bump_d(b)) / s**2
        return chi, dchi

    def H(self, z) -> np.ndarray:
        z = np.atleast_2d(z)
        r = np.linalg.norm(z, axis=1)
        chi, _ = self.chi_value(r)
        return chi * self.base.H(z) + (1 - chi) * self.R_K * r**4

    def grad(self, z) -> np.ndarray:
        z = np.atleast_2d(z)
        r = np.linalg.norm(z, axis=1)
        chi, dchi = self.chi_value(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(r[:, None] > 0, z / r[:, None], 0.0)
        quart = self.R_K * r**4
        return (
            (dchi * (self.base.H(z) - quart))[:, None] * unit
            + chi[:, None] * self.base.grad(z)
            + ((1 - chi) * 4 * self.R_K * r**2)[:, None] * z
        )

    def hess(self, z, h: float = 1e-6) -> np.ndarray:
        """Exact inside ``|z| <= K`` and outside ``K + 1``; central differences of the gradient in the collar."""
        z = np.atleast_2d(z)
        r = np.linalg.norm(z, axis=1)
        out = self.base.hess(z)
        outer = r >= self.K + 1
        if np.any(outer):
            zo = z[outer]
            ro2 = np.sum(zo * zo, axis=1)
            eye = np.eye(z.shape[1])
            out[outer] = self.R_K * (4 * ro2[:, None, None] * eye + 8 * np.einsum("qi,qj->qij", zo, zo))
        collar = (r > self.K) & ~outer
        for q in np.flatnonzero(collar):
            cols = []
            for i in range(z.shape[1]):
                e = np.zeros(z.shape[1])
                e[i] = h
                cols.append((self.grad(z[q] + e)[0] - self.grad(z[q] - e)[0]) / (2 * h))
            Hq = np.array(cols).T
            out[q] = 0.5 * (Hq + Hq.T)
        return out


def truncate_hamiltonian(spec: HamiltonianSpec, K: float, samples: int = 2000, seed: int = 0, safety: float = 1.1) -> TruncationSpec:
    """Cutoff at radius ``K`` with ``R_K = safety * max H/|z|^4`` sampled on ``K <= |z| <= K + 1``."""
    if K <= 0:
        raise ValueError("K must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    d = rng.standard_normal((samples, 2 * spec.n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.uniform(K, K + 1, samples)
    z = d * r[:, None]
    ratio = spec.H(z) / r**4
    if not np.all(np.isfinite(ratio)):
        raise PreconditionError("R_K sampling produced non-finite values")
    R = safety * float(np.max(ratio))
    return TruncationSpec(spec, float(K), R, details={"samples": samples, "max_ratio": float(np.max(ratio))})
