"""Brake iteration of symplectic paths, splitting numbers and iteration-formula checks.

For brake-symmetric ``B`` the fundamental solution satisfies
``gamma(1 + s) = N gamma(1 - s) gamma(1)^{-1} N gamma(1)`` and
``gamma(t + 2) = gamma(t) gamma(2)``, so the whole solution on ``[0, k]`` is
assembled from ``gamma`` on ``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import NumericalError, PreconditionError, StabilizationError
from .galerkin import IndexPolicy, index_l0_omega, index_omega_periodic
from .symplectic import (
    CoefficientPath,
    N_matrix,
    SymplecticPath,
    integrate_fundamental,
    symplectic_inverse,
    unit_spectrum,
)
from .winding import l0_index, omega_nullity

SPLIT_LADDER = (1e-2, 1e-3, 1e-4)


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------


@dataclass
class IteratedPath:
    base: SymplecticPath
    k: int
    full: SymplecticPath
    M1: np.ndarray
    M2: np.ndarray
    junction_error: float


def second_period_matrix(M1: np.ndarray) -> np.ndarray:
    """``gamma(2) = N gamma(1)^{-1} N gamma(1)``."""
    Nm = N_matrix(M1.shape[0] // 2)
    return Nm @ symplectic_inverse(M1) @ Nm @ M1


def iterate_path(base: SymplecticPath, k: int, tol: float = 1e-8) -> IteratedPath:
    """Assemble ``gamma^k`` on ``[0, k]`` from ``gamma`` on ``[0, 1]``.

    Segment ``[2j - 2, 2j - 1]`` is ``gamma(t - 2j + 2) gamma(2)^{j-1}`` and segment
    ``[2j - 1, 2j]`` is ``N gamma(2j - t) gamma(1)^{-1} N gamma(1) gamma(2)^{j-1}``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if abs(base.T - 1.0) > 1e-12:
        raise PreconditionError("base path must be defined on [0, 1]")
    n = base.n
    Nm = N_matrix(n)
    M1 = base.end
    M2 = second_period_matrix(M1)
    reflect = symplectic_inverse(M1) @ Nm @ M1
    g, F = base.grid, base.frames
    grids = [g]
    frames = [F]
    power = np.eye(2 * n)
    worst = 0.0
    for seg in range(1, k):
        # segment seg covers [seg, seg + 1]
        if seg % 2 == 1:
            t = seg + (1.0 - g[::-1])
            P = Nm @ F[::-1] @ reflect @ power
        else:
            power = power @ M2
            t = seg + g
            P = F @ power
        worst = max(worst, float(np.max(np.abs(P[0] - frames[-1][-1]))) / max(1.0, float(np.max(np.abs(P[0])))))
        grids.append(t[1:])
        frames.append(P[1:])
    if worst > tol:
        raise NumericalError(f"junction mismatch {worst:.3e} in iterated path")
    full = SymplecticPath(n, np.concatenate(grids), np.concatenate(frames), base.interp)
    if base.refine is not None:
        parent = base.refine
        full.refine = lambda: iterate_path(parent(), k, tol).full
    return IteratedPath(base, k, full, M1, M2, worst)


def bott_roots(k: int) -> list[complex]:
    """``omega_k^{2i}`` for the ranges used in the odd and even iteration formulas."""
    top = k // 2 if k % 2 else k // 2 - 1
    return [complex(np.exp(2j * np.pi * i / k)) for i in range(1, top + 1)]


# ---------------------------------------------------------------------------
# normal-form endpoint paths and splitting numbers
# ---------------------------------------------------------------------------


def normal_form_path(kind: str, *params) -> CoefficientPath:
    """Constant or simple coefficient paths on ``[0, 1]`` ending at a 2x2 normal form.

    ``('N1', 1, b)``, ``('N1', -1, b)``, ``('R', theta)`` and ``('hyperbolic', a)``
    (endpoint ``diag(e^a, e^-a)``).
    """
    if kind == "N1":
        lam, b = params
        if lam == 1:
            return CoefficientPath.constant(np.diag([0.0, -float(b)]))
        if lam == -1:
            D = np.diag([0.0, float(b)])

            def func(t):
                c, s = np.cos(np.pi * t), np.sin(np.pi * t)
                R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
                return np.pi * np.eye(2) + R @ D @ np.swapaxes(R, 1, 2)

            return CoefficientPath(1, func, representation="callable", data={"kind": "N1", "lambda": -1, "b": b})
        raise ValueError("N1 needs lambda = +-1")
    if kind == "R":
        (theta,) = params
        return CoefficientPath.constant(float(theta) * np.eye(2))
    if kind == "hyperbolic":
        (a,) = params
        return CoefficientPath.constant(np.array([[0.0, -a], [-a, 0.0]]))
    raise ValueError(f"unsupported normal form {kind!r}")


@dataclass
class SplittingNumbers:
    Splus: int
    Sminus: int
    omega: complex
    eps: float
    nu: int
    ladder: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "Splus": self.Splus,
            "Sminus": self.Sminus,
            "omega": [self.omega.real, self.omega.imag],
            "eps": self.eps,
            "nu": self.nu,
            "ladder": self.ladder,
        }


def splitting_numbers(B: CoefficientPath, omega, ladder=SPLIT_LADDER, policy: Optional[IndexPolicy] = None) -> SplittingNumbers:
    """One-sided jumps of ``omega -> i_omega`` at ``omega`` for the fundamental solution of ``B``."""
    w = complex(omega) if isinstance(omega, complex) else complex(np.exp(1j * float(omega)))
    M = integrate_fundamental(B).end
    centre = index_omega_periodic(B, w, policy, endpoint=M)
    values: dict[str, list[int]] = {"+": [], "-": []}
    for eps in ladder:
        for sign, key in ((1, "+"), (-1, "-")):
            p = index_omega_periodic(B, w * np.exp(1j * sign * eps), policy, endpoint=M)
            values[key].append(p.i - centre.i)
    for key, vals in values.items():
        if len(vals) >= 2 and vals[-1] != vals[-2]:
            raise StabilizationError(f"splitting number S{key} did not stabilize: {vals}")
    return SplittingNumbers(values["+"][-1], values["-"][-1], w, float(ladder[-1]), centre.nu, values)


# ---------------------------------------------------------------------------
# Bott-type formulas
# ---------------------------------------------------------------------------


@dataclass
class BottReport:
    k: int
    lhs_i: int
    rhs_i: int
    lhs_nu: int
    rhs_nu: int
    components: dict

    @property
    def equal(self) -> bool:
        return self.lhs_i == self.rhs_i and self.lhs_nu == self.rhs_nu

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "lhs_i": self.lhs_i,
            "rhs_i": self.rhs_i,
            "lhs_nu": self.lhs_nu,
            "rhs_nu": self.rhs_nu,
            "equal": self.equal,
            "components": self.components,
        }


class IterationContext:
    """Shared, lazily computed indices of one brake-symmetric system."""

    def __init__(self, B: CoefficientPath, policy: Optional[IndexPolicy] = None, steps: Optional[int] = None):
        if not B.brake_symmetric:
            raise PreconditionError("iteration formulas need a brake-symmetric coefficient path")
        self.B = B
        self.n = B.n
        self.policy = policy
        self.base = integrate_fundamental(B, 1.0, steps)
        self.M1 = self.base.end
        self.M2 = second_period_matrix(self.M1)
        self.B2 = B.rescaled(2.0)
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def iterated(self, k: int) -> IteratedPath:
        return self._memo(("iter", k), lambda: iterate_path(self.base, k))

    def l0(self, k: int):
        return self._memo(("l0", k), lambda: l0_index(self.iterated(k).full))

    def omega2(self, w: complex):
        key = ("w2", round(w.real, 13), round(w.imag, 13))
        return self._memo(key, lambda: index_omega_periodic(self.B2, w, self.policy, endpoint=self.M2))

    def one1(self):
        """``(i_1, nu_1)`` of ``gamma`` itself on ``[0, 1]``."""
        return self._memo("w1", lambda: index_omega_periodic(self.B, 1.0 + 0j, self.policy, endpoint=self.M1))

    def l0_sqrt_minus_one(self):
        return self._memo("l0i", lambda: index_l0_omega(self.B, np.pi / 2, self.policy, endpoint=self.M1))

    def nu1_power(self, k: int) -> int:
        """``nu_1(gamma^{2k}) = dim ker(gamma(2)^k - I)``."""
        return omega_nullity(np.linalg.matrix_power(self.M2, k), 1.0 + 0j)


def bott_l0_check(B: CoefficientPath, k: int, ctx: Optional[IterationContext] = None) -> BottReport:
    ctx = ctx or IterationContext(B)
    lhs = ctx.l0(k)
    one = ctx.l0(1)
    rhs_i, rhs_nu = one.i, one.nu
    comp = {"i_L0(1)": one.i, "nu_L0(1)": one.nu, "i_L0(k)": lhs.i, "nu_L0(k)": lhs.nu, "omega": []}
    if k % 2 == 0:
        q = ctx.l0_sqrt_minus_one()
        rhs_i += q.i
        rhs_nu += q.nu
        comp["i_L0_sqrt-1(1)"] = q.i
        comp["nu_L0_sqrt-1(1)"] = q.nu
        comp["intersection_sqrt-1(1)"] = q.params["intersection_dim"]
    for w in bott_roots(k):
        p = ctx.omega2(w)
        rhs_i += p.i
        rhs_nu += p.nu
        comp["omega"].append({"angle": float(np.angle(w)), "i": p.i, "nu": p.nu})
    return BottReport(k, lhs.i, rhs_i, lhs.nu, rhs_nu, comp)


@dataclass
class NullityReport:
    k: int
    direct: int
    root_sum: int
    terms: list

    @property
    def equal(self) -> bool:
        return self.direct == self.root_sum

    def as_dict(self) -> dict:
        return {"k": self.k, "direct": self.direct, "root_sum": self.root_sum, "terms": self.terms, "equal": self.equal}


def bott_nullity_check(B: CoefficientPath, k: int, ctx: Optional[IterationContext] = None) -> NullityReport:
    """``nu_1(gamma^{2k})`` from the assembled path on ``[0, 2k]`` against ``sum_{omega^k = 1} nu_omega(gamma^2)``."""
    ctx = ctx or IterationContext(B)
    end = ctx.iterated(2 * k).full.end
    direct = omega_nullity(end, 1.0 + 0j)
    terms = [omega_nullity(ctx.M2, complex(np.exp(2j * np.pi * j / k))) for j in range(k)]
    return NullityReport(k, direct, int(sum(terms)), terms)


# ---------------------------------------------------------------------------
# iteration inequalities and equality cases
# ---------------------------------------------------------------------------


@dataclass
class EqualityVerdict:
    verdict: str  # both | left | right | generic
    left_candidate: bool
    right_candidate: bool
    p: int
    q: int
    r: int
    ambiguous: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _eigen_one_structure(M: np.ndarray, tol: float = 1e-6) -> tuple[int, int, int, bool]:
    """``(dim, #pos, #neg)`` of ``sym(J (M - I))`` on the generalized 1-eigenspace.

    ``I_2`` blocks contribute 0, ``N1(1, 1)`` one positive and ``N1(1, -1)`` one
    negative direction.
    """
    n2 = M.shape[0]
    A = M - np.eye(n2)
    ev = np.linalg.eigvals(M)
    dim = int(np.sum(np.abs(ev - 1.0) < 1e-4))
    if dim == 0:
        return 0, 0, 0, False
    # generalized eigenspace = null space of (M - I)^dim
    P = np.linalg.matrix_power(A, dim)
    _, s, vh = np.linalg.svd(P)
    scale = max(1.0, float(np.linalg.norm(M, 2))) ** dim
    null = vh[np.sum(s > 1e-7 * scale):].T
    ambiguous = null.shape[1] != dim
    Jm = np.block([[np.zeros((n2 // 2, n2 // 2)), -np.eye(n2 // 2)], [np.eye(n2 // 2), np.zeros((n2 // 2, n2 // 2))]])
    S = Jm @ A
    S = 0.5 * (S + S.T)
    form = null.T @ S @ null
    w = np.linalg.eigvalsh(form)
    pos = int(np.sum(w > tol))
    neg = int(np.sum(w < -tol))
    if dim - 2 * (pos + neg) < 0 or (dim - 2 * (pos + neg)) % 2:
        ambiguous = True
    return dim, pos, neg, ambiguous


def equality_case_classify(M: np.ndarray, k: Optional[int] = None, tol: float = 1e-8) -> EqualityVerdict:
    """Spectral necessary conditions for the equality cases of the iteration inequalities.

    The left pattern is ``I_2p ⋄ N1(1,-1)^q ⋄ K`` with ``K`` having non-real unit
    eigenvalues only, Krein negative on the upper half circle (and, when ``k`` is
    given, on the arc up to ``exp(2 pi i / k)``); the right pattern is
    ``I_2p ⋄ N1(1,1)^r`` with ``p + r = n``.
    """
    n = M.shape[0] // 2
    spec = unit_spectrum(M, tol)
    dim1, pos, neg, amb = _eigen_one_structure(M)
    p = max(0, (dim1 - 2 * (pos + neg)) // 2)
    ambiguous = amb or spec.ambiguous
    on_circle = spec.off_circle_count == 0
    has_minus_one = any(abs(u.value + 1) < 1e-6 for u in spec.unit_eigs)
    nonreal = [u for u in spec.unit_eigs if abs(u.value.imag) > 1e-6]
    upper = [u for u in nonreal if u.value.imag > 0]
    krein_ok = all(u.krein[0] == 0 for u in upper)
    arc_ok = True
    if k is not None:
        arc_ok = all(0.0 < np.angle(u.value) <= 2 * np.pi / k + 1e-9 for u in upper)
    left = on_circle and not has_minus_one and pos == 0 and krein_ok and arc_ok and not ambiguous
    right = on_circle and dim1 == 2 * n and neg == 0 and not ambiguous
    identity = bool(np.allclose(M, np.eye(2 * n), atol=1e-8))
    if identity:
        verdict = "both"
    elif left:
        verdict = "left"
    elif right:
        verdict = "right"
    else:
        verdict = "generic"
    detail = {
        "dim_eig1": dim1,
        "off_circle": spec.off_circle_count,
        "minus_one": has_minus_one,
        "upper_krein": [list(u.krein) for u in upper],
        "arc_ok": arc_ok,
    }
    return EqualityVerdict(verdict, left or identity, right or identity, p, neg, pos, ambiguous, detail)


def _half(x2: int):
    """Exact half of an integer, as ``int`` when even."""
    f = Fraction(x2, 2)
    return int(f) if f.denominator == 1 else float(f)


@dataclass
class InequalityReport:
    k: int
    lhs: object
    mid: int
    rhs: object
    components: dict
    left_equal: bool
    right_equal: bool
    rhs_literal: object
    literal_holds: bool
    classifier: dict

    @property
    def holds(self) -> bool:
        return self.lhs <= self.mid <= self.rhs

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["holds"] = self.holds
        return d


def iteration_inequality_check(B: CoefficientPath, k: int, ctx: Optional[IterationContext] = None) -> InequalityReport:
    """Lower and upper bounds on ``i_L0(gamma^k)`` from the ``gamma^1`` and ``gamma^2`` indices.

    The upper bound is evaluated with ``i_1(gamma^2)``; the variant with ``i_1(gamma)``
    is reported as ``rhs_literal``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    ctx = ctx or IterationContext(B)
    n = ctx.n
    i_l0_1 = ctx.l0(1).i
    mid = ctx.l0(k).i
    one2 = ctx.omega2(1.0 + 0j)
    i1_g2, nu1_g2 = one2.i, one2.nu
    nu1_g2k = ctx.nu1_power(k)
    i1_g1 = ctx.one1().i
    comp = {
        "i_L0(1)": i_l0_1,
        "i_L0(k)": mid,
        "i_1(2)": i1_g2,
        "nu_1(2)": nu1_g2,
        "nu_1(2k)": nu1_g2k,
        "i_1(1)": i1_g1,
    }
    if k % 2:
        m = k // 2
        base = i_l0_1
        extra2 = 0
    else:
        m = k // 2 - 1
        q = ctx.l0_sqrt_minus_one()
        base = i_l0_1 + q.i
        nu_m1 = omega_nullity(ctx.M2, -1.0 + 0j)
        extra2 = nu_m1
        comp["i_L0_sqrt-1(1)"] = q.i
        comp["nu_L0_sqrt-1(1)"] = q.nu
        comp["nu_-1(2)"] = nu_m1
    lhs = base + m * (i1_g2 + nu1_g2 - n)
    tail2 = -nu1_g2k + nu1_g2 + extra2
    rhs = _half(2 * (base + m * (i1_g2 + n)) + tail2)
    rhs_lit = _half(2 * (base + m * (i1_g1 + n)) + tail2)
    verdict = equality_case_classify(ctx.M2, k)
    return InequalityReport(
        k,
        lhs,
        mid,
        rhs,
        comp,
        lhs == mid,
        mid == rhs,
        rhs_lit,
        bool(mid <= rhs_lit),
        verdict.as_dict(),
    )


def omega_bound_check(B: CoefficientPath, omegas, ctx: Optional[IterationContext] = None) -> list[dict]:
    """``i_1 + nu_1 - n <= i_omega <= i_1 + n - nu_omega`` for ``gamma^2`` on a list of ``omega != 1``."""
    ctx = ctx or IterationContext(B)
    n = ctx.n
    one = ctx.omega2(1.0 + 0j)
    out = []
    for w in omegas:
        w = complex(w)
        p = ctx.omega2(w)
        lo, hi = one.i + one.nu - n, one.i + n - p.nu
        out.append({"angle": float(np.angle(w)), "lower": lo, "i": p.i, "upper": hi, "holds": lo <= p.i <= hi})
    return out
