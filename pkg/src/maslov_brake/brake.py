"""Brake orbits of ``-J x' = B x + H'(x)``, ``x(0), x(tau/2) in L0``, and their index certificates.

Orbits are found by shooting from ``L0``: for ``a`` in R^n the trajectory from
``(0, a)`` is integrated over half a period and Newton's method (with the
variational Jacobian) drives ``x_1(tau/2)`` to zero.  The half orbit is then
extended to a ``tau``-periodic brake orbit by ``x(tau/2 + t) = N x(tau/2 - t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConstantOrbitError, NumericalError, PreconditionError, TheoryViolation
from .galerkin import (
    IndexPolicy,
    _counts,
    _gap,
    _zero_mask,
    assemble_forms,
    build_truncation,
    index_l0_omega,
    index_l0_via_relative,
    index_omega_periodic,
)
from .hamiltonian import HamiltonianSpec, position
from .iteration import second_period_matrix
from .symplectic import CoefficientPath, J_matrix, N_matrix, check_brake_symmetry, integrate_fundamental
from .winding import IndexPair, l0_index, omega_nullity

RESIDUAL_TOL = 1e-9
ODE_RTOL = 1e-12
SEED_RADII = (0.25, 0.5, 1.0, 2.0, 4.0)


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


def _flow(spec: HamiltonianSpec, z0: np.ndarray, T: float, variational: bool, dense: bool = False):
    n2 = 2 * spec.n
    J = J_matrix(spec.n)

    JB = J @ spec.B

    def rhs(_t, y):
        z = y[:n2]
        g, h = spec.point_derivatives(z, variational)
        dz = JB @ z + J @ g
        if not variational:
            return dz
        Phi = y[n2:].reshape(n2, n2)
        dPhi = (JB + J @ h) @ Phi
        return np.concatenate([dz, dPhi.ravel()])

    y0 = np.concatenate([z0, np.eye(n2).ravel()]) if variational else np.asarray(z0, float)
    scale = max(1.0, float(np.max(np.abs(z0))))
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=ODE_RTOL, atol=1e-14 * scale, dense_output=dense)
    if not sol.success:
        raise NumericalError(f"integration failed: {sol.message}")
    return sol


def _newton(spec: HamiltonianSpec, a0: np.ndarray, T: float, max_iter: int = 40):
    """Newton on ``x_1(T; a) / (|z'(0)| T)``.

    Dividing by the distance the orbit could travel removes the constant solution
    ``a = 0``, near which ``x_1(T; a)`` is small to high order.
    """
    n = spec.n
    J = J_matrix(n)
    a = np.array(a0, dtype=float)
    history = []

    def residual(a):
        z0 = np.concatenate([np.zeros(n), a])
        sol = _flow(spec, z0, T, True)
        y = sol.y[:, -1]
        x = y[:n]
        Phi = y[2 * n :].reshape(2 * n, 2 * n)
        g, h = spec.point_derivatives(z0)
        v0 = J @ (spec.B @ z0 + g)
        dv0 = (J @ (spec.B + h))[:, n:]
        D = float(np.linalg.norm(v0)) * T
        if D == 0:
            raise NumericalError("starting point is an equilibrium")
        dD = T * (v0 @ dv0) / (D / T)
        return x, x / D, Phi[:n, n:] / D - np.outer(x, dD) / D**2

    x, F, DF = residual(a)
    for _ in range(max_iter):
        rn = float(np.linalg.norm(x))
        history.append(rn)
        if rn <= RESIDUAL_TOL * float(np.linalg.norm(a)):
            return a, rn, history
        if not np.all(np.isfinite(DF)) or not 1e-8 < float(np.linalg.norm(a)) < 1e6:
            break
        step = np.linalg.lstsq(DF, F, rcond=None)[0]
        # trust region: a step may not move the seed by more than half its size
        cap = 0.5 * float(np.linalg.norm(a))
        if np.linalg.norm(step) > cap:
            step *= cap / np.linalg.norm(step)
        fn = float(np.linalg.norm(F))
        lam = 1.0
        while True:
            trial = a - lam * step
            try:
                x2, F2, DF2 = residual(trial)
                if np.linalg.norm(F2) < (1 - 0.25 * lam) * fn:
                    break
            except NumericalError:
                pass
            lam *= 0.5
            if lam < 1e-3:
                return a, rn, history
        a, x, F, DF = trial, x2, F2, DF2
    return a, float(np.linalg.norm(x)), history


def _action(spec: HamiltonianSpec, sol, T: float, samples: int = 4001) -> float:
    """``int_0^{T} 1/2 (z', J z) - H_hat(z)`` by Simpson's rule on the dense output."""
    from scipy.integrate import simpson

    t = np.linspace(0.0, T, samples)
    z = sol.sol(t).T[:, : 2 * spec.n]
    J = J_matrix(spec.n)
    J_ = J_matrix(spec.n)
    dz = (z @ spec.B.T + spec.grad(z)) @ J_.T
    integrand = 0.5 * np.einsum("qi,qi->q", dz, z @ J.T) - spec.energy(z)
    return float(simpson(integrand, x=t))


def seed_scale(spec: HamiltonianSpec, tau: float) -> float:
    """Natural amplitude ``(2 / tau)^(1 / (mu - 2))`` of a degree-``mu`` nonlinearity at period ``tau``."""
    return (2.0 / tau) ** (1.0 / (spec.mu - 2.0))


def _seeds(n: int, radii=SEED_RADII) -> list[np.ndarray]:
    dirs = []
    for i in range(n):
        for s in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = s
            dirs.append(e)
    if n > 1:
        rng = np.random.Generator(np.random.Philox(12345))
        for _ in range(2 * n):
            v = rng.standard_normal(n)
            dirs.append(v / np.linalg.norm(v))
    return [r * d for r in radii for d in dirs]


@dataclass
class BrakeOrbit:
    """A brake orbit on ``[0, tau]`` built from a half orbit on ``[0, tau/2]``."""

    spec: HamiltonianSpec
    tau: float
    a: np.ndarray
    residual: float
    action: float
    half: object = field(repr=False)
    candidates: list = field(default_factory=list)
    newton_history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def start(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.n), self.a])

    def evaluate(self, t) -> np.ndarray:
        """Points ``x(t)`` (rows) for any real ``t``, using the period and the brake reflection."""
        t = np.atleast_1d(np.asarray(t, dtype=float)) % self.tau
        h = self.tau / 2
        first = t <= h
        out = np.empty((len(t), 2 * self.n))
        if np.any(first):
            out[first] = self.half.sol(t[first]).T[:, : 2 * self.n]
        if np.any(~first):
            out[~first] = self.half.sol(self.tau - t[~first]).T[:, : 2 * self.n] @ N_matrix(self.n).T
        return out

    __call__ = evaluate

    def amplitude(self, samples: int = 2001) -> float:
        z = self.evaluate(np.linspace(0.0, self.tau, samples))
        return float(np.max(np.linalg.norm(z, axis=1)))

    def sup_norm(self, samples: int = 2001) -> float:
        return self.amplitude(samples)

    def energy_drift(self, samples: int = 2001) -> float:
        z = self.evaluate(np.linspace(0.0, self.tau, samples))
        e = self.spec.energy(z)
        return float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0])))

    def boundary_defect(self) -> float:
        n = self.n
        z = self.evaluate(np.array([0.0, self.tau / 2]))
        return float(np.max(np.abs(z[:, :n])))

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "start": self.start.tolist(),
            "residual": self.residual,
            "action": self.action,
            "amplitude": self.amplitude(),
            "energy_drift": self.energy_drift(),
            "boundary_defect": self.boundary_defect(),
            "candidates": self.candidates,
        }

    def csv_rows(self, samples: int = 201) -> list:
        t = np.linspace(0.0, self.tau, samples)
        z = self.evaluate(t)
        return [[float(ti)] + [float(v) for v in zi] for ti, zi in zip(t, z)]


def tau_bound(spec: HamiltonianSpec) -> float:
    """Largest admissible period ``2 pi / |B|`` (infinite for ``B = 0``) of the first-order problem."""
    nb = spec.norm_B
    return math.inf if nb == 0 else 2 * math.pi / nb


def shoot_orbit(spec: HamiltonianSpec, tau: float, seeds=None, check_tau: bool = True) -> BrakeOrbit:
    """Nonconstant brake orbit of period ``tau``; among converged seeds the smallest positive action wins."""
    if tau <= 0:
        raise PreconditionError("tau must be positive")
    if check_tau and spec.kind != "second-order-odd" and not tau < tau_bound(spec):
        raise PreconditionError(f"tau = {tau} violates tau < 2 pi / |B| = {tau_bound(spec)}")
    T = tau / 2
    n = spec.n
    found = []
    if seeds is None:
        seeds = [seed_scale(spec, tau) * a for a in _seeds(n)]
    for a0 in seeds:
        try:
            a, res, hist = _newton(spec, np.atleast_1d(np.asarray(a0, float)), T)
        except NumericalError:
            continue
        if res > RESIDUAL_TOL * float(np.linalg.norm(a)) or np.linalg.norm(a) < 1e-6:
            continue
        if any(np.allclose(a, b, rtol=1e-6, atol=1e-9) for b, *_ in found):
            continue
        sol = _flow(spec, np.concatenate([np.zeros(n), a]), T, False, dense=True)
        found.append((a, res, hist, sol, _action(spec, sol, T)))
    positive = [f for f in found if f[4] > 0]
    if not positive:
        raise ConstantOrbitError("no nonconstant orbit with positive action was found")
    a, res, hist, sol, act = min(positive, key=lambda f: f[4])
    cands = [{"start": f[0].tolist(), "action": f[4], "residual": f[1]} for f in sorted(found, key=lambda f: f[4])]
    return BrakeOrbit(spec, float(tau), a, res, act, sol, cands, hist)


def junction_check(orbit: BrakeOrbit) -> dict:
    """Velocity matching ``x'(s+) = -N x'(s-)`` at the two reflection points ``s = 0, tau/2``."""
    Nm = N_matrix(orbit.n)
    out = {}
    for name, s in (("0", 0.0), ("tau/2", orbit.tau / 2)):
        z = orbit.evaluate(np.array([s]))[0]
        v = orbit.spec.field(z)
        v_reflected = orbit.spec.field(Nm @ z)
        scale = max(1.0, float(np.linalg.norm(v)))
        out[name] = float(np.linalg.norm(v_reflected + Nm @ v)) / scale
    out["max"] = max(out.values())
    return out


def extend_orbit(orbit: BrakeOrbit, tol: float = 1e-8) -> BrakeOrbit:
    """Checks that the reflection extension is a ``C^1`` periodic orbit; ``evaluate`` already extends."""
    jc = junction_check(orbit)
    if jc["max"] > tol:
        raise TheoryViolation(f"brake extension is not C^1 at the junctions ({jc['max']:.2e})")
    if orbit.boundary_defect() > 1e-8 * max(1.0, orbit.amplitude()):
        raise TheoryViolation("half orbit does not end on L0")
    return orbit


# ---------------------------------------------------------------------------
# linearization and indices
# ---------------------------------------------------------------------------


@dataclass
class HXReport:
    """Convexity of the nonlinear part along the orbit."""

    min_pointwise: float
    integral_min_eig: float
    holds: bool
    margin: float

    def as_dict(self) -> dict:
        return {"min_pointwise": self.min_pointwise, "integral_min_eig": self.integral_min_eig, "holds": self.holds, "margin": self.margin}


def hx_check(orbit: BrakeOrbit, samples: int = 2001, margin: float = 1e-8) -> HXReport:
    """``H''(x(t)) >= 0`` on samples and ``lambda_min(int_0^{tau/2} H''(x)) > margin``."""
    from scipy.integrate import simpson

    t = np.linspace(0.0, orbit.tau / 2, samples)
    Hs = orbit.spec.hess(orbit.evaluate(t))
    pointwise = float(np.min(np.linalg.eigvalsh(Hs)))
    integral = simpson(Hs, x=t, axis=0)
    lam = float(np.min(np.linalg.eigvalsh(0.5 * (integral + integral.T))))
    return HXReport(pointwise, lam, bool(pointwise >= -1e-10 and lam > margin), margin)


def linearize_orbit(orbit: BrakeOrbit) -> CoefficientPath:
    """``B(s) = (tau/2)(B + H''(x(s tau/2)))`` on the normalized time ``s in [0, 2]``."""
    spec, h = orbit.spec, orbit.tau / 2

    def func(s):
        return h * (spec.B + spec.hess(orbit.evaluate(np.asarray(s) * h)))

    path = CoefficientPath(spec.n, func, representation="orbit-linearization", data={"tau": orbit.tau}, period=2.0, brake_symmetric=True)
    sym = check_brake_symmetry(path)
    if sym["max_violation"] > 1e-8 * max(1.0, path.norm_bound(0.0, 2.0)):
        raise TheoryViolation(f"linearization is not brake symmetric ({sym['max_violation']:.2e})")
    return path


@dataclass
class OrbitIndices:
    """Index data of a brake orbit, normalized to ``tau = 2``."""

    l0: IndexPair
    l0_winding: IndexPair
    one: IndexPair
    l0_sqrt_minus_one: IndexPair
    monodromy_half: np.ndarray = field(repr=False)
    monodromy_full: np.ndarray = field(repr=False)

    @property
    def engines_agree(self) -> bool:
        return self.l0.i == self.l0_winding.i and self.l0.nu == self.l0_winding.nu

    def as_dict(self) -> dict:
        return {
            "i_L0": self.l0.i,
            "nu_L0": self.l0.nu,
            "i_L0_winding": self.l0_winding.i,
            "nu_L0_winding": self.l0_winding.nu,
            "i_1_full": self.one.i,
            "nu_1_full": self.one.nu,
            "i_L0_sqrt_minus_one": self.l0_sqrt_minus_one.i,
            "nu_L0_sqrt_minus_one": self.l0_sqrt_minus_one.nu,
            "engines_agree": self.engines_agree,
        }


def orbit_indices(orbit: BrakeOrbit, policy: Optional[IndexPolicy] = None, B: Optional[CoefficientPath] = None, strict: bool = True) -> OrbitIndices:
    """``(i_L0, nu_L0)(x, 1)`` by both engines, ``(i_1, nu_1)(x, 2)`` and ``(i^{L0}_{sqrt(-1)}, nu)(x, 1)``.

    With ``strict`` an engine disagreement raises :class:`TheoryViolation`.
    """
    B = linearize_orbit(orbit) if B is None else B
    gamma = integrate_fundamental(B, 1.0)
    M1 = gamma.end
    M2 = second_period_matrix(M1)
    winding = l0_index(gamma)
    galerkin = index_l0_via_relative(B, policy)
    one = index_omega_periodic(B.rescaled(2.0), 1.0 + 0j, policy, endpoint=M2)
    quarter = index_l0_omega(B, np.pi / 2, policy, endpoint=M1)
    out = OrbitIndices(galerkin, winding, one, quarter, M1, M2)
    if strict and not out.engines_agree:
        raise TheoryViolation(f"index engines disagree: galerkin {galerkin.i, galerkin.nu} vs winding {winding.i, winding.nu}")
    return out


# ---------------------------------------------------------------------------
# minimal period
# ---------------------------------------------------------------------------


def minimal_period(x, tau: Optional[float] = None, tol: float = 1e-6, kmax: int = 12, samples: int = 2001) -> dict:
    """Smallest ``tau / k`` (``k <= kmax``) with ``sup |x(t + tau/k) - x(t)| <= tol * amplitude``.

    ``x`` is a :class:`BrakeOrbit` or any callable returning points as rows.
    """
    if tau is None:
        tau = x.tau
    evaluate = x.evaluate if hasattr(x, "evaluate") else x
    t = np.linspace(0.0, tau, samples)
    z = np.atleast_2d(evaluate(t))
    if z.shape[0] != samples:
        z = z.reshape(samples, -1)
    amp = float(np.max(np.linalg.norm(z - z.mean(axis=0), axis=1)))
    if amp < 1e-9:
        raise ConstantOrbitError("orbit is constant; its minimal period is undefined")
    periods = []
    for k in range(1, kmax + 1):
        zs = np.atleast_2d(evaluate(t + tau / k)).reshape(samples, -1)
        if float(np.max(np.linalg.norm(zs - z, axis=1))) <= tol * amp:
            periods.append(k)
    k_best = max(periods) if periods else 1
    return {"tau": float(tau), "k": k_best, "tau_min": float(tau / k_best), "divisors": periods, "amplitude": amp}


# ---------------------------------------------------------------------------
# Morse index of the action functional on finite-dimensional truncations
# ---------------------------------------------------------------------------


@dataclass
class MorseIdentityReport:
    """``m^-_d(E_m) = mn + n + i_L0`` and ``m^0_d(E_m) = nu_L0`` per truncation level."""

    i_l0: int
    nu_l0: int
    n: int
    d: float
    rows: list
    m_hi: int

    @property
    def holds(self) -> bool:
        return all(r["neg_ok"] and r["zero_ok"] for r in self.rows)

    def as_dict(self) -> dict:
        return {"i_L0": self.i_l0, "nu_L0": self.nu_l0, "n": self.n, "d": self.d, "m_hi": self.m_hi, "holds": self.holds, "rows": self.rows}


def morse_identity_check(B: CoefficientPath, i_l0: int, nu_l0: int, levels=range(8, 17), d: Optional[float] = None) -> MorseIdentityReport:
    """Eigenvalue counts of the Hessian form ``A - B`` on the Fourier truncations ``E_m`` of the ``L0`` space.

    The count below ``-d`` is compared with ``mn + n + i_L0`` and the count in
    ``[-d, d]`` with ``nu_L0``; the count in ``(-inf, d]`` is reported as well.
    """
    levels = list(levels)
    n = B.n
    top = max(levels)
    m_hi = 2 * top
    space = build_truncation("L0-fourier", 0.0, m_hi, n)
    forms = assemble_forms(space, B)
    A_hi, B_hi = forms.sub(m_hi)
    ev_hi = np.linalg.eigvalsh(A_hi - B_hi)
    A_lo, B_lo = forms.sub(m_hi // 2)
    ev_lo = np.linalg.eigvalsh(A_lo - B_lo)
    scale = max(1.0, float(np.max(np.abs(ev_hi))))
    if d is None:
        zero = _zero_mask(ev_hi, ev_lo, scale, IndexPolicy())
        ev_A = np.linalg.eigvalsh(A_hi)
        d = 0.25 * min(_gap(ev_hi, zero), _gap(ev_A, np.abs(ev_A) <= 1e-12 * scale))
    rows = []
    for m in levels:
        Am, Bm = forms.sub(m)
        ev = np.linalg.eigvalsh(Am - Bm)
        neg, zero_count, pos = _counts(ev, d, None)
        rows.append(
            {
                "m": m,
                "neg": neg,
                "zero": zero_count,
                "neg_or_zero": neg + zero_count,
                "expected_neg": m * n + n + i_l0,
                "neg_ok": neg == m * n + n + i_l0,
                "zero_ok": zero_count == nu_l0,
            }
        )
    return MorseIdentityReport(i_l0, nu_l0, n, float(d), rows, m_hi)


def hessian_spectrum(B: CoefficientPath, m: int) -> np.ndarray:
    """Sorted eigenvalues of the Hessian form ``A - B`` on ``E_m``."""
    space = build_truncation("L0-fourier", 0.0, m, B.n)
    forms = assemble_forms(space, B)
    A, Bm = forms.sub(m)
    return np.linalg.eigvalsh(A - Bm)


def second_order_morse(orbit: BrakeOrbit, modes=(8, 16, 32, 64), rel_zero: float = 1e-7) -> dict:
    """Morse index and nullity of ``int_0^{T} |h'|^2 - V''(x) h.h`` on odd (sine) variations, ``T = tau/2``.

    Counts are taken on ``sin(k pi t / T)`` bases of growing size and must agree
    on the last two sizes.
    """
    from numpy.polynomial.legendre import leggauss

    spec = orbit.spec
    if spec.kind != "second-order-odd":
        raise PreconditionError("sine-basis Morse counts need the odd-Dirichlet second-order form")
    n, T = spec.n, orbit.tau / 2
    q = 4 * max(modes) + 64
    xg, wg = leggauss(q)
    t = 0.5 * T * (xg + 1)
    w = 0.5 * T * wg
    Vpp = spec.hess(orbit.evaluate(t))[:, :n, :n]
    counts = []
    for K in modes:
        k = np.arange(1, K + 1)
        S = np.sin(np.outer(t, k) * np.pi / T) * np.sqrt(2 / T)
        kin = np.kron(np.diag((k * np.pi / T) ** 2), np.eye(n))
        pot = np.einsum("q,qa,qb,qij->aibj", w, S, S, Vpp).reshape(K * n, K * n)
        ev = np.linalg.eigvalsh(kin - pot)
        thr = rel_zero * max(1.0, float(np.max(np.abs(Vpp))))
        counts.append({"modes": K, "neg": int(np.sum(ev < -thr)), "zero": int(np.sum(np.abs(ev) <= thr)), "min_abs": float(np.min(np.abs(ev)))})
    low = ev[:16]
    stable = counts[-1]["neg"] == counts[-2]["neg"] and counts[-1]["zero"] == counts[-2]["zero"]
    if not stable:
        raise NumericalError("sine-basis Morse counts did not stabilize")
    return {"m_minus": counts[-1]["neg"], "m_zero": counts[-1]["zero"], "levels": counts, "lowest": low.tolist()}


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class BrakeCertificate:
    """Outcome of solving for a brake orbit and checking its index and period properties."""

    spec: HamiltonianSpec
    tau: float
    orbit: BrakeOrbit
    conditions: dict
    indices: OrbitIndices
    hx: HXReport
    period: dict
    morse: dict
    clauses: dict

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.clauses.values())

    def as_dict(self) -> dict:
        return {
            "hamiltonian": self.spec.as_dict(),
            "tau": self.tau,
            "orbit": self.orbit.as_dict(),
            "conditions": self.conditions,
            "indices": self.indices.as_dict(),
            "hx": self.hx.as_dict(),
            "minimal_period": self.period,
            "morse": self.morse,
            "clauses": self.clauses,
            "passed": self.passed,
        }


def verify_brake_certificate(
    spec: HamiltonianSpec,
    tau: float,
    policy: Optional[IndexPolicy] = None,
    seeds=None,
    morse_levels=range(8, 17),
    period_tol: float = 1e-6,
    junction_tol: float = 1e-8,
) -> BrakeCertificate:
    """Solve for a brake orbit of period ``tau`` and check every claim made about it.

    Clauses are ``True``/``False``, or ``None`` when a clause does not apply
    (the minimal-period clause for first-order problems needs the convexity
    condition ``hx``).  Precondition failures raise before any solving.
    """
    conditions = spec.require_conditions()
    orbit = extend_orbit(shoot_orbit(spec, tau, seeds), junction_tol)
    B = linearize_orbit(orbit)
    idx = orbit_indices(orbit, policy, B, strict=False)
    hx = hx_check(orbit)
    period = minimal_period(orbit, tol=period_tol)
    amp = orbit.amplitude()
    in_set = period["k"] in (1, 2)
    clauses = {
        "orbit_residual": orbit.residual <= RESIDUAL_TOL * float(np.linalg.norm(orbit.a)),
        "boundary_on_L0": orbit.boundary_defect() <= 1e-8 * max(1.0, amp),
        "energy_conserved": orbit.energy_drift() <= 1e-8,
        "engines_agree": idx.engines_agree,
        "index_bound": idx.l0.i <= 1,
        "periodic_nullity_positive": idx.one.nu >= 1,
    }
    if spec.kind == "second-order-odd":
        so = second_order_morse(orbit)
        morse = {"second_order": so}
        clauses["morse_matches_index"] = so["m_minus"] == idx.l0.i and so["m_zero"] == idx.l0.nu
        clauses["minimal_period"] = in_set
    else:
        report = morse_identity_check(B, idx.l0_winding.i, idx.l0_winding.nu, morse_levels)
        morse = report.as_dict()
        clauses["morse_identity"] = report.holds
        if spec.kind == "second-order-neumann":
            clauses["minimal_period"] = in_set
        else:
            clauses["minimal_period"] = in_set if hx.holds else None
    return BrakeCertificate(spec, float(tau), orbit, conditions, idx, hx, period, morse, clauses)


def solve_second_order(v_terms, tau: float, variant: str = "odd", n: int = 1, policy: Optional[IndexPolicy] = None) -> BrakeCertificate:
    """Brake solution of ``x'' + V'(x) = 0`` with ``x(0) = x(tau/2) = 0`` (``odd``) or ``x'(0) = x'(tau/2) = 0`` (``neumann``)."""
    from .hamiltonian import second_order_spec

    spec = second_order_spec(v_terms, n, variant, f"second-order-{variant}")
    return verify_brake_certificate(spec, tau, policy)


def configuration_path(cert_or_orbit, samples: int = 201) -> np.ndarray:
    """``(t, x(t))`` rows of a second-order solution in its original coordinates."""
    orbit = getattr(cert_or_orbit, "orbit", cert_or_orbit)
    t = np.linspace(0.0, orbit.tau, samples)
    x = position(orbit.spec, orbit.evaluate(t))
    return np.column_stack([t, x])
