"""Galerkin truncations of the forms ``<-J x', y>`` and ``<B x, y>`` and relative indices.

Three function spaces on ``[0, 1]`` are supported.

* ``L0-fourier``: ``x(t) = sum_j exp(j pi t J)(0, a_j)``, ``a_j`` in ``R^n``.
* ``L0-omega``: the same with frequencies ``theta + j pi``, ``theta`` in ``(0, pi)``.
* ``periodic-omega``: ``x(t) = sum_j exp(i (theta + 2 pi j) t) c_j``, ``c_j`` in
  ``C^{2n}``, so that ``x(1) = exp(i theta) x(0)``.

All bases are orthonormal in ``L^2``, ``A`` is diagonal by frequency and the
relative index is the stabilized difference of ``d``-Morse indices of the
truncated ``A - B`` and ``A``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from .errors import BorderlineWarning, NumericalError, PreconditionError, StabilizationError, TheoryViolation
from .symplectic import J_matrix, monodromy
from .winding import IndexPair, l0_omega_intersection_dim, omega_nullity

KINDS = ("L0-fourier", "L0-omega", "periodic-omega")
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class TruncationSpace:
    kind: str
    theta: float
    m: int
    n: int

    @property
    def frequencies(self) -> np.ndarray:
        j = np.arange(-self.m, self.m + 1)
        step = 2 * np.pi if self.kind == "periodic-omega" else np.pi
        return self.theta + step * j

    @property
    def coefficient_dim(self) -> int:
        """Size of the coefficient vector attached to one frequency."""
        return 2 * self.n if self.kind == "periodic-omega" else self.n

    @property
    def dim(self) -> int:
        return (2 * self.m + 1) * self.coefficient_dim

    @property
    def is_complex(self) -> bool:
        return self.kind == "periodic-omega"

    def level_slice(self, m: int) -> slice:
        """Index range of the sub-truncation ``|j| <= m`` inside this space."""
        if not 0 <= m <= self.m:
            raise ValueError(f"level {m} outside 0..{self.m}")
        c = self.coefficient_dim
        return slice((self.m - m) * c, (self.m + m + 1) * c)

    def basis(self, t: np.ndarray) -> np.ndarray:
        """Basis functions at times ``t``: shape ``(len(t), 2n, dim)``, column-ordered by frequency."""
        t = np.asarray(t, dtype=float)
        n = self.n
        nu = self.frequencies
        ph = np.outer(t, nu)  # (Q, F)
        if self.kind == "periodic-omega":
            e = np.exp(1j * ph)  # (Q, F)
            out = e[:, None, :, None] * np.eye(2 * n)[None, :, None, :]
            return out.reshape(len(t), 2 * n, -1)
        # exp(nu t J)(0, e_l) = (-sin(nu t) e_l, cos(nu t) e_l)
        eye = np.eye(n)
        top = -np.sin(ph)[:, None, :, None] * eye[None, :, None, :]
        bot = np.cos(ph)[:, None, :, None] * eye[None, :, None, :]
        return np.concatenate([top, bot], axis=1).reshape(len(t), 2 * n, -1)

    def twist(self) -> complex:
        return complex(np.exp(1j * self.theta))


def build_truncation(kind: str, theta: float, m: int, n: int) -> TruncationSpace:
    if kind not in KINDS:
        raise ValueError(f"unknown space kind {kind!r}; expected one of {KINDS}")
    if m < 1:
        raise ValueError("truncation level m must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    theta = float(theta)
    if kind == "L0-fourier":
        theta = 0.0
    elif kind == "L0-omega":
        if not 0.0 < theta < np.pi:
            raise ValueError("L0-omega needs theta in (0, pi)")
    else:
        theta = theta % (2 * np.pi)
    return TruncationSpace(kind, theta, int(m), int(n))


@dataclass
class FormPair:
    space: TruncationSpace
    Amat: np.ndarray
    Bmat: np.ndarray
    quad_nodes: int
    quad_change: float

    def sub(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        s = self.space.level_slice(m)
        return self.Amat[s, s], self.Bmat[s, s]


def _a_matrix(space: TruncationSpace) -> np.ndarray:
    nu = space.frequencies
    if space.kind == "periodic-omega":
        # -J x' = nu (-i J) c for x = exp(i nu t) c
        blk = -1j * J_matrix(space.n)
        return np.kron(np.diag(nu), blk)
    return np.diag(np.repeat(nu, space.n))


def _b_matrix(space: TruncationSpace, B, nodes: int) -> np.ndarray:
    x, w = roots_legendre(nodes)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    Phi = space.basis(t)
    Bt = B(t)
    BPhi = np.einsum("qab,qbk->qak", Bt, Phi)
    M = np.einsum("q,qaj,qak->jk", w, Phi.conj(), BPhi)
    return 0.5 * (M + M.conj().T)


def assemble_forms(space: TruncationSpace, B, nodes: Optional[int] = None, max_doublings: int = 4) -> FormPair:
    """Quadrature-assembled form matrices; node count doubles until entries settle below 1e-10."""
    if B.n != space.n:
        raise PreconditionError(f"coefficient dimension n={B.n} does not match space n={space.n}")
    top = float(np.max(np.abs(space.frequencies)))
    q = nodes or int(2 * math.ceil(top / np.pi) + 48)
    Bm = _b_matrix(space, B, q)
    change = np.inf
    for _ in range(max_doublings):
        q2 = 2 * q
        Bm2 = _b_matrix(space, B, q2)
        change = float(np.max(np.abs(Bm2 - Bm))) if Bm.size else 0.0
        q, Bm = q2, Bm2
        if change < QUAD_TOL:
            break
    else:
        raise NumericalError(f"quadrature did not converge (last change {change:.2e})")
    return FormPair(space, _a_matrix(space), Bm, q, change)


def d_morse(form: np.ndarray, d: float, hazard: float = 0.1) -> tuple[int, int, int]:
    """Counts of eigenvalues below ``-d``, inside ``(-d, d)`` and above ``d``."""
    if d <= 0:
        raise ValueError("d must be positive")
    ev = np.linalg.eigvalsh(form) if np.size(form) else np.zeros(0)
    return _counts(ev, d, hazard)


def _counts(ev: np.ndarray, d: float, hazard: Optional[float] = 0.1) -> tuple[int, int, int]:
    near = np.abs(np.abs(ev) - d) < (hazard or 0.0) * d
    if hazard and np.any(near):
        warnings.warn(f"eigenvalues {ev[near]} within {hazard} d of the gap edge d={d:.3g}", BorderlineWarning, stacklevel=3)
    neg = int(np.sum(ev < -d))
    pos = int(np.sum(ev > d))
    return neg, len(ev) - neg - pos, pos


# ---------------------------------------------------------------------------
# relative index
# ---------------------------------------------------------------------------


@dataclass
class IndexPolicy:
    """Truncation and gap settings for :func:`relative_index`.

    ``m_min`` defaults to ``max(2, ceil(|B| / step) + 2)`` where ``step`` is the
    frequency spacing.  ``d`` overrides the automatic gap.
    """

    m_min: Optional[int] = None
    m_max: int = 64
    window: int = 3
    d: Optional[float] = None
    zero_tol: float = 1e-9
    drift_ratio: float = 0.5

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("m_min", "m_max", "window", "d", "zero_tol", "drift_ratio")}


@dataclass
class RelativeIndexResult:
    value: int
    d: float
    mStar: int
    history: list
    nullity: int
    kind: str = "L0-fourier"
    theta: float = 0.0
    m_hi: int = 0
    quad_nodes: int = 0

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "d": self.d,
            "mStar": self.mStar,
            "history": [list(h) for h in self.history],
            "nullity": self.nullity,
            "kind": self.kind,
            "theta": self.theta,
            "m_hi": self.m_hi,
            "quad_nodes": self.quad_nodes,
        }


def _eigvalsh(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(M) if M.size else np.zeros(0)


def _zero_mask(ev_hi: np.ndarray, ev_lo: np.ndarray, scale: float, policy: IndexPolicy) -> np.ndarray:
    """Eigenvalues of the top truncation that approximate a true zero.

    Exact zeros are caught by ``zero_tol``.  A kernel vector of ``A - B`` is only
    resolved algebraically in ``m``, so a small eigenvalue that still moves by a
    sizeable fraction of itself between ``m_hi / 2`` and ``m_hi`` is also zero.
    """
    mask = np.abs(ev_hi) <= policy.zero_tol * scale
    if ev_lo.size == 0:
        return mask
    small = (~mask) & (np.abs(ev_hi) <= 1e-2 * scale)
    for k in np.flatnonzero(small):
        drift = float(np.min(np.abs(ev_lo - ev_hi[k])))
        if drift >= policy.drift_ratio * abs(ev_hi[k]):
            mask[k] = True
    return mask


def _gap(ev: np.ndarray, zero: np.ndarray) -> float:
    nz = np.abs(ev[~zero])
    return float(nz.min()) if nz.size else np.inf


def _default_m_min(kind: str, norm: float) -> int:
    step = 2 * np.pi if kind == "periodic-omega" else np.pi
    return max(2, int(math.ceil(norm / step)) + 2)


def relative_index(B, kind: str = "L0-fourier", theta: float = 0.0, policy: Optional[IndexPolicy] = None) -> RelativeIndexResult:
    """``I(A, A - B)`` on the given space, stabilized over Galerkin truncation levels."""
    policy = policy or IndexPolicy()
    n = B.n
    norm = B.norm_bound()
    scale = max(1.0, norm)
    m0 = policy.m_min or _default_m_min(kind, norm)
    if m0 > policy.m_max:
        raise StabilizationError(f"|B| = {norm:.3g} needs m >= {m0} > m_max = {policy.m_max}")
    m_hi = min(policy.m_max, max(2 * m0, m0 + policy.window + 1))
    while True:
        space = build_truncation(kind, theta, m_hi, n)
        F = assemble_forms(space, B)
        C = F.Amat - F.Bmat
        ev_ab = _eigvalsh(C)
        ev_a = _eigvalsh(F.Amat)
        s_lo = space.level_slice(m_hi // 2)
        zero_ab = _zero_mask(ev_ab, _eigvalsh(C[s_lo, s_lo]), scale, policy)
        zero_a = np.abs(ev_a) <= 1e-12 * scale
        d = policy.d or 0.25 * min(_gap(ev_ab, zero_ab), _gap(ev_a, zero_a))
        if not np.isfinite(d):
            d = 0.25
        history = []
        for m in range(1, m_hi + 1):
            A_m, B_m = F.sub(m)
            hazard = 0.1 if m == m_hi else None
            neg_ab, zero_m, _ = _counts(_eigvalsh(A_m - B_m), d, hazard)
            neg_a, _, _ = _counts(_eigvalsh(A_m), d, None)
            history.append((m, neg_ab, neg_a))
        diffs = [h[1] - h[2] for h in history]
        m_star = m_hi
        while m_star > 1 and diffs[m_star - 2] == diffs[-1]:
            m_star -= 1
        if m_hi - m_star + 1 >= policy.window:
            nullity = _counts(ev_ab, d, None)[1]
            return RelativeIndexResult(
                int(diffs[-1]), float(d), int(m_star), history, int(nullity), kind, float(space.theta), m_hi, F.quad_nodes
            )
        if m_hi >= policy.m_max:
            raise StabilizationError(f"relative index did not stabilize by m = {policy.m_max}: differences {diffs[-6:]}")
        m_hi = min(policy.m_max, 2 * m_hi)


# ---------------------------------------------------------------------------
# index flavors
# ---------------------------------------------------------------------------


def index_l0_via_relative(B, policy: Optional[IndexPolicy] = None) -> IndexPair:
    """``(i_L0, nu_L0)`` as ``I(A, A - B) - n`` and the stabilized nullity."""
    r = relative_index(B, "L0-fourier", 0.0, policy)
    return IndexPair(r.value - B.n, r.nullity, "L0", "galerkin", {"relative": r.value, "d": r.d, "mStar": r.mStar, "m_hi": r.m_hi})


def index_l0_omega(B, theta: float, policy: Optional[IndexPolicy] = None, endpoint: Optional[np.ndarray] = None) -> IndexPair:
    """``(i^{L0}_omega, nu^{L0}_omega)`` at ``omega = exp(i theta)``, ``theta`` in ``(0, pi)``.

    Alongside the Galerkin nullity the result records ``dim(gamma(1) L0 ∩ e^{theta J} L0)``
    computed from the endpoint; the two are reported, not forced to agree.
    """
    if not 0.0 < theta < np.pi:
        raise ValueError("theta must lie in (0, pi)")
    r = relative_index(B, "L0-omega", theta, policy)
    M = monodromy(B) if endpoint is None else endpoint
    inter = l0_omega_intersection_dim(M, theta)
    return IndexPair(
        r.value,
        r.nullity,
        "L0-omega",
        "galerkin",
        {"theta": float(theta), "d": r.d, "mStar": r.mStar, "m_hi": r.m_hi, "intersection_dim": inter, "nullity_agrees": inter == r.nullity},
    )


def _as_omega(omega) -> complex:
    if isinstance(omega, complex):
        w = omega
    else:
        w = complex(np.exp(1j * float(omega)))
    if abs(abs(w) - 1.0) > 1e-12:
        raise PreconditionError("omega must lie on the unit circle")
    return w


def index_omega_periodic(B, omega, policy: Optional[IndexPolicy] = None, endpoint: Optional[np.ndarray] = None) -> IndexPair:
    """``(i_omega, nu_omega)`` of the fundamental solution on ``[0, 1]``.

    The relative index on ``x(1) = omega x(0)`` is shifted by ``n`` at ``omega = 1`` so that the
    constant path has ``i_1 = -n``; ``nu_omega`` is ``dim ker(gamma(1) - omega)``.
    """
    w = _as_omega(omega)
    theta = float(np.angle(w)) % (2 * np.pi)
    is_one = abs(w - 1.0) < 1e-12
    if is_one:
        theta = 0.0
    r = relative_index(B, "periodic-omega", theta, policy)
    M = monodromy(B) if endpoint is None else endpoint
    nu = omega_nullity(M, w)
    return IndexPair(
        r.value - (B.n if is_one else 0),
        nu,
        "omega",
        "galerkin",
        {"theta": theta, "d": r.d, "mStar": r.mStar, "m_hi": r.m_hi, "galerkin_nullity": r.nullity},
    )


# ---------------------------------------------------------------------------
# theta scans of the (L0, omega) index function
# ---------------------------------------------------------------------------


def lagrangian_crossings(M: np.ndarray, tol: float = 1e-7) -> list[tuple[float, int]]:
    """Angles ``theta`` in ``[0, pi)`` where ``M L0`` meets ``exp(theta J) L0``, with dimensions.

    With an orthonormal frame ``(X; Y)`` of ``M L0`` and ``W = Y + iX``, the symmetric
    unitary ``W W^T`` has eigenvalues ``exp(-2 i theta_k)``; the dimensions sum to ``n``.
    """
    n = M.shape[0] // 2
    Q, _ = np.linalg.qr(M[:, n:])
    W = Q[n:] + 1j * Q[:n]
    ev = np.linalg.eigvals(W @ W.T)
    th = np.sort((-np.angle(ev) / 2.0) % np.pi)
    # wrap angles just below pi onto 0
    th[th > np.pi - tol] = 0.0
    th = np.sort(th)
    out: list[tuple[float, int]] = []
    for t in th:
        if out and abs(t - out[-1][0]) <= tol:
            c, k = out[-1]
            out[-1] = ((c * k + t) / (k + 1), k + 1)
        else:
            out.append((float(t), 1))
    return out


@dataclass
class JumpRecord:
    theta: float
    i_minus: int
    i_at: int
    i_plus: int
    nu: int
    intersection_dim: int
    bounds_ok: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ScanTable:
    rows: list  # (theta, i, nu, intersection_dim)
    jumps: list
    i_l0: int
    nu_l0: int
    i_zero_plus: int
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def csv_rows(self) -> list:
        return [(th, i, nu) for th, i, nu, _ in self.rows]

    def as_dict(self) -> dict:
        return {
            "rows": [list(r) for r in self.rows],
            "jumps": [j.as_dict() for j in self.jumps],
            "i_l0": self.i_l0,
            "nu_l0": self.nu_l0,
            "i_zero_plus": self.i_zero_plus,
            "checks": self.checks,
        }


def index_function_scan(B, thetas, policy: Optional[IndexPolicy] = None, strict: bool = True) -> ScanTable:
    """Tabulate ``theta -> (i^{L0}_omega, nu^{L0}_omega)`` and check the jump structure.

    Every jump between grid points is localized at a crossing angle; one-sided
    limits are read at the midpoints of the neighbouring crossing-free intervals.
    A jump without positive nullity raises :class:`TheoryViolation` when ``strict``.
    """
    n = B.n
    thetas = np.asarray(sorted(float(t) for t in thetas))
    if thetas.size and (thetas[0] <= 0 or thetas[-1] >= np.pi):
        raise ValueError("scan angles must lie in (0, pi)")
    M = monodromy(B)
    cache: dict[float, IndexPair] = {}

    def at(th: float) -> IndexPair:
        if th not in cache:
            cache[th] = index_l0_omega(B, th, policy, endpoint=M)
        return cache[th]

    base = index_l0_via_relative(B, policy)
    crossings = [(t, k) for t, k in lagrangian_crossings(M) if t > 0.0]
    cuts = [0.0] + [t for t, _ in crossings] + [np.pi]
    mids = [0.5 * (a + b) for a, b in zip(cuts[:-1], cuts[1:])]
    i_zero_plus = at(mids[0]).i

    rows = []
    for th in thetas:
        p = at(float(th))
        rows.append((float(th), p.i, p.nu, p.params["intersection_dim"]))

    jumps = []
    for idx, (t0, k) in enumerate(crossings):
        left, right = at(mids[idx]).i, at(mids[idx + 1]).i
        here = at(t0)
        nu = here.nu
        ok = abs(right - left) <= nu and abs(right - here.i) <= nu and abs(left - here.i) <= nu
        if left != right or here.i != left:
            jumps.append(JumpRecord(float(t0), left, here.i, right, nu, k, ok))

    # grid-level jumps must fall on a crossing; located crossings carry ~1e-15 error
    eps = 1e-9
    unexplained = []
    for (t_a, i_a, _, _), (t_b, i_b, _, _) in zip(rows[:-1], rows[1:]):
        if i_a != i_b and not any(t_a - eps <= t <= t_b + eps for t, _ in crossings):
            unexplained.append((t_a, t_b))

    running_ok = True
    sandwich_ok = True
    for th, i, _, _ in rows:
        total = base.nu + sum(at(t).nu for t, _ in crossings if t <= th + eps)
        running_ok &= i >= base.i + n - total and total <= n
        sandwich_ok &= base.i <= i <= base.i + n
    nullity_total = base.nu + sum(at(t).nu for t, _ in crossings)
    checks = {
        "jump_bounds": all(j.bounds_ok for j in jumps),
        "jumps_have_nullity": all(j.nu > 0 for j in jumps if j.i_minus != j.i_plus) and not unexplained,
        "zero_limit": abs(base.i + n - i_zero_plus) <= base.nu,
        "running_nullity": bool(running_ok),
        "total_nullity": nullity_total <= n,
        "sandwich": bool(sandwich_ok),
    }
    table = ScanTable(rows, jumps, base.i, base.nu, i_zero_plus, checks)
    if strict and not checks["jumps_have_nullity"]:
        raise TheoryViolation(f"index function jumps without nullity: {[j.as_dict() for j in jumps]} {unexplained}")
    return table
