"""L0-index of symplectic paths by winding of ``det(U - iV)``.

A nondegenerate path (``det V(1) != 0``) is prefixed by ``exp(phi J)``,
``phi: pi/2 -> 0`` (from ``J = -M+`` to ``I``) and closed by a path ``beta``
inside ``{det V != 0}`` ending at ``M+`` or ``M-``.  The continuous argument
``Delta`` of ``det(U - iV)`` then changes by an integer multiple of ``pi``
and that integer is the index.  Degenerate paths are handled by probing the
rotated paths ``exp(+-eps t J) gamma(t)``, which turn every crossing of the
endpoint Lagrangian with ``L0`` by exactly ``eps``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm, polar, schur

from .errors import BorderlineWarning, DegenerateEndpointError, StabilizationError, UnwrapError
from .symplectic import J_matrix, SymplecticPath, blocks, standard_matrices

RANK_TOL = 1e-8
MAX_PHASE_STEP = np.pi / 2
EPS_LADDER = (1e-3, 1e-4, 1e-5)


@dataclass
class IndexPair:
    i: int
    nu: int
    flavor: str
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.i = int(self.i)
        self.nu = int(self.nu)

    def as_dict(self) -> dict:
        return {"i": self.i, "nu": self.nu, "flavor": self.flavor, "method": self.method, "params": self.params}


@dataclass
class RotationTrace:
    grid: np.ndarray
    Q: np.ndarray
    delta: np.ndarray
    rho: np.ndarray


# ---------------------------------------------------------------------------
# nullities
# ---------------------------------------------------------------------------


def _rank_deficiency(A: np.ndarray, thr: float, what: str) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    border = (s > thr) & (s <= 10 * thr)
    if np.any(border):
        warnings.warn(f"borderline rank in {what}: singular values {s[border]}", BorderlineWarning, stacklevel=3)
    return int(np.sum(s <= thr))


def _count_small(s: np.ndarray, thr: float, what: str) -> int:
    border = (s > thr) & (s <= 10 * thr)
    if np.any(border):
        warnings.warn(f"borderline rank in {what}: singular values {s[border]}", BorderlineWarning, stacklevel=3)
    return int(np.sum(s <= thr))


def l0_nullity(path, rel_tol: float = RANK_TOL) -> int:
    """``dim ker V(T)`` of the endpoint (a path or a matrix)."""
    M = path.end if isinstance(path, SymplecticPath) else np.asarray(path)
    return _count_small(l0_angle_sines(M), rel_tol, "V(T)")


def omega_nullity(path, omega, rel_tol: float = RANK_TOL, eig_tol: float = 1e-4) -> int:
    """``dim_C ker(gamma(T) - omega I)``; ``omega`` complex or an angle.

    Singular values alone mislead for large non-normal endpoints, so the count is
    capped by the number of eigenvalues within ``eig_tol`` of ``omega``.
    """
    M = path.end if isinstance(path, SymplecticPath) else np.asarray(path)
    w = complex(omega) if isinstance(omega, complex) else complex(np.exp(1j * float(omega)))
    if abs(abs(w) - 1.0) > 1e-12:
        raise ValueError("omega must lie on the unit circle")
    near = int(np.sum(np.abs(np.linalg.eigvals(M) - w) <= eig_tol))
    if near == 0:
        return 0
    A = M.astype(complex) - w * np.eye(M.shape[0])
    return min(near, _rank_deficiency(A, rel_tol * max(1.0, float(np.linalg.norm(M, 2))), "gamma(T) - omega I"))


def l0_omega_intersection_dim(M: np.ndarray, theta: float, rel_tol: float = RANK_TOL) -> int:
    """``dim(M L0 ∩ exp(theta J) L0)`` from orthonormal frames of both subspaces."""
    n = M.shape[0] // 2
    V, U = _l0_frame(np.asarray(M))
    c, s_ = np.cos(theta), np.sin(theta)
    E = np.concatenate([-s_ * np.eye(n), c * np.eye(n)])
    A = np.hstack([np.concatenate([V, U]), E])
    return _count_small(np.linalg.svd(A, compute_uv=False), rel_tol, "M L0 + e^{theta J} L0")


# ---------------------------------------------------------------------------
# rotation trace
# ---------------------------------------------------------------------------


def _l0_frame(frames: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frame ``(V, U)`` of ``M L0``; the positive triangular factor keeps ``arg det(U - iV)``."""
    _, V, _, U = blocks(frames)
    n = V.shape[-1]
    Q, R = np.linalg.qr(np.concatenate([V, U], axis=-2))
    sgn = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    sgn[sgn == 0] = 1.0
    Q = Q * sgn[..., None, :]
    return Q[..., :n, :], Q[..., n:, :]


def _det_u_minus_iv(frames: np.ndarray) -> np.ndarray:
    """``det(U - iV)`` of the orthonormalized frame: same argument, unit modulus."""
    V, U = _l0_frame(frames)
    return np.linalg.det(U - 1j * V)


def l0_angle_sines(M: np.ndarray) -> np.ndarray:
    """Singular values of the V block of an orthonormal frame of ``M L0``.

    Zeros count ``dim(M L0 ∩ L0)``; the values are scale free.
    """
    V, _ = _l0_frame(np.asarray(M))
    return np.linalg.svd(V, compute_uv=False)


def rotation_trace(path: SymplecticPath) -> RotationTrace:
    """``Q(t) = (U - iV)(U + iV)^{-1}``, continuous ``Delta(t)`` and ``rho(t)``."""
    _, V, _, U = path.blocks()
    W = U - 1j * V
    Q = W @ np.linalg.inv(U + 1j * V)
    d = np.linalg.det(W)
    rho = np.abs(d)
    delta = _unwrap(np.angle(_det_u_minus_iv(path.frames)))
    return RotationTrace(path.grid, Q, delta, rho)


def _unwrap(phase: np.ndarray) -> np.ndarray:
    steps = np.angle(np.exp(1j * np.diff(phase)))
    if steps.size and np.max(np.abs(steps)) >= MAX_PHASE_STEP:
        raise UnwrapError(f"phase step {np.max(np.abs(steps)):.3f} rad exceeds pi/2")
    return phase[0] + np.concatenate([[0.0], np.cumsum(steps)])


# ---------------------------------------------------------------------------
# closing path beta
# ---------------------------------------------------------------------------


def _skew_log_so(R: np.ndarray) -> np.ndarray:
    """Real skew ``S`` with ``expm(S) = R`` for ``R`` in ``SO(n)``."""
    n = R.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    T, Z = schur(R, output="real")
    L = np.zeros_like(T)
    minus = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 1e-14:
            ang = np.arctan2(T[i + 1, i], T[i, i])
            L[i, i + 1] = -ang
            L[i + 1, i] = ang
            i += 2
        else:
            if T[i, i] < 0:
                minus.append(i)
            i += 1
    if len(minus) % 2:
        raise ValueError("matrix is not in SO(n)")
    for a, b in zip(minus[0::2], minus[1::2]):
        L[a, b] = -np.pi
        L[b, a] = np.pi
    S = Z @ L @ Z.T
    S = 0.5 * (S - S.T)
    if not np.allclose(expm(S), R, atol=1e-9):
        raise ValueError("orthogonal logarithm failed")
    return S


def _orthogonal_path(O: np.ndarray, target: np.ndarray) -> Callable[[float], np.ndarray]:
    S = _skew_log_so(O @ target.T)
    return lambda s: expm((1.0 - s) * S) @ target


def _gl_contraction(V: np.ndarray, branch: str) -> tuple[Callable[[float], np.ndarray], np.ndarray]:
    """Path ``W(s)`` in ``GL(n)`` from ``V`` to ``I`` or ``Jn`` (same det sign)."""
    n = V.shape[0]
    Jn = standard_matrices(n).Jn.astype(float)
    target = np.eye(n) if np.linalg.det(V) > 0 else Jn
    if branch == "polar":
        O, P = polar(V)
        w, X = np.linalg.eigh(P)
        orth = _orthogonal_path(O, target)
        return (lambda s: orth(s) @ (X * w ** (1.0 - s)) @ X.T), target
    if branch == "qr":
        Qm, R = np.linalg.qr(V)
        sgn = np.sign(np.diag(R))
        Qm, R = Qm * sgn, (R.T * sgn).T
        orth = _orthogonal_path(Qm, target)
        return (lambda s: orth(s) @ ((1.0 - s) * R + s * np.eye(n))), target
    raise ValueError(f"unknown branch {branch!r}")


def closing_path(M: np.ndarray, branch: str = "polar") -> Callable[[float], np.ndarray]:
    """``beta(s)``, ``s in [0, 2]``, from ``M`` to ``M+``/``M-`` with ``det V != 0`` throughout.

    ``M = L1 K L2`` with lower shears ``L1``, ``L2`` (symmetric blocks ``UV^{-1}``
    and ``V^{-1}S``) and ``K = [[0, V], [-V^{-T}, 0]]``.  Stage one scales the
    shears to zero (the V block stays ``V``); stage two moves ``V`` to ``I`` or
    ``Jn`` inside ``GL(n)``.
    """
    n = M.shape[0] // 2
    S, V, _, U = blocks(M)
    if l0_angle_sines(M)[-1] <= 1e-12:
        raise DegenerateEndpointError("det V(T) = 0")
    Vinv = np.linalg.inv(V)
    X = U @ Vinv
    Y = Vinv @ S
    X = 0.5 * (X + X.T)
    Y = 0.5 * (Y + Y.T)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    W, _ = _gl_contraction(V, branch)

    def K(Wm):
        return np.block([[zero, Wm], [-np.linalg.inv(Wm).T, zero]])

    K0 = K(V)

    def shear(A):
        return np.block([[eye, zero], [A, eye]])

    def beta(s: float) -> np.ndarray:
        if s <= 1.0:
            return shear((1.0 - s) * X) @ K0 @ shear((1.0 - s) * Y)
        return K(W(s - 1.0))

    return beta


def _sample_adaptive(f: Callable[[float], np.ndarray], s0: float, s1: float, n0: int = 33, max_depth: int = 14):
    ss = list(np.linspace(s0, s1, n0))
    frames = [f(s) for s in ss]
    phases = [np.angle(_det_u_minus_iv(F)) for F in frames]
    out_s, out_f = [ss[0]], [frames[0]]

    def rec(sa, fa, pa, sb, fb, pb, depth):
        step = abs(np.angle(np.exp(1j * (pb - pa))))
        if step > np.pi / 8 and depth < max_depth:
            sm = 0.5 * (sa + sb)
            fm = f(sm)
            pm = np.angle(_det_u_minus_iv(fm))
            rec(sa, fa, pa, sm, fm, pm, depth + 1)
            rec(sm, fm, pm, sb, fb, pb, depth + 1)
        else:
            out_s.append(sb)
            out_f.append(fb)

    for k in range(len(ss) - 1):
        rec(ss[k], frames[k], phases[k], ss[k + 1], frames[k + 1], phases[k + 1], 0)
    return np.array(out_s), np.array(out_f)


def _prefix_frames(n: int, samples: int = 33) -> np.ndarray:
    phi = np.linspace(np.pi / 2, 0.0, samples)
    J = J_matrix(n)
    eye = np.eye(2 * n)
    return np.cos(phi)[:, None, None] * eye + np.sin(phi)[:, None, None] * J


def extend_and_join(path: SymplecticPath, branch: str = "polar") -> SymplecticPath:
    """The joined path ``beta * tilde-gamma`` on ``[0, 1]``.

    The prefix occupies ``[0, 1/4]``, the original path ``[1/4, 1/2]`` and the
    closing path ``[1/2, 1]``.
    """
    n = path.n
    pre = _prefix_frames(n)
    beta = closing_path(path.end, branch)
    s, bf = _sample_adaptive(beta, 0.0, 2.0)
    t_pre = np.linspace(0.0, 0.25, len(pre))
    t_path = 0.25 + 0.25 * path.grid / path.T
    t_beta = 0.5 + 0.25 * s
    grid = np.concatenate([t_pre, t_path[1:], t_beta[1:]])
    frames = np.concatenate([pre, path.frames[1:], bf[1:]])
    Vb = blocks(bf)[1]
    if np.min(np.abs(np.linalg.det(Vb))) <= 0:
        raise DegenerateEndpointError("closing path left Sp*_{L0}")
    return SymplecticPath(n, grid, frames, interp="joined")


def _winding_value(path: SymplecticPath, branch: str) -> tuple[int, float]:
    joined = extend_and_join(path, branch)
    d = _det_u_minus_iv(joined.frames)
    if np.any(np.abs(d) < 0.5):
        raise UnwrapError("orthonormal frame lost unitarity")
    delta = _unwrap(np.angle(d))
    val = (delta[-1] - delta[0]) / np.pi
    k = int(round(val))
    return k, abs(val - k)


def l0_index_nondegenerate(path: SymplecticPath, branch: str = "polar", max_refine: int = 4) -> IndexPair:
    """Winding-number L0-index of a path with ``det V(T) != 0``."""
    if l0_nullity(path) != 0:
        raise DegenerateEndpointError("path is L0-degenerate")
    current = path
    for attempt in range(max_refine + 1):
        try:
            k, residual = _winding_value(current, branch)
            break
        except UnwrapError:
            if current.refine is None or attempt == max_refine:
                raise
            current = current.refine()
    if residual >= 0.01:
        raise UnwrapError(f"winding residual {residual:.3g} not integral")
    return IndexPair(
        k, 0, "L0", "winding", {"branch": branch, "grid": int(len(current.grid)), "residual": float(residual)}
    )


def _perturbed(path: SymplecticPath, eps: float) -> SymplecticPath:
    n = path.n
    J = J_matrix(n)
    eye = np.eye(2 * n)

    s = path.grid / path.T
    rot = np.cos(eps * s)[:, None, None] * eye + np.sin(eps * s)[:, None, None] * J
    out = SymplecticPath(n, path.grid, rot @ path.frames, path.interp)
    if path.refine is not None:
        parent = path.refine
        out.refine = lambda: _perturbed(parent(), eps)
    return out


def l0_index(path: SymplecticPath, ladder=EPS_LADDER, branch: str = "polar") -> IndexPair:
    """L0-index ``(i, nu)`` of any path; degenerate ends use the perturbation ladder."""
    nu = l0_nullity(path)
    if nu == 0:
        return l0_index_nondegenerate(path, branch)
    values = {}
    for sign in (+1, -1):
        vals = [l0_index_nondegenerate(_perturbed(path, sign * eps), branch).i for eps in ladder]
        if len(vals) >= 2 and vals[-1] != vals[-2]:
            raise StabilizationError(f"perturbed indices {vals} (sign {sign:+d}) did not stabilize")
        values[sign] = vals
    i = min(values[1][-1], values[-1][-1])
    return IndexPair(
        i,
        nu,
        "L0",
        "winding",
        {"branch": branch, "ladder": list(ladder), "plus": values[1], "minus": values[-1]},
    )


def l0_index_from_coefficients(B, T: float = 1.0, steps: Optional[int] = None) -> IndexPair:
    from .symplectic import integrate_fundamental

    return l0_index(integrate_fundamental(B, T, steps))
