"""Small-matrix symplectic algebra and fundamental-solution integration.

Conventions: ``J = [[0, -I], [I, 0]]``, ``N = diag(-I, I)`` and the Lagrangian
subspace ``L0 = {0} x R^n``.  A symplectic matrix is split into ``n x n``
blocks as ``[[S, V], [T, U]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from .errors import NumericalError, SymplecticityError

DEFAULT_STEPS_PER_UNIT = 2048
SYMPLECTIC_TOL = 1e-9


# ---------------------------------------------------------------------------
# standard matrices and normal forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardMatrices:
    n: int
    J: np.ndarray
    N: np.ndarray
    Mplus: np.ndarray
    Mminus: np.ndarray
    Jn: np.ndarray


def standard_matrices(n: int) -> StandardMatrices:
    """Return ``J``, ``N``, the reference endpoints ``M+``, ``M-`` and ``Jn``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(n, dtype=int)
    zero = np.zeros((n, n), dtype=int)
    Jn = np.diag([-1] + [1] * (n - 1))
    J = np.block([[zero, -eye], [eye, zero]])
    N = np.block([[-eye, zero], [zero, eye]])
    Mplus = np.block([[zero, eye], [-eye, zero]])
    Mminus = np.block([[zero, Jn], [-Jn, zero]])
    return StandardMatrices(n=n, J=J, N=N, Mplus=Mplus, Mminus=Mminus, Jn=Jn)


def J_matrix(n: int) -> np.ndarray:
    return standard_matrices(n).J.astype(float)


def N_matrix(n: int) -> np.ndarray:
    return standard_matrices(n).N.astype(float)


def half_dim(M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {M.shape}")
    return M.shape[0] // 2


def blocks(M: np.ndarray):
    """Split ``M`` into ``(S, V, T, U)``; works on stacks ``(..., 2n, 2n)``."""
    n = M.shape[-1] // 2
    return M[..., :n, :n], M[..., :n, n:], M[..., n:, :n], M[..., n:, n:]


def symplectic_defect(M: np.ndarray) -> float:
    """``max |M^T J M - J|`` (entrywise)."""
    M = np.asarray(M)
    J = J_matrix(M.shape[-1] // 2)
    D = np.swapaxes(M, -1, -2) @ J @ M - J
    return float(np.max(np.abs(D)))


def is_symplectic(M: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    return symplectic_defect(M) <= tol * max(1.0, float(np.max(np.abs(M))) ** 2)


def symplectic_inverse(M: np.ndarray) -> np.ndarray:
    """``M^{-1} = -J M^T J`` for symplectic ``M``."""
    J = J_matrix(M.shape[-1] // 2)
    return -J @ np.swapaxes(M, -1, -2) @ J


def diamond(M1: np.ndarray, M2: np.ndarray, tol: float = SYMPLECTIC_TOL) -> np.ndarray:
    """Symplectic direct sum ``M1 <> M2`` interleaving the four blocks."""
    M1 = np.asarray(M1)
    M2 = np.asarray(M2)
    for M in (M1, M2):
        half_dim(M)
        if not is_symplectic(M, tol):
            raise SymplecticityError("diamond product of a non-symplectic matrix")
    k1, k2 = M1.shape[0] // 2, M2.shape[0] // 2
    A1, B1, C1, D1 = blocks(M1)
    A2, B2, C2, D2 = blocks(M2)
    z12 = np.zeros((k1, k2), dtype=np.result_type(M1, M2))
    z21 = z12.T
    return np.block(
        [
            [A1, z12, B1, z12],
            [z21, A2, z21, B2],
            [C1, z12, D1, z12],
            [z21, C2, z21, D2],
        ]
    )


def diamond_power(M: np.ndarray, k: int) -> np.ndarray:
    out = np.asarray(M)
    for _ in range(k - 1):
        out = diamond(out, M)
    return out


def normal_form(kind: str, *params) -> np.ndarray:
    """Exact 2x2 normal forms ``N1(lambda, b)`` and ``R(theta)``.

    ``N2`` forms are not supported.
    """
    if kind == "N1":
        lam, b = params
        if lam not in (1, -1) or b not in (-1, 0, 1):
            raise ValueError("N1 needs lambda in {1,-1} and b in {-1,0,1}")
        return np.array([[lam, b], [0, lam]], dtype=float)
    if kind == "R":
        (theta,) = params
        if not 0.0 < theta < 2.0 * np.pi:
            raise ValueError("R(theta) needs theta in (0, 2pi)")
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[c, -s], [s, c]])
    raise ValueError(f"unsupported normal form {kind!r}")


# ---------------------------------------------------------------------------
# unit-circle spectrum and Krein signatures
# ---------------------------------------------------------------------------


@dataclass
class UnitEigenvalue:
    value: complex
    algebraic: int
    geometric: int
    krein: Optional[tuple[int, int]] = None

    @property
    def angle(self) -> float:
        return float(np.angle(self.value))


@dataclass
class SpectralInvariant:
    unit_eigs: list[UnitEigenvalue]
    off_circle_count: int
    ambiguous: bool = False

    def total(self) -> int:
        return sum(e.algebraic for e in self.unit_eigs) + self.off_circle_count

    def find(self, lam: complex, tol: float = 1e-6) -> Optional[UnitEigenvalue]:
        for e in self.unit_eigs:
            if abs(e.value - lam) <= tol:
                return e
        return None


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        for g in groups:
            if min(abs(v - values[j]) for j in g) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def kernel_dim(A: np.ndarray, rel_tol: float = 1e-8, scale: Optional[float] = None) -> int:
    """Numerical kernel dimension by singular-value thresholding."""
    s = np.linalg.svd(A, compute_uv=False)
    ref = scale if scale is not None else max(1.0, float(np.max(s)) if s.size else 1.0)
    return int(np.sum(s <= rel_tol * ref))


def _generalized_eigenspace(M: np.ndarray, lam: complex, mult: int) -> np.ndarray:
    A = np.linalg.matrix_power(M.astype(complex) - lam * np.eye(M.shape[0]), mult)
    _, _, vh = np.linalg.svd(A)
    X = vh[-mult:].conj().T
    q, _ = np.linalg.qr(X)
    return q


def _krein_form(n: int) -> np.ndarray:
    # sign pinned so that R(theta), theta in (0, pi), has e^{i theta} of type (0, 1)
    return 1j * J_matrix(n)


def krein_signature(M: np.ndarray, lam: complex, mult: Optional[int] = None, tol: float = 1e-8) -> tuple[int, int]:
    """Signature ``(p, q)`` of the Krein form on the generalized eigenspace of ``lam``.

    The form is ``x^* (sqrt(-1) J) x``; with this sign a semisimple non-real unit
    eigenvalue of type ``(p, q)`` has splitting numbers ``(S+, S-) = (p, q)``.
    """
    M = np.asarray(M, dtype=float)
    n = half_dim(M)
    if mult is None:
        ev = np.linalg.eigvals(M)
        close = np.abs(ev - lam) <= max(1e-4, np.sqrt(tol))
        mult = int(np.sum(close))
    if mult == 0:
        raise ValueError(f"{lam} is not an eigenvalue")
    X = _generalized_eigenspace(M, lam, mult)
    H = X.conj().T @ _krein_form(n) @ X
    w = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    scale = max(1.0, float(np.max(np.abs(w))))
    return int(np.sum(w > tol * scale)), int(np.sum(w < -tol * scale))


def unit_spectrum(M: np.ndarray, tol: float = 1e-8) -> SpectralInvariant:
    """Eigenvalues of ``M`` on the unit circle with multiplicities and Krein data."""
    M = np.asarray(M, dtype=float)
    ev = np.linalg.eigvals(M)
    dist = np.abs(np.abs(ev) - 1.0)
    on = dist <= tol
    # cluster radius accommodates Jordan-block splitting ~ eps^(1/size)
    ambiguous = bool(np.any((dist > tol / 2) & (dist <= 2 * tol)))
    on_vals = ev[on]
    groups = _cluster(on_vals, max(1e-4, np.sqrt(tol)))
    norm = max(1.0, float(np.linalg.norm(M, 2)))
    eigs = []
    for g in groups:
        lam = complex(np.mean(on_vals[g]))
        lam = lam / abs(lam)
        if abs(lam.imag) < 1e-7:
            lam = complex(np.sign(lam.real), 0.0)
        alg = len(g)
        geo = kernel_dim(M - lam * np.eye(M.shape[0]), 1e-8, norm)
        geo = max(1, min(geo, alg))
        krein = None
        if abs(lam.imag) > 0:
            krein = krein_signature(M, lam, alg)
        eigs.append(UnitEigenvalue(lam, alg, geo, krein))
    eigs.sort(key=lambda e: (np.angle(e.value) % (2 * np.pi)))
    return SpectralInvariant(eigs, int(np.sum(~on)), ambiguous)


# ---------------------------------------------------------------------------
# coefficient paths  B(t)
# ---------------------------------------------------------------------------


@dataclass
class CoefficientPath:
    """Symmetric matrix function ``B(t)`` of the linear system ``z' = J B(t) z``.

    ``func`` maps a 1-d array of times to an array of shape ``(len(t), 2n, 2n)``.
    """

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    representation: str = "callable"
    data: dict = field(default_factory=dict)
    period: float = 2.0
    brake_symmetric: bool = False
    tol: float = 1e-10

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.func(t)

    def at(self, t: float) -> np.ndarray:
        return self(np.array([t]))[0]

    def norm_bound(self, t0: float = 0.0, t1: float = 1.0, samples: int = 257) -> float:
        ts = np.linspace(t0, t1, samples)
        return float(np.max(np.linalg.norm(self(ts), 2, axis=(1, 2))))

    def rescaled(self, k: float) -> "CoefficientPath":
        """``s -> k B(k s)``: the system on ``[0, k]`` reparametrized onto ``[0, 1]``."""
        base = self.func
        return CoefficientPath(
            self.n,
            lambda s: k * base(k * np.asarray(s)),
            representation="rescaled",
            data={"k": k},
            period=self.period / k,
            brake_symmetric=False,
            tol=self.tol,
        )

    def shifted_by(self, P: "CoefficientPath", sign: float = 1.0) -> "CoefficientPath":
        f, g = self.func, P.func
        return CoefficientPath(self.n, lambda t: f(t) + sign * g(t), representation="sum", tol=self.tol)

    # ---- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, B: np.ndarray, brake_check: bool = True) -> "CoefficientPath":
        B = np.asarray(B, dtype=float)
        n = half_dim(B)
        if not np.allclose(B, B.T, atol=1e-12):
            raise ValueError("B must be symmetric")
        Nm = N_matrix(n)
        brake = bool(np.allclose(Nm @ B @ Nm, B, atol=1e-12)) if brake_check else False
        return cls(
            n,
            lambda t: np.broadcast_to(B, (len(t),) + B.shape).copy(),
            representation="fourier-blocks",
            data={"cos": [B], "sin": []},
            brake_symmetric=brake,
        )

    @classmethod
    def from_fourier(cls, cos_blocks, sin_blocks=(), brake_symmetric: Optional[bool] = None) -> "CoefficientPath":
        """``B(t) = sum_j cos(j pi t) C_j + sum_{j>=1} sin(j pi t) E_j``.

        ``cos_blocks[j]`` multiplies ``cos(j pi t)``; ``sin_blocks[j-1]`` multiplies
        ``sin(j pi t)``.
        """
        C = np.array([np.asarray(c, dtype=float) for c in cos_blocks])
        E = np.array([np.asarray(e, dtype=float) for e in sin_blocks]) if len(sin_blocks) else None
        n = half_dim(C[0])
        for M in list(C) + (list(E) if E is not None else []):
            if not np.allclose(M, M.T, atol=1e-12):
                raise ValueError("Fourier blocks must be symmetric")
        jc = np.arange(len(C))
        js = np.arange(1, len(E) + 1) if E is not None else None

        def func(t):
            out = np.einsum("qj,jab->qab", np.cos(np.pi * np.outer(t, jc)), C)
            if E is not None:
                out = out + np.einsum("qj,jab->qab", np.sin(np.pi * np.outer(t, js)), E)
            return out

        if brake_symmetric is None:
            Nm = N_matrix(n)
            brake_symmetric = bool(
                all(np.allclose(Nm @ c @ Nm, c, atol=1e-12) for c in C)
                and (E is None or all(np.allclose(Nm @ e @ Nm, -e, atol=1e-12) for e in E))
            )
        return cls(
            n,
            func,
            representation="fourier-blocks",
            data={"cos": [c.tolist() for c in C], "sin": [e.tolist() for e in E] if E is not None else []},
            brake_symmetric=brake_symmetric,
        )

    @classmethod
    def from_samples(cls, t, samples, brake_symmetric: bool = False) -> "CoefficientPath":
        t = np.asarray(t, dtype=float)
        S = np.asarray(samples, dtype=float)
        n = S.shape[-1] // 2
        S = 0.5 * (S + np.swapaxes(S, -1, -2))
        spline = CubicSpline(t, S, axis=0)
        return cls(
            n,
            lambda s: spline(np.asarray(s)),
            representation="grid-samples",
            data={"t": t.tolist(), "B": S.tolist()},
            brake_symmetric=brake_symmetric,
        )

    # ---- JSON file format -------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.representation not in ("fourier-blocks", "grid-samples"):
            raise ValueError(f"representation {self.representation!r} is not serializable")
        return {
            "n": self.n,
            "representation": self.representation,
            "coefficients": self.data,
            "tol": self.tol,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CoefficientPath":
        unknown = set(d) - {"n", "representation", "coefficients", "tol"}
        if unknown:
            raise ValueError(f"unknown fields in coefficient file: {sorted(unknown)}")
        rep = d["representation"]
        co = d["coefficients"]
        if rep == "fourier-blocks":
            out = cls.from_fourier(co["cos"], co.get("sin", []))
        elif rep == "grid-samples":
            out = cls.from_samples(co["t"], co["B"])
        else:
            raise ValueError(f"unknown representation {rep!r}")
        if out.n != int(d["n"]):
            raise ValueError(f"declared n={d['n']} but blocks have n={out.n}")
        out.tol = float(d.get("tol", out.tol))
        return out

    @classmethod
    def load(cls, path) -> "CoefficientPath":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)


def check_brake_symmetry(B: CoefficientPath, samples: int = 201) -> dict:
    """Maximal violation of symmetry, ``B(1+t)N = N B(1-t)`` and ``B(t+2) = B(t)``."""
    n = B.n
    Nm = N_matrix(n)
    t = np.linspace(0.0, 2.0, samples)
    Bt = B(t)
    sym = float(np.max(np.abs(Bt - np.swapaxes(Bt, 1, 2))))
    reflect = float(np.max(np.abs(B(1.0 + t) @ Nm - Nm @ B(1.0 - t))))
    periodic = float(np.max(np.abs(B(t + 2.0) - Bt)))
    return {
        "symmetric": sym,
        "reflection": reflect,
        "periodicity": periodic,
        "max_violation": max(sym, reflect, periodic),
    }


# ---------------------------------------------------------------------------
# symplectic paths and integration
# ---------------------------------------------------------------------------


@dataclass
class SymplecticPath:
    """Sampled path ``gamma(t)`` in ``Sp(2n)`` with ``gamma(0) = I``.

    ``refine`` (optional) returns the same path on a finer grid; the index
    engines call it when phase unwrapping needs more resolution.
    """

    n: int
    grid: np.ndarray
    frames: np.ndarray
    interp: str = "piecewise-linear"
    refine: Optional[Callable[[], "SymplecticPath"]] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.shape != (len(self.grid), 2 * self.n, 2 * self.n):
            raise ValueError("frames/grid shape mismatch")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    @property
    def end(self) -> np.ndarray:
        return self.frames[-1]

    def blocks(self):
        return blocks(self.frames)

    def max_defect(self) -> float:
        return symplectic_defect(self.frames)

    def at(self, t: float) -> np.ndarray:
        i = int(np.clip(np.searchsorted(self.grid, t), 1, len(self.grid) - 1))
        t0, t1 = self.grid[i - 1], self.grid[i]
        w = (t - t0) / (t1 - t0)
        return (1 - w) * self.frames[i - 1] + w * self.frames[i]

    def right_multiplied(self, fn: Callable[[np.ndarray], np.ndarray]) -> "SymplecticPath":
        """Pointwise product ``gamma(t) P(t/T)``."""
        s = self.grid / self.T
        return SymplecticPath(self.n, self.grid, self.frames @ fn(s), self.interp)


def _gauss_magnus_steps(B: CoefficientPath, t0: float, T: float, steps: int) -> np.ndarray:
    h = (T - t0) / steps
    left = t0 + h * np.arange(steps)
    c = np.sqrt(3.0) / 6.0
    J = J_matrix(B.n)
    A1 = J @ B(left + (0.5 - c) * h)
    A2 = J @ B(left + (0.5 + c) * h)
    comm = A2 @ A1 - A1 @ A2
    omega = 0.5 * h * (A1 + A2) + (np.sqrt(3.0) / 12.0) * h * h * comm
    return expm(omega)


def _midpoint_steps(B: CoefficientPath, t0: float, T: float, steps: int) -> np.ndarray:
    h = (T - t0) / steps
    mid = t0 + h * (np.arange(steps) + 0.5)
    A = J_matrix(B.n) @ B(mid)
    eye = np.eye(2 * B.n)
    return np.linalg.solve(eye - 0.5 * h * A, eye + 0.5 * h * A)


def _project_symplectic(M: np.ndarray) -> np.ndarray:
    # one Newton-type correction towards Sp(2n): M <- M (I + J^T E)/2 style
    J = J_matrix(M.shape[0] // 2)
    E = M.T @ J @ M - J
    return M @ (np.eye(M.shape[0]) + 0.5 * J @ E)


def integrate_fundamental(
    B: CoefficientPath,
    T: float = 1.0,
    steps: Optional[int] = None,
    method: str = "magnus4",
    tol: float = 1e-9,
    reproject: bool = True,
) -> SymplecticPath:
    """Fundamental solution of ``z' = J B(t) z`` on ``[0, T]``.

    ``magnus4`` is the fourth-order Magnus integrator with exponential steps and
    ``midpoint`` the implicit midpoint (Cayley) rule; both preserve the
    symplectic structure up to round-off.
    """
    if steps is None:
        steps = max(2, int(np.ceil(DEFAULT_STEPS_PER_UNIT * T)))
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if method == "magnus4":
        props = _gauss_magnus_steps(B, 0.0, T, steps)
    elif method == "midpoint":
        props = _midpoint_steps(B, 0.0, T, steps)
    else:
        raise ValueError(f"unknown method {method!r}")
    n2 = 2 * B.n
    frames = np.empty((steps + 1, n2, n2))
    frames[0] = np.eye(n2)
    J = J_matrix(B.n)
    for i in range(steps):
        M = props[i] @ frames[i]
        if reproject and np.max(np.abs(M.T @ J @ M - J)) > 1e-13 * max(1.0, np.max(np.abs(M))) ** 2:
            M = _project_symplectic(M)
        frames[i + 1] = M
    defect = np.max(np.abs(np.swapaxes(frames, 1, 2) @ J @ frames - J), axis=(1, 2))
    scale = np.maximum(1.0, np.max(np.abs(frames), axis=(1, 2)) ** 2)
    if np.any(defect > tol * scale):
        raise SymplecticityError(f"symplecticity drift {float(np.max(defect / scale)):.3e} exceeds {tol}")
    grid = np.linspace(0.0, T, steps + 1)
    return SymplecticPath(
        B.n,
        grid,
        frames,
        interp=method,
        refine=lambda: integrate_fundamental(B, T, 2 * steps, method, tol, reproject),
    )


def monodromy(B: CoefficientPath, T: float = 1.0, steps: Optional[int] = None) -> np.ndarray:
    return integrate_fundamental(B, T, steps).end


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """``exp(J S)`` for a random symmetric ``S``."""
    S = rng.normal(size=(2 * n, 2 * n)) * scale
    S = 0.5 * (S + S.T)
    return expm(J_matrix(n) @ S)


__all__ = [
    "StandardMatrices",
    "standard_matrices",
    "J_matrix",
    "N_matrix",
    "blocks",
    "symplectic_defect",
    "is_symplectic",
    "symplectic_inverse",
    "diamond",
    "diamond_power",
    "normal_form",
    "UnitEigenvalue",
    "SpectralInvariant",
    "unit_spectrum",
    "krein_signature",
    "kernel_dim",
    "CoefficientPath",
    "check_brake_symmetry",
    "SymplecticPath",
    "integrate_fundamental",
    "monodromy",
    "random_symplectic",
    "NumericalError",
]
