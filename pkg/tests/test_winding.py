import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maslov_brake.errors import DegenerateEndpointError
from maslov_brake.symplectic import CoefficientPath, integrate_fundamental
from maslov_brake.winding import (
    closing_path,
    l0_angle_sines,
    l0_index,
    l0_index_from_coefficients,
    l0_nullity,
    l0_omega_intersection_dim,
    omega_nullity,
)


def rotation_index(c: float) -> int:
    """Closed form for z' = J c z on [0, 1]: one crossing of L0 at each t = k pi / c in (0, 1)."""
    return math.ceil(c / math.pi) - 1


def det_v_sign_changes(B: CoefficientPath, steps: int = 4096) -> int:
    path = integrate_fundamental(B, 1.0, steps)
    n = B.n
    d = np.linalg.det(path.frames[:, :n, n:])
    d = d[steps // 64 :]  # skip the forced zero at t = 0
    return int(np.sum(np.sign(d[1:]) != np.sign(d[:-1])))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_constant_identity_path(n):
    p = l0_index_from_coefficients(CoefficientPath.constant(np.zeros((2 * n, 2 * n))))
    assert (p.i, p.nu) == (-n, n)


@pytest.mark.parametrize("c,expected", [(1.0, (0, 0)), (math.pi / 2, (0, 0)), (math.pi, (0, 1)), (4.0, (1, 0)), (7.0, (2, 0)), (2 * math.pi, (1, 1))])
def test_rotation_closed_form(c, expected):
    p = l0_index_from_coefficients(CoefficientPath.constant(c * np.eye(2)))
    assert (p.i, p.nu) == expected
    if expected[1] == 0:
        assert p.i == rotation_index(c)


def test_direct_sum_is_additive():
    B = CoefficientPath.constant(np.diag([1.0, 4.0, 7.0, 1.0, 4.0, 7.0]))
    assert l0_index_from_coefficients(B).i == 0 + 1 + 2


def test_branches_agree():
    path = integrate_fundamental(CoefficientPath.constant(np.diag([4.0, 2.5, 4.0, 2.5])), 1.0)
    assert l0_index(path, branch="polar").i == l0_index(path, branch="qr").i


def test_nullities():
    M = np.eye(4)
    assert l0_nullity(M) == 2
    assert omega_nullity(M, 1.0 + 0j) == 4
    assert omega_nullity(M, -1.0 + 0j) == 0
    R = np.array([[0.0, -1.0], [1.0, 0.0]])  # quarter turn: R L0 is the x-axis
    assert l0_nullity(R) == 0
    assert l0_omega_intersection_dim(R, np.pi / 2) == 1
    assert l0_omega_intersection_dim(R, 1.0) == 0


def test_angle_sines_are_scale_free():
    M = np.diag([1e6, 1e-6])  # L0 is invariant, V block vanishes
    assert l0_angle_sines(M)[-1] < 1e-12
    with pytest.raises(DegenerateEndpointError):
        closing_path(M)


@st.composite
def positive_s22_systems(draw):
    n = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 10_000))
    rng = np.random.Generator(np.random.Philox(seed))
    S11 = rng.standard_normal((n, n))
    S12 = rng.standard_normal((n, n)) * 0.5
    L = rng.standard_normal((n, n))
    S22 = L @ L.T + 0.5 * np.eye(n)
    amp = draw(st.floats(0.5, 6.0))
    B = np.block([[S11 + S11.T, S12], [S12.T, S22]]) * amp
    return CoefficientPath.constant(B, brake_check=False)


@settings(max_examples=25, deadline=None)
@given(positive_s22_systems())
def test_positive_crossings_match_sign_changes(B):
    # with S22 > 0 all crossings are positive, so the index counts interior crossings
    M = integrate_fundamental(B, 1.0).end
    if l0_nullity(M) or np.min(l0_angle_sines(M)) < 1e-4:
        return
    assert l0_index_from_coefficients(B).i == det_v_sign_changes(B)
