import json

import numpy as np
import pytest

from maslov_brake.errors import SymplecticityError
from maslov_brake.symplectic import (
    CoefficientPath,
    J_matrix,
    N_matrix,
    check_brake_symmetry,
    diamond,
    integrate_fundamental,
    is_symplectic,
    krein_signature,
    monodromy,
    normal_form,
    random_symplectic,
    symplectic_defect,
    symplectic_inverse,
    unit_spectrum,
)


def rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_standard_matrices():
    J, N = J_matrix(2), N_matrix(2)
    assert np.allclose(J @ J, -np.eye(4))
    assert np.allclose(N @ N, np.eye(4))
    assert np.allclose(N @ J, -J @ N)


def test_inverse_and_defect():
    rng = np.random.Generator(np.random.Philox(3))
    M = random_symplectic(3, rng)
    assert symplectic_defect(M) < 1e-10
    assert np.allclose(symplectic_inverse(M) @ M, np.eye(6), atol=1e-9)
    assert not is_symplectic(2 * np.eye(2))


def test_diamond_blocks_and_symplecticity():
    A = rot(0.3)
    B = normal_form("N1", 1, 1)
    D = diamond(A, B)
    assert D.shape == (4, 4)
    assert is_symplectic(D)
    assert np.allclose(D[np.ix_([0, 2], [0, 2])], A)
    assert np.allclose(D[np.ix_([1, 3], [1, 3])], B)
    with pytest.raises(SymplecticityError):
        diamond(A, 2 * np.eye(2))


def test_normal_forms_reject_unsupported():
    with pytest.raises(ValueError):
        normal_form("N2", 1j, 0)
    with pytest.raises(ValueError):
        normal_form("N1", 2, 0)


def test_rotation_monodromy_closed_form():
    # z' = J theta z  gives  exp(theta t J) = R(theta t)
    M = monodromy(CoefficientPath.constant(1.3 * np.eye(2)))
    assert np.allclose(M, rot(1.3), atol=1e-10)


def test_integrators_agree_and_stay_symplectic():
    B = CoefficientPath.from_fourier([np.diag([1.0, 2.0]), np.diag([0.5, -0.3])], [np.array([[0, 0.4], [0.4, 0]])])
    a = integrate_fundamental(B, 1.0, method="magnus4")
    b = integrate_fundamental(B, 1.0, method="midpoint", steps=8192)
    assert a.max_defect() < 1e-10
    assert np.allclose(a.end, b.end, atol=1e-6)


def test_krein_signature_of_rotation():
    # e^{i theta} of R(theta), theta in (0, pi), has type (0, 1); the conjugate has (1, 0)
    M = rot(1.0)
    assert krein_signature(M, np.exp(1j)) == (0, 1)
    assert krein_signature(M, np.exp(-1j)) == (1, 0)


def test_unit_spectrum_counts():
    spec = unit_spectrum(diamond(rot(1.0), np.diag([2.0, 0.5])))
    assert spec.off_circle_count == 2
    assert spec.total() == 4
    one = unit_spectrum(normal_form("N1", 1, 1)).find(1.0)
    assert one.algebraic == 2 and one.geometric == 1


def test_brake_symmetry_check_and_json_roundtrip(tmp_path):
    C0 = np.diag([1.0, 2.0])
    E1 = np.array([[0.0, 0.7], [0.7, 0.0]])
    B = CoefficientPath.from_fourier([C0, 0.5 * C0], [E1])
    assert check_brake_symmetry(B)["max_violation"] < 1e-14
    assert B.brake_symmetric
    path = tmp_path / "b.json"
    B.save(path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"n", "representation", "coefficients", "tol"}
    B2 = CoefficientPath.load(path)
    t = np.linspace(0, 2, 11)
    assert np.allclose(B(t), B2(t))


def test_non_brake_coefficients_are_flagged():
    # a sine term with block-diagonal coefficient breaks B(1+t)N = N B(1-t)
    B = CoefficientPath.from_fourier([np.eye(2)], [np.diag([1.0, 0.0])])
    assert check_brake_symmetry(B)["reflection"] > 0.1
    assert not B.brake_symmetric
