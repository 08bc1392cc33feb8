import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maslov_brake.corpus import generate_sample
from maslov_brake.errors import PreconditionError
from maslov_brake.iteration import (
    IterationContext,
    bott_l0_check,
    bott_nullity_check,
    bott_roots,
    equality_case_classify,
    iterate_path,
    iteration_inequality_check,
    normal_form_path,
    omega_bound_check,
    second_period_matrix,
    splitting_numbers,
)
from maslov_brake.symplectic import CoefficientPath, N_matrix, diamond, integrate_fundamental, normal_form, symplectic_inverse


def rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_bott_roots():
    assert len(bott_roots(5)) == 2 and len(bott_roots(6)) == 2 and bott_roots(2) == []
    assert np.allclose(bott_roots(3), [np.exp(2j * np.pi / 3)])


def test_second_period_matrix_formula():
    M = generate_sample(2, 3, 0).path
    M1 = integrate_fundamental(M).end
    Nm = N_matrix(2)
    assert np.allclose(second_period_matrix(M1), Nm @ symplectic_inverse(M1) @ Nm @ M1)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_iterated_path_matches_direct_integration(k):
    # for brake-symmetric B the reflected assembly equals the fundamental solution on [0, k]
    B = generate_sample(2, 21, 4, scale=3.0).path
    it = iterate_path(integrate_fundamental(B, 1.0), k)
    direct = integrate_fundamental(B, float(k), 2048 * k).end
    assert it.junction_error < 1e-9
    assert np.allclose(it.full.end, direct, atol=1e-8 * max(1.0, np.abs(direct).max()))


def test_context_requires_brake_symmetry():
    B = CoefficientPath.from_fourier([np.eye(2)], [np.diag([1.0, 0.0])])
    with pytest.raises(PreconditionError):
        IterationContext(B)


@pytest.mark.parametrize(
    "form,omega,expected",
    [
        (("N1", 1, 1), 0.0, (1, 1)),
        (("N1", 1, 0), 0.0, (1, 1)),
        (("N1", 1, -1), 0.0, (0, 0)),
        (("N1", -1, -1), np.pi, (1, 1)),
        (("N1", -1, 0), np.pi, (1, 1)),
        (("N1", -1, 1), np.pi, (0, 0)),
        (("R", 1.0), 1.0, (0, 1)),
        (("R", 4.0), 4.0, (0, 1)),
        (("hyperbolic", 1.0), 0.0, (0, 0)),
        (("hyperbolic", 1.0), 2.0, (0, 0)),
    ],
)
def test_splitting_numbers_normal_forms(form, omega, expected):
    s = splitting_numbers(normal_form_path(*form), omega)
    assert (s.Splus, s.Sminus) == expected


def test_normal_form_paths_end_at_forms():
    assert np.allclose(integrate_fundamental(normal_form_path("N1", 1, 1)).end, normal_form("N1", 1, 1), atol=1e-10)
    assert np.allclose(integrate_fundamental(normal_form_path("N1", -1, -1)).end, normal_form("N1", -1, -1), atol=1e-8)
    assert np.allclose(integrate_fundamental(normal_form_path("R", 2.0)).end, rot(2.0), atol=1e-10)


@pytest.mark.parametrize(
    "M,verdict",
    [
        (np.eye(4), "both"),
        (diamond(rot(0.5), rot(0.5)), "left"),
        (diamond(rot(1.0), rot(2 * np.pi - 1.0)), "generic"),
        (np.diag([2.0, 0.5]), "generic"),
        (diamond(normal_form("N1", 1, 1), normal_form("N1", 1, 1)), "right"),
        (diamond(normal_form("N1", 1, -1), rot(0.5)), "left"),
    ],
)
def test_equality_classifier(M, verdict):
    assert equality_case_classify(M).verdict == verdict


def test_classifier_counts():
    v = equality_case_classify(diamond(normal_form("N1", 1, 1), normal_form("N1", 1, 1)))
    assert v.r == 2 and v.q == 0
    v = equality_case_classify(diamond(normal_form("N1", 1, -1), rot(0.5)))
    assert v.q == 1
    assert equality_case_classify(np.eye(4)).p == 2


def test_arc_condition_for_left_case():
    M = diamond(rot(0.5), rot(0.5))
    # 2 pi / 13 < 0.5 < 2 pi / 12
    assert equality_case_classify(M, k=13).verdict == "generic"
    assert equality_case_classify(M, k=12).verdict == "left"


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 200), st.sampled_from([1, 2]), st.integers(2, 5))
def test_bott_and_inequalities_on_random_systems(index, n, k):
    B = generate_sample(n, 99, index, scale=4.0).path
    ctx = IterationContext(B)
    assert bott_l0_check(B, k, ctx).equal
    assert bott_nullity_check(B, k, ctx).equal
    r = iteration_inequality_check(B, k, ctx)
    assert r.holds
    assert all(row["holds"] for row in omega_bound_check(B, [np.exp(1j), -1.0 + 0j], ctx))


def test_inequality_report_exposes_components():
    B = generate_sample(1, 5, 2).path
    r = iteration_inequality_check(B, 4)
    d = r.as_dict()
    for key in ("i_L0(1)", "i_1(2)", "nu_1(2k)", "i_L0_sqrt-1(1)"):
        assert key in d["components"]
    assert d["holds"] == r.holds
    with pytest.raises(ValueError):
        iteration_inequality_check(B, 1)
