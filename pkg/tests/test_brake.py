import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from maslov_brake.brake import (
    configuration_path,
    hx_check,
    linearize_orbit,
    minimal_period,
    morse_identity_check,
    second_order_morse,
    shoot_orbit,
    solve_second_order,
    tau_bound,
    verify_brake_certificate,
)
from maslov_brake.errors import ConstantOrbitError, PreconditionError
from maslov_brake.hamiltonian import HamiltonianSpec, Term, builtin, second_order_spec
from maslov_brake.symplectic import CoefficientPath
from maslov_brake.winding import l0_index_from_coefficients


def circle_radius(tau):
    # z' = 4|z|^2 J z rotates at angular speed 4 r^2
    return math.sqrt(math.pi / (2 * tau))


def test_circle_orbit_closed_form(circle_certificate):
    orbit = circle_certificate.orbit
    r = circle_radius(2.0)
    assert abs(np.linalg.norm(orbit.a) - r) / r <= 1e-6
    assert orbit.action == pytest.approx(math.pi**2 / 16, rel=1e-8)
    t = np.linspace(0, 2.0, 57)
    z = orbit.evaluate(t)
    w = 4 * r * r
    s = np.sign(orbit.a[0])
    expected = s * r * np.column_stack([-np.sin(w * t), np.cos(w * t)])
    assert np.allclose(z, expected, atol=1e-8)


def test_circle_linearization_formula(circle_certificate):
    orbit = circle_certificate.orbit
    B = linearize_orbit(orbit)
    for s in (0.0, 0.3, 1.1, 1.9):
        u = orbit.evaluate(s)[0]
        expected = 1.0 * (4 * (u @ u) * np.eye(2) + 8 * np.outer(u, u))
        assert np.allclose(B(s), expected, atol=1e-8)


def test_circle_certificate(circle_certificate):
    c = circle_certificate
    assert c.passed
    assert c.hx.holds
    assert (c.indices.l0.i, c.indices.l0.nu) == (1, 0)
    assert c.indices.engines_agree
    assert c.indices.one.nu >= 1
    assert c.period["k"] == 1 and c.period["tau_min"] == pytest.approx(2.0)
    assert c.orbit.energy_drift() < 1e-9
    assert c.orbit.boundary_defect() < 1e-10


@pytest.mark.parametrize("tau", [1.0, 8.0])
def test_circle_other_periods(tau):
    orbit = shoot_orbit(builtin("quartic-first-order"), tau)
    assert np.linalg.norm(orbit.a) == pytest.approx(circle_radius(tau), rel=1e-6)


def test_minimal_period_detects_repetition(circle_certificate):
    orbit = circle_certificate.orbit
    doubled = lambda t: orbit.evaluate(2 * np.asarray(t))
    assert minimal_period(doubled, tau=2.0)["k"] == 2
    tripled = lambda t: orbit.evaluate(3 * np.asarray(t))
    assert minimal_period(tripled, tau=2.0)["tau_min"] == pytest.approx(2.0 / 3)
    with pytest.raises(ConstantOrbitError):
        minimal_period(lambda t: np.ones((np.size(t), 2)), tau=1.0)


def test_tau_guard():
    spec = builtin("quartic-plus-B")
    assert tau_bound(spec) == pytest.approx(2 * math.pi)
    with pytest.raises(PreconditionError):
        shoot_orbit(spec, 7.0)
    neumann = second_order_spec((Term("radial", 4, 1.0),), 1, "neumann")
    with pytest.raises(PreconditionError):
        verify_brake_certificate(neumann, 6.5)


def test_precondition_failure_raises_before_solving():
    bad = HamiltonianSpec(1, np.zeros((2, 2)), (Term("radial", 4, -1.0),))
    with pytest.raises(PreconditionError):
        verify_brake_certificate(bad, 2.0)


@pytest.mark.parametrize("c", [1.0, 4.0, 7.0, 2.5])
def test_morse_identity_linear_systems(c):
    # constant coefficients: the zero solution of a purely quadratic problem
    B = CoefficientPath.constant(c * np.eye(2))
    p = l0_index_from_coefficients(B)
    report = morse_identity_check(B, p.i, p.nu)
    assert report.holds, report.rows


def test_morse_identity_corpus(corpus):
    for sample in corpus[::10]:
        B = sample.path
        p = l0_index_from_coefficients(B)
        assert morse_identity_check(B, p.i, p.nu, levels=(8, 12)).holds, (sample.seed, sample.index)


def duffing_period(v0):
    # x'' + 4 x^3 = 0 with x(0) = 0, x'(0) = v0: energy v0^2 / 2 = v^2 / 2 + x^4
    A = (v0 * v0 / 2) ** 0.25
    integral, _ = quad(lambda s: 1 / math.sqrt(1 - s**4), 0, 1, limit=200)
    return 4 * A / v0 * integral


def test_second_order_quartic_against_quadrature_and_ivp():
    cert = verify_brake_certificate(builtin("second-order-x4"), 2.0)
    assert cert.passed
    v0 = float(abs(cert.orbit.a[0]))
    P = duffing_period(v0)
    assert min(abs(P - 2.0), abs(2 * P - 2.0)) < 1e-8
    sol = solve_ivp(lambda t, y: [y[1], -4 * y[0] ** 3], (0, 2.0), [0.0, v0], rtol=1e-12, atol=1e-14, dense_output=True)
    path = configuration_path(cert, 41)
    x_ref = sol.sol(path[:, 0])[0]
    assert np.allclose(np.abs(path[:, 1]), np.abs(x_ref), atol=1e-8)
    assert cert.morse["second_order"]["m_minus"] == cert.indices.l0.i


def test_second_order_even_polynomial():
    cert = solve_second_order((Term("radial", 4, 0.25), Term("radial", 6, 1 / 6)), 3.0)
    assert cert.passed
    assert cert.period["tau_min"] in (pytest.approx(3.0), pytest.approx(1.5))


def test_second_order_morse_requires_odd_form(circle_certificate):
    with pytest.raises(PreconditionError):
        second_order_morse(circle_certificate.orbit)


def test_neumann_under_guard():
    cert = solve_second_order((Term("radial", 4, 1.0),), 2.0, "neumann")
    assert cert.passed
    x = configuration_path(cert, 101)
    # x'(0) = 0: the configuration is extremal at t = 0
    assert abs(x[1, 1] - x[0, 1]) < abs(x[10, 1] - x[0, 1])


def test_hx_fails_for_degenerate_convexity():
    orbit = shoot_orbit(builtin("second-order-x4"), 2.0)
    assert not hx_check(orbit).holds
