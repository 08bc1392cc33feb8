"""Acceptance gate: one test per criterion, summarized as PASS/FAIL lines at the end of the run."""

import math
import time

import numpy as np
import pytest

from conftest import register_criterion
from maslov_brake.brake import verify_brake_certificate
from maslov_brake.cli import main
from maslov_brake.errors import PreconditionError
from maslov_brake.galerkin import index_function_scan, index_l0_via_relative, index_omega_periodic, relative_index
from maslov_brake.hamiltonian import Term, builtin, second_order_spec
from maslov_brake.iteration import (
    IterationContext,
    bott_l0_check,
    bott_nullity_check,
    iteration_inequality_check,
    normal_form_path,
    splitting_numbers,
)
from maslov_brake.report import write_csv
from maslov_brake.winding import l0_index_from_coefficients
from systems import integral_min_eig, monotone_pair, positive_s22_path, semipositive_path

for _num, _text in [
    (1, "winding i_L0 + n equals the Galerkin relative index on the corpus"),
    (2, "Bott-type index and nullity formulas, k = 2..6"),
    (3, "iteration sandwich has no violations"),
    (4, "splitting numbers at the N1, R and hyperbolic normal forms"),
    (5, "positivity and monotonicity on 100 systems each"),
    (6, "index-function scans: sandwich, jump bounds, jumps only at crossings"),
    (7, "quartic circle orbit certificate"),
    (8, "Morse-index identity at the circle orbit, m = 8..16"),
    (9, "second-order odd and Neumann pipelines"),
    (10, "byte-identical reports on re-run"),
]:
    register_criterion(_num, _text)

K_RANGE = range(2, 7)


@pytest.fixture(scope="module")
def iteration_runs(corpus):
    runs = []
    for s in corpus:
        ctx = IterationContext(s.path)
        for k in K_RANGE:
            runs.append((s, k, bott_l0_check(s.path, k, ctx), bott_nullity_check(s.path, k, ctx), iteration_inequality_check(s.path, k, ctx)))
    return runs


def test_criterion_01_winding_matches_galerkin(corpus):
    assert len(corpus) >= 100 and {s.n for s in corpus} == {1, 2, 3}
    start = time.perf_counter()
    mismatches = []
    for s in corpus:
        w = l0_index_from_coefficients(s.path)
        g = relative_index(s.path, "L0-fourier")
        if w.i + s.n != g.value:
            mismatches.append((s.seed, s.index, w.i + s.n, g.value))
    elapsed = time.perf_counter() - start
    print(f"criterion 1: {len(corpus)} systems, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert not mismatches
    assert elapsed <= 300


def test_criterion_02_bott_formulas(iteration_runs):
    bad = [(s.index, s.n, k) for s, k, b, nl, _ in iteration_runs if not (b.equal and nl.equal)]
    even = [b for _, k, b, _, _ in iteration_runs if k % 2 == 0]
    assert even and all("i_L0_sqrt-1(1)" in b.components for b in even)
    print(f"criterion 2: {len(iteration_runs)} (system, k) checks, {len(bad)} unequal")
    assert not bad


def test_criterion_03_sandwich(iteration_runs, tmp_path_factory):
    keys = ["i_L0(1)", "i_L0(k)", "i_1(2)", "nu_1(2)", "nu_1(2k)", "i_1(1)", "i_L0_sqrt-1(1)", "nu_L0_sqrt-1(1)", "nu_-1(2)"]
    rows, bad = [], []
    for s, k, _, _, r in iteration_runs:
        rows.append([s.seed, s.index, s.n, k, r.lhs, r.mid, r.rhs, r.holds] + [r.components.get(c, "") for c in keys])
        if not r.holds:
            bad.append((s.index, s.n, k))
    audit = write_csv(tmp_path_factory.mktemp("audit") / "sandwich.csv", ["seed", "index", "n", "k", "lower", "i_L0(k)", "upper", "holds"] + keys, rows)
    print(f"criterion 3: {len(rows)} sandwiches, {len(bad)} violations, components in {audit}")
    assert not bad


SPLITTING_ITEMS = [
    ("N1(1,1)", ("N1", 1, 1), 0.0, (1, 1)),
    ("N1(1,0)", ("N1", 1, 0), 0.0, (1, 1)),
    ("N1(1,-1)", ("N1", 1, -1), 0.0, (0, 0)),
    ("N1(-1,-1)", ("N1", -1, -1), math.pi, (1, 1)),
    ("N1(-1,0)", ("N1", -1, 0), math.pi, (1, 1)),
    ("N1(-1,1)", ("N1", -1, 1), math.pi, (0, 0)),
    ("R(1.0)", ("R", 1.0), 1.0, (0, 1)),
    ("R(2.5)", ("R", 2.5), 2.5, (0, 1)),
    ("R(4.0)", ("R", 4.0), 4.0, (0, 1)),
    ("R(5.5)", ("R", 5.5), 5.5, (0, 1)),
    ("hyperbolic, omega = 1", ("hyperbolic", 1.0), 0.0, (0, 0)),
    ("hyperbolic, omega = -1", ("hyperbolic", 1.0), math.pi, (0, 0)),
    ("hyperbolic, omega = e^2i", ("hyperbolic", 0.7), 2.0, (0, 0)),
]


def test_criterion_04_splitting_numbers():
    wrong = []
    for label, form, angle, expected in SPLITTING_ITEMS:
        s = splitting_numbers(normal_form_path(*form), angle)
        print(f"criterion 4: {label}: (S+, S-) = {(s.Splus, s.Sminus)}")
        if (s.Splus, s.Sminus) != expected:
            wrong.append((label, (s.Splus, s.Sminus), expected))
    assert not wrong


def test_criterion_05_positivity_and_monotonicity():
    count = 100
    lower_block, periodic, monotone = [], [], []
    for seed in range(count):
        B = positive_s22_path(seed)
        w, g = l0_index_from_coefficients(B), index_l0_via_relative(B)
        if w.i < 0 or g.i < 0 or w.i != g.i:
            lower_block.append((seed, w.i, g.i))
        P = semipositive_path(seed)
        assert integral_min_eig(P) > 0
        p = index_omega_periodic(P, 1.0 + 0j)
        if p.i < P.n:
            periodic.append((seed, p.i))
        B1, B2 = monotone_pair(seed)
        big, small = index_omega_periodic(B1, 1.0 + 0j), index_omega_periodic(B2, 1.0 + 0j)
        if big.i < small.i + small.nu:
            monotone.append((seed, big.i, small.i, small.nu))
    print(f"criterion 5: lower-block {count - len(lower_block)}/{count}, semipositive {count - len(periodic)}/{count}, monotone {count - len(monotone)}/{count}")
    assert not lower_block and not periodic and not monotone


def test_criterion_06_index_function_scans(corpus):
    thetas = np.linspace(0.05, math.pi - 0.05, 41)
    failed = []
    for s in corpus[::8]:
        table = index_function_scan(s.path, thetas, strict=False)
        if not (table.checks["sandwich"] and table.checks["jump_bounds"] and table.checks["jumps_have_nullity"]):
            failed.append((s.index, s.n, table.checks))
    print(f"criterion 6: {len(corpus[::8])} scans, {len(failed)} failing")
    assert not failed


def test_criterion_07_circle_orbit(circle_certificate):
    c = circle_certificate
    start = np.array([0.0, math.sqrt(math.pi) / 2])
    err = min(np.linalg.norm(c.orbit.start - start), np.linalg.norm(c.orbit.start + start)) / np.linalg.norm(start)
    print(f"criterion 7: start {c.orbit.start}, relative error {err:.2e}, indices {c.indices.as_dict()}")
    assert err <= 1e-6
    assert c.indices.l0.i <= 1
    assert c.indices.one.nu >= 1
    assert c.hx.holds
    assert c.period["tau_min"] == pytest.approx(c.tau)


def test_criterion_08_morse_identity(circle_certificate):
    m = circle_certificate.morse
    assert [r["m"] for r in m["rows"]] == list(range(8, 17))
    for r in m["rows"]:
        print(f"criterion 8: m={r['m']} neg={r['neg']} expected={r['expected_neg']} zero={r['zero']}")
    assert all(r["neg"] == r["m"] + 1 + circle_certificate.indices.l0.i for r in m["rows"])
    assert all(r["zero"] == circle_certificate.indices.l0.nu for r in m["rows"])


def test_criterion_09_second_order():
    cert = verify_brake_certificate(builtin("second-order-x4"), 2.0)
    so = cert.morse["second_order"]
    print(f"criterion 9: odd start {cert.orbit.start}, m- = {so['m_minus']}, i_L0 = {cert.indices.l0.i}, tau_min = {cert.period['tau_min']}")
    assert cert.orbit.amplitude() > 1e-3
    assert so["m_minus"] == cert.indices.l0.i
    assert cert.period["tau_min"] in (pytest.approx(2.0), pytest.approx(1.0))
    neumann = second_order_spec((Term("radial", 4, 1.0),), 1, "neumann")
    ncert = verify_brake_certificate(neumann, 2.0)
    print(f"criterion 9: neumann clauses {ncert.clauses}")
    assert ncert.passed
    with pytest.raises(PreconditionError):
        verify_brake_certificate(neumann, 2 * math.pi + 0.1)


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["bott", "--n", "2", "--k", "3", "4", "--count", "8", "--seed", "11"],
        ["index", "--n", "3", "--count", "6", "--seed", "3", "--flavor", "l0-omega", "--omega", "1.2"],
        ["solve", "--hamiltonian", "quartic-first-order", "--tau", "2.0"],
        ["relindex", "--normal-form", "R", "2.0", "--scan", "0.1:3.0:30"],
    ]
    for i, argv in enumerate(runs):
        outs = [tmp_path / f"{i}_{rep}" for rep in "ab"]
        for o in outs:
            assert main(argv + ["--out", str(o)]) == 0
        names = sorted(p.name for p in outs[0].iterdir() if p.name != "metadata.json")
        assert names == sorted(p.name for p in outs[1].iterdir() if p.name != "metadata.json")
        for name in names:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), (argv[0], name)
        print(f"criterion 10: {argv[0]}: {len(names)} identical files")
