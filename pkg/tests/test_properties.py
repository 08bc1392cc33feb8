from hypothesis import given, settings, strategies as st

from maslov_brake.galerkin import index_l0_via_relative, index_omega_periodic
from maslov_brake.winding import l0_index_from_coefficients
from systems import integral_min_eig, monotone_pair, positive_s22_path, semipositive_path

seeds = st.integers(0, 5000)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_positive_lower_block_gives_nonnegative_index(seed):
    B = positive_s22_path(seed)
    assert l0_index_from_coefficients(B).i >= 0
    assert index_l0_via_relative(B).i >= 0


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_semipositive_system_has_periodic_index_at_least_n(seed):
    B = semipositive_path(seed)
    assert integral_min_eig(B) > 0
    assert index_omega_periodic(B, 1.0 + 0j).i >= B.n


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_periodic_index_is_monotone(seed):
    B1, B2 = monotone_pair(seed)
    big, small = index_omega_periodic(B1, 1.0 + 0j), index_omega_periodic(B2, 1.0 + 0j)
    assert big.i >= small.i + small.nu
