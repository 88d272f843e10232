import math

import numpy as np
import pytest

from oracles import brute_force, square_bonds
from twistgap.errors import DomainError
from twistgap.square import (SquareIsingSpec, alternating_sum, dual_coupling, gamma_spectrum, gammas,
                             kastening_partition_pair, log_one_minus_ratio, one_minus_ratio,
                             square_decay_rate, square_ratio)


@pytest.mark.parametrize("a", [0.05, 0.3, 0.44, 1.2])
def test_dual_coupling(a):
    ab = dual_coupling(a)
    assert math.sinh(2 * a) * math.sinh(2 * ab) == pytest.approx(1.0, rel=1e-14)
    assert dual_coupling(ab) == pytest.approx(a, rel=1e-12)


def test_gamma_zero_is_mass_gap():
    spec = SquareIsingSpec(0.3, 0.2, 8, 5)
    g = gammas(0.3, 0.2, 5)
    assert g[0] == pytest.approx(spec.mass_gap, rel=1e-13)
    assert np.all(g[1:] > g[0])
    assert len(gamma_spectrum(spec)) == 10


@pytest.mark.parametrize("L1,L2", [(1, 1), (2, 3), (3, 3), (5, 2), (4, 4)])
@pytest.mark.parametrize("a,b", [(0.3, 0.2), (0.7, 0.1), (0.25, 0.6)])
def test_closed_form_against_brute_force(L1, L2, a, b):
    pp = kastening_partition_pair(SquareIsingSpec(a, b, L1, L2))
    lz, lzt, _ = brute_force(L1 * L2, square_bonds(L1, L2, a, b))
    assert pp.log_Z == pytest.approx(lz, abs=1e-12)
    assert pp.log_Z_twisted == pytest.approx(lzt, abs=1e-12)
    assert pp.ratio == pytest.approx(-math.expm1(lzt - lz), rel=1e-10)


def test_ordered_phase_is_flagged_but_exact():
    pp = kastening_partition_pair(SquareIsingSpec(0.6, 0.6, 3, 3))
    lz, lzt, _ = brute_force(9, square_bonds(3, 3, 0.6, 0.6))
    assert any("gamma_0" in f for f in pp.flags)
    assert pp.log_Z == pytest.approx(lz, abs=1e-12)
    assert pp.log_Z_twisted == pytest.approx(lzt, abs=1e-12)


def test_zero_b_is_a_stack_of_rings():
    a, L1, L2 = 0.4, 6, 3
    pp = kastening_partition_pair(SquareIsingSpec(a, 0.0, L1, L2))
    c, s = math.cosh(a), math.sinh(a)
    assert pp.log_Z == pytest.approx(L2 * math.log(c ** L1 + s ** L1), abs=1e-12)
    assert pp.log_Z_twisted == pytest.approx(L2 * math.log(c ** L1 - s ** L1), abs=1e-12)


def test_symmetric_ratio_identity():
    spec = SquareIsingSpec(0.3, 0.3, 10, 4)
    r = square_ratio(spec)
    assert one_minus_ratio(spec) == pytest.approx(2 * r / (1 + r), rel=1e-14)


@pytest.mark.parametrize("L1", [256, 4096, 65536])
def test_log_ratio_stays_finite_for_long_strips(L1):
    spec = SquareIsingSpec(0.3, 0.3, L1, 8)
    lv = log_one_minus_ratio(spec)
    assert np.isfinite(lv)
    # 1 - Z^-/Z ~ 2 rate^L1 once L1 is large
    assert (lv - math.log(2)) / L1 == pytest.approx(math.log(square_decay_rate(spec)), rel=1e-10)


def test_alternating_sum_shrinks_with_width():
    vals = [abs(alternating_sum(0.3, 0.3, L2)) for L2 in (2, 4, 8, 16)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_decay_rate_needs_disordered_phase():
    with pytest.raises(DomainError):
        square_decay_rate(SquareIsingSpec(0.6, 0.6, 8, 4))


@pytest.mark.parametrize("a,b", [(0.0, 0.3), (-0.1, 0.3), (0.3, -0.1)])
def test_invalid_couplings(a, b):
    with pytest.raises(DomainError):
        kastening_partition_pair(SquareIsingSpec(a, b, 4, 4))
