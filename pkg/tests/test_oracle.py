"""Lattice bookkeeping, full enumeration, the strip transfer matrix and the
structural checks built on them."""

import math

import numpy as np
import pytest

from oracles import brute_force, square_bonds, triangular_bonds
from twistgap.checks import (check_inequality, cross_oracle, deformation_check, exact_pair,
                             inequality_grid, lattice_equivalence_check, sce_leading_check, sce_ratio,
                             theorem_regime, wall_mod2_check)
from twistgap.enumerate import enumerate_partition
from twistgap.errors import DomainError, SizeCapError
from twistgap.lattice import (deform, dump, faces, pair_sites, parity_audit, square, standard_twist,
                              triangular, twist_class, with_walls)
from twistgap.square import SquareIsingSpec, log_one_minus_ratio
from twistgap.transfer import strip_transfer

SQUARE_CASES = [(1, 1), (1, 3), (2, 1), (3, 3), (4, 2), (2, 5)]
TRI_CASES = [(2, 1), (2, 3), (4, 3), (6, 2), (4, 4)]


@pytest.mark.parametrize("L1,L2", SQUARE_CASES)
@pytest.mark.parametrize("method", ["enumerate", "transfer"])
def test_square_against_brute_force(L1, L2, method):
    a, b = 0.37, -0.21
    lat = standard_twist(square(L1, L2, a, b))
    pairs = [(0, s) for s in range(L1 * L2)]
    res = exact_pair(lat, pairs, method)
    lz, lzt, corr = brute_force(L1 * L2, square_bonds(L1, L2, a, b), pairs)
    assert res.log_Z == pytest.approx(lz, abs=1e-12)
    assert res.log_Z_twisted == pytest.approx(lzt, abs=1e-12)
    for pq in pairs:
        assert res.correlators[pq] == pytest.approx(corr[pq], abs=1e-12)


@pytest.mark.parametrize("N,M", TRI_CASES)
@pytest.mark.parametrize("kind", ["triangular-fig1", "triangular-fig2"])
@pytest.mark.parametrize("method", ["enumerate", "transfer"])
def test_triangular_against_brute_force(N, M, kind, method):
    K1, K = -0.3, 0.25
    lat = standard_twist(triangular(N, M, K1, K, kind))
    shift = (N // 2) % M if kind == "triangular-fig1" else 0
    pairs = [pair_sites(lat, n) for n in range(0, N, 2)]
    res = exact_pair(lat, pairs, method)
    lz, lzt, corr = brute_force(N * M, triangular_bonds(N, M, K1, K, shift), pairs)
    assert res.log_Z == pytest.approx(lz, abs=1e-12)
    assert res.log_Z_twisted == pytest.approx(lzt, abs=1e-12)
    for pq in pairs:
        assert res.correlators[pq] == pytest.approx(corr[pq], abs=1e-12)


def test_non_standard_masks_take_the_generic_route():
    lat = square(4, 3, 0.3, 0.2)
    for cols in ([0], [1, 2], [0, 1, 3]):
        walled = with_walls(lat, cols)
        e = enumerate_partition(walled)
        t = strip_transfer(walled)
        assert t.log_Z_twisted == pytest.approx(e.log_Z_twisted, abs=1e-12)
        assert t.ratio == pytest.approx(e.ratio, rel=1e-10, abs=1e-15)


def test_thread_count_does_not_change_enumeration():
    lat = standard_twist(square(4, 4, 0.3, 0.2))
    one = enumerate_partition(lat, [(0, 5)], threads=1)
    two = enumerate_partition(lat, [(0, 5)], threads=2)
    assert one.log_Z == pytest.approx(two.log_Z, abs=1e-13)
    assert one.correlators[(0, 5)] == pytest.approx(two.correlators[(0, 5)], abs=1e-13)


def test_size_caps():
    with pytest.raises(SizeCapError):
        enumerate_partition(square(6, 5, 0.1, 0.1))
    with pytest.raises(SizeCapError):
        strip_transfer(square(2, 13, 0.1, 0.1))


def test_transfer_handles_long_strips():
    # width 4, length 4096: repeated squaring, no overflow
    res = strip_transfer(standard_twist(square(4096, 4, 0.3, 0.3)))
    assert np.isfinite(res.log_Z) and res.ratio == 0.0  # underflows as a plain float
    ref = log_one_minus_ratio(SquareIsingSpec(0.3, 0.3, 4096, 4))
    assert res.log_one_minus == pytest.approx(ref, rel=1e-11)


def test_ratio_flag_raised_outside_unit_interval():
    # frustrated triangular strip: Z^- > Z
    lat = standard_twist(triangular(10, 3, math.atanh(-0.5), math.atanh(0.1), "triangular-fig2"))
    res = strip_transfer(lat)
    assert res.ratio < 0 and res.flags


def test_faces_and_parity():
    for lat in (square(3, 4, 0.1, 0.1), triangular(4, 3, 0.1, 0.1), triangular(3, 2, 0.1, 0.1, "triangular-fig2")):
        f = faces(lat)
        counts = np.bincount(np.concatenate([np.array(x) for x in f]), minlength=len(lat.J))
        assert np.all(counts == 2)  # every bond borders two faces
        tw = standard_twist(lat)
        assert parity_audit(tw) and twist_class(tw) == 1
        assert parity_audit(deform(tw, [0, 1])) and twist_class(with_walls(lat, [0, 1])) == 0
        broken = lat.twisted(np.eye(1, len(lat.J), 0, dtype=bool)[0])
        assert not parity_audit(broken)


def test_dump_lists_every_bond():
    lat = standard_twist(square(2, 2, 0.3, 0.2))
    lines = dump(lat).splitlines()
    assert len(lines) == 1 + 8
    assert sum(line.endswith("T") for line in lines) == 2


def test_pair_sites_triangular_needs_even_separation():
    with pytest.raises(ValueError):
        pair_sites(triangular(4, 2, 0.1, 0.1), 1)


@pytest.mark.parametrize("L1,n,tri,expected", [(8, 1, False, True), (8, 2, False, True), (8, 3, False, False),
                                               (8, 8, False, False), (12, 3, False, True), (8, 2, True, True),
                                               (12, 3, True, False), (12, 6, True, True)])
def test_theorem_regime(L1, n, tri, expected):
    assert theorem_regime(L1, n, tri) == expected


def test_inequality_rows_and_signs():
    rows = check_inequality(square(8, 2, 0.3, 0.3))
    assert [r.n for r in rows] == list(range(1, 8))
    assert all(r.ok for r in rows if r.regime)
    # antiferromagnetic couplings give signed correlators at odd n
    neg = check_inequality(square(8, 2, math.atanh(-0.2), math.atanh(-0.2)))
    assert any(r.lhs < 0 for r in neg)


def test_inequality_grid_has_no_violations():
    rows = inequality_grid()
    reg = [r for r in rows if r[-1].regime]
    assert reg and all(r[-1].ok for r in reg)
    assert {r[0] for r in rows} == {"square", "triangular-fig1"}


@pytest.mark.parametrize("lat", [square(4, 3, 0.3, 0.2), triangular(6, 2, 0.2, -0.1),
                                 triangular(5, 3, 0.2, 0.1, "triangular-fig2")])
def test_wall_counting_mod_two(lat):
    res = wall_mod2_check(lat)
    assert res["diff_1_3"] < 1e-12 and res["diff_0_2"] < 1e-12
    assert abs(res["log_Z_1"] - res["log_Z"]) > 1e-6


def test_wall_check_needs_three_columns():
    with pytest.raises(DomainError):
        wall_mod2_check(square(2, 2, 0.1, 0.1))


@pytest.mark.parametrize("sites", [[0], [1, 2, 5], list(range(6))])
def test_deformation_invariance(sites):
    for lat in (square(4, 3, 0.3, 0.2), triangular(4, 3, 0.2, 0.3)):
        assert deformation_check(lat, sites)["diff"] < 1e-12


def test_lattice_equivalence():
    same = lattice_equivalence_check(8, 2, 0.2, 0.1)
    assert same["expected_equal"] and same["diff"] < 1e-12
    other = lattice_equivalence_check(4, 3, 0.2, 0.3)
    assert not other["expected_equal"] and other["diff"] > 1e-8


def test_cross_oracle_agreement():
    out = cross_oracle(standard_twist(triangular(4, 4, 0.2, 0.1)), [(0, 9)])
    assert max(out.values()) < 1e-12
    with pytest.raises(DomainError):
        cross_oracle(square(6, 5, 0.1, 0.1))


def test_strong_coupling_ratio():
    rows = sce_leading_check(6, 4, [0.1, 0.05, 0.025, 0.0125])
    devs = [r["dev"] for r in rows]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    # O(t^2) corrections: dev / t^2 settles to a constant
    assert rows[-1]["dev_over_t2"] == pytest.approx(rows[-2]["dev_over_t2"], rel=0.05)


@pytest.mark.parametrize("args", [(6, 4, 0.0), (400, 2, 0.01)])
def test_strong_coupling_domain(args):
    with pytest.raises(DomainError):
        sce_ratio(*args)


def test_strong_coupling_needs_length_six():
    with pytest.raises(DomainError):
        sce_leading_check(4, 4, [0.1])
