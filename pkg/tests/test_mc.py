import json
import math

import numpy as np
import pytest

from twistgap.checks import exact_pair
from twistgap.errors import DomainError, TunnelingError
from twistgap.lattice import pair_sites, square, standard_twist, triangular_from_t
from twistgap.mc import (McConfig, blocking_error, boltzmann_table, detailed_balance_audit, mc_correlator,
                         run_extended_ensemble)


def test_blocking_error_on_independent_data():
    rng = np.random.default_rng(5)
    x = rng.normal(2.0, 1.0, size=2 ** 16)
    est, err, tau = blocking_error(x)
    assert est == pytest.approx(x.mean())
    assert err == pytest.approx(1.0 / math.sqrt(x.size), rel=0.15)
    assert tau == pytest.approx(0.5, abs=0.15)


def test_blocking_error_sees_correlation():
    rng = np.random.default_rng(6)
    e = rng.normal(size=2 ** 16)
    x = np.empty_like(e)
    x[0] = e[0]
    for i in range(1, e.size):
        x[i] = 0.9 * x[i - 1] + e[i]
    _, err, tau = blocking_error(x)
    naive = x.std() / math.sqrt(x.size)
    assert err > 3 * naive
    assert tau > 5  # exact value 9.5 for this AR(1) process


def test_seeded_runs_are_reproducible():
    cfg = McConfig(square(4, 4, 0.3, 0.3), 20000, 500, seed=11)
    a = run_extended_ensemble(cfg)
    b = run_extended_ensemble(cfg)
    assert a.ratio == b.ratio and a.stderr == b.stderr
    c = run_extended_ensemble(McConfig(square(4, 4, 0.3, 0.3), 20000, 500, seed=12))
    assert c.ratio != a.ratio


@pytest.mark.parametrize("lat", [square(4, 4, 0.3, 0.2), square(4, 3, 0.4, -0.3),
                                 triangular_from_t(4, 3, 0.2, 0.15), triangular_from_t(4, 2, -0.2, 0.2)])
def test_ratio_against_exact(lat):
    est = run_extended_ensemble(McConfig(lat, 200000, 1000, seed=3, chains=2))
    exact = 1.0 - exact_pair(standard_twist(lat)).ratio
    assert abs(est.ratio - exact) <= 4 * est.stderr
    assert len(est.chains) == 2
    assert 0 < est.acceptance["spin"] < 1 and 0 < est.acceptance["sector"] <= 1


def test_zero_coupling_ratio_is_one():
    est = run_extended_ensemble(McConfig(square(4, 4, 0.0, 0.0), 50000, 100, seed=1))
    assert est.stderr > 0
    assert abs(est.ratio - 1.0) <= 4 * est.stderr


def test_correlator_against_exact():
    lat = square(6, 3, 0.3, 0.3)
    got = mc_correlator(McConfig(lat, 200000, 1000, seed=9), [1, 2, 3])
    pairs = [pair_sites(lat, n) for n in (1, 2, 3)]
    ref = exact_pair(lat, pairs)
    for n, pq in zip((1, 2, 3), pairs):
        mean, err = got[n]
        assert abs(mean - ref.correlators[pq]) <= 4 * err


def test_tunnelling_failure_is_reported():
    with pytest.raises(TunnelingError):
        run_extended_ensemble(McConfig(square(8, 8, 2.0, 2.0), 20000, 1000, seed=1))


@pytest.mark.parametrize("sweeps,therm", [(100, 100), (100, 200), (100, -1)])
def test_bad_sweep_counts(sweeps, therm):
    with pytest.raises(DomainError):
        run_extended_ensemble(McConfig(square(2, 2, 0.1, 0.1), sweeps, therm))


def test_boltzmann_table_normalised():
    p = boltzmann_table(standard_twist(square(2, 2, 0.3, 0.3)))
    assert p.shape == (32,) and p.sum() == pytest.approx(1.0)
    # global spin flip leaves every weight unchanged
    assert np.allclose(p[0::2][:8], p[0::2][::-1][:8])


def test_detailed_balance_small_lattice():
    rows = detailed_balance_audit(standard_twist(square(2, 2, 0.3, 0.3)), sweeps=200000, seed=2)
    assert len(rows) == 32
    assert sum(r[-1] for r in rows) >= 30  # 3-sigma bands, 32 states


def test_json_record():
    est = run_extended_ensemble(McConfig(square(4, 4, 0.3, 0.3), 5000, 100, seed=1, pairs=((0, 4),)))
    rec = json.loads(est.to_json())
    assert set(rec) >= {"ratio", "stderr", "acceptance", "tau", "chains", "config", "correlators"}
    assert rec["config"]["seed"] == 1 and "0-4" in rec["correlators"]
