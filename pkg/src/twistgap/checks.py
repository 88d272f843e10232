"""Structural checks run on top of the exact oracles: the correlation
inequality, wall counting mod 2, wall deformation, the equivalence of the
two triangular tori and the leading strong-coupling behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumerate import MAX_SITES, PartitionPair, enumerate_partition
from .errors import DomainError
from .lattice import (SpinLattice, deform, pair_sites, square, standard_twist, triangular_from_t,
                      with_walls)
from .transfer import MAX_WIDTH, strip_transfer


def exact_pair(lat: SpinLattice, pairs=(), method: str = "auto", threads=None) -> PartitionPair:
    """Dispatch to the strip transfer matrix (default) or full enumeration."""
    if method == "auto":
        method = "transfer" if lat.L2 <= MAX_WIDTH else "enumerate"
    if method == "transfer":
        return strip_transfer(lat, pairs)
    if method == "enumerate":
        return enumerate_partition(lat, pairs, threads=threads)
    raise ValueError(f"unknown method {method!r}")


def _power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def theorem_regime(L1: int, n: int, triangular: bool = False) -> bool:
    """L1 = 2^k n with k >= 1 (and n even on the triangular lattice)."""
    if n < 1 or L1 % n:
        return False
    if triangular and n % 2:
        return False
    q = L1 // n
    return q >= 2 and _power_of_two(q)


@dataclass
class InequalityRow:
    n: int
    lhs: float
    rhs: float
    regime: bool
    ok: bool


def check_inequality(lat: SpinLattice, separations=None, method: str = "auto") -> list[InequalityRow]:
    """<s_0 s_n> <= 2 {(1 - Z^-/Z)/2}^{n/L1} for each separation.

    Default separations: every n with 1 <= n < L1 (even n only on the
    triangular lattices, where pairs sit on the same horizontal level).
    Rows outside the theorem regime are reported but their ok flag is only
    informative.
    """
    tri = lat.kind != "square"
    if separations is None:
        separations = [n for n in range(1, lat.L1) if not (tri and n % 2)]
    pairs = [pair_sites(lat, n) for n in separations]
    res = exact_pair(standard_twist(lat), pairs, method)
    rows = []
    for n, pq in zip(separations, pairs):
        lhs = float(res.correlators[(int(pq[0]), int(pq[1]))])
        rhs = 2.0 * (0.5 * res.ratio) ** (n / lat.L1) if res.ratio > 0 else 0.0
        rows.append(InequalityRow(n, lhs, rhs, theorem_regime(lat.L1, n, tri), lhs <= rhs))
    return rows


def wall_mod2_check(lat: SpinLattice, method: str = "auto") -> dict:
    """log Z with 1, 2 and 3 parallel walls (columns L1-1, 0, 1)."""
    if lat.L1 < 3:
        raise DomainError("three parallel walls need L1 >= 3")
    cols = [lat.L1 - 1, 0, 1]
    logs = {}
    for k in (0, 1, 2, 3):
        logs[k] = exact_pair(with_walls(lat, cols[:k]), (), method).log_Z_twisted
    return {
        "log_Z": logs[0],
        "log_Z_1": logs[1],
        "log_Z_2": logs[2],
        "log_Z_3": logs[3],
        "diff_1_3": abs(logs[1] - logs[3]),
        "diff_0_2": abs(logs[0] - logs[2]),
    }


def deformation_check(lat: SpinLattice, sites, method: str = "auto") -> dict:
    """Twisted log Z before and after deforming the wall around `sites`."""
    base = standard_twist(lat)
    moved = deform(base, sites)
    a = exact_pair(base, (), method).log_Z_twisted
    b = exact_pair(moved, (), method).log_Z_twisted
    return {"log_Z_twisted": a, "log_Z_deformed": b, "diff": abs(a - b)}


def lattice_equivalence_check(N: int, M: int, t1: float, t: float, method: str = "auto") -> dict:
    """log Z on the straight (fig1) and rhombic (fig2) tori."""
    a = exact_pair(triangular_from_t(N, M, t1, t, "triangular-fig1"), (), method).log_Z
    b = exact_pair(triangular_from_t(N, M, t1, t, "triangular-fig2"), (), method).log_Z
    return {"N": N, "M": M, "logZ_a": a, "logZ_b": b, "diff": abs(a - b),
            "expected_equal": N % (2 * M) == 0}


def sce_ratio(L1: int, L2: int, t: float, method: str = "transfer") -> float:
    """r(t) = log(Z^-/Z) / (-2 L2 t^{L1}) on the square lattice, a = b = atanh t."""
    if t == 0:
        raise DomainError("t = 0 gives 0/0; excluded")
    lead = L1 * math.log(abs(t))
    if lead < math.log(1e-280):
        raise DomainError(f"t^L1 = {abs(t)}^{L1} underflows; use a larger t or a smaller L1")
    K = math.atanh(t)
    res = exact_pair(standard_twist(square(L1, L2, K, K)), (), method)
    log_ratio = math.log1p(-res.ratio)
    return log_ratio / (-2.0 * L2 * t ** L1)


def sce_leading_check(L1: int, L2: int, ts) -> list[dict]:
    """Rows (t, r, |r - 1|, |r - 1|/t^2) for the leading strong-coupling term."""
    if L1 < 6:
        raise DomainError("leading-order check wants L1 >= 6")
    rows = []
    for t in ts:
        if t == 0:
            continue
        r = sce_ratio(L1, L2, t)
        rows.append({"t": t, "r": r, "dev": abs(r - 1), "dev_over_t2": abs(r - 1) / t ** 2})
    return rows


def cross_oracle(lat: SpinLattice, pairs=()) -> dict:
    """Enumeration against the transfer matrix on one lattice (<= MAX_SITES)."""
    if lat.n_sites > MAX_SITES:
        raise DomainError("lattice too large for enumeration")
    e = enumerate_partition(lat, pairs)
    t = strip_transfer(lat, pairs)
    out = {"log_Z": abs(e.log_Z - t.log_Z), "log_Z_twisted": abs(e.log_Z_twisted - t.log_Z_twisted)}
    out["corr"] = max([abs(e.correlators[k] - t.correlators[k]) for k in e.correlators] or [0.0])
    return out


def inequality_grid(couplings=(0.1, -0.1, 0.2, -0.2, 0.3), sizes=((4, 2), (4, 4), (8, 2))):
    """All theorem-regime inequality rows over square and fig1 triangular
    lattices with every coupling set to the same value (tanh t for the
    triangular lattice)."""
    out = []
    for c in couplings:
        for L1, L2 in sizes:
            K = float(np.arctanh(c))
            for lat in (square(L1, L2, K, K), triangular_from_t(L1, L2, c, c)):
                for row in check_inequality(lat):
                    out.append((lat.kind, L1, L2, c, row))
    return out
