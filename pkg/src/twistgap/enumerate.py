"""Exhaustive configuration sums for small Ising lattices.

Every configuration is visited once in Gray-code order, so each step
flips one spin and the energy update costs O(degree).  The last spin is
pinned to +1 (all observables here are even under a global flip) and the
count is doubled.  Normalisation is the half-sum per site, so with all
couplings zero Z = 1.

The untwisted and the twisted partition function come out of the same
pass, together with Z - Z_twisted = sum w (1 - exp(-2W)) computed term by
term with expm1, W being the energy carried by the twisted bonds.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import SizeCapError
from .lattice import SpinLattice

MAX_SITES = 26


@dataclass
class PartitionPair:
    log_Z: float
    log_Z_twisted: float
    ratio: float  # 1 - Z_twisted / Z
    method: str
    correlators: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    log_ratio: float | None = None  # log(1 - Z_twisted/Z) when known beyond underflow

    @property
    def log_one_minus(self) -> float:
        if self.log_ratio is not None:
            return self.log_ratio
        return math.log(self.ratio) if self.ratio > 0 else -math.inf

    def twisted_over_untwisted(self) -> float:
        return math.exp(self.log_Z_twisted - self.log_Z)


def _adjacency(lat: SpinLattice):
    n = lat.n_sites
    J = lat.J
    tw = lat.mask
    nbr = [[] for _ in range(n)]
    for (p, q), j, m in zip(lat.bonds, J, tw):
        if p == q:
            continue  # self-loop: constant factor, handled separately
        nbr[p].append((q, j, m))
        nbr[q].append((p, j, m))
    ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        ptr[i + 1] = ptr[i] + len(nbr[i])
    idx = np.zeros(ptr[-1], dtype=np.int64)
    cj = np.zeros(ptr[-1])
    cw = np.zeros(ptr[-1])
    for i in range(n):
        for k, (q, j, m) in enumerate(nbr[i]):
            idx[ptr[i] + k] = q
            cj[ptr[i] + k] = j
            cw[ptr[i] + k] = j if m else 0.0
    return ptr, idx, cj, cw


@numba.njit(cache=True, nogil=True)
def _neumaier(acc, comp, k, x):
    s = acc[k]
    t = s + x
    if abs(s) >= abs(x):
        comp[k] += (s - t) + x
    else:
        comp[k] += (x - t) + s
    acc[k] = t


@numba.njit(cache=True, nogil=True)
def _chunk(n, low, top, ptr, idx, cj, cw, pp, pq, shift):
    """Sum over the 2^low configurations whose high bits equal `top`.

    Accumulators: 0 -> Z, 1 -> Z_tw, 2 -> Z - Z_tw, 3.. -> sum w s_p s_q
    (untwisted ensemble).
    """
    s = np.ones(n, dtype=np.int64)
    for b in range(low, n - 1):
        if (top >> (b - low)) & 1:
            s[b] = -1
    E = 0.0
    W = 0.0
    # energy of the starting configuration; every bond appears in the
    # adjacency of both ends, the j > i filter counts it once
    for i in range(n):
        for a in range(ptr[i], ptr[i + 1]):
            j = idx[a]
            if j > i:
                E += cj[a] * s[i] * s[j]
                W += cw[a] * s[i] * s[j]
    npair = pp.size
    acc = np.zeros(3 + npair)
    comp = np.zeros(3 + npair)
    total = 1 << low
    for step in range(total):
        if step > 0:
            k = step
            bit = 0
            while (k & 1) == 0:
                k >>= 1
                bit += 1
            h = 0.0
            hw = 0.0
            for a in range(ptr[bit], ptr[bit + 1]):
                h += cj[a] * s[idx[a]]
                hw += cw[a] * s[idx[a]]
            E -= 2.0 * s[bit] * h
            W -= 2.0 * s[bit] * hw
            s[bit] = -s[bit]
        w = math.exp(E - shift)
        wt = math.exp(E - 2.0 * W - shift)
        _neumaier(acc, comp, 0, w)
        _neumaier(acc, comp, 1, wt)
        _neumaier(acc, comp, 2, -w * math.expm1(-2.0 * W))
        for m in range(npair):
            _neumaier(acc, comp, 3 + m, w * s[pp[m]] * s[pq[m]])
    return acc + comp


def enumerate_partition(lat: SpinLattice, pairs=(), threads: int | None = None) -> PartitionPair:
    """Exact Z, Z_twisted (the lattice's twist mask) and correlators <s_p s_q>
    by summing all 2^n configurations."""
    n = lat.n_sites
    if n > MAX_SITES:
        raise SizeCapError(f"enumeration is capped at {MAX_SITES} sites (got {n}); "
                           "use the strip transfer matrix instead")
    ptr, idx, cj, cw = _adjacency(lat)
    # self-loop bonds contribute exp(J) (untwisted) or exp(-J) (twisted) always
    self_loops = lat.bonds[:, 0] == lat.bonds[:, 1]
    const = float(np.sum(lat.J[self_loops]))
    const_tw = float(np.sum(np.where(lat.mask, -lat.J, lat.J)[self_loops]))
    shift = float(np.sum(np.abs(lat.J[~self_loops])))
    pp = np.array([p for p, _ in pairs], dtype=np.int64)
    pq = np.array([q for _, q in pairs], dtype=np.int64)

    free = n - 1
    threads = threads or int(os.environ.get("TWISTGAP_THREADS", "1"))
    cbits = min(free, max(0, (threads - 1).bit_length() + 2)) if threads > 1 else 0
    low = free - cbits
    tops = range(1 << cbits)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda t: _chunk(n, low, t, ptr, idx, cj, cw, pp, pq, shift), tops))
    else:
        parts = [_chunk(n, low, t, ptr, idx, cj, cw, pp, pq, shift) for t in tops]
    sums = [math.fsum(p[k] for p in parts) for k in range(3 + len(pp))]
    base = shift + (1 - n) * math.log(2.0) if n > 0 else 0.0
    # n - 1 free spins doubled: Z = 2^{-n} * 2 * sum
    log_z = math.log(sums[0]) + base + const
    if const_tw != const:
        # a twisted self-loop flips the sign of its constant factor; the
        # difference then is not sum w (1 - e^{-2W}); recompute directly
        log_zt = math.log(sums[1]) + base + const_tw if sums[1] > 0 else -math.inf
        ratio = -math.expm1(log_zt - log_z)
    else:
        log_zt = math.log(sums[1]) + base + const if sums[1] > 0 else -math.inf
        ratio = sums[2] / sums[0]
    corr = {(int(p), int(q)): sums[3 + k] / sums[0] for k, (p, q) in enumerate(zip(pp, pq))}
    flags = []
    if not 0.0 <= ratio <= 1.0:
        flags.append("ratio outside [0, 1]")
    return PartitionPair(log_z, log_zt, ratio, "enumeration", corr, flags)
