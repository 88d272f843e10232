"""Extended-ensemble Monte Carlo over (spins, sector).

The sector bit s says whether the wall bonds carry +J (s = 0, periodic)
or -J (s = 1, twisted).  The joint weight is exp(sum_b J_b(s) s_p s_q), so
the time fraction spent in s = 1 over that in s = 0 estimates Z^-/Z.

Moves: single-spin Metropolis sweeps, each followed by `flips` attempts
at s -> 1 - s.  An attempt proposes the flip with probability 1/2 and
accepts it with min(1, exp(-2 E_wall)), E_wall being the current energy of
the wall bonds.  The lazy proposal keeps the sector from alternating
deterministically when the wall costs nothing.

Random numbers come from numpy's Philox generator in pre-drawn blocks, so
a seed fixes the whole stream on any platform.  Errors: jackknife over blocks, block size doubled until the
error stops growing (at least 32 blocks are kept).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .enumerate import _adjacency
from .errors import DomainError, TunnelingError
from .lattice import SpinLattice, wall_bonds

MIN_BLOCKS = 32
CHUNK = 1 << 14  # sweeps per block of random numbers


@dataclass
class McConfig:
    lattice: SpinLattice
    sweeps: int
    thermalization: int = 1000
    seed: int = 0
    flips: int = 1  # sector-flip attempts per sweep
    chains: int = 1
    pairs: tuple = ()

    def echo(self) -> dict:
        lat = self.lattice
        return {"kind": lat.kind, "L1": lat.L1, "L2": lat.L2, "couplings": lat.couplings,
                "sweeps": self.sweeps, "thermalization": self.thermalization, "seed": self.seed,
                "flips": self.flips, "chains": self.chains,
                "pairs": [list(map(int, p)) for p in self.pairs]}


@dataclass
class McEstimate:
    ratio: float  # Z^- / Z
    stderr: float
    acceptance: dict
    tau: float
    chains: list = field(default_factory=list)
    correlators: dict = field(default_factory=dict)  # pair -> (mean, err)
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["correlators"] = {f"{p}-{q}": v for (p, q), v in self.correlators.items()}
        return json.dumps(d, sort_keys=True)


@numba.njit(cache=True)
def _run(spins, sector, ptr, idx, cj, cw, wp, wq, wj, us, uf, pp, pq, rec_s, rec_c, rec_x, acc):
    n = spins.size
    nsw = us.shape[0]
    for t in range(nsw):
        sg = 1.0 - 2.0 * sector
        for i in range(n):
            h = 0.0
            for a in range(ptr[i], ptr[i + 1]):
                h += (cj[a] - (1.0 - sg) * cw[a]) * spins[idx[a]]
            dE = -2.0 * spins[i] * h
            if dE >= 0.0 or us[t, i] < math.exp(dE):
                spins[i] = -spins[i]
                acc[0] += 1
        for f in range(uf.shape[1]):
            ew = 0.0
            sg = 1.0 - 2.0 * sector
            for b in range(wp.size):
                ew += sg * wj[b] * spins[wp[b]] * spins[wq[b]]
            dE = -2.0 * ew
            # lazy proposal: u < 1/2 proposes, 2u is then a fresh uniform
            u = uf[t, f]
            if u >= 0.5:
                continue
            acc[2] += 1
            if dE >= 0.0 or 2.0 * u < math.exp(dE):
                sector = 1 - sector
                acc[1] += 1
        rec_s[t] = sector
        for m in range(pp.size):
            rec_c[t, m] = spins[pp[m]] * spins[pq[m]]
        code = 0
        if rec_x.size > 0:
            for i in range(n):
                if spins[i] < 0:
                    code |= 1 << i
            rec_x[t] = code * 2 + sector
    return sector


def _wall(lat: SpinLattice):
    mask = lat.mask if lat.mask is not None and lat.mask.any() else wall_bonds(lat)
    base = lat.twisted(mask)
    b = base.bonds[mask]
    return base, b[:, 0].copy(), b[:, 1].copy(), base.J[mask].copy()


def _chain(cfg: McConfig, seed_seq, record_states=False):
    lat, wp, wq, wj = _wall(cfg.lattice)
    ptr, idx, cj, cw = _adjacency(lat)
    n = lat.n_sites
    rng = np.random.Generator(np.random.Philox(seed_seq))
    spins = np.where(rng.random(n) < 0.5, -1, 1).astype(np.int64)
    sector = 0
    pp = np.array([p for p, _ in cfg.pairs], dtype=np.int64)
    pq = np.array([q for _, q in cfg.pairs], dtype=np.int64)
    acc = np.zeros(3, dtype=np.int64)
    s_all, c_all, x_all = [], [], []
    total = cfg.thermalization + cfg.sweeps
    done = 0
    while done < total:
        m = min(CHUNK, total - done)
        if done < cfg.thermalization:
            m = min(m, cfg.thermalization - done)
        us = rng.random((m, n))
        uf = rng.random((m, cfg.flips))
        rs = np.zeros(m, dtype=np.int8)
        rc = np.zeros((m, pp.size), dtype=np.int8)
        rx = np.zeros(m if record_states else 0, dtype=np.int64)
        if done < cfg.thermalization:
            acc_t = np.zeros(3, dtype=np.int64)
            sector = _run(spins, sector, ptr, idx, cj, cw, wp, wq, wj, us, uf, pp, pq, rs, rc, rx, acc_t)
        else:
            sector = _run(spins, sector, ptr, idx, cj, cw, wp, wq, wj, us, uf, pp, pq, rs, rc, rx, acc)
        if done >= cfg.thermalization:
            s_all.append(rs)
            c_all.append(rc)
            if record_states:
                x_all.append(rx)
        done += m
    s = np.concatenate(s_all).astype(float)
    c = np.concatenate(c_all).astype(float) if pp.size else np.zeros((s.size, 0))
    x = np.concatenate(x_all) if record_states else None
    rates = {"spin": acc[0] / max(1, cfg.sweeps * n), "sector": acc[1] / max(1, acc[2])}
    return s, c, x, rates


def _ratio_jackknife(num, den, nblocks):
    """Jackknife mean and error of sum(num)/sum(den) over nblocks blocks."""
    nb = nblocks
    L = (num.size // nb) * nb
    a = num[:L].reshape(nb, -1).sum(1)
    b = den[:L].reshape(nb, -1).sum(1)
    A, B = a.sum(), b.sum()
    if B == 0:
        return math.nan, math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        jk = (A - a) / (B - b)
    est = A / B
    if not np.all(np.isfinite(jk)):
        return est, math.inf
    return est, float(math.sqrt((nb - 1) / nb * np.sum((jk - jk.mean()) ** 2)))


def blocking_error(num, den=None, min_blocks: int = MIN_BLOCKS):
    """Ratio estimate with a blocking/jackknife error.

    Block size starts at 1 (or so that there are at most 4096 blocks) and is
    doubled while at least `min_blocks` blocks remain; the error is taken at
    the first level where it grows by less than 5%, otherwise the last level.
    Returns (estimate, error, tau) with tau the integrated autocorrelation
    time implied by err^2 / err_naive^2 / 2.
    """
    num = np.asarray(num, dtype=float)
    den = np.ones_like(num) if den is None else np.asarray(den, dtype=float)
    n = num.size
    if n < min_blocks:
        raise DomainError(f"need at least {min_blocks} samples")
    nb = min(n, 4096)
    levels = []
    while nb >= min_blocks:
        levels.append(_ratio_jackknife(num, den, nb))
        nb //= 2
    est = float(num.sum() / den.sum()) if den.sum() else math.nan
    # uncorrelated (delta-method) error of the ratio
    naive = float(np.std(num - est * den) / (np.mean(den) * math.sqrt(n))) if den.sum() else math.nan
    err = levels[-1][1]
    for (_, e0), (_, e1) in zip(levels, levels[1:]):
        if e1 <= 1.05 * e0:
            err = max(e0, e1)
            break
    tau = 0.5 * (err / naive) ** 2 if naive > 0 else 0.5
    return est, float(err), float(tau)


def _chain_estimate(s, c, pairs):
    n_tw = float(s.sum())
    n_un = float(s.size - n_tw)
    if n_tw == 0 or n_un == 0:
        raise TunnelingError("one sector was never visited; the ratio is undefined",
                             {"twisted_visits": n_tw, "untwisted_visits": n_un, "samples": s.size})
    r, e, tau = blocking_error(s, 1.0 - s)
    corr = {}
    for m, pq in enumerate(pairs):
        if pq[0] == pq[1]:
            corr[pq] = (1.0, 0.0)
            continue
        cm, ce, _ = blocking_error(c[:, m] * (1.0 - s), 1.0 - s)
        corr[pq] = (cm, ce)
    return r, e, tau, corr


def _combine(vals):
    """Inverse-variance weighted mean of (value, error) pairs."""
    v = np.array([x for x, _ in vals])
    e = np.array([y for _, y in vals])
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        return float(v.mean()), float(e.max()) if e.size else 0.0
    w = 1.0 / e ** 2
    return float(np.sum(w * v) / np.sum(w)), float(1.0 / math.sqrt(np.sum(w)))


def run_extended_ensemble(cfg: McConfig) -> McEstimate:
    """Estimate Z^-/Z (and untwisted-sector correlators) with error bars."""
    if cfg.sweeps <= cfg.thermalization or cfg.thermalization < 0:
        raise DomainError("need sweeps > thermalization >= 0")
    if cfg.chains < 1 or cfg.flips < 1:
        raise DomainError("need chains >= 1 and flips >= 1")
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    per = []
    rates = []
    taus = []
    corr_chains = []
    for sq in seqs:
        s, c, _, rt = _chain(cfg, sq)
        r, e, tau, corr = _chain_estimate(s, c, [tuple(map(int, p)) for p in cfg.pairs])
        per.append((r, e))
        rates.append(rt)
        taus.append(tau)
        corr_chains.append(corr)
    ratio, err = _combine(per)
    corr = {}
    for pq in corr_chains[0]:
        corr[pq] = _combine([cc[pq] for cc in corr_chains])
    acceptance = {k: float(np.mean([r[k] for r in rates])) for k in rates[0]}
    chains = [{"ratio": r, "stderr": e, "tau": t} for (r, e), t in zip(per, taus)]
    return McEstimate(ratio, err, acceptance, float(np.mean(taus)), chains, corr, cfg.echo())


def mc_correlator(cfg: McConfig, separations) -> dict:
    """<s_0 s_n> from the untwisted-sector samples, n -> (mean, err)."""
    from .lattice import pair_sites
    pairs = tuple(pair_sites(cfg.lattice, n) for n in separations)
    cfg2 = McConfig(cfg.lattice, cfg.sweeps, cfg.thermalization, cfg.seed, cfg.flips, cfg.chains, pairs)
    est = run_extended_ensemble(cfg2)
    return {n: est.correlators[tuple(map(int, p))] for n, p in zip(separations, pairs)}


def boltzmann_table(lat: SpinLattice) -> np.ndarray:
    """Exact probabilities of every (spins, sector) state, indexed 2*code + sector."""
    base, wp, wq, wj = _wall(lat)
    n = lat.n_sites
    if n > 16:
        raise DomainError("state table only for tiny lattices")
    codes = np.arange(1 << n)
    S = 1 - 2 * ((codes[:, None] >> np.arange(n)[None, :]) & 1)
    p, q = base.bonds[:, 0], base.bonds[:, 1]
    E0 = (S[:, p] * S[:, q]) @ base.J
    Ew = (S[:, wp] * S[:, wq]) @ wj
    logw = np.empty(2 << n)
    logw[0::2] = E0
    logw[1::2] = E0 - 2 * Ew
    w = np.exp(logw - logw.max())
    return w / w.sum()


def detailed_balance_audit(lat: SpinLattice, sweeps: int = 10 ** 6, seed: int = 1, nsigma: float = 3.0):
    """Empirical (spins, sector) occupation against exact Boltzmann weights.

    Returns rows (state, expected, observed, error, ok) with blocking errors.
    """
    cfg = McConfig(lat, sweeps, 1000, seed)
    s, _, x, _ = _chain(cfg, np.random.SeedSequence(seed), record_states=True)
    exact = boltzmann_table(lat)
    rows = []
    for k, pk in enumerate(exact):
        ind = (x == k).astype(float)
        est, err, _ = blocking_error(ind)
        rows.append((k, float(pk), est, err, abs(est - pk) <= nsigma * err))
    return rows
