"""Exact 2D lattice gauge theory on an L1 x L2 torus.

On a closed torus every plaquette carries the same irrep, so
Z = sum_r F_r^V with V = L1*L2.  A center twist z^k on one plaquette
multiplies the r-term by z^{k N(r)}.  Everything is kept relative to the
trivial term so that V up to ~1e6 is harmless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DomainError
from .groups import (CharacterCoefficients, Group, Irrep, expand_action,
                     logsumexp)

N_THETA = 1024  # trapezoid points for the U(1) flux projection


@dataclass(frozen=True)
class Lgt2dSpec:
    group: Group
    beta: float
    L1: int
    L2: int
    coeffs: CharacterCoefficients
    action: str = "wilson"

    @property
    def volume(self) -> int:
        return self.L1 * self.L2


def make_spec(group: Group, beta: float, L1: int, L2: int, action="wilson", cutoff=64,
              tol=1e-12) -> Lgt2dSpec:
    if L1 < 1 or L2 < 1:
        raise DomainError("lattice sides must be positive")
    cc = expand_action(group, action, beta, cutoff, tol)
    return Lgt2dSpec(group, float(beta), int(L1), int(L2), cc, action if isinstance(action, str) else "custom")


def _powers(spec):
    """c_r^V for every retained irrep (exact zeros stay zero)."""
    c = spec.coeffs.c
    V = spec.volume
    with np.errstate(under="ignore"):
        return np.sign(c) ** V * np.abs(c) ** V


def partition_function(spec: Lgt2dSpec) -> float:
    """log Z = V log F_T + log(1 + sum_{r != T} c_r^V)."""
    p = _powers(spec)
    return spec.volume * spec.coeffs.log_FT + float(np.log1p(np.sum(p[1:])))


def _phases(spec, k=None, theta=None):
    g = spec.group
    na = spec.coeffs.n_alities
    if g.kind == "u1":
        if theta is None:
            raise DomainError("U(1) twists are angles: pass theta")
        return np.cos(na * theta), np.sin(na * theta)
    if k is None:
        if theta is None:
            raise DomainError("pass a sector k")
        k = theta
    n = g.center_order
    ang = 2 * np.pi * k * na / n
    return np.cos(ang), np.sin(ang)


def twisted_partition_function(spec: Lgt2dSpec, k=None, *, theta=None) -> float:
    """log Z^[k]; the twist is z^k (or e^{i theta} for U(1)) on one plaquette."""
    p = _powers(spec)
    re, im = _phases(spec, k, theta)
    s_im = float(np.sum(p * im))
    s_re = float(np.sum(p * re))
    if abs(s_im) > 1e-12 * max(1.0, abs(s_re)):
        raise ConsistencyError(f"imaginary part {s_im} survives in twisted sum")
    if s_re <= 0:
        raise DomainError("twisted partition function is not positive for this action")
    return spec.volume * spec.coeffs.log_FT + float(np.log(s_re))


def vortex_expectation(spec: Lgt2dSpec, k=None, *, theta=None) -> float:
    """<O^[k]> = Z^[k]/Z, computed as a ratio of the normalised sums."""
    p = _powers(spec)
    re, _ = _phases(spec, k, theta)
    return float(np.sum(p * re) / np.sum(p))


@dataclass
class SectorTable:
    log_Z: float
    sectors: np.ndarray  # k values, or theta grid for U(1)
    log_Z_sectors: np.ndarray
    vortex: np.ndarray
    flux_labels: np.ndarray
    flux: np.ndarray
    notes: list = field(default_factory=list)

    def flux_of(self, m: int) -> float:
        idx = np.nonzero(self.flux_labels == m)[0]
        return float(self.flux[idx[0]]) if idx.size else 0.0


def flux_expectations(spec: Lgt2dSpec, n_theta: int = N_THETA) -> SectorTable:
    """Vortex table and its discrete Fourier transform <F^[m]>."""
    g = spec.group
    p = _powers(spec)
    tot = float(np.sum(p))
    na = spec.coeffs.n_alities
    if g.kind == "u1":
        sectors = 2 * np.pi * np.arange(n_theta) / n_theta
        vortex = np.array([np.sum(p * np.cos(na * th)) for th in sectors]) / tot
        qmax = int(np.max(np.abs(na)))
        labels = np.arange(-qmax, qmax + 1)
        # Fourier coefficients of the periodic vortex function by trapezoid;
        # exact for |q| < n_theta / 2, so they must reproduce the charge
        # weights, which are reported instead (no rounding below zero)
        dft = np.array([np.mean(vortex * np.cos(m * sectors)) for m in labels])
        flux = np.array([np.sum(p[na == m]) for m in labels]) / tot
        if 2 * qmax >= n_theta or np.max(np.abs(dft - flux)) > 1e-12:
            raise ConsistencyError("theta-grid transform disagrees with the charge weights")
    else:
        n = g.center_order
        sectors = np.arange(n)
        vortex = np.array([vortex_expectation(spec, k) for k in sectors])
        labels = np.arange(n)
        z = np.exp(2j * np.pi / n)
        fl = np.array([np.sum(z ** (m * sectors) * vortex) / n for m in labels])
        if np.max(np.abs(fl.imag)) > 1e-12:
            raise ConsistencyError("flux expectations are not real")
        flux = fl.real
    with np.errstate(divide="ignore"):
        log_sec = partition_function(spec) + np.log(vortex)
    table = SectorTable(partition_function(spec), sectors, log_sec, vortex, labels, flux)
    _audit(table)
    return table


def _audit(t: SectorTable, tol=1e-12):
    if abs(t.vortex[0] - 1.0) > tol:
        raise ConsistencyError("<O^[0]> differs from 1")
    for name, arr in (("vortex", t.vortex), ("flux", t.flux)):
        if np.min(arr) < -tol or np.max(arr) > 1 + tol:
            raise ConsistencyError(f"{name} expectation outside [0, 1]")
    if abs(np.sum(t.flux) - 1.0) > 1e-10:
        raise ConsistencyError("flux expectations do not sum to 1")


def flux_pair(spec: Lgt2dSpec, l: int, m: int) -> float:
    """<F^[l] F^[m]> from a double sector sum on the torus.

    Two independent twists k, k' on the same plaquette compose to k + k',
    so <O^[k] O^[k']> = <O^[k+k']>; transforming both indices gives the
    product of projectors.  Center groups only.
    """
    n = spec.group.center_order
    if n == 0:
        raise DomainError("use the continuous transform for U(1)")
    z = np.exp(2j * np.pi / n)
    vort = [vortex_expectation(spec, k) for k in range(n)]
    s = 0j
    for k in range(n):
        for kp in range(n):
            s += z ** (l * k + m * kp) * vort[(k + kp) % n]
    return float((s / n**2).real)


def log_one_minus_flux0(spec: Lgt2dSpec) -> float:
    """log(1 - <F^[0]>) without forming 1 - F0.

    1 - F0 = sum_{N(r) != 0} c_r^V / sum_r c_r^V.  Falls back to the direct
    form when coefficients of both signs are present.
    """
    c = spec.coeffs.c
    V = spec.volume
    na = spec.coeffs.n_alities
    n = spec.group.center_order
    nontriv = (na % n != 0) if n else (na != 0)
    p = _powers(spec)
    den = float(np.log(np.sum(p)))
    sel = nontriv & (c != 0)
    if not np.any(sel):
        return -np.inf
    if np.all(np.sign(c[sel]) ** V > 0):  # p itself may underflow to 0
        return logsumexp(V * np.log(np.abs(c[sel]))) - den
    num = float(np.sum(p[sel]))
    return float(np.log(num)) - den if num > 0 else -np.inf


def wilson_loop_exact(spec: Lgt2dSpec, R: Irrep, area: int) -> float:
    """<W_R> = c_{R-bar}^area."""
    if area < 0 or area > spec.volume:
        raise DomainError("area must lie in [0, L1*L2]")
    if area == 0:
        return 1.0
    return spec.coeffs.coeff(R.conjugate()) ** area


def _power_of_two(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


def check_ty_bound(spec: Lgt2dSpec, R: Irrep, areas) -> list[dict]:
    """Both sides of |<W_R>| <= 2 (1 - <F^[0]>)^{A/V} for each area.

    `regime` marks areas with V / A a power of two, the tiling covered by
    the doubling argument; other areas are evaluated all the same.
    """
    n = spec.group.center_order
    na = R.n_ality
    if (n and na % n == 0) or (not n and na == 0):
        raise DomainError("the irrep must have nonzero N-ality")
    V = spec.volume
    lg = log_one_minus_flux0(spec)
    rows = []
    for A in areas:
        A = int(A)
        lhs = abs(wilson_loop_exact(spec, R, A))
        rhs = 2.0 * float(np.exp(lg * A / V)) if np.isfinite(lg) else 0.0
        regime = V % A == 0 and _power_of_two(V // A)
        rows.append(dict(area=A, lhs=lhs, rhs=rhs, ratio=(rhs / lhs if lhs > 0 else np.inf),
                         regime=regime, ok=bool(lhs <= rhs)))
    return rows


def string_tension_limit(spec: Lgt2dSpec) -> float:
    """Largest |c_r| over irreps of nonzero N-ality: the V -> infinity limit of
    (1 - <F^[0]>)^{1/V}."""
    na = spec.coeffs.n_alities
    n = spec.group.center_order
    nontriv = (na % n != 0) if n else (na != 0)
    return float(np.max(np.abs(spec.coeffs.c[nontriv])))
