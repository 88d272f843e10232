"""One-dimensional G x G principal chiral model on a periodic chain.

Link weight exp(beta Re Tr(U V^-1)) = sum_r d_r F_r chi_r(U V^-1).  Then

    Z   = sum_r d_r^2 F_r^L
    Z^g = sum_r d_r chi_r(g) F_r^L

The twist subgroup G' is one of: trivial, a cyclic subgroup (Z_N inside
U(1), or the center of SU(2)), or the whole group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .groups import (CharacterCoefficients, Group, Irrep, character,
                     class_integral, expand_action, logsumexp)


@dataclass(frozen=True)
class ChainSpec:
    group: Group
    subgroup: str  # "trivial", "center", "cyclic", "full"
    beta: float
    L: int
    coeffs: CharacterCoefficients
    sub_order: int = 0  # order of the cyclic subgroup when subgroup == "cyclic"


def make_chain(group: Group, beta: float, L: int, subgroup="full", sub_order=0,
               cutoff=64, tol=1e-12) -> ChainSpec:
    if L < 2:
        raise DomainError("chain length must be at least 2")
    if subgroup not in ("trivial", "center", "cyclic", "full"):
        raise DomainError(f"unknown twist subgroup {subgroup!r}")
    if subgroup == "center":
        if group.kind == "u1":
            raise DomainError("U(1) is its own center; use subgroup='full'")
        sub_order = group.center_order
        subgroup = "cyclic" if group.kind != "su2" else "center"
    if subgroup == "cyclic" and sub_order < 1:
        raise DomainError("cyclic twist subgroup needs an order")
    cc = expand_action(group, "chiral", beta, cutoff, tol)
    return ChainSpec(group, subgroup, float(beta), int(L), cc, int(sub_order))


def _dims(spec):
    return spec.coeffs.dims.astype(float)


def _log_terms(spec, n=None):
    n = spec.L if n is None else n
    c = np.abs(spec.coeffs.c)
    with np.errstate(divide="ignore"):
        return n * np.log(c)


def chain_partition_function(spec: ChainSpec) -> float:
    d = _dims(spec)
    lt = _log_terms(spec) + 2 * np.log(d)
    sg = np.sign(spec.coeffs.c) ** spec.L
    tot = np.sum(sg * np.exp(lt))  # trivial term is exactly 1
    return spec.L * spec.coeffs.log_FT + float(np.log(tot))


def _character_values(spec, g):
    """chi_r(g) for every retained irrep, g given as a class parameter."""
    return np.array([np.real(character(r, g)) * 1.0 for r in spec.coeffs.irreps])


def chain_twisted_partition_function(spec: ChainSpec, g) -> float:
    """log Z^g for g in the twist subgroup (class parameter)."""
    _check_in_subgroup(spec, g)
    d = _dims(spec)
    chi = _character_values(spec, g)
    c = spec.coeffs.c
    with np.errstate(under="ignore"):
        tot = float(np.sum(d * chi * np.sign(c) ** spec.L * np.abs(c) ** spec.L))
    if tot <= 0:
        raise DomainError("twisted chain sum is not positive")
    return spec.L * spec.coeffs.log_FT + float(np.log(tot))


def twist_expectation(spec: ChainSpec, g) -> float:
    """<O(g)> = Z^g / Z."""
    d = _dims(spec)
    chi = _character_values(spec, g)
    c = spec.coeffs.c
    with np.errstate(under="ignore"):
        p = np.sign(c) ** spec.L * np.abs(c) ** spec.L
    return float(np.sum(d * chi * p) / np.sum(d * d * p))


def _check_in_subgroup(spec, g):
    grp = spec.group
    if spec.subgroup == "full":
        return
    if spec.subgroup == "trivial":
        ok = np.isclose(np.real(character(spec.coeffs.irreps[1], g)), spec.coeffs.irreps[1].dim)
    elif spec.subgroup == "center":
        ok = np.isclose(g, 0.0) or np.isclose(g, np.pi)
    else:
        n = spec.sub_order
        if grp.kind == "zn":
            ok = int(g) % (grp.order // n) == 0
        else:
            ok = np.isclose(np.mod(g * n / (2 * np.pi) + 0.5, 1.0), 0.5)
    if not ok:
        raise DomainError("twist element is not in the chosen subgroup")


def subgroup_trivial_multiplicity(spec: ChainSpec) -> np.ndarray:
    """m_r = integral over G' of chi_r, the multiplicity of the trivial irrep
    of G' inside r restricted to G'."""
    reps = spec.coeffs.irreps
    grp = spec.group
    if spec.subgroup == "trivial":
        return np.array([r.dim for r in reps], dtype=float)
    if spec.subgroup == "full":
        return np.array([1.0 if r.is_trivial else 0.0 for r in reps])
    if spec.subgroup == "center":  # SU(2) center {1, -1}
        return np.array([r.dim if r.two_j % 2 == 0 else 0.0 for r in reps], dtype=float)
    n = spec.sub_order
    if grp.kind == "zn":
        # cyclic subgroup generated by z^{N/n}
        step = grp.order // n
        pts = [step * k for k in range(n)]
    else:
        pts = [2 * np.pi * k / n for k in range(n)]
    return np.array([np.mean([np.real(character(r, x)) for x in pts]) for r in reps])


def _nontrivial_mask(spec):
    m = subgroup_trivial_multiplicity(spec)
    d = _dims(spec)
    return np.abs(d - m) > 1e-9, m


def wall_projection(spec: ChainSpec, log=False) -> float:
    """1 - int_{G'} <O(g)> dg = sum' d_r (d_r - m_r) c_r^L / sum d_r^2 c_r^L.

    For the supported subgroups m_r is 0 or d_r, so this is the primed sum
    over irreps nontrivial with respect to G'.
    """
    sel, m = _nontrivial_mask(spec)
    d = _dims(spec)
    c = spec.coeffs.c
    den_log = logsumexp(_log_terms(spec)[c != 0] + 2 * np.log(d[c != 0]))
    w = d * (d - m)
    keep = sel & (c != 0) & (w > 0)
    if not np.any(keep):
        return -np.inf if log else 0.0
    if np.any(c[keep] < 0) and spec.L % 2:
        val = float(np.sum(w[keep] * c[keep] ** spec.L) / np.exp(den_log))
        return float(np.log(val)) if log else val
    lv = logsumexp(_log_terms(spec)[keep] + np.log(w[keep])) - den_log
    if lv > 1e-12:
        raise ConsistencyError("wall projection exceeds 1")
    return lv if log else float(np.exp(lv))


def largest_nontrivial_coefficient(spec: ChainSpec) -> float:
    """c_{r'}: the largest c_r over irreps nontrivial with respect to G'."""
    sel, _ = _nontrivial_mask(spec)
    if not np.any(sel):
        return 0.0
    return float(np.max(spec.coeffs.c[sel]))


def chain_correlation(spec: ChainSpec, R: Irrep, n: int, finite=False) -> float:
    """<Gamma(n)>/<Gamma(0)> with Gamma(n) = chi_R(U_0 U_n^-1).

    Default is the L -> infinity value c_R^n.  With finite=True (abelian
    groups only) the exact ring value
        sum_q F_q^{L-n} F_{q+R}^n / sum_q F_q^L
    is returned.
    """
    if R.is_trivial:
        raise DomainError("correlator needs an irrep nontrivial on G")
    if not 0 <= n <= spec.L:
        raise DomainError("separation must lie in [0, L]")
    cR = spec.coeffs.coeff(R)
    if not finite:
        return cR ** n
    grp = spec.group
    if grp.kind == "su2":
        raise DomainError("finite-L correlator only for abelian groups")
    reps = spec.coeffs.irreps
    c = spec.coeffs.c
    L = spec.L
    lab = [int(r.label) for r in reps]
    idx = {q: i for i, q in enumerate(lab)}
    num = 0.0
    for i, q in enumerate(lab):
        qs = q + int(R.label)
        if grp.kind == "zn":
            qs = qs % grp.order
            if qs > grp.order // 2:
                qs -= grp.order
        j = idx.get(qs)
        if j is None:
            continue
        num += c[i] ** (L - n) * c[j] ** n
    den = float(np.sum(c ** L))
    return float(num / den)


def gamma0_prefactor(spec: ChainSpec, R: Irrep) -> float:
    """<Gamma(0)^2>/<Gamma(0)>^2.  Gamma(0) = chi_R(1) = d_R is a constant."""
    d = float(R.dim)
    return (d * d) / (d * d)


def check_spin_ty_bound(spec: ChainSpec, R: Irrep, ns) -> list[dict]:
    """Both sides of the spin-model inequality along the chain.

    lhs is the finite-L correlator for abelian groups and c_R^n otherwise.
    regime marks L = 2^k n.
    """
    if not _nontrivial_mask(spec)[0][spec.coeffs.index(R)]:
        raise DomainError("R must be nontrivial on the twist subgroup")
    pre = gamma0_prefactor(spec, R)
    lw = wall_projection(spec, log=True)
    rows = []
    for n in np.atleast_1d(ns):
        n = int(n)
        abelian = spec.group.kind != "su2"
        lhs = abs(chain_correlation(spec, R, n, finite=abelian))
        rhs = 2 * pre ** (n / spec.L) * float(np.exp(lw * n / spec.L))
        q, r = divmod(spec.L, n) if n else (0, 1)
        regime = n > 0 and r == 0 and q >= 2 and (q & (q - 1)) == 0
        rows.append(dict(n=n, lhs=lhs, rhs=rhs, ratio=rhs / lhs if lhs else np.inf,
                         regime=regime, finite_lhs=abelian, ok=bool(lhs <= rhs)))
    return rows


def su2_conjugate_pair(theta: float, rng=None):
    """Two conjugate SU(2) matrices with half-angle theta (for class checks)."""
    rng = np.random.default_rng(rng)
    d = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    nrm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    a, b = a / nrm, b / nrm
    h = np.array([[a, -np.conj(b)], [b, np.conj(a)]])
    return d, h @ d @ h.conj().T


def integrate_twist(spec: ChainSpec, tol=1e-12) -> float:
    """int over G' of <O(g)> dg by direct quadrature (cross-check of the
    projection formula)."""
    if spec.subgroup == "full":
        return float(np.real(class_integral(spec.group, lambda x: np.vectorize(
            lambda y: twist_expectation(spec, y))(x), tol)))
    if spec.subgroup == "trivial":
        return twist_expectation(spec, 0.0)
    if spec.subgroup == "center":
        return 0.5 * (twist_expectation(spec, 0.0) + twist_expectation(spec, np.pi))
    n = spec.sub_order
    if spec.group.kind == "zn":
        step = spec.group.order // n
        pts = [step * k for k in range(n)]
    else:
        pts = [2 * np.pi * k / n for k in range(n)]
    return float(np.mean([twist_expectation(spec, x) for x in pts]))
