"""Square-lattice Ising model on an L1 x L2 torus: periodic and
antiperiodic (in direction 1) partition functions from the four-product
form, the dual coupling and the decay rate of the twist free energy.

Couplings: a on bonds along direction 1 (length L1), b along direction 2.
The transfer direction is 1, so the spectrum gamma_k involves the dual
of a:

    cosh gamma_k = cosh 2abar cosh 2b - cos(pi k / L2) sinh 2abar sinh 2b,

with gamma_0 = 2(abar - b) kept signed (it turns negative below Tc).

Normalisation: half-sum per site, so the usual (2 sinh 2a)^{L1 L2/2} / 2
prefactor is divided by 2^{L1 L2}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enumerate import PartitionPair
from .errors import DomainError
from .groups import logsumexp, signed_log_sum

LOG2 = np.log(2.0)


def dual_coupling(a: float) -> float:
    """abar with sinh(2a) sinh(2abar) = 1."""
    if not a > 0:
        raise DomainError("dual coupling needs a > 0")
    return 0.5 * np.arcsinh(1.0 / np.sinh(2.0 * a))


@dataclass(frozen=True)
class SquareIsingSpec:
    a: float
    b: float
    L1: int
    L2: int

    @property
    def abar(self) -> float:
        return dual_coupling(self.a)

    @property
    def bbar(self) -> float:
        return dual_coupling(self.b)

    @property
    def mass_gap(self) -> float:
        return 2.0 * (self.abar - self.b)


def gammas(a: float, b: float, L2: int, kmax: int | None = None) -> np.ndarray:
    """gamma_k for k = 0 .. kmax-1 (default 2*L2).  gamma_0 is signed."""
    kmax = 2 * L2 if kmax is None else kmax
    ab = dual_coupling(a)
    k = np.arange(kmax)
    ch = np.cosh(2 * ab) * np.cosh(2 * b) - np.cos(np.pi * k / L2) * np.sinh(2 * ab) * np.sinh(2 * b)
    g = np.arccosh(np.maximum(ch, 1.0))
    # where cos(pi k/L2) = 1 the closed form 2(abar - b) keeps the sign
    zero = (k % (2 * L2)) == 0
    g[zero] = 2.0 * (ab - b)
    return g


def _log2cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2 * x))


def _log2sinh_abs(x):
    x = np.abs(x)
    with np.errstate(divide="ignore"):
        return x + _log1m_exp(2 * x)


def _log1m_exp(y):
    """log(1 - e^{-y}) for y >= 0, accurate at both ends."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(y < np.log(2.0), np.log(-np.expm1(-y)), np.log1p(-np.exp(-y)))


def _log_tanh_abs(x):
    x = np.abs(x)
    return _log1m_exp(2 * x) - np.log1p(np.exp(-2 * x))


def _log1m_prod_tanh(x):
    """log(1 - prod tanh|x_k|), kept finite when the product is 1 to double
    precision: -log tanh x = 2 atanh(e^{-2x}) is summed in the log domain."""
    u = np.exp(-2 * np.abs(x))
    if np.any(u >= 1):
        return 0.0
    with np.errstate(divide="ignore"):
        ratio = np.where(u < 1e-8, 1.0, np.arctanh(u) / np.where(u > 0, u, 1.0))
        terms = LOG2 - 2 * np.abs(x) + np.log(ratio)
    lD = logsumexp(terms)  # log of -sum log tanh
    if lD < -30:
        return float(lD + np.log1p(-0.5 * np.exp(lD)))
    return float(np.log(-np.expm1(-np.exp(lD))))


def _products(spec: SquareIsingSpec):
    """log|.| and sign of the four products P_co, P_so, P_ce, P_se."""
    L1, L2 = spec.L1, spec.L2
    g = gammas(spec.a, spec.b, L2)
    odd = g[1::2]  # gamma_{2k-1}, k = 1..L2
    even = g[0::2]  # gamma_{2k-2}
    x_o, x_e = 0.5 * L1 * odd, 0.5 * L1 * even
    out = {}
    out["co"] = (float(np.sum(_log2cosh(x_o))), 1.0)
    out["so"] = (float(np.sum(_log2sinh_abs(x_o))), float(np.prod(np.sign(x_o))))
    out["ce"] = (float(np.sum(_log2cosh(x_e))), 1.0)
    out["se"] = (float(np.sum(_log2sinh_abs(x_e))), float(np.prod(np.sign(x_e))))
    return out


def _prefactor(spec):
    V = spec.L1 * spec.L2
    return -LOG2 + 0.5 * V * np.log(2 * np.sinh(2 * spec.a)) - V * LOG2


def kastening_partition_pair(spec: SquareIsingSpec) -> PartitionPair:
    """log Z and log Z^(-) (antiperiodic along direction 1)."""
    if spec.a <= 0 or spec.b < 0:
        raise DomainError("need a > 0 and b >= 0")
    P = _products(spec)
    terms = [P["co"], P["so"], P["ce"], P["se"]]
    l = [t[0] for t in terms]
    s = [t[1] for t in terms]
    lz, sz = signed_log_sum(l, [s[0], s[1], s[2], -s[3]])
    lzm, szm = signed_log_sum(l, [s[0], s[1], -s[2], s[3]])
    pre = _prefactor(spec)
    ratio = one_minus_ratio(spec)
    flags = []
    if gammas(spec.a, spec.b, spec.L2)[0] <= 0:
        flags.append("gamma_0 <= 0: not in the disordered phase")
    if sz <= 0 or szm <= 0:
        flags.append("non-positive partition function from closed form")
    return PartitionPair(lz + pre, lzm + pre, ratio, "closed-form", flags=flags)


def square_ratio(spec: SquareIsingSpec) -> float:
    """(Z - Z^(-)) / (Z + Z^(-)) as (1 - prod tanh(even)) / (prod cosh-ratio + prod sinh-ratio)."""
    return float(np.exp(log_square_ratio(spec)))


def log_square_ratio(spec: SquareIsingSpec) -> float:
    P = _products(spec)
    lco, _ = P["co"]
    lso, sso = P["so"]
    lce, _ = P["ce"]
    lse, sse = P["se"]
    # 1 - prod tanh = 1 - sse * exp(d); d summed term by term, since
    # lse - lce cancels to zero once the x_k are large
    x_e = 0.5 * spec.L1 * gammas(spec.a, spec.b, spec.L2)[0::2]
    d = float(np.sum(_log_tanh_abs(x_e)))
    if sse > 0:
        lnum = _log1m_prod_tanh(x_e)
    else:
        lnum = float(np.log1p(np.exp(d)))
    lden, sden = signed_log_sum([lco - lce, lso - lce], [1.0, sso])
    if sden <= 0:
        raise DomainError("ratio denominator not positive")
    return lnum - lden


def one_minus_ratio(spec: SquareIsingSpec) -> float:
    """1 - Z^(-)/Z = 2r/(1+r) with r the symmetric ratio."""
    r = square_ratio(spec)
    return 2 * r / (1 + r)


def log_one_minus_ratio(spec: SquareIsingSpec) -> float:
    lr = log_square_ratio(spec)
    return LOG2 + lr - float(np.log1p(np.exp(lr)))


def alternating_sum(a: float, b: float, L2: int) -> float:
    """half of sum_{k=0}^{2L2-1} (-1)^{k+1} gamma_k."""
    g = gammas(a, b, L2)
    sgn = np.where(np.arange(2 * L2) % 2 == 0, -1.0, 1.0)
    return 0.5 * float(np.sum(sgn * g))


def square_decay_rate(spec: SquareIsingSpec, limit: bool = False) -> float:
    """exp{-(gamma_0 + alternating sum)}: the L1 -> infinity value of
    (1 - Z^(-)/Z)^{1/L1}.  With limit=True, its L2 -> infinity value e^{-gamma_0}."""
    g0 = 2 * (spec.abar - spec.b)
    if g0 <= 0:
        raise DomainError("decay rate defined in the disordered phase only")
    if limit:
        return float(np.exp(-g0))
    return float(np.exp(-(g0 + alternating_sum(spec.a, spec.b, spec.L2))))


def gamma_spectrum(spec: SquareIsingSpec):
    g = gammas(spec.a, spec.b, spec.L2)
    return [(k, float(v)) for k, v in enumerate(g)]
