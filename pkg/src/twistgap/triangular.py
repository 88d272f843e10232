"""Triangular-lattice Ising model: closed-form partition functions with
periodic / horizontally antiperiodic boundaries, the decay-rate bound rho
and the large-N asymptotics of the twist free energy.

Conventions: t1 = tanh(J1/kT) on vertical bonds, t = tanh(J/kT) on the
two other bond directions, M sites per column, N columns.

Omega_{mu nu} = A0^{MN/2} prod_{p,q} [1 - B cos phi_p - A cos psi_q
                                      - A cos(phi_p - psi_q)]^{1/2}
with phi_p = 2 pi (p+mu)/M and psi_q = 2 pi (q+nu)/N.  The q-product is done
in closed form: the bracket is alpha_p - beta_p cos(psi_q - phi_p/2) with
alpha_p = 1 - B cos phi_p, beta_p = 2A cos(phi_p/2), and

    prod_q [alpha - beta cos(x + 2 pi q/N)]
        = (|beta|/2)^N [2 cosh(N theta) - 2 cos(N x')],   cosh theta = alpha/|beta|,

where x' absorbs a shift by pi when beta < 0.  This keeps the tiny
differences between Omega_{0,1/2} and Omega_{0,0} exact at large N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enumerate import PartitionPair
from .errors import DomainError, PhaseError
from .groups import signed_log_sum

LOG2 = np.log(2.0)
CRIT_TOL = 1e-12


def tri_coefficients(t1: float, t: float):
    """(A0, A, B)."""
    _check_t(t1, t)
    A0 = (1 + t * t * t1) ** 2 + (t1 + t * t) ** 2 + 2 * t * t * (1 + t1) ** 2
    A = 2 * (1 - t1 * t1) * (1 - t * t) * t / A0
    B = 2 * t1 * (1 - t * t) ** 2 / A0
    return A0, A, B


def _check_t(t1, t):
    if not (-1 < t1 < 1 and -1 < t < 1):
        raise DomainError("t1 and t must lie in (-1, 1)")


def g_function(x: float) -> float:
    if not -1 < x < 1:
        raise DomainError("g(x) needs -1 < x < 1")
    if x < -1.0 / 3.0:
        return float(np.sqrt(-2 * x * (1 + x)))
    return 0.5 * (1 - x)


def zero_mode_factor(t1: float, t: float) -> float:
    """P(t1, |t|) = 1 - t1 - 2|t| - 2|t| t1 - t^2 + t^2 t1.

    A0 (1 - B - 2|A|) = P^2, so P vanishes exactly on the critical line, and
    its sign tells the two phases apart: P > 0 disordered, P < 0 ordered.
    """
    s = abs(t)
    return 1 - t1 - 2 * s - 2 * s * t1 - s * s + s * s * t1


def phase(t1: float, t: float) -> str:
    """'disordered', 'critical' or 'ordered'.

    g(B)/|A| >= 1 on the whole square (with equality only on the critical
    line), so the ratio alone cannot separate the phases; the sign of the
    zero-mode factor does.
    """
    _check_t(t1, t)
    if t == 0:
        return "disordered"
    _, A, B = tri_coefficients(t1, t)
    r = g_function(B) / abs(A)
    if abs(r - 1) <= CRIT_TOL:
        return "critical"
    P = zero_mode_factor(t1, t)
    if P == 0:
        return "critical"
    return "disordered" if P > 0 else "ordered"


@dataclass(frozen=True)
class MassGapBound:
    rho: float
    g_of_B: float
    ratio: float  # g(B)/|A|
    phase: str
    theta_bar: float = float("nan")


def tri_rho(t1: float, t: float, allow_ordered: bool = False) -> MassGapBound:
    """rho = arccosh(g(B)/|A|)."""
    _check_t(t1, t)
    _, A, B = tri_coefficients(t1, t)
    gB = g_function(B)
    if t == 0:
        return MassGapBound(float("inf"), gB, float("inf"), "disordered")
    ph = phase(t1, t)
    r = gB / abs(A)
    if ph == "ordered" and not allow_ordered:
        raise PhaseError(f"(t1, t) = ({t1}, {t}) lies in the ordered phase")
    if ph == "critical":
        return MassGapBound(0.0, gB, r, ph)
    return MassGapBound(float(np.arccosh(max(r, 1.0))), gB, r, ph)


def rho_diagonal(t: float) -> float:
    """arccosh((1+t^2)^2 / (4|t|(1-t^2))), the t1 = 0 reduction."""
    return float(np.arccosh((1 + t * t) ** 2 / (4 * abs(t) * (1 - t * t))))


# ----------------------------------------------------------------------
# Omega products


def _log_q_product(alpha, beta, N, nu, phi):
    """log prod_{q=0}^{N-1} [alpha - beta cos(2 pi (q+nu)/N - phi/2)]."""
    if beta == 0.0:
        if alpha <= 0:
            return -np.inf
        return N * float(np.log(alpha))
    ab = abs(beta)
    y = 2 * np.pi * nu - N * phi / 2 + (N * np.pi if beta < 0 else 0.0)
    ch = alpha / ab
    if ch < 1 - 1e-14:
        raise DomainError("bracket changes sign along q")
    theta = float(np.arccosh(max(ch, 1.0)))
    Nt = N * theta
    if Nt > 1.0:
        e = np.exp(-Nt)
        inner = Nt + np.log1p(-2 * np.cos(y) * e + e * e)
    else:
        val = 4 * np.sinh(Nt / 2) ** 2 + 4 * np.sin(y / 2) ** 2
        inner = np.log(val) if val > 0 else -np.inf
    return N * float(np.log(ab / 2)) + float(inner)


def _log_q_diff(alpha, beta, N, phi):
    """log of the nu = 0 product over the nu = 1/2 one, as (log|.|, sign).

    The ratio is 1 + x with x = -4 c e / (1 + 2 c e + e^2), e = exp(-N theta);
    once e underflows only the leading log|x| survives, kept in log form.
    """
    if beta == 0.0:
        return -np.inf, 0.0
    ab = abs(beta)
    c = float(np.cos(-N * phi / 2 + (N * np.pi if beta < 0 else 0.0)))
    if c == 0.0:
        return -np.inf, 0.0
    theta = float(np.arccosh(max(alpha / ab, 1.0)))
    Nt = N * theta
    if Nt > 600:
        return float(np.log(4 * abs(c)) - Nt), -float(np.sign(c))
    e = np.exp(-Nt)
    den = 1 + 2 * c * e + e * e
    if den <= 0:
        return np.inf, -1.0
    x = -4 * c * e / den
    if x <= -1:
        return np.inf, -1.0
    d = float(np.log1p(x))
    if d == 0.0:
        return float(np.log(abs(x))), float(np.sign(x))
    return float(np.log(abs(d))), float(np.sign(d))


def _log_neg_zero_diff(t1, t, M, N):
    """(log|D|, sign D) with D = log Omega_0h - log Omega_00.

    D > 0 is the usual case.  On frustrated strips (t1 < 0, M odd) it can be
    negative, which makes Z^- larger than Z."""
    A0, A, B = tri_coefficients(t1, t)
    ls, ss = [], []
    for p in range(M):
        phi = 2 * np.pi * p / M
        l, sg = _log_q_diff(1 - B * np.cos(phi), 2 * A * np.cos(phi / 2), N, phi)
        if l == np.inf:
            return np.inf, 1.0
        ls.append(l)
        ss.append(-sg)
    lv, sg = signed_log_sum(ls, ss)
    return lv + float(np.log(0.5)), sg


def log_omega_zero_diff(t1: float, t: float, M: int, N: int) -> float:
    """log Omega_00 - log Omega_0h summed mode by mode."""
    ln, sg = _log_neg_zero_diff(t1, t, M, N)
    return -sg * float(np.exp(ln))


def log_omega(t1: float, t: float, M: int, N: int, mu: float, nu: float) -> float:
    """log Omega_{mu nu} (the A0 factor included)."""
    A0, A, B = tri_coefficients(t1, t)
    tot = 0.0
    for p in range(M):
        phi = 2 * np.pi * (p + mu) / M
        alpha = 1 - B * np.cos(phi)
        beta = 2 * A * np.cos(phi / 2)
        lq = _log_q_product(alpha, beta, N, nu, phi)
        if lq == -np.inf:
            return -np.inf
        tot += lq
    return 0.5 * M * N * float(np.log(A0)) + 0.5 * tot


def log_omega_direct(t1, t, M, N, mu, nu) -> float:
    """Same as log_omega by brute-force double product (cross-check)."""
    A0, A, B = tri_coefficients(t1, t)
    p = (np.arange(M) + mu)[:, None] * 2 * np.pi / M
    q = (np.arange(N) + nu)[None, :] * 2 * np.pi / N
    br = 1 - B * np.cos(p) - A * np.cos(q) - A * np.cos(p - q)
    if np.min(br) < -1e-13:
        raise DomainError("negative bracket under the square root")
    with np.errstate(divide="ignore"):
        return 0.5 * M * N * float(np.log(A0)) + 0.5 * float(np.sum(np.log(np.maximum(br, 0.0))))


def _log_prefactor(t1, t, M, N):
    # [2 cosh K1 cosh^2 K]^{MN} / 2 with the half-sum normalisation per site
    # removing 2^{MN}
    K1, K = np.arctanh(t1), np.arctanh(t)
    return -LOG2 + M * N * float(np.log(np.cosh(K1)) + 2 * np.log(np.cosh(K)))


@dataclass(frozen=True)
class TriangularIsingSpec:
    t1: float
    t: float
    N: int
    M: int


def _omegas(spec):
    return {key: log_omega(spec.t1, spec.t, spec.M, spec.N, *key)
            for key in ((0.5, 0.5), (0.5, 0.0), (0.0, 0.5), (0.0, 0.0))}


def tri_partition_pair(spec: TriangularIsingSpec, allow_ordered: bool = False) -> PartitionPair:
    """log Z and log Z^(-) (antiperiodic horizontally).

    Z   = pre [O_hh + O_h0 + O_0h - s O_00] / 2
    Z^- = pre [O_hh + O_h0 - O_0h + s O_00] / 2
    with s = +1 in the disordered phase and -1 in the ordered one.

    Geometry: this is exactly the rhombic torus ("triangular-fig2") for any
    N, M (checked against enumeration, odd N included).  The straight
    horizontal identification ("triangular-fig1") gives the same numbers
    only when N is a multiple of 2M.
    """
    t1, t = spec.t1, spec.t
    ph = phase(t1, t)
    if ph != "disordered" and not allow_ordered:
        raise PhaseError(f"(t1, t) = ({t1}, {t}) is {ph}; pass allow_ordered to evaluate")
    s = -1.0 if ph == "ordered" else 1.0
    om = _omegas(spec)
    l = [om[(0.5, 0.5)], om[(0.5, 0.0)], om[(0.0, 0.5)], om[(0.0, 0.0)]]
    pre = _log_prefactor(t1, t, spec.M, spec.N)
    lz, sz = signed_log_sum(l, [1, 1, 1, -s])
    lzm, szm = signed_log_sum(l, [1, 1, -1, s])
    flags = [] if ph == "disordered" else [ph]
    if s > 0:
        lr, sg = _log_sym_ratio(om, spec)
        r = sg * float(np.exp(lr))
        ratio = 2 * r / (1 + r)
    else:
        ratio = float(-np.expm1(lzm - lz))
    return PartitionPair(lz + pre, lzm + pre, ratio, "closed-form", flags=flags)


def _log_sym_ratio(om, spec):
    """log|(O_0h - O_00) / (O_hh + O_h0)| and its sign (disordered phase)."""
    ln, sg = _log_neg_zero_diff(spec.t1, spec.t, spec.M, spec.N)
    if sg == 0:
        return -np.inf, 0.0
    if ln == np.inf:
        lnum = om[(0.0, 0.5)]
    elif sg < 0:
        # O_00 > O_0h: 1 - e^{|D|} < 0
        lnum = om[(0.0, 0.5)] + float(np.log(np.expm1(np.exp(ln))))
    elif ln < -20:
        # 1 - e^{-x} = x (1 - x/2 + ...) for tiny x = e^ln
        lnum = om[(0.0, 0.5)] + ln + float(np.log1p(-0.5 * np.exp(ln)))
    else:
        lnum = om[(0.0, 0.5)] + float(np.log(-np.expm1(-np.exp(ln))))
    lden, _ = signed_log_sum([om[(0.5, 0.5)], om[(0.5, 0.0)]], [1, 1])
    return lnum - lden, sg


def tri_sym_ratio(spec: TriangularIsingSpec) -> float:
    """(Z - Z^-)/(Z + Z^-) through the Omega combination directly."""
    lr, sg = _log_sym_ratio(_omegas(spec), spec)
    return sg * float(np.exp(lr))


def log_one_minus_ratio(spec: TriangularIsingSpec) -> float:
    """log(1 - Z^-/Z) in the disordered phase, stable for huge N."""
    if phase(spec.t1, spec.t) != "disordered":
        raise PhaseError("disordered phase required")
    lr, sg = _log_sym_ratio(_omegas(spec), spec)
    if sg < 0:
        raise DomainError("Z^- exceeds Z on this strip; 1 - Z^-/Z is negative")
    return LOG2 + lr - float(np.log1p(np.exp(lr)))


# ----------------------------------------------------------------------
# asymptotics


def theta_AB(A, B, mu, p, M) -> float:
    den = abs(2 * A * np.cos(np.pi * (p + mu) / M))
    if den == 0:
        return np.inf
    return float(np.arccosh(max(abs(1 - B * np.cos(2 * np.pi * (p + mu) / M)) / den, 1.0)))


def f_AB(A, B, x):
    u = 1 - B * np.cos(2 * np.pi * x)
    return 0.5 * np.log(u + np.sqrt(u * u - (2 * A * np.cos(np.pi * x)) ** 2))


def theta_bar(t1, t, M):
    """Smallest theta_A^B(0, p, M) over p (p with a vanishing denominator is skipped)."""
    _, A, B = tri_coefficients(t1, t)
    vals = [theta_AB(A, B, 0.0, p, M) for p in range(M)]
    return float(min(vals))


def alternating_f_sum(t1, t, M):
    _, A, B = tri_coefficients(t1, t)
    k = np.arange(2 * M)
    sgn = np.where(k % 2 == 0, -1.0, 1.0)
    return float(np.sum(sgn * f_AB(A, B, k / (2 * M))))


def tri_asymptotic_ratio(spec: TriangularIsingSpec, log: bool = False):
    """2 exp{-N [theta_bar + sum_k (-1)^{k+1} f(k/2M)]}, the large-N form of
    1 - Z^-/Z."""
    if phase(spec.t1, spec.t) != "disordered":
        raise PhaseError("disordered phase required")
    rate = theta_bar(spec.t1, spec.t, spec.M) + alternating_f_sum(spec.t1, spec.t, spec.M)
    lv = LOG2 - spec.N * rate
    return lv if log else float(np.exp(lv))


def asymptotic_multiplicity(t1, t, M, tol=1e-12) -> int:
    """K = 4 x (number of p attaining theta_bar): the exact prefactor of the
    large-N form is K/2."""
    _, A, B = tri_coefficients(t1, t)
    vals = np.array([theta_AB(A, B, 0.0, p, M) for p in range(M)])
    return 4 * int(np.sum(np.abs(vals - vals.min()) <= tol * max(1.0, vals.min())))


# ----------------------------------------------------------------------
# rho heatmap over the (t1, t) square


def heatmap_axis(n: int) -> np.ndarray:
    """n points t_k = (2k - (n-1)) / n, k = 0..n-1: symmetric about 0 and
    strictly inside (-1, 1).  For odd n the middle point is exactly 0."""
    k = np.arange(n)
    return (2 * k - (n - 1)) / n


def rho_heatmap(n1: int = 201, n2: int = 201):
    """Rows (t1, t, rho, 1 - e^{-rho}, phase) over an n1 x n2 grid.

    Ordered cells carry rho = nan; t = 0 cells carry rho = inf and value 1.
    The value at (t1, -t) is computed from |t| so the mirror symmetry is exact.
    """
    rows = []
    ax1 = heatmap_axis(n1)
    ax2 = heatmap_axis(n2)
    for t1 in ax1:
        for t in ax2:
            t1f, tf = float(t1), float(t)
            if tf == 0.0:
                rows.append((t1f, tf, float("inf"), 1.0, "divergent"))
                continue
            ph = phase(t1f, abs(tf))
            if ph == "ordered":
                rows.append((t1f, tf, float("nan"), float("nan"), "ordered"))
                continue
            rho = tri_rho(t1f, abs(tf), allow_ordered=True).rho
            rows.append((t1f, tf, rho, float(-np.expm1(-rho)), ph))
    return rows


def drho_dt1(t1, t, h=1e-5):
    """Central difference of rho in t1 (probe of the kink at B = -1/3)."""
    return (tri_rho(t1 + h, t, True).rho - tri_rho(t1 - h, t, True).rho) / (2 * h)
