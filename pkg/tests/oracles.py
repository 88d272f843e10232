"""Independent reference computations used by the tests.

Nothing here imports twistgap: every quantity is rebuilt from scratch so the
package code is checked against a separate implementation.
"""

import itertools
import math

import numpy as np


# ----------------------------------------------------------------------
# special functions


def bessel_i(n, x, terms=80):
    """Modified Bessel I_n(x) from its power series."""
    n = abs(n)
    s = 0.0
    for k in range(terms):
        s += (x / 2) ** (2 * k + n) / (math.factorial(k) * math.factorial(k + n))
    return s


def su2_wilson_coeffs(beta, two_j_max):
    """c_j = I_{2j+1}(beta) / I_1(beta) for exp(beta cos theta) on SU(2),
    listed by 2j = 0 .. two_j_max."""
    i1 = bessel_i(1, beta)
    return [bessel_i(tj + 1, beta) / i1 for tj in range(two_j_max + 1)]


# ----------------------------------------------------------------------
# spin models by brute force


def square_bonds(L1, L2, a, b):
    """(p, q, J, on_wall) with the wall on the bonds leaving column L1 - 1."""
    out = []
    for x in range(L1):
        for y in range(L2):
            s = x * L2 + y
            out.append((s, ((x + 1) % L1) * L2 + y, a, x == L1 - 1))
            out.append((s, x * L2 + (y + 1) % L2, b, False))
    return out


def triangular_bonds(N, M, K1, K, shift):
    """Column j holds sites j*M + i; (i, N) is identified with (i + shift, 0).
    The wall sits on the two bonds leaving column N - 1."""
    def site(i, j):
        if j == N:
            return (i + shift) % M
        return j * M + i % M

    out = []
    for j in range(N):
        for i in range(M):
            s = site(i, j)
            out.append((s, site(i + 1, j), K1, False))
            out.append((s, site(i, j + 1), K, j == N - 1))
            out.append((s, site(i - 1, j + 1), K, j == N - 1))
    return out


def _states(n):
    codes = np.arange(1 << n)
    return 1 - 2 * ((codes[:, None] >> np.arange(n)[None, :]) & 1)


def brute_force(n_sites, bonds, pairs=()):
    """log Z, log Z^- (half-sum normalisation) and untwisted <s_p s_q>."""
    S = _states(n_sites).astype(float)
    p = np.array([b[0] for b in bonds])
    q = np.array([b[1] for b in bonds])
    J = np.array([b[2] for b in bonds], dtype=float)
    wall = np.array([b[3] for b in bonds])
    prod = S[:, p] * S[:, q]
    E = prod @ J
    Et = prod @ np.where(wall, -J, J)
    m = max(E.max(), Et.max())
    w = np.exp(E - m)
    wt = np.exp(Et - m)
    norm = n_sites * math.log(2)
    logz = m + math.log(w.sum()) - norm
    logzt = m + math.log(wt.sum()) - norm
    corr = {(a, b): float(np.sum(w * S[:, a] * S[:, b]) / w.sum()) for a, b in pairs}
    return logz, logzt, corr


# ----------------------------------------------------------------------
# 1D chain with a two-element group


def _apply(T, v, k, parity):
    """T^k v with v kept in the flip-even (+1) or flip-odd (-1) subspace.

    T commutes with the global flip, so projecting after every product only
    removes rounding that would otherwise grow in the dominant sector."""
    for _ in range(k):
        v = T @ v
        v = 0.5 * (v + parity * v[::-1])
    return v


def z2_chain(beta, L, n=None):
    """Transfer-matrix values for the Ising ring with bond weight exp(beta s s').

    Returns Z, Z with one bond flipped, <s_0 s_n> and the wall projection
    (Z - Z^-)/(2Z), all with the normalised (averaged) single-site measure.
    """
    T = 0.5 * np.array([[math.exp(beta), math.exp(-beta)], [math.exp(-beta), math.exp(beta)]])
    Tf = 0.5 * np.array([[math.exp(-beta), math.exp(beta)], [math.exp(beta), math.exp(-beta)]])
    Z = np.trace(np.linalg.matrix_power(T, L))
    Zg = np.trace(np.linalg.matrix_power(T, L - 1) @ Tf)
    # Z - Z^- = Tr T^{L-1} (T - Tf) and T - Tf = sinh(beta) v v^T, v = (1, -1)
    odd = np.array([1.0, -1.0])
    diff = math.sinh(beta) * float(odd @ _apply(T, odd, L - 1, -1))
    out = {"Z": Z, "Zg": Zg, "wall": 0.5 * diff / Z}
    if n is not None:
        # trace over the even and odd unit vectors; s swaps the two subspaces
        s = np.array([1.0, -1.0])
        num = 0.0
        for e, par in ((np.array([1.0, 1.0]) / math.sqrt(2), 1), (odd / math.sqrt(2), -1)):
            w = s * _apply(T, e, L - n, par)
            w = s * _apply(T, w, n, -par)
            num += float(e @ w)
        out["corr"] = num / Z
    return out


# ----------------------------------------------------------------------
# SU(2) chain by nested quadrature


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def su2_two_link(beta, theta, n=64):
    """h(theta) = int dU f(x U^-1) f(U) with f(U) = exp(beta Re Tr U) and x of
    half-angle theta.  U = cos psi + i sin psi (n . sigma): the Haar measure
    is (2/pi) sin^2 psi dpsi times a uniform n_z in [-1, 1]."""
    psi, wp = _gauss(n, 0.0, math.pi)
    nz, wn = _gauss(n, -1.0, 1.0)
    P, Nz = np.meshgrid(psi, nz, indexing="ij")
    W = np.outer(wp * (2 / math.pi) * np.sin(psi) ** 2, 0.5 * wn)
    half_trace = np.cos(theta) * np.cos(P) + np.sin(theta) * np.sin(P) * Nz
    return float(np.sum(W * np.exp(2 * beta * half_trace) * np.exp(2 * beta * np.cos(P))))


def su2_chain_four(beta, twist=False, n=64):
    """Z of the four-site SU(2) ring (twist: one link multiplied by -1),
    as the class integral of h(theta) h(theta') with theta' = theta or pi - theta."""
    th, w = _gauss(n, 0.0, math.pi)
    h = np.array([su2_two_link(beta, t, n) for t in th])
    hh = np.array([su2_two_link(beta, math.pi - t, n) for t in th]) if twist else h
    return float(np.sum(w * (2 / math.pi) * np.sin(th) ** 2 * h * hh))


# ----------------------------------------------------------------------
# Z_N gauge theory by enumeration


def zn_gauge(N, beta, L1, L2, k=0):
    """log Z^[k] of Z_N Wilson gauge theory on the L1 x L2 torus, averaged
    over all link configurations, with z^k inserted on plaquette (0, 0)."""
    nl = 2 * L1 * L2

    def link(x, y, mu):
        return 2 * ((x % L1) * L2 + (y % L2)) + mu

    plaq = []
    for x in range(L1):
        for y in range(L2):
            plaq.append((link(x, y, 0), link(x + 1, y, 1), link(x, y + 1, 0), link(x, y, 1)))
    P = np.array(plaq)
    configs = np.array(list(itertools.product(range(N), repeat=nl)), dtype=np.int64)
    flux = (configs[:, P[:, 0]] + configs[:, P[:, 1]] - configs[:, P[:, 2]] - configs[:, P[:, 3]])
    flux[:, 0] += k
    E = beta * np.cos(2 * np.pi * flux / N).sum(axis=1)
    m = E.max()
    return float(m + math.log(np.mean(np.exp(E - m))))


# ----------------------------------------------------------------------
# triangular coefficients, written out again


def tri_ratio(t1, t):
    """g(B)/|A| from the coefficient formulas."""
    A0 = (1 + t * t * t1) ** 2 + (t1 + t * t) ** 2 + 2 * t * t * (1 + t1) ** 2
    A = 2 * (1 - t1 * t1) * (1 - t * t) * t / A0
    B = 2 * t1 * (1 - t * t) ** 2 / A0
    g = math.sqrt(-2 * B * (1 + B)) if B < -1 / 3 else 0.5 * (1 - B)
    return g / abs(A)
