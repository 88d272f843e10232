"""Compact-group helpers: class-measure quadrature, irreducible characters
and character coefficients of exponentiated one-variable actions.

Supported groups are the cyclic groups Z_N, the circle U(1) and SU(2).
A class function is a callable of the class parameter: an integer k for
Z_N (the element exp(2 pi i k/N)), an angle theta in [0, 2pi) for U(1),
and the half rotation angle theta in [0, pi] for SU(2), where the
eigenvalues are exp(+-i theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError, TruncationError

# coefficients whose magnitude is below SNAP * eps * F_trivial are pure
# quadrature round-off and are set to exactly zero
SNAP = 64.0

MAX_NODES = 1 << 20


@dataclass(frozen=True)
class Group:
    kind: str  # "zn", "u1" or "su2"
    order: int = 0  # N for Z_N; ignored otherwise

    def __post_init__(self):
        if self.kind not in ("zn", "u1", "su2"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "zn" and self.order < 1:
            raise ValueError("Z_N needs order >= 1")

    @property
    def center_order(self) -> int:
        """Order of the center used for N-ality (0 means the circle itself)."""
        if self.kind == "zn":
            return self.order
        if self.kind == "su2":
            return 2
        return 0

    @property
    def name(self) -> str:
        if self.kind == "zn":
            return f"Z{self.order}"
        return {"u1": "U(1)", "su2": "SU(2)"}[self.kind]


def cyclic(n: int) -> Group:
    return Group("zn", n)


U1 = Group("u1")
SU2 = Group("su2")


def parse_group(text: str) -> Group:
    t = text.strip().lower().replace("(", "").replace(")", "")
    if t in ("u1",):
        return U1
    if t in ("su2",):
        return SU2
    if t.startswith("z") and t[1:].isdigit():
        return cyclic(int(t[1:]))
    raise ValueError(f"unsupported group {text!r}")


@dataclass(frozen=True)
class Irrep:
    """Irreducible representation.

    `label` is the integer charge for U(1) and Z_N, and the spin j (a
    multiple of 1/2) for SU(2).
    """

    group: Group
    label: float

    @property
    def two_j(self) -> int:
        return int(round(2 * self.label))

    @property
    def dim(self) -> int:
        if self.group.kind == "su2":
            return self.two_j + 1
        return 1

    @property
    def n_ality(self) -> int:
        g = self.group
        if g.kind == "su2":
            return self.two_j % 2
        if g.kind == "zn":
            return int(self.label) % g.order
        return int(self.label)

    @property
    def is_trivial(self) -> bool:
        if self.group.kind == "zn":
            return int(self.label) % self.group.order == 0
        return self.label == 0

    def conjugate(self) -> "Irrep":
        if self.group.kind == "su2":
            return self
        return Irrep(self.group, -int(self.label))

    def character(self, x):
        return character(self, x)

    def __str__(self):
        if self.group.kind == "su2":
            tj = self.two_j
            return f"j={tj // 2}" if tj % 2 == 0 else f"j={tj}/2"
        return f"q={int(self.label)}"


def trivial(group: Group) -> Irrep:
    return Irrep(group, 0)


def irrep(group: Group, label) -> Irrep:
    if group.kind == "su2":
        tj = 2 * float(label)
        if abs(tj - round(tj)) > 1e-12 or tj < 0:
            raise ValueError(f"SU(2) spin must be a non-negative half-integer, got {label}")
        return Irrep(group, round(tj) / 2)
    if float(label) != int(label):
        raise ValueError(f"charge must be an integer, got {label}")
    return Irrep(group, int(label))


def irreps(group: Group, cutoff: int = 64) -> list[Irrep]:
    """Irreps in the enumeration order: by |charge| (Z_N, U(1)), by j (SU(2)).

    For U(1) the cutoff is the largest |charge|; for SU(2) it is the largest
    2j.  Z_N always returns its N irreps, labelled -N/2 < q <= N/2.
    """
    if group.kind == "zn":
        n = group.order
        out = [Irrep(group, 0)]
        for q in range(1, n // 2 + 1):
            out.append(Irrep(group, q))
            if q != n - q:
                out.append(Irrep(group, -q))
        return out
    if group.kind == "u1":
        out = [Irrep(group, 0)]
        for q in range(1, cutoff + 1):
            out += [Irrep(group, q), Irrep(group, -q)]
        return out
    return [Irrep(group, tj / 2) for tj in range(cutoff + 1)]


def su2_characters(two_j_max: int, theta) -> np.ndarray:
    """chi_j(theta) = U_{2j}(cos theta) for 2j = 0..two_j_max (rows).

    Chebyshev recurrence; finite at theta = 0 and pi without any 0/0.
    """
    x = np.cos(np.asarray(theta, dtype=float))
    out = np.empty((two_j_max + 1,) + x.shape)
    out[0] = 1.0
    if two_j_max >= 1:
        out[1] = 2 * x
    for m in range(2, two_j_max + 1):
        out[m] = 2 * x * out[m - 1] - out[m - 2]
    return out


def character(r: Irrep, x):
    g = r.group
    if g.kind == "su2":
        return su2_characters(r.two_j, x)[-1]
    if g.kind == "zn":
        x = np.asarray(x)
        return np.exp(2j * np.pi * int(r.label) * x / g.order)
    return np.exp(1j * int(r.label) * np.asarray(x, dtype=float))


def element_parameter(group: Group, element) -> float:
    """Class parameter of a group element given in its natural form.

    Z_N: integer power k; U(1): angle; SU(2): either an angle or a 2x2 matrix.
    """
    if group.kind == "su2" and np.ndim(element) == 2:
        tr = np.trace(np.asarray(element)).real / 2
        return float(np.arccos(np.clip(tr, -1.0, 1.0)))
    return element


# ----------------------------------------------------------------------
# quadrature


def _trapezoid_u1(f, n, shift):
    th = 2 * np.pi * (np.arange(n) + shift) / n
    return np.mean(f(th))


def _trapezoid_su2(f, n, shift):
    # the integrand sin^2(th) f(th) extended evenly to [0, 2pi) is periodic,
    # so the periodic trapezoid on 2n points is spectrally accurate
    th = np.pi * (np.arange(n) + shift) / n
    w = np.sin(th) ** 2  # vanishes at the endpoints, so no half weights needed
    return 2.0 * np.sum(w * f(th)) / n


def class_integral(group: Group, f: Callable, tol: float = 1e-12, *, return_error=False):
    """Haar integral of the class function f over `group`.

    Z_N is an exact average (Fractions survive if f returns them).  For the
    continuous groups the trapezoid rule is refined by doubling; the error
    estimate is the gap between the trapezoid and the staggered midpoint rule.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if group.kind == "zn":
        vals = [f(k) for k in range(group.order)]
        if all(isinstance(v, (int, Fraction)) for v in vals):
            val = sum(vals, Fraction(0)) / group.order
        else:
            val = sum(vals) / group.order
        return (val, 0.0) if return_error else val
    rule = _trapezoid_u1 if group.kind == "u1" else _trapezoid_su2
    n = 16
    best = err = None
    while n <= MAX_NODES:
        t = rule(f, n, 0.0)
        m = rule(f, n, 0.5)
        best = 0.5 * (t + m)
        err = abs(t - m)
        if err <= tol and n >= 32:
            return (best, err) if return_error else best
        n *= 2
    raise QuadratureError(best, err)


def orthogonality(group: Group, r: Irrep, s: Irrep, tol=1e-12):
    return class_integral(group, lambda x: character(r, x) * np.conj(character(s, x)), tol)


# ----------------------------------------------------------------------
# actions


def wilson_action(group: Group) -> Callable:
    """log weight beta * Re chi_fund / normalisation, as a function (x, beta).

    U(1): beta cos theta.  SU(2): (beta/2) Tr U = beta cos theta.
    Z_N: beta cos(2 pi k/N); for Z_2 this is the Ising bond beta s s'.
    """
    if group.kind == "zn":
        n = group.order
        return lambda k, beta: beta * np.cos(2 * np.pi * np.asarray(k) / n)
    return lambda th, beta: beta * np.cos(th)


def chiral_action(group: Group) -> Callable:
    """beta Re Tr(U V^-1) with the unnormalised trace (the chain model).

    Only SU(2) differs from the Wilson form: Re Tr U = 2 cos theta.
    """
    if group.kind == "su2":
        return lambda th, beta: 2 * beta * np.cos(th)
    return wilson_action(group)


def adjoint_action(group: Group) -> Callable:
    """beta chi_adj / 3 for SU(2); only integer spins appear in its expansion."""
    if group.kind != "su2":
        raise ValueError("adjoint action implemented for SU(2) only")
    return lambda th, beta: beta * (1 + 2 * np.cos(2 * th)) / 3.0


ACTIONS = {"wilson": wilson_action, "chiral": chiral_action, "adjoint": adjoint_action}


def _resolve_action(group, action):
    if callable(action):
        return action
    try:
        return ACTIONS[action](group)
    except KeyError:
        raise ValueError(f"unknown action {action!r}") from None


def _shift(group, act, beta):
    # max of the log weight on a coarse grid, used to keep exp() in range
    if group.kind == "zn":
        return float(np.max(act(np.arange(group.order), beta)))
    th = np.linspace(0, np.pi if group.kind == "su2" else 2 * np.pi, 257)
    return float(np.max(act(th, beta)))


def character_coefficient(group: Group, action, beta: float, r: Irrep, tol: float = 1e-12) -> float:
    """F_r = (1/d_r) * integral of exp(-S) conj(chi_r)."""
    act = _resolve_action(group, action)
    s = _shift(group, act, beta)
    val = class_integral(group, lambda x: np.exp(act(x, beta) - s) * np.conj(character(r, x)), tol)
    return float(np.real(val)) * np.exp(s) / r.dim


@dataclass(frozen=True)
class CharacterCoefficients:
    group: Group
    beta: float
    irreps: tuple
    F: np.ndarray  # true coefficients (may overflow for absurd beta)
    c: np.ndarray  # F_r / F_trivial
    log_FT: float
    cutoff: int
    tail: float = 0.0  # bound on sum of |c_r| beyond the cutoff
    negative: tuple = field(default=())  # labels with c_r < 0 (reported, not fatal)

    def index(self, r: Irrep) -> int:
        for i, s in enumerate(self.irreps):
            if s == r:
                return i
        if self.group.kind == "zn":
            lab = int(r.label) % self.group.order
            for i, s in enumerate(self.irreps):
                if int(s.label) % self.group.order == lab:
                    return i
        raise KeyError(f"{r} is beyond the cutoff")

    def coeff(self, r: Irrep) -> float:
        try:
            return float(self.c[self.index(r)])
        except KeyError:
            return 0.0

    @property
    def dims(self) -> np.ndarray:
        return np.array([r.dim for r in self.irreps])

    @property
    def n_alities(self) -> np.ndarray:
        return np.array([r.n_ality for r in self.irreps])


def expand_action(group: Group, action="wilson", beta: float = 1.0, cutoff: int = 64,
                  tol: float = 1e-12) -> CharacterCoefficients:
    """Character coefficients of exp(-S) for all irreps up to the cutoff."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    act = _resolve_action(group, action)
    reps = irreps(group, cutoff)
    s = _shift(group, act, beta)

    if group.kind == "zn":
        k = np.arange(group.order)
        w = np.exp(act(k, beta) - s)
        vals = np.array([np.real(np.mean(w * np.conj(character(r, k)))) for r in reps])
    else:
        vals = _continuous_coefficients(group, act, beta, s, reps, tol)
    dims = np.array([r.dim for r in reps], dtype=float)
    vals = vals / dims
    ft = vals[0]
    if ft <= 0:
        raise ValueError("trivial coefficient is not positive; action not supported")
    vals = np.where(np.abs(vals) <= SNAP * np.finfo(float).eps * ft, 0.0, vals)
    c = vals / ft
    c[0] = 1.0
    log_ft = float(np.log(ft) + s)
    with np.errstate(over="ignore"):
        F = vals * np.exp(s)
    tail = _tail_bound(group, c)
    if tail > tol:
        raise TruncationError(tail, _suggest_cutoff(group, c, cutoff, tol))
    neg = tuple(r.label for r, ci in zip(reps, c) if ci < 0)
    return CharacterCoefficients(group, float(beta), tuple(reps), F, c, log_ft, cutoff, tail, neg)


def _continuous_coefficients(group, act, beta, s, reps, tol):
    """All coefficients at once: one refinement loop on a shared grid."""
    if group.kind == "u1":
        labels = np.array([int(r.label) for r in reps])

        def rule(n, shift):
            th = 2 * np.pi * (np.arange(n) + shift) / n
            w = np.exp(act(th, beta) - s)
            return np.real(np.exp(-1j * np.outer(labels, th)) @ w) / n
    else:
        tjmax = reps[-1].two_j

        def rule(n, shift):
            th = np.pi * (np.arange(n) + shift) / n
            w = np.exp(act(th, beta) - s) * np.sin(th) ** 2
            return 2.0 * (su2_characters(tjmax, th) @ w) / n

    n = 16
    while n <= MAX_NODES:
        t, m = rule(n, 0.0), rule(n, 0.5)
        err = np.max(np.abs(t - m))
        if err <= tol * max(1.0, abs(t[0])) and n >= 32:
            return 0.5 * (t + m)
        n *= 2
    raise QuadratureError(0.5 * (t + m), err)


def _tail_bound(group, c):
    if group.kind == "zn":
        return 0.0
    mags = np.abs(c[1:])
    if group.kind == "u1":
        mags = mags[0::2]  # one per |charge|
    if mags.size < 2 or mags[-1] == 0.0:
        return 0.0
    ratio = mags[-1] / mags[-2] if mags[-2] > 0 else 1.0
    if ratio >= 1:
        return float("inf")
    mult = 2.0 if group.kind == "u1" else 1.0
    return float(mult * mags[-1] * ratio / (1 - ratio))


def _suggest_cutoff(group, c, cutoff, tol):
    mags = np.abs(c[1:])
    if group.kind == "u1":
        mags = mags[0::2]
    if mags.size < 2 or mags[-2] == 0:
        return None
    ratio = mags[-1] / mags[-2]
    if not 0 < ratio < 1:
        return None
    extra = int(np.ceil(np.log(tol * (1 - ratio) / mags[-1]) / np.log(ratio)))
    return cutoff + max(extra, 1)


def logsumexp(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -np.inf
    m = np.max(x)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(x - m))))


def signed_log_sum(terms_log: Sequence[float], signs: Sequence[float]):
    """log|sum s_i exp(l_i)| and its sign."""
    l = np.asarray(terms_log, dtype=float)
    sg = np.asarray(signs, dtype=float)
    keep = sg != 0
    if not np.any(keep):
        return -np.inf, 0.0
    l, sg = l[keep], sg[keep]
    m = np.max(l)
    tot = np.sum(sg * np.exp(l - m))
    if tot == 0:
        return -np.inf, 0.0
    return float(m + np.log(abs(tot))), float(np.sign(tot))
