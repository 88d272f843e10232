"""Bond lists for the periodic Ising lattices used by the oracles.

Square lattice, L1 x L2: site (x, y) with x in Z_L1 (coupling a between
(x, y) and (x+1, y)) and y in Z_L2 (coupling b between (x, y) and (x, y+1)).
Site index x*L2 + y.  Each site owns two bonds: 2*s (direction 1) and
2*s + 1 (direction 2).

Triangular lattice, N columns of M sites: site (i, j) with i the position in
column j, index j*M + i.  Each site owns three bonds:

    3*s     V  (i, j)-(i+1, j)      coupling J1 (vertical)
    3*s + 1 U  (i, j)-(i, j+1)      coupling J
    3*s + 2 D  (i, j)-(i-1, j+1)    coupling J

so the physical height of (i, j) is i + j/2.  Two ways of closing the
columns:

  "triangular-fig2"  rhombic torus: column N is column 0 site by site.
  "triangular-fig1"  straight horizontal identification: the site above
                     (i, N-1) to the right sits at height i + N/2, so
                     (i, N) is identified with (i + N/2 mod M, 0).  N even.

The two coincide iff N/2 = 0 mod M, i.e. N is a multiple of 2M.

Each site sits on two faces: the up triangle (i,j),(i+1,j),(i,j+1) and
the down triangle (i,j),(i,j+1),(i-1,j+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("square", "triangular-fig1", "triangular-fig2")


@dataclass
class SpinLattice:
    kind: str
    L1: int  # square: extent in direction 1; triangular: N (columns)
    L2: int  # square: extent in direction 2; triangular: M (column height)
    couplings: dict
    bonds: np.ndarray = field(repr=False, default=None)  # (nb, 2) site pairs
    J: np.ndarray = field(repr=False, default=None)  # coupling per bond
    mask: np.ndarray = field(repr=False, default=None)  # twisted bonds

    @property
    def n_sites(self) -> int:
        return self.L1 * self.L2

    def twisted(self, mask) -> "SpinLattice":
        return SpinLattice(self.kind, self.L1, self.L2, dict(self.couplings), self.bonds,
                           self.J, np.asarray(mask, dtype=bool).copy())

    def signed_couplings(self) -> np.ndarray:
        return np.where(self.mask, -self.J, self.J)


def square(L1: int, L2: int, a: float, b: float) -> SpinLattice:
    if L1 < 1 or L2 < 1:
        raise ValueError("sizes must be positive")
    bonds = []
    J = []
    for x in range(L1):
        for y in range(L2):
            s = x * L2 + y
            bonds.append((s, ((x + 1) % L1) * L2 + y))
            J.append(a)
            bonds.append((s, x * L2 + (y + 1) % L2))
            J.append(b)
    lat = SpinLattice("square", L1, L2, {"a": a, "b": b}, np.array(bonds, dtype=np.int64),
                      np.array(J, dtype=float))
    lat.mask = np.zeros(len(J), dtype=bool)
    return lat


def triangular(N: int, M: int, J1: float, J: float, kind="triangular-fig1") -> SpinLattice:
    """Triangular lattice with couplings J1 (vertical) and J (the other two)."""
    if kind not in ("triangular-fig1", "triangular-fig2"):
        raise ValueError(kind)
    if N < 1 or M < 1:
        raise ValueError("sizes must be positive")
    if kind == "triangular-fig1" and N % 2:
        raise ValueError("straight horizontal identification needs N even")
    shift = (N // 2) % M if kind == "triangular-fig1" else 0

    def site(i, j):
        if j == N:  # wrap in the horizontal direction
            return 0 * M + (i + shift) % M
        return j * M + i % M

    bonds = []
    Js = []
    for j in range(N):
        for i in range(M):
            s = site(i, j)
            bonds += [(s, site(i + 1, j)), (s, site(i, j + 1)), (s, site(i - 1, j + 1))]
            Js += [J1, J, J]
    lat = SpinLattice(kind, N, M, {"J1": J1, "J": J}, np.array(bonds, dtype=np.int64),
                      np.array(Js, dtype=float))
    lat.mask = np.zeros(len(Js), dtype=bool)
    return lat


def triangular_from_t(N, M, t1, t, kind="triangular-fig1"):
    return triangular(N, M, float(np.arctanh(t1)), float(np.arctanh(t)), kind)


def make_lattice(kind: str, L1: int, L2: int, **c) -> SpinLattice:
    if kind == "square":
        return square(L1, L2, c["a"], c["b"])
    if "t1" in c:
        return triangular_from_t(L1, L2, c["t1"], c["t"], kind)
    return triangular(L1, L2, c["J1"], c["J"], kind)


# ----------------------------------------------------------------------
# walls


def wall_bonds(lat: SpinLattice, column: int = None) -> np.ndarray:
    """Bonds crossing the vertical cut between column c and c+1 (default the
    last column, i.e. the horizontal antiperiodic boundary)."""
    c = lat.L1 - 1 if column is None else column % lat.L1
    mask = np.zeros(len(lat.J), dtype=bool)
    if lat.kind == "square":
        for y in range(lat.L2):
            mask[2 * (c * lat.L2 + y)] = True
    else:
        for i in range(lat.L2):
            s = c * lat.L2 + i
            mask[3 * s + 1] = True
            mask[3 * s + 2] = True
    return mask


def with_walls(lat: SpinLattice, columns) -> SpinLattice:
    m = np.zeros(len(lat.J), dtype=bool)
    for c in columns:
        m ^= wall_bonds(lat, c)
    return lat.twisted(m)


def standard_twist(lat: SpinLattice) -> SpinLattice:
    return lat.twisted(wall_bonds(lat))


def deform(lat: SpinLattice, sites) -> SpinLattice:
    """Flip the twist on every bond with exactly one end in `sites`.

    Equivalent to the change of variables sigma -> -sigma on those sites, so
    the twisted partition function is unchanged.
    """
    inside = np.zeros(lat.n_sites, dtype=bool)
    inside[list(sites)] = True
    b = lat.bonds
    cross = inside[b[:, 0]] ^ inside[b[:, 1]]
    return lat.twisted(lat.mask ^ cross)


def faces(lat: SpinLattice) -> list[tuple]:
    """Elementary faces as tuples of bond indices."""
    out = []
    if lat.kind == "square":
        L1, L2 = lat.L1, lat.L2
        for x in range(L1):
            for y in range(L2):
                s = x * L2 + y
                right = ((x + 1) % L1) * L2 + y
                up = x * L2 + (y + 1) % L2
                out.append((2 * s, 2 * right + 1, 2 * up, 2 * s + 1))
        return out
    N, M = lat.L1, lat.L2
    for j in range(N):
        for i in range(M):
            s = j * M + i
            up = j * M + (i + 1) % M
            # upward triangle (i,j),(i+1,j),(i,j+1): V(s), U(s), D(up)
            out.append((3 * s, 3 * s + 1, 3 * up + 2))
            # downward triangle (i,j),(i,j+1),(i-1,j+1): U(s), D(s), V of (i-1, j+1)
            nxt = lat.bonds[3 * s + 2, 1]  # site (i-1, j+1) after wrapping
            out.append((3 * s + 1, 3 * s + 2, 3 * nxt))
    return out


def parity_audit(lat: SpinLattice) -> bool:
    """True when every elementary face has an even number of twisted bonds,
    i.e. the twisted bonds form closed loops on the dual lattice."""
    m = lat.mask
    return all(int(np.sum(m[list(f)])) % 2 == 0 for f in faces(lat))


def twist_class(lat: SpinLattice) -> int:
    """Parity of twisted bonds met along row 0 in direction 1 (homology of the
    wall in the direction it must wrap)."""
    m = lat.mask
    if lat.kind == "square":
        idx = [2 * (x * lat.L2) for x in range(lat.L1)]
    else:
        # N steps along U bonds from (0, 0) land on (h, 0) with h = N/2 mod M
        # for fig1 (h = 0 for fig2); close the loop upward along column 0
        idx = []
        s = 0
        for _ in range(lat.L1):
            idx.append(3 * s + 1)
            s = int(lat.bonds[3 * s + 1, 1])
        if s != 0:
            idx += [3 * i for i in range(s, lat.L2)]
    return int(np.sum(m[idx])) % 2


def pair_sites(lat: SpinLattice, n: int) -> tuple[int, int]:
    """Site pair at separation n along direction 1 on the same horizontal level.

    Square: (0,0) and (n,0).  Triangular: (0,0) and (-n/2 mod M, n), n even.
    For the rhombic torus, n = N does not return to the start unless N is a
    multiple of 2M; the pair is still well defined for n < N.
    """
    if lat.kind == "square":
        return 0, (n % lat.L1) * lat.L2
    if n % 2:
        raise ValueError("same-level pairs on the triangular lattice need even n")
    N, M = lat.L1, lat.L2
    i = (-(n // 2)) % M
    j = n
    if j >= N:
        if lat.kind == "triangular-fig1":
            i = (i + N // 2) % M
        j -= N
    return 0, j * M + i


def dump(lat: SpinLattice) -> str:
    """Plain-text bond list for manual audit."""
    lines = [f"# {lat.kind} {lat.L1}x{lat.L2} {lat.couplings}"]
    for k, ((p, q), J, m) in enumerate(zip(lat.bonds, lat.J, lat.mask)):
        lines.append(f"{k}\t{p}\t{q}\t{J:+.6g}\t{'T' if m else '.'}")
    return "\n".join(lines)
