"""Weight-two symbol spaces for Gamma_1(M), M = N * p^r.

A symbol class is a pair (c, d) in (Z/M)^2 with gcd(c, d, M) = 1, taken up to
global sign. The space it spans, modulo the two-term and three-term
relations, is presented as a free Z-module with an explicit projection and
section; boundary, cusp classification and the intersection pairing on the
cuspidal part are all computed exactly.

Structural counts (coset numbers, cusp numbers, genus) are also available in
closed form, computed from the level alone; the builders assert against them
so the combinatorial enumeration and the closed-form route check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .exactlin import IntMatrix, Lattice, kernel_int, quotient_presentation


class UnsupportedLevelError(ValueError):
    """Level M = N * p^r <= 4: the sign-quotient space is not defined here."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _euler_phi(n: int) -> int:
    out = n
    d = 2
    m = n
    while d * d <= m:
        if m % d == 0:
            out -= out // d
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out -= out // m
    return out


def sl2_index(m: int) -> int:
    """Index of the level-M congruence subgroup in SL2(Z): M^2 prod (1 - 1/q^2)."""
    assert m >= 1
    idx = m * m
    mm = m
    d = 2
    while d * d <= mm:
        if mm % d == 0:
            idx = idx // (d * d) * (d * d - 1)
            while mm % d == 0:
                mm //= d
        d += 1
    if mm > 1:
        idx = idx // (mm * mm) * (mm * mm - 1)
    return idx


def num_cusps(m: int) -> int:
    """Number of cusps of the level-M curve."""
    assert m >= 1
    if m <= 4:
        return {1: 1, 2: 2, 3: 2, 4: 3}[m]
    total = 0
    for d in range(1, m + 1):
        if m % d == 0:
            total += _euler_phi(d) * _euler_phi(m // d)
    assert total % 2 == 0
    return total // 2


def genus(m: int) -> int:
    """Genus of the level-M curve (no elliptic points once M > 4)."""
    assert m >= 1
    if m <= 4:
        return 0
    mu = sl2_index(m) // 2
    num = 12 + mu - 6 * num_cusps(m)
    assert num % 12 == 0, f"genus formula not integral at M={m}"
    return num // 12


def quotient_rank(m: int) -> int:
    """Rank of the relative homology presentation: 2g + (cusps) - 1."""
    return 2 * genus(m) + num_cusps(m) - 1


@dataclass(frozen=True)
class LevelParams:
    """Level data: tame level N, prime p, wild exponent r; M = N * p^r."""

    n: int
    p: int
    r: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("tame level must be >= 1")
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.r < 0:
            raise ValueError("exponent must be >= 0")
        if gcd(self.n, self.p) != 1:
            raise ValueError("tame level must be prime to p")
        if self.level <= 4:
            raise UnsupportedLevelError(f"level {self.level} <= 4 is not supported")

    @property
    def level(self) -> int:
        return self.n * self.p**self.r


def _normalize_cusp(a: int, c: int) -> tuple[int, int]:
    g = gcd(a, c)
    if g:
        a //= g
        c //= g
    if c < 0 or (c == 0 and a < 0):
        a, c = -a, -c
    if c == 0:
        a = 1
    return a, c


def cusp_equivalent(m: int, u: tuple[int, int], v: tuple[int, int]) -> bool:
    """Whether two cusps (gcd-1 fractions a/c) agree at level M."""
    a1, c1 = u
    a2, c2 = v
    g = gcd(c1, m)
    for s in (1, -1):
        if (c2 - s * c1) % m == 0 and (a2 - s * a1) % g == 0:
            return True
    return False


@dataclass(frozen=True)
class CuspSpace:
    """The cusp classes of the level-M curve, with chosen representatives."""

    level: int
    reps: tuple[tuple[int, int], ...]

    @property
    def count(self) -> int:
        return len(self.reps)

    def index_of(self, a: int, c: int) -> int:
        cusp = _normalize_cusp(a, c)
        for i, rep in enumerate(self.reps):
            if cusp_equivalent(self.level, rep, cusp):
                return i
        raise ValueError(f"cusp {cusp} not classified at level {self.level}")


def _lift_coprime(c: int, d: int, m: int) -> tuple[int, int]:
    """Integer lift of (c, d) mod m with gcd(c0, d0) = 1."""
    c0 = c % m
    d0 = d % m
    if c0 == 0:
        c0 = m
    k = 0
    while gcd(c0, d0 + k * m) != 1:
        k += 1
    return c0, d0 + k * m


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _sl2_lift(c0: int, d0: int) -> tuple[int, int, int, int]:
    """Complete a coprime bottom row to [[a, b], [c0, d0]] of determinant 1."""
    g, s, t = _xgcd(d0, c0)
    assert g == 1
    a, b = s, -t
    assert a * d0 - b * c0 == 1
    return a, b, c0, d0


class SymbolSpace:
    """Level-M symbol space: classes, relations, quotient, boundary, fans.

    Instances are immutable in practice: every field is assigned once by
    build_space and never mutated, so sharing across threads is safe.
    """

    def __init__(
        self,
        params: LevelParams,
        classes: tuple[tuple[int, int], ...],
        proj: IntMatrix,
        sect: IntMatrix,
        s_perm: tuple[int, ...],
        u_perm: tuple[int, ...],
        t_perm: tuple[int, ...],
        cusps: CuspSpace,
        boundary_raw: IntMatrix,
        t_orbits: tuple[tuple[int, ...], ...],
    ):
        self.params = params
        self.level = params.level
        self.classes = classes
        self.class_index = {cd: i for i, cd in enumerate(classes)}
        self.proj = proj
        self.sect = sect
        self.rank = proj.rows
        self.n_classes = len(classes)
        self.s_perm = s_perm
        self.u_perm = u_perm
        self.t_perm = t_perm
        self.cusps = cusps
        self.boundary_raw = boundary_raw
        self.t_orbits = t_orbits
        self.genus = genus(params.level)

    def canon(self, c: int, d: int) -> tuple[int, int]:
        m = self.level
        c %= m
        d %= m
        return min((c, d), ((-c) % m, (-d) % m))

    def index(self, c: int, d: int) -> int:
        return self.class_index[self.canon(c, d)]

    def action_matrix(self, mats: list[tuple[int, int, int, int]]) -> IntMatrix:
        """Sum of right actions of integer 2x2 matrices on raw classes.

        Images whose bottom row fails gcd(c, d, M) = 1 are omitted; this
        only happens when a matrix determinant shares a factor with M.
        Columns index source classes, acting on column vectors.
        """
        m = self.level
        n = self.n_classes
        cols = [[0] * n for _ in range(n)]
        for j, (c, d) in enumerate(self.classes):
            col = cols[j]
            for a, b, c2, d2 in mats:
                ci = (c * a + d * c2) % m
                di = (c * b + d * d2) % m
                if gcd(gcd(ci, di), m) != 1:
                    continue
                col[self.class_index[min((ci, di), ((-ci) % m, (-di) % m))]] += 1
        return IntMatrix.from_rows([[cols[j][i] for j in range(n)] for i in range(n)])

    def push_to_quotient(self, raw_op: IntMatrix) -> IntMatrix:
        return self.proj @ raw_op @ self.sect

    def raw_chain_of(self, z: list[int]) -> list[int]:
        """Raw-coordinate lift of a quotient vector via the section."""
        return self.sect.apply(z)


def build_space(params: LevelParams) -> SymbolSpace:
    """Enumerate symbol classes at level M and present the relation quotient.

    Asserts the closed-form structural counts along the way: class count,
    torsion-freeness of the quotient, its rank, the cusp count, and the
    bijection between T-fans and cusps.
    """
    m = params.level

    classes = []
    seen = set()
    for c in range(m):
        for d in range(m):
            if gcd(gcd(c, d), m) != 1:
                continue
            cd = min((c, d), ((-c) % m, (-d) % m))
            if cd not in seen:
                seen.add(cd)
                classes.append(cd)
    classes = tuple(sorted(classes))
    n = len(classes)
    assert n == sl2_index(m) // 2, f"class count {n} != index/2 at level {m}"

    idx = {cd: i for i, cd in enumerate(classes)}

    def canon(c, d):
        c %= m
        d %= m
        return min((c, d), ((-c) % m, (-d) % m))

    s_perm = tuple(idx[canon(d, -c)] for (c, d) in classes)
    u_perm = tuple(idx[canon(d, -c - d)] for (c, d) in classes)
    t_perm = tuple(idx[canon(c, c + d)] for (c, d) in classes)

    for i in range(n):
        assert s_perm[s_perm[i]] == i
        assert s_perm[i] != i, "two-torsion class found; level should forbid it"
        assert u_perm[u_perm[u_perm[i]]] == i
        assert u_perm[i] != i, "three-torsion class found; level should forbid it"

    rel_rows = []
    done = [False] * n
    for i in range(n):
        if done[i]:
            continue
        j = s_perm[i]
        done[i] = done[j] = True
        row = [0] * n
        row[i] += 1
        row[j] += 1
        rel_rows.append(row)
    done = [False] * n
    for i in range(n):
        if done[i]:
            continue
        j = u_perm[i]
        k = u_perm[j]
        done[i] = done[j] = done[k] = True
        row = [0] * n
        row[i] += 1
        row[j] += 1
        row[k] += 1
        rel_rows.append(row)

    proj, sect, torsion = quotient_presentation(IntMatrix.from_rows(rel_rows), n)
    assert torsion == [], f"torsion {torsion} in the relation quotient at level {m}"
    assert proj.rows == quotient_rank(m), (
        f"quotient rank {proj.rows} != 2g + cusps - 1 at level {m}"
    )

    # cusp classification from the symbol lifts
    lifts = [_sl2_lift(*_lift_coprime(c, d, m)) for (c, d) in classes]
    reps: list[tuple[int, int]] = []

    def classify(a, c):
        cusp = _normalize_cusp(a, c)
        for t, rep in enumerate(reps):
            if cusp_equivalent(m, rep, cusp):
                return t
        reps.append(cusp)
        return len(reps) - 1

    pairs = []
    for a, b, c0, d0 in lifts:
        pairs.append((classify(a, c0), classify(b, d0)))
    cusps = CuspSpace(m, tuple(reps))
    assert cusps.count == num_cusps(m), (
        f"found {cusps.count} cusps, formula says {num_cusps(m)} at level {m}"
    )

    brows = [[0] * n for _ in range(cusps.count)]
    for j, (plus, minus) in enumerate(pairs):
        brows[plus][j] += 1
        brows[minus][j] -= 1
    boundary_raw = IntMatrix.from_rows(brows)

    # T-fans: cyclic end orderings around each cusp
    orbit_of = [-1] * n
    orbits = []
    for i in range(n):
        if orbit_of[i] >= 0:
            continue
        orbit = [i]
        orbit_of[i] = len(orbits)
        j = t_perm[i]
        while j != i:
            orbit_of[j] = len(orbits)
            orbit.append(j)
            j = t_perm[j]
        orbits.append(tuple(orbit))
    assert len(orbits) == cusps.count, "fan count != cusp count"
    fan_cusps = set()
    for orbit in orbits:
        ends = {pairs[x][0] for x in orbit}
        assert len(ends) == 1, "fan touches more than one cusp"
        fan_cusps.add(ends.pop())
    assert len(fan_cusps) == cusps.count, "fans do not cover every cusp"

    return SymbolSpace(
        params,
        classes,
        proj,
        sect,
        s_perm,
        u_perm,
        t_perm,
        cusps,
        boundary_raw,
        tuple(orbits),
    )


def boundary_map(space: SymbolSpace) -> IntMatrix:
    """Boundary from the quotient to the free module on cusp classes."""
    return space.boundary_raw @ space.sect


def cuspidal_lattice(space: SymbolSpace) -> Lattice:
    """Saturated kernel of the boundary; rank must be 2 * genus."""
    lat = kernel_int(boundary_map(space))
    assert lat.rank == 2 * space.genus, (
        f"cuspidal rank {lat.rank} != 2g = {2 * space.genus}"
    )
    return lat


def _pair_functional(space: SymbolSpace, a_raw: list[int]) -> list[int]:
    """Linear functional L with L(b_raw) = (a . b) for closed chains b.

    a_raw must have zero boundary flow at every cusp. The chain is resolved
    into strands near each cusp. A strand is pushed to the left of its travel
    direction, so it enters on the clockwise side of its entry ray and exits
    on the counterclockwise side of its exit ray: its arc crosses every ray
    from the entry to the exit inclusive, in ccw order. Any other resolution
    differs by full loops around the cusp, which contribute zero because the
    crossed flows sum to zero.
    """
    n = space.n_classes
    coeff = [0] * n
    for orbit in space.t_orbits:
        h = len(orbit)
        net = [a_raw[x] - a_raw[space.s_perm[x]] for x in orbit]
        total = sum(net)
        assert total == 0, "chain is not closed at a cusp"
        if all(v == 0 for v in net):
            continue
        ins = []
        outs = []
        for pos, v in enumerate(net):
            if v > 0:
                ins.extend([pos] * v)
            elif v < 0:
                outs.extend([pos] * (-v))
        for i_pos, o_pos in zip(ins, outs):
            p = i_pos
            while True:
                coeff[orbit[p]] += 1
                if p == o_pos:
                    break
                p = (p + 1) % h
    # fold the end functional through the antisymmetrization
    return [coeff[x] - coeff[space.s_perm[x]] for x in range(n)]


def pair_raw_chains(space: SymbolSpace, a_raw: list[int], b_raw: list[int]) -> int:
    """Intersection number of two closed raw chains."""
    functional = _pair_functional(space, a_raw)
    return sum(f * b for f, b in zip(functional, b_raw))


def intersection_pairing(space: SymbolSpace, lattice: Lattice | None = None) -> IntMatrix:
    """Gram matrix of the intersection pairing on the cuspidal lattice basis."""
    if lattice is None:
        lattice = cuspidal_lattice(space)
    basis_cols = lattice.basis_matrix()
    rows = []
    for v in lattice.basis:
        functional = _pair_functional(space, space.raw_chain_of(list(v)))
        row = IntMatrix.from_rows([functional]) @ space.sect @ basis_cols
        rows.append(list(row.row(0)))
    return IntMatrix.from_rows(rows)


def _convergents(p: int, q: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents of p/q (gcd 1, q > 0), ending at p/q."""
    assert q > 0 and gcd(p, q) == 1
    cf = []
    a, b = p, q
    while b:
        cf.append(a // b)
        a, b = b, a - (a // b) * b
    conv = []
    ph, qh = 1, 0
    pl, ql = 0, 1
    for a_i in cf:
        ph, pl = a_i * ph + pl, ph
        qh, ql = a_i * qh + ql, qh
        conv.append((ph, qh))
    assert conv[-1] == (p, q)
    return conv


def path_to_symbols(space: SymbolSpace, alpha: tuple[int, int], beta: tuple[int, int]) -> dict[int, int]:
    """Raw chain carrying the geodesic path from cusp alpha to cusp beta.

    Cusps are (numerator, denominator) pairs, denominator 0 meaning the
    infinite cusp. The chain's boundary is [beta] - [alpha].
    """
    counts: dict[int, int] = {}

    def add_from_infinity(target: tuple[int, int], sign: int):
        num, den = _normalize_cusp(*target)
        if den == 0:
            return
        conv = _convergents(num, den)
        p_prev, q_prev = 1, 0
        for j, (pj, qj) in enumerate(conv):
            # consecutive convergents are a determinant-(-1)^(j-1) pair, so
            # ((-1)^(j-1) q_j, q_(j-1)) is the bottom row of an SL2 element
            assert pj * q_prev - p_prev * qj == (-1) ** (j + 1)
            c = (-qj if j % 2 == 0 else qj) % space.level
            d = q_prev % space.level
            i = space.index(c, d)
            counts[i] = counts.get(i, 0) + sign
            p_prev, q_prev = pj, qj
        # drop cancelled entries eagerly
        for key in [k for k, v in counts.items() if v == 0]:
            del counts[key]

    add_from_infinity(beta, +1)
    add_from_infinity(alpha, -1)
    return counts
