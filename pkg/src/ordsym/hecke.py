"""Hecke operators on symbol quotients: coset sums, diamonds, degeneracy
maps, the Fricke twist, and finite-precision algebra spans.

Operators act on quotient column vectors. All operator products are exact
integer matrix products; nothing here depends on a working precision except
HeckeAlgebra, which spans monomials mod p^k.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from weakref import WeakKeyDictionary

from .exactlin import (
    IntMatrix,
    Lattice,
    local_diag,
    restrict_to_lattice,
    solve_mod,
)
from .modsym import SymbolSpace, cuspidal_lattice, intersection_pairing, path_to_symbols


class HeckeError(RuntimeError):
    """Internal consistency failure while building an operator."""


@dataclass(frozen=True)
class OperatorMatrix:
    """Quotient-coordinate operator with its level and a display label."""

    matrix: IntMatrix
    level: int
    label: str

    def apply(self, vec: list[int]) -> list[int]:
        return self.matrix.apply(vec)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.level != other.level:
            raise HeckeError("operators live at different levels")
        return OperatorMatrix(self.matrix @ other.matrix, self.level, f"{self.label}*{other.label}")

    def same_matrix(self, other: "OperatorMatrix") -> bool:
        return self.level == other.level and self.matrix == other.matrix


def merel_matrices(n: int) -> list[tuple[int, int, int, int]]:
    """Degree-n coset representatives (a, b; c, d): a > b >= 0, d > c >= 0,
    ad - bc = n."""
    assert n >= 1
    out = []
    for a in range(1, n + 1):
        for d in range(-(-n // a), n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    out.append((a, b, 0, d))
                for c in range(1, d):
                    out.append((a, 0, c, d))
            else:
                for b in range(1, a):
                    if bc % b == 0 and bc // b < d:
                        out.append((a, b, bc // b, d))
    return out


_op_cache: "WeakKeyDictionary[SymbolSpace, dict]" = WeakKeyDictionary()


def _cache(space: SymbolSpace) -> dict:
    store = _op_cache.get(space)
    if store is None:
        store = {}
        _op_cache[space] = store
    return store


def _diamond_full(space: SymbolSpace, b: int) -> OperatorMatrix:
    """Diamond for a unit b mod the full level M.

    It is induced by left translation by any lift with lower-right entry
    congruent to b (such lifts normalize the level group), and left
    translation scales the bottom row: (c, d) goes to (bc, bd).
    """
    m = space.level
    b %= m
    if gcd(b, m) != 1:
        raise ValueError(f"{b} is not a unit mod {m}")
    key = ("diamond_full", b)
    store = _cache(space)
    if key not in store:
        n = space.n_classes
        rows = [[0] * n for _ in range(n)]
        for j, (c, d) in enumerate(space.classes):
            rows[space.index(b * c, b * d)][j] += 1
        raw = IntMatrix.from_rows(rows)
        store[key] = OperatorMatrix(space.push_to_quotient(raw), m, f"<{b}>")
    return store[key]


def diamond(space: SymbolSpace, a: int) -> OperatorMatrix:
    """Diamond for a unit a of the wild part: acts by the unit congruent to a
    mod p^r and to 1 mod N."""
    params = space.params
    pr = params.p**params.r
    if gcd(a, params.p) != 1:
        raise ValueError(f"{a} is not a unit at {params.p}")
    if params.n == 1 or params.r == 0:
        b = a % space.level if params.r else 1
    else:
        inv_n = pow(params.n, -1, pr)
        inv_pr = pow(pr, -1, params.n)
        b = (a * params.n * inv_n + pr * inv_pr) % space.level
    assert b % pr == a % pr or params.r == 0
    assert params.n == 1 or b % params.n == 1
    return _diamond_full(space, b)


def _merel_op(space: SymbolSpace, n: int) -> OperatorMatrix:
    raw = space.action_matrix(merel_matrices(n))
    return OperatorMatrix(space.push_to_quotient(raw), space.level, f"T({n})")


def _prime_power_T(space: SymbolSpace, l: int, e: int) -> OperatorMatrix:
    store = _cache(space)
    key = ("T", l, e)
    if key in store:
        return store[key]
    if e == 0:
        op = OperatorMatrix(IntMatrix.identity(space.rank), space.level, "T(1)")
    elif e == 1:
        op = _merel_op(space, l)
    elif space.level % l == 0:
        op = _prime_power_T(space, l, e - 1) @ _prime_power_T(space, l, 1)
    else:
        # T(l^(e)) = T(l^(e-1)) T(l) - l <l> T(l^(e-2))
        t_prev = _prime_power_T(space, l, e - 1)
        t_prev2 = _prime_power_T(space, l, e - 2)
        dia = _diamond_full(space, l)
        mat = t_prev.matrix @ _prime_power_T(space, l, 1).matrix - (dia.matrix @ t_prev2.matrix).scale(l)
        op = OperatorMatrix(mat, space.level, f"T({l}^{e})")
    store[key] = OperatorMatrix(op.matrix, op.level, f"T({l**e})")
    return store[key]


def hecke_T(space: SymbolSpace, n: int) -> OperatorMatrix:
    """The n-th Hecke operator on the quotient.

    Built from primes by the multiplicative recursions; when a prime divides
    the level, its operator is the coset sum omitting non-invertible images,
    which is the up-operator convention for T(p) at wild levels.
    """
    if n < 1:
        raise ValueError("operator index must be >= 1")
    store = _cache(space)
    key = ("T", n)
    if key in store:
        return store[key]
    mat = IntMatrix.identity(space.rank)
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            mat = mat @ _prime_power_T(space, d, e).matrix
        d += 1
    if m > 1:
        mat = mat @ _prime_power_T(space, m, 1).matrix
    op = OperatorMatrix(mat, space.level, f"T({n})")
    store[key] = op
    return store[key]


def trace_map(fine: SymbolSpace, coarse: SymbolSpace) -> IntMatrix:
    """Level-lowering trace on quotients: reduce symbol entries mod the
    coarser level. Returns a (coarse rank) x (fine rank) matrix."""
    if fine.level % coarse.level or fine.level == coarse.level:
        raise ValueError("levels are not a proper divisor pair")
    mc = coarse.level
    rows = [[0] * fine.n_classes for _ in range(coarse.n_classes)]
    for j, (c, d) in enumerate(fine.classes):
        rows[coarse.index(c % mc, d % mc)][j] += 1
    raw = IntMatrix.from_rows(rows)
    return coarse.proj @ raw @ fine.sect


def pullback_map(coarse: SymbolSpace, fine: SymbolSpace) -> IntMatrix:
    """Level-raising pullback: sum of all class lifts that stay primitive.
    Returns a (fine rank) x (coarse rank) matrix."""
    if fine.level % coarse.level or fine.level == coarse.level:
        raise ValueError("levels are not a proper divisor pair")
    mc, mf = coarse.level, fine.level
    step = mf // mc
    rows = [[0] * coarse.n_classes for _ in range(fine.n_classes)]
    for j, (c, d) in enumerate(coarse.classes):
        for a in range(step):
            for b in range(step):
                ci = c + a * mc
                di = d + b * mc
                if gcd(gcd(ci, di), mf) != 1:
                    continue
                rows[fine.index(ci, di)][j] += 1
    raw = IntMatrix.from_rows(rows)
    return fine.proj @ raw @ coarse.sect


def atkin_lehner(space: SymbolSpace) -> OperatorMatrix:
    """The full Fricke involution: paths are mapped by z -> -1/(Mz).

    Built columnwise through continued-fraction path chains; the square is
    checked to be the identity.
    """
    store = _cache(space)
    if "fricke" not in store:
        m = space.level
        n = space.n_classes
        cols = []
        for c, d in space.classes:
            c0, d0 = _lift(c, d, m)
            a, b = _complete(c0, d0)
            chain = path_to_symbols(space, (-d0, m * b), (-c0, m * a))
            col = [0] * n
            for i, cnt in chain.items():
                col[i] = cnt
            cols.append(col)
        raw = IntMatrix.from_rows([[cols[j][i] for j in range(n)] for i in range(n)])
        mat = space.push_to_quotient(raw)
        if mat @ mat != IntMatrix.identity(space.rank):
            raise HeckeError("Fricke operator does not square to the identity")
        store["fricke"] = OperatorMatrix(mat, m, "W")
    return store["fricke"]


def _lift(c: int, d: int, m: int) -> tuple[int, int]:
    c0 = c % m
    d0 = d % m
    if c0 == 0:
        c0 = m
    k = 0
    while gcd(c0, d0 + k * m) != 1:
        k += 1
    return c0, d0 + k * m


def _complete(c0: int, d0: int) -> tuple[int, int]:
    # (a, b) with a d0 - b c0 = 1
    old_r, r = d0, c0
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    assert old_r == 1
    return old_s, -old_t


def twisted_pairing(space: SymbolSpace, lattice: Lattice | None = None) -> IntMatrix:
    """Gram matrix of (x, y) -> <x, W y> on the cuspidal lattice basis.

    The twist makes every T(n) and diamond self-adjoint; that property and
    unimodularity are verified here and a failure raises HeckeError.
    """
    if lattice is None:
        lattice = cuspidal_lattice(space)
    g = intersection_pairing(space, lattice)
    w = atkin_lehner(space)
    w_restricted = restrict_to_lattice(w.matrix, lattice)
    b = g @ w_restricted
    for op in (hecke_T(space, 2), hecke_T(space, 3), _diamond_full(space, _unit_generator(space.level))):
        t = restrict_to_lattice(op.matrix, lattice)
        if t.transpose() @ b != b @ t:
            raise HeckeError(f"{op.label} is not self-adjoint for the twisted pairing")
    vals = local_diag(b, space.params.p, 6)
    if any(vals):
        raise HeckeError("twisted pairing is not perfect at p")
    return b


def _unit_generator(m: int) -> int:
    for b in range(2, m):
        if gcd(b, m) == 1:
            return b
    return 1


def restrict_operator(op: OperatorMatrix, lattice: Lattice) -> IntMatrix:
    """Exact matrix of op on an op-stable sublattice basis."""
    return restrict_to_lattice(op.matrix, lattice)


class HeckeAlgebra:
    """Finite-precision span of monomials in a set of commuting operators.

    Elements are d x d matrices mod p^k, flattened to length d*d vectors.
    The span is closed under multiplication by the generators; its basis is
    extracted from a local normal form, so the module structure (rank and
    elementary divisors) is explicit.
    """

    def __init__(self, gens: list[IntMatrix], p: int, k: int):
        assert gens, "need at least one generator"
        d = gens[0].rows
        assert all(g.rows == d and g.cols == d for g in gens)
        self.p = p
        self.k = k
        self.dim = d
        q = p**k
        self.q = q

        basis_rows: list[list[int]] = []
        frontier = [IntMatrix.identity(d)]
        elements = [IntMatrix.identity(d)]
        rank = -1
        while True:
            for el in frontier:
                basis_rows.append([x % q for x in el.entries])
            new_rank = self._row_rank(basis_rows)
            if new_rank == rank:
                break
            rank = new_rank
            new_frontier = []
            for el in frontier:
                for gmat in gens:
                    cand = el.mul_mod(gmat, q)
                    if not any(cand == e for e in elements):
                        elements.append(cand)
                        new_frontier.append(cand)
            if not new_frontier:
                break
            frontier = new_frontier
        self._set_basis(basis_rows)

    def _row_rank(self, rows: list[list[int]]) -> int:
        from . import _kernels

        vals, _, _, _, _ = _kernels.local_snf(rows, self.p, self.k)
        return sum(1 for v in vals if v < self.k)

    def _set_basis(self, rows: list[list[int]]) -> None:
        from . import _kernels

        vals, _, _, _, vinv = _kernels.local_snf(rows, self.p, self.k, want_vinv=True)
        q = self.q
        basis = []
        divisors = []
        for i, v in enumerate(vals):
            if v >= self.k:
                continue
            basis.append([(self.p**v * x) % q for x in vinv[i]])
            divisors.append(v)
        self.basis = IntMatrix.from_rows(basis) if basis else IntMatrix.zeros(0, self.dim**2)
        self.divisors = divisors

    @property
    def rank(self) -> int:
        return self.basis.rows

    def contains(self, mat: IntMatrix) -> bool:
        return self.coords_of(mat) is not None

    def coords_of(self, mat: IntMatrix) -> list[int] | None:
        """Coordinates in the span basis mod p^k, or None if outside."""
        sol = self.coords_matrix([mat])
        if sol is None:
            return None
        return [sol.get(i, 0) for i in range(self.rank)]

    def coords_matrix(self, mats: list[IntMatrix]) -> IntMatrix | None:
        """Coordinate columns of several elements, sharing one normal form.

        Column j holds the coordinates of mats[j]; None if any element lies
        outside the span.
        """
        if not mats:
            return IntMatrix.zeros(self.rank, 0)
        flat = IntMatrix.from_rows(
            [[m.entries[i] % self.q for m in mats] for i in range(self.dim**2)]
        )
        return solve_mod(self.basis.transpose(), flat, self.p, self.k)
