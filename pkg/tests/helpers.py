"""Shared test utilities: independent reference implementations.

Everything here is deliberately naive (fraction-free expansions, dense
elimination) so it exercises none of the code paths under test.
"""

from __future__ import annotations

import random
from fractions import Fraction

from ordsym.exactlin import IntMatrix, Lattice


def bareiss_det(m: IntMatrix) -> int:
    """Integer determinant by fraction-free Gaussian elimination."""
    assert m.rows == m.cols
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for t in range(n - 1):
        if a[t][t] == 0:
            piv = next((i for i in range(t + 1, n) if a[i][t]), None)
            if piv is None:
                return 0
            a[t], a[piv] = a[piv], a[t]
            sign = -sign
        for i in range(t + 1, n):
            for j in range(t + 1, n):
                a[i][j] = (a[i][j] * a[t][t] - a[i][t] * a[t][j]) // prev
            a[i][t] = 0
        prev = a[t][t]
    return sign * a[n - 1][n - 1]


def solve_int(a: IntMatrix, b: list[int]) -> list[int] | None:
    """One integer solution x of a x = b, or None; rational elimination."""
    rows = [[Fraction(x) for x in a.row(i)] + [Fraction(b[i])] for i in range(a.rows)]
    ncols = a.cols
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for idx, c in enumerate(pivots):
        x[c] = rows[idx][ncols]
    if any(v.denominator != 1 for v in x):
        return None
    return [int(v) for v in x]


def in_lattice(lat: Lattice, vec: list[int]) -> bool:
    """Whether vec is an integer combination of the lattice basis."""
    if lat.rank == 0:
        return all(v == 0 for v in vec)
    return solve_int(lat.basis_matrix(), vec) is not None


def random_matrix(rng: random.Random, m: int, n: int, bound: int = 9) -> IntMatrix:
    return IntMatrix.from_rows(
        [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(m)]
    )


def random_unimodular(rng: random.Random, n: int, steps: int | None = None) -> tuple[IntMatrix, IntMatrix]:
    """(W, W^-1), both integral, as a product of elementary operations."""
    w = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    winv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(steps if steps is not None else 3 * n):
        kind = rng.randrange(3)
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if kind == 0 and i != j:
            c = rng.choice([-2, -1, 1, 2])
            # W -> E W with E = I + c e_ij  =>  Winv -> Winv E^-1
            for t in range(n):
                w[i][t] += c * w[j][t]
            for t in range(n):
                winv[t][j] -= c * winv[t][i]
        elif kind == 1 and i != j:
            for t in range(n):
                w[i][t], w[j][t] = w[j][t], w[i][t]
            for t in range(n):
                winv[t][i], winv[t][j] = winv[t][j], winv[t][i]
        else:
            for t in range(n):
                w[i][t] = -w[i][t]
            for t in range(n):
                winv[t][i] = -winv[t][i]
    return IntMatrix.from_rows(w), IntMatrix.from_rows(winv)


def random_isotropic_instance(
    rng: random.Random, n: int, p: int, true_case: bool
) -> tuple[IntMatrix, Lattice]:
    """Pairing G and rank-n sublattice of Z^(2n) for the summand equivalence.

    G = W^T G0 W with G0 the standard hyperbolic form and W unimodular, so G
    is perfect over Z. The transported standard isotropic N = W^-1 span(e_1..
    e_n) is a direct summand; scaling one basis vector by p (false case)
    keeps it isotropic but destroys all four summand conditions at once.
    """
    g0 = IntMatrix.from_rows(
        [[1 if abs(i - j) == n else 0 for j in range(2 * n)] for i in range(2 * n)]
    )
    w, winv = random_unimodular(rng, 2 * n)
    g = w.transpose() @ g0 @ w
    basis = [list(winv.col(j)) for j in range(n)]
    if not true_case:
        idx = rng.randrange(n)
        basis[idx] = [p * x for x in basis[idx]]
    return g, Lattice(2 * n, tuple(tuple(v) for v in basis))
