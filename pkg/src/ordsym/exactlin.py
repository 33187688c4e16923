"""Exact linear algebra over Z and Z/p^k.

Carriers (IntMatrix, PadicScalar, Lattice) are immutable; operations are pure
functions. Entries are arbitrary-precision integers and nothing is ever
rounded: mod-p^k arithmetic is exact arithmetic in Z/p^k, with the working
precision k carried explicitly by every operation that needs one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _kernels


class LatticeError(ValueError):
    """Malformed lattice input (dependent basis, ambient mismatch)."""


class PairingNotPerfectError(ValueError):
    """Pairing matrix is not unimodular over Z_p at the working precision."""


class RankMismatchError(ValueError):
    """Ranks violate the rank-2n ambient / rank-n sublattice hypothesis."""


class NotIsotropicError(ValueError):
    """Sublattice fails x^T G y = 0."""


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix, row-major entries.

    JSON layout (used by every cache file): ``{"rows": r, "cols": c,
    "entries": [...]}`` with entries as row-major decimal strings.
    """

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")

    @staticmethod
    def from_rows(rows: Iterable[Iterable[int]]) -> "IntMatrix":
        data = [list(r) for r in rows]
        m = len(data)
        n = len(data[0]) if m else 0
        if any(len(r) != n for r in data):
            raise ValueError("ragged rows")
        return IntMatrix(m, n, tuple(x for r in data for x in r))

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @staticmethod
    def zeros(m: int, n: int) -> "IntMatrix":
        return IntMatrix(m, n, (0,) * (m * n))

    def get(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int) -> tuple[int, ...]:
        return self.entries[j :: self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            self.cols,
            self.rows,
            tuple(self.get(i, j) for j in range(self.cols) for i in range(self.rows)),
        )

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        if self.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_rows(_kernels.matmul_int(self.to_rows(), other.to_rows()))

    def mul_mod(self, other: "IntMatrix", q: int) -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        if self.cols == 0:
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_rows(_kernels.matmul_mod(self.to_rows(), other.to_rows(), q))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch")
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch")
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def reduce_mod(self, q: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(a % q for a in self.entries))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.entries)

    def is_zero_mod(self, q: int) -> bool:
        return all(a % q == 0 for a in self.entries)

    def apply(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch")
        return [sum(self.get(i, j) * vec[j] for j in range(self.cols)) for i in range(self.rows)]

    def submatrix_cols(self, js: Sequence[int]) -> "IntMatrix":
        return IntMatrix.from_rows([[self.get(i, j) for j in js] for i in range(self.rows)])

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("dimension mismatch")
        return IntMatrix.from_rows(
            [list(self.row(i)) + list(other.row(i)) for i in range(self.rows)]
        )

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [str(x) for x in self.entries],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "IntMatrix":
        return IntMatrix(int(d["rows"]), int(d["cols"]), tuple(int(x) for x in d["entries"]))


@dataclass(frozen=True)
class PadicScalar:
    """Element of Z/p^k: residue in [0, p^k) at explicit precision k."""

    p: int
    k: int
    residue: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("precision must be >= 1")
        object.__setattr__(self, "residue", self.residue % self.p**self.k)

    @property
    def modulus(self) -> int:
        return self.p**self.k

    def _check(self, other: "PadicScalar") -> None:
        if (self.p, self.k) != (other.p, other.k):
            raise ValueError("mixed p-adic contexts")

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        return PadicScalar(self.p, self.k, self.residue + other.residue)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        return PadicScalar(self.p, self.k, self.residue - other.residue)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        return PadicScalar(self.p, self.k, self.residue * other.residue)

    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def inverse(self) -> "PadicScalar":
        if not self.is_unit():
            raise ZeroDivisionError("not a unit mod p")
        return PadicScalar(self.p, self.k, pow(self.residue, -1, self.modulus))

    def valuation(self) -> int | None:
        """p-adic valuation; None means the residue is 0, i.e. v >= k."""
        if self.residue == 0:
            return None
        v = 0
        x = self.residue
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def __str__(self) -> str:
        v = self.valuation()
        tag = f"v>={self.k}" if v is None else f"v={v}"
        return f"{self.residue} mod {self.p}^{self.k} ({tag})"


@dataclass(frozen=True)
class Lattice:
    """Sublattice of Z^ambient given by independent basis vectors (rows)."""

    ambient: int
    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for v in self.basis:
            if len(v) != self.ambient:
                raise LatticeError("basis vector has wrong length")
        if self.basis:
            diag, _, _, _ = _kernels.int_snf([list(v) for v in self.basis])
            if len(diag) != len(self.basis):
                raise LatticeError("basis vectors are dependent")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> IntMatrix:
        """Basis vectors as columns (ambient x rank)."""
        return IntMatrix.from_rows(
            [[self.basis[j][i] for j in range(self.rank)] for i in range(self.ambient)]
        )

    def to_json_dict(self) -> dict:
        return {
            "ambient": self.ambient,
            "basis": [[str(x) for x in v] for v in self.basis],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Lattice":
        return Lattice(
            int(d["ambient"]),
            tuple(tuple(int(x) for x in v) for v in d["basis"]),
        )


def snf(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: (U, D, V) with U*a*V = D.

    U and V are unimodular, D is diagonal and nonnegative with each invariant
    factor dividing the next, matching the divisibility chain contract.
    """
    diag, u, v, _ = _kernels.int_snf(a.to_rows(), want_u=True, want_v=True)
    d_entries = [[diag[i] if (i == j and i < len(diag)) else 0 for j in range(a.cols)] for i in range(a.rows)]
    return (
        IntMatrix.from_rows(u) if a.rows else IntMatrix.zeros(0, 0),
        IntMatrix.from_rows(d_entries) if a.rows else IntMatrix.zeros(0, a.cols),
        IntMatrix.from_rows(v) if a.cols else IntMatrix.zeros(a.cols, a.cols),
    )


def kernel_int(a: IntMatrix) -> Lattice:
    """Saturated kernel lattice {x : a*x = 0} in Z^cols."""
    if a.cols == 0:
        return Lattice(0, ())
    if a.rows == 0:
        return Lattice(a.cols, tuple(tuple(IntMatrix.identity(a.cols).row(i)) for i in range(a.cols)))
    diag, _, v, _ = _kernels.int_snf(a.to_rows(), want_v=True)
    rank = len(diag)
    basis = tuple(tuple(v[i][j] for i in range(a.cols)) for j in range(rank, a.cols))
    return Lattice(a.cols, basis)


def saturate(lattice: Lattice) -> Lattice:
    """Saturation: same rational span, torsion-free quotient of the ambient."""
    if lattice.rank == 0:
        return lattice
    # U*B*V = D with B the basis-rows matrix; the first rank rows of V^-1
    # span Q-span(B) intersected with Z^ambient.
    diag, _, _, vinv = _kernels.int_snf([list(v) for v in lattice.basis], want_vinv=True)
    rank = len(diag)
    if rank != lattice.rank:
        raise LatticeError("basis vectors are dependent")
    return Lattice(lattice.ambient, tuple(tuple(vinv[i]) for i in range(rank)))


def quotient_presentation(relations: IntMatrix, n: int) -> tuple[IntMatrix, IntMatrix, list[int]]:
    """Present Z^n / (row span of relations) as a free module.

    Returns (proj, sect, torsion) with proj: Z^n -> Z^d and sect: Z^d -> Z^n
    acting on column vectors, proj @ sect = identity, and ker(proj) = the
    relation span whenever torsion is empty. torsion lists the invariant
    factors > 1 of the quotient; callers that require a free quotient must
    reject a nonempty list.
    """
    if relations.cols != n:
        raise ValueError("relation width mismatch")
    if relations.rows == 0:
        ident = IntMatrix.identity(n)
        return ident, ident, []
    diag, _, v, vinv = _kernels.int_snf(relations.to_rows(), want_v=True, want_vinv=True)
    rank = len(diag)
    torsion = [d for d in diag if d not in (0, 1)]
    free_idx = list(range(rank, n))
    proj = IntMatrix.from_rows([[v[i][j] for i in range(n)] for j in free_idx])
    sect = IntMatrix.from_rows([[vinv[j][i] for j in free_idx] for i in range(n)])
    return proj, sect, torsion


def solve_int_exact(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """Integer solution X of a @ X = b, or None when none exists."""
    if a.rows != b.rows:
        raise ValueError("dimension mismatch")
    if a.cols == 0:
        return IntMatrix.zeros(0, b.cols) if b.is_zero() else None
    if a.rows == 0:
        return IntMatrix.zeros(a.cols, b.cols)
    diag, u, v, _ = _kernels.int_snf(a.to_rows(), want_u=True, want_v=True)
    ub = IntMatrix.from_rows(u) @ b
    r = len(diag)
    y = [[0] * b.cols for _ in range(a.cols)]
    for i in range(a.rows):
        for j in range(b.cols):
            x = ub.get(i, j)
            if i >= r:
                if x != 0:
                    return None
            else:
                if x % diag[i]:
                    return None
                y[i][j] = x // diag[i]
    return IntMatrix.from_rows(v) @ IntMatrix.from_rows(y)


def restrict_to_lattice(a: IntMatrix, lattice: Lattice) -> IntMatrix:
    """Matrix of a on the lattice basis; a must preserve the lattice."""
    bmat = lattice.basis_matrix()
    if a.cols != bmat.rows:
        raise ValueError("operator does not act on the ambient module")
    r = solve_int_exact(bmat, a @ bmat)
    if r is None:
        raise ValueError("operator does not preserve the lattice")
    return r


def local_diag(a: IntMatrix, p: int, k: int) -> list[int]:
    """Valuations of the invariant factors of a over Z/p^k (k = zero entry)."""
    if a.rows == 0 or a.cols == 0:
        return []
    vals, _, _, _, _ = _kernels.local_snf(a.to_rows(), p, k)
    return vals


def unit_rank(a: IntMatrix, p: int, k: int) -> int:
    """Number of unit invariant factors of a mod p^k."""
    return sum(1 for v in local_diag(a, p, k) if v == 0)


def is_unimodular_mod(a: IntMatrix, p: int, k: int) -> bool:
    return a.rows == a.cols and unit_rank(a, p, k) == a.rows


def inverse_mod(a: IntMatrix, p: int, k: int) -> IntMatrix | None:
    """Inverse of a mod p^k, or None when a is not invertible."""
    if a.rows != a.cols:
        raise ValueError("not square")
    if a.rows == 0:
        return IntMatrix.zeros(0, 0)
    q = p**k
    vals, u, _, v, _ = _kernels.local_snf(a.to_rows(), p, k, want_u=True, want_v=True)
    if any(vals):
        return None
    return IntMatrix.from_rows(v).mul_mod(IntMatrix.from_rows(u), q)


def solve_mod(a: IntMatrix, b: IntMatrix, p: int, k: int) -> IntMatrix | None:
    """One solution X of a @ X = b mod p^k, or None when unsolvable."""
    if a.rows != b.rows:
        raise ValueError("dimension mismatch")
    q = p**k
    if a.cols == 0:
        return IntMatrix.zeros(0, b.cols) if b.is_zero_mod(q) else None
    if a.rows == 0:
        return IntMatrix.zeros(a.cols, b.cols)
    vals, u, _, v, _ = _kernels.local_snf(a.to_rows(), p, k, want_u=True, want_v=True)
    ub = IntMatrix.from_rows(u).mul_mod(b, q)
    r = min(a.rows, a.cols)
    y = [[0] * b.cols for _ in range(a.cols)]
    for i in range(a.rows):
        for j in range(b.cols):
            x = ub.get(i, j)
            if i >= r or vals[i] >= k:
                if x % q:
                    return None
            else:
                pv = p ** vals[i]
                if x % pv:
                    return None
                y[i][j] = x // pv
    return IntMatrix.from_rows(v).mul_mod(IntMatrix.from_rows(y), q)


def kernel_mod(a: IntMatrix, p: int, k: int) -> IntMatrix:
    """Generators (as columns) of {x : a*x = 0 mod p^k}."""
    q = p**k
    if a.cols == 0:
        return IntMatrix.zeros(0, 0)
    if a.rows == 0:
        return IntMatrix.identity(a.cols)
    vals, _, _, v, _ = _kernels.local_snf(a.to_rows(), p, k, want_v=True)
    r = min(a.rows, a.cols)
    cols = []
    for i in range(a.cols):
        if i < r and vals[i] == 0:
            continue
        scale = p ** (k - vals[i]) if i < r else 1
        cols.append([v[row][i] * scale % q for row in range(a.cols)])
    if not cols:
        return IntMatrix.zeros(a.cols, 0)
    return IntMatrix.from_rows([[c[i] for c in cols] for i in range(a.cols)])


def image_membership_mod(a: IntMatrix, b: IntMatrix, p: int, k: int) -> bool:
    """Whether every column of b lies in the column span of a mod p^k."""
    return solve_mod(a, b, p, k) is not None


def rank_mod_p(a: IntMatrix, p: int) -> int:
    """Rank over F_p by plain Gaussian elimination (independent of local_snf)."""
    rows = [[x % p for x in a.row(i)] for i in range(a.rows)]
    rank = 0
    col = 0
    while rank < len(rows) and col < a.cols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def charpoly_mod(a: IntMatrix, q: int) -> list[int]:
    """Characteristic polynomial of a mod q, monic, descending coefficients.

    Division-free (Berkowitz), so it is valid over Z/q for any q.
    """
    if a.rows != a.cols:
        raise ValueError("not square")
    n = a.rows
    rows = [[x % q for x in a.row(i)] for i in range(n)]
    poly = [1]
    for i in range(n):
        r_vec = rows[i][:i]
        c_vec = [rows[t][i] for t in range(i)]
        sub = [row[:i] for row in rows[:i]]
        col = [1, -rows[i][i] % q]
        vec = c_vec
        for j in range(2, i + 2):
            col.append(-sum(r_vec[t] * vec[t] for t in range(i)) % q)
            if j < i + 1:
                vec = [sum(sub[r][t] * vec[t] for t in range(i)) % q for r in range(i)]
        new = []
        for s in range(i + 2):
            acc = 0
            lo = max(0, s - len(poly) + 1)
            hi = min(s, len(col) - 1)
            for j in range(lo, hi + 1):
                acc += col[j] * poly[s - j]
            new.append(acc % q)
        poly = new
    return poly


@dataclass(frozen=True)
class IsotropicSummandReport:
    """The four independently computed conditions of the summand equivalence."""

    is_summand: bool
    modp_injective: bool
    dual_surjective: bool
    sequence_exact: bool
    rank_sub: int
    p: int
    k: int

    def all_agree(self) -> bool:
        return len({self.is_summand, self.modp_injective, self.dual_surjective, self.sequence_exact}) == 1


def isotropic_summand_report(
    g: IntMatrix, n_lattice: Lattice, p: int, k: int = 20
) -> IsotropicSummandReport:
    """Check the four equivalent summand conditions for an isotropic N in M.

    M = Z_p^(2n) with perfect pairing g; N an isotropic rank-n sublattice.
    The booleans are computed by four separate procedures:

    - is_summand: an explicit left inverse of the inclusion mod p^k;
    - modp_injective: F_p-rank of the inclusion by dedicated elimination;
    - dual_surjective: unit invariant factors of x -> <x, .> restricted to N;
    - sequence_exact: 0 -> N -> M -> N^dual -> 0 checked arrow by arrow
      (injectivity, im = ker by mutual membership, surjectivity by solving).

    Preconditions raise PairingNotPerfectError, RankMismatchError or
    NotIsotropicError.
    """
    m_rank = g.rows
    n = n_lattice.rank
    if g.cols != m_rank or n_lattice.ambient != m_rank or m_rank != 2 * n:
        raise RankMismatchError(f"need rank M = 2 rank N, got {m_rank} and {n}")
    if not is_unimodular_mod(g, p, k):
        raise PairingNotPerfectError("pairing determinant is not a p-adic unit")
    b = n_lattice.basis_matrix()
    btgb = b.transpose() @ g @ b
    if not btgb.is_zero():
        raise NotIsotropicError("x^T G y != 0 on the sublattice")
    q = p**k

    # (a) direct summand: explicit left inverse of the inclusion
    is_summand = False
    vals, u, _, v, _ = _kernels.local_snf(b.to_rows(), p, k, want_u=True, want_v=True)
    if all(val == 0 for val in vals):
        left = IntMatrix.from_rows([[v[i][j] for j in range(n)] for i in range(n)]).mul_mod(
            IntMatrix.from_rows([u[i] for i in range(n)]), q
        )
        is_summand = (left.mul_mod(b, q) - IntMatrix.identity(n)).is_zero_mod(q)

    # (b) mod-p injectivity of N/pN -> M/pM
    modp_injective = rank_mod_p(b, p) == n

    # (c) surjectivity of M -> N^dual, x -> (y -> x^T G y)
    c = b.transpose() @ g
    dual_surjective = unit_rank(c, p, k) == n

    # (d) exactness of 0 -> N -> M -> N^dual -> 0
    injective = kernel_mod(b, p, k).cols == 0
    comp_zero = c.mul_mod(b, q).is_zero_mod(q)
    ker_in_image = image_membership_mod(b, kernel_mod(c, p, k), p, k)
    surjective = solve_mod(c, IntMatrix.identity(n), p, k) is not None
    sequence_exact = injective and comp_zero and ker_in_image and surjective

    return IsotropicSummandReport(
        is_summand=is_summand,
        modp_injective=modp_injective,
        dual_surjective=dual_surjective,
        sequence_exact=sequence_exact,
        rank_sub=n,
        p=p,
        k=k,
    )
