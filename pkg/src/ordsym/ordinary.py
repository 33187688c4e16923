"""Ordinary projector, summands, eigen packets, q-expansion duality, unit roots.

The projector is the stable power of T(p): Teichmueller parts are killed by an
exponent divisible by the residue-field unit orders (detected from the mod-p
characteristic polynomial), and a further p-power exponent contracts principal
units and nilpotents below the working precision. Everything downstream is
exact linear algebra mod p^k: summand bases from the local normal form of the
idempotent, eigen blocks from splitting idempotents built by the same
iteration applied to factor evaluations, duality from coordinates of T(n) in
the ordinary Hecke algebra, and unit roots from Hensel lifting.
"""

from dataclasses import dataclass, field
from math import lcm

from sympy import Poly, symbols
from sympy.ntheory.residue_ntheory import sqrt_mod

from . import _kernels
from .exactlin import (
    IntMatrix,
    Lattice,
    PadicScalar,
    charpoly_mod,
    inverse_mod,
    kernel_mod,
    solve_mod,
    unit_rank,
)
from .hecke import HeckeAlgebra, hecke_T, restrict_operator
from .hecke import _diamond_full
from .modsym import SymbolSpace, genus


class OrdinaryError(RuntimeError):
    """Internal contract violation in the ordinary-part machinery."""


class NotOrdinaryError(OrdinaryError):
    """An operation requiring a p-adic unit eigenvalue met a non-unit."""


class PrecisionError(OrdinaryError):
    """The requested extraction needs more p-adic digits than available."""


def _matrix_of(op) -> IntMatrix:
    return op.matrix if hasattr(op, "matrix") else op


def _power_mod(a: IntMatrix, e: int, q: int) -> IntMatrix:
    result = IntMatrix.identity(a.rows)
    base = a.reduce_mod(q)
    while e:
        if e & 1:
            result = result.mul_mod(base, q)
        base = base.mul_mod(base, q)
        e >>= 1
    return result


def _nonunit_factor_degrees(mat: IntMatrix, p: int) -> list[int]:
    """Degrees of irreducible factors (other than X) of charpoly mod p."""
    if mat.rows == 0:
        return []
    coeffs = [c % p for c in charpoly_mod(mat, p)]
    x = symbols("x")
    poly = Poly(coeffs, x, modulus=p)
    degrees = []
    for factor, _ in poly.factor_list()[1]:
        deg = factor.degree()
        is_x = deg == 1 and factor.all_coeffs()[-1] % p == 0
        if deg >= 1 and not is_x:
            degrees.append(deg)
    return degrees


def hida_idempotent(u, p: int, k: int) -> IntMatrix:
    """Stable power of u mod p^k: the projector onto the unit-eigenvalue part.

    The exponent is m * p^K with m the lcm of p^f - 1 over the residue degrees
    f of the non-X irreducible factors of the mod-p characteristic polynomial
    (so unit eigenvalues map into 1 + pZ_p) and K large enough that p-power
    contraction and nilpotent decay both finish below p^k. Idempotency and
    commutation are verified; failure indicates an arithmetic bug.
    """
    mat = _matrix_of(u)
    if mat.rows != mat.cols:
        raise OrdinaryError("projector input must be square")
    d = mat.rows
    q = p**k
    if d == 0:
        return IntMatrix.zeros(0, 0)
    degrees = _nonunit_factor_degrees(mat, p)
    m = lcm(*(p**f - 1 for f in degrees)) if degrees else 1
    big = 1
    cap = k + 2
    while p**big < d:
        big += 1
    e = _power_mod(mat, m * p ** (cap + big), q)
    if e.mul_mod(e, q) != e:
        raise OrdinaryError("idempotent iteration failed to stabilize")
    if e.mul_mod(mat.reduce_mod(q), q) != mat.reduce_mod(q).mul_mod(e, q):
        raise OrdinaryError("idempotent does not commute with its own operator")
    return e


def _image_basis(e: IntMatrix, p: int, k: int) -> IntMatrix:
    """Columns spanning the image of an idempotent mod p^k."""
    if e.rows == 0:
        return IntMatrix.zeros(0, 0)
    vals, _, uinv, _, _ = _kernels.local_snf(e.to_rows(), p, k, want_uinv=True)
    q = p**k
    cols = [i for i in range(min(e.rows, e.cols)) if vals[i] == 0]
    if not cols:
        return IntMatrix.zeros(e.rows, 0)
    return IntMatrix.from_rows([[uinv[row][i] % q for i in cols] for row in range(e.rows)])


@dataclass(frozen=True)
class OrdinaryDecomposition:
    """Idempotent split of a lattice at precision k.

    summand and complement are lattices in the coordinates of the input
    lattice basis; u_on_summand is the matrix of T(p) there.
    """

    level: int
    p: int
    k: int
    e: IntMatrix
    lattice: Lattice
    summand: Lattice
    complement: Lattice
    u_on_summand: IntMatrix | None
    space: SymbolSpace | None = field(default=None, repr=False, compare=False)
    # memo of lattice-coordinate T(n) matrices; prefilled by the cache layer
    op_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return self.summand.rank


def ordinary_summand(
    lattice: Lattice,
    e,
    p: int,
    k: int,
    u=None,
    operators: tuple = (),
    space: SymbolSpace | None = None,
    level: int = 0,
) -> OrdinaryDecomposition:
    """Split a lattice by an idempotent into ordinary summand and complement.

    Verifies e^2 = e, commutation with the supplied operators, that the two
    image ranks fill the lattice, and (when T(p) is supplied) that it is
    invertible mod p on the summand.
    """
    emat = _matrix_of(e).reduce_mod(p**k)
    d = lattice.rank
    q = p**k
    if emat.rows != d or emat.cols != d:
        raise OrdinaryError("idempotent has wrong shape for the lattice")
    if emat.mul_mod(emat, q) != emat:
        raise OrdinaryError("not an idempotent mod p^k")
    for op in operators:
        opm = _matrix_of(op).reduce_mod(q)
        if emat.mul_mod(opm, q) != opm.mul_mod(emat, q):
            raise OrdinaryError("idempotent does not commute with a registered operator")

    ident = IntMatrix.identity(d)
    basis = _image_basis(emat, p, k)
    co_basis = _image_basis((ident - emat).reduce_mod(q), p, k)
    if basis.cols + co_basis.cols != d:
        raise OrdinaryError("summand and complement ranks do not fill the lattice")
    if d > 0 and unit_rank(basis.hstack(co_basis), p, k) != d:
        raise OrdinaryError("summand and complement do not span mod p^k")

    summand = Lattice(d, tuple(tuple(basis.get(i, j) for i in range(d)) for j in range(basis.cols)))
    complement = Lattice(d, tuple(tuple(co_basis.get(i, j) for i in range(d)) for j in range(co_basis.cols)))

    u_res = None
    if u is not None and basis.cols > 0:
        umat = _matrix_of(u)
        u_res = solve_mod(basis, umat.mul_mod(basis, q), p, k)
        if u_res is None:
            raise OrdinaryError("T(p) does not preserve the ordinary summand")
        if unit_rank(u_res, p, k) != basis.cols:
            raise OrdinaryError("T(p) is not invertible on the ordinary summand")
    elif u is not None:
        u_res = IntMatrix.zeros(0, 0)

    if space is not None:
        level = space.level
    return OrdinaryDecomposition(
        level=level,
        p=p,
        k=k,
        e=emat,
        lattice=lattice,
        summand=summand,
        complement=complement,
        u_on_summand=u_res,
        space=space,
    )


def summand_operator(dec: OrdinaryDecomposition, op) -> IntMatrix:
    """Matrix of a lattice-coordinates operator on the ordinary summand."""
    q = dec.p**dec.k
    basis = dec.summand.basis_matrix()
    opm = _matrix_of(op).reduce_mod(q)
    res = solve_mod(basis, opm.mul_mod(basis, q), dec.p, dec.k)
    if res is None:
        raise OrdinaryError("operator does not preserve the ordinary summand")
    return res


def lattice_operator(dec: OrdinaryDecomposition, n: int) -> IntMatrix:
    """Matrix of T(n) in lattice coordinates, memoized on the decomposition."""
    cached = dec.op_cache.get(n)
    if cached is not None:
        return cached
    if dec.space is None:
        raise OrdinaryError("decomposition carries no symbol space")
    mat = restrict_operator(hecke_T(dec.space, n), dec.lattice)
    dec.op_cache[n] = mat
    return mat


def _space_operator(dec: OrdinaryDecomposition, n: int) -> IntMatrix:
    return summand_operator(dec, lattice_operator(dec, n))


def _poly_eval_matrix(coeffs: list[int], mat: IntMatrix, q: int) -> IntMatrix:
    """Monic-descending coefficient list evaluated at a matrix, mod q."""
    d = mat.rows
    result = IntMatrix.zeros(d, d)
    for c in coeffs:
        result = result.mul_mod(mat, q)
        if c % q:
            result = (result + IntMatrix.identity(d).scale(c % q)).reduce_mod(q)
    return result


def _irreducible_factors(mat: IntMatrix, p: int, q: int) -> list[list[int]]:
    """Distinct irreducible factors of charpoly(mat) mod p, monic descending."""
    coeffs = [c % p for c in charpoly_mod(mat, q)]
    x = symbols("x")
    poly = Poly(coeffs, x, modulus=p)
    factors = []
    for factor, _ in poly.factor_list()[1]:
        factors.append([c % p for c in factor.all_coeffs()])
    return factors


@dataclass(frozen=True)
class OrdinaryBlock:
    """Joint invariant block of the ordinary summand.

    basis columns are in summand coordinates; scalars maps n to the
    eigenvalue when every T(n) acts as a scalar on the block, else None.
    precision is the number of exact p-adic digits: separating two systems
    congruent modulo p^w costs w/2 digits, so refined blocks carry less than
    the ambient precision.
    """

    basis: IntMatrix
    rank: int
    scalars: dict | None
    charpoly_degree: int
    precision: int


def _sqrt_unit(u: int, p: int, k: int) -> int | None:
    """Square root of a unit mod p^k, or None when u is a non-residue."""
    if p == 2:
        return None
    root = sqrt_mod(u % p, p)
    if root is None:
        return None
    q = p**k
    y = int(root)
    inv2 = pow(2, -1, q)
    for _ in range(2 * k):
        if (y * y - u) % q == 0:
            break
        y = (y + u * pow(y, -1, q)) * inv2 % q
    if (y * y - u) % q != 0:
        return None
    return y


def _quadratic_minpoly(m: IntMatrix, p: int, k: int) -> tuple[int, int] | None:
    """(s, t) with m^2 = s m + t mod p^k, or None when no quadratic relation."""
    d = m.rows
    q = p**k
    m2 = m.mul_mod(m, q)
    cols = IntMatrix.from_rows(
        [[m.get(i, j), 1 if i == j else 0] for i in range(d) for j in range(d)]
    )
    rhs = IntMatrix.from_rows([[m2.get(i, j)] for i in range(d) for j in range(d)])
    st = solve_mod(cols, rhs, p, k)
    if st is None:
        return None
    return st.get(0, 0) % q, st.get(1, 0) % q


def _is_scalar(m: IntMatrix, q: int) -> bool:
    if m.rows == 0:
        return True
    lam = m.get(0, 0)
    return m == IntMatrix.identity(m.rows).scale(lam).reduce_mod(q)


def _try_quadratic_split(
    basis: IntMatrix, op_full: IntMatrix, p: int, kb: int
) -> list[tuple[IntMatrix, int]] | None:
    """Split a block along the two roots of a quadratic minimal polynomial.

    A root pair congruent mod p^w is separated by a p-adic square root of the
    discriminant and exact kernels at precision kb - w/2. Returns None when
    the operator is scalar, has no quadratic relation, or the discriminant is
    zero, of odd valuation, or a non-residue (an irrational pair).
    """
    q = p**kb
    block_op = solve_mod(basis, op_full.mul_mod(basis, q), p, kb)
    if block_op is None:
        raise OrdinaryError("operator does not preserve a block")
    d = block_op.rows
    if d <= 1 or _is_scalar(block_op, q):
        return None
    st = _quadratic_minpoly(block_op, p, kb)
    if st is None:
        return None
    s, t = st
    disc = (s * s + 4 * t) % q
    if disc == 0:
        return None
    w = 0
    unit = disc
    while unit % p == 0:
        unit //= p
        w += 1
    if w % 2:
        return None
    k_new = kb - w // 2
    if k_new < 2:
        raise PrecisionError("eigenvalue collision deeper than the working precision")
    root = _sqrt_unit(unit, p, kb - w)
    if root is None:
        return None
    sigma = p ** (w // 2) * root
    inv2 = pow(2, -1, q)
    q_new = p**k_new
    parts: list[tuple[IntMatrix, int]] = []
    subs: list[IntMatrix] = []
    total = 0
    for lam in ((s + sigma) * inv2 % q_new, (s - sigma) * inv2 % q_new):
        shifted = (block_op - IntMatrix.identity(d).scale(lam)).reduce_mod(q_new)
        ker = kernel_mod(shifted, p, k_new)
        sub = _image_basis(ker, p, k_new) if ker.cols else IntMatrix.zeros(d, 0)
        if sub.cols == 0:
            return None
        subs.append(sub)
        parts.append((basis.mul_mod(sub, q_new), k_new))
        total += sub.cols
    if total != d:
        return None
    # congruent systems share their mod-p reduction, so the eigenlattice sum
    # has finite index p^c in the block; demand nondegeneracy, not unit index
    joint = subs[0].hstack(subs[1])
    vals, _, _, _, _ = _kernels.local_snf(joint.to_rows(), p, k_new)
    if len(vals) < d or any(v >= k_new for v in vals):
        return None
    return parts


def ordinary_blocks(dec: OrdinaryDecomposition, n_max: int) -> list[OrdinaryBlock]:
    """Split the summand into joint invariant blocks of T(n), n <= n_max.

    First pass: primary splitting mod p, with idempotents from the
    stable-power iteration applied to g(T) for each irreducible factor g of
    the relevant characteristic polynomial mod p. Second pass: blocks whose
    systems are congruent mod p are separated, when possible, along the two
    roots of a quadratic minimal polynomial of some T(n), at reduced
    precision. Blocks that resist both passes are reported non-scalar.
    """
    p, k = dec.p, dec.k
    q = p**k
    rho = dec.rank
    if rho == 0:
        return []
    primes = [n for n in range(2, n_max + 1) if all(n % d for d in range(2, n))]
    ops = {n: _space_operator(dec, n) for n in primes}

    blocks = [IntMatrix.identity(rho)]
    for n in primes:
        refined = []
        for basis in blocks:
            if basis.cols <= 1:
                refined.append(basis)
                continue
            block_op = solve_mod(basis, ops[n].mul_mod(basis, q), p, k)
            if block_op is None:
                raise OrdinaryError("operator does not preserve a block")
            factors = _irreducible_factors(block_op, p, q)
            if len(factors) <= 1:
                refined.append(basis)
                continue
            total = 0
            for g in factors:
                gmat = _poly_eval_matrix(g, block_op, q)
                away = hida_idempotent(gmat, p, k)
                proj = (IntMatrix.identity(block_op.rows) - away).reduce_mod(q)
                sub = _image_basis(proj, p, k)
                if sub.cols == 0:
                    raise OrdinaryError("splitting idempotent lost a factor block")
                refined.append(basis.mul_mod(sub, q))
                total += sub.cols
            if total != basis.cols:
                raise OrdinaryError("block split does not preserve rank")
        blocks = refined

    final: list[tuple[IntMatrix, int]] = []
    work = [(b, k) for b in blocks]
    while work:
        basis, kb = work.pop()
        split = None
        if basis.cols > 1:
            for n in primes:
                split = _try_quadratic_split(basis, ops[n], p, kb)
                if split is not None:
                    break
        if split is None:
            final.append((basis, kb))
        else:
            work.extend(split)

    ops_all = {n: ops[n] if n in ops else _space_operator(dec, n) for n in range(2, n_max + 1)}
    ops_all[1] = IntMatrix.identity(rho)
    out = []
    for basis, kb in final:
        qb = p**kb
        scalars: dict | None = {}
        degree = 1
        for n in range(1, n_max + 1):
            block_op = solve_mod(basis, ops_all[n].mul_mod(basis, qb), p, kb)
            if block_op is None:
                raise OrdinaryError("operator does not preserve a final block")
            lam = block_op.get(0, 0) if block_op.rows else 0
            if block_op != IntMatrix.identity(block_op.rows).scale(lam).reduce_mod(qb):
                scalars = None
                cp = _irreducible_factors(block_op, p, qb)
                degree = max(degree, max(len(c) - 1 for c in cp))
                break
            if scalars is not None:
                scalars[n] = lam % qb
        out.append(
            OrdinaryBlock(
                basis=basis, rank=basis.cols, scalars=scalars, charpoly_degree=degree, precision=kb
            )
        )
    if sum(b.rank for b in out) != rho:
        raise OrdinaryError("block ranks do not sum to the summand rank")
    out.sort(key=lambda b: (b.rank, b.scalars is None, tuple(b.scalars.values()) if b.scalars else ()))
    return out


@dataclass(frozen=True)
class EigenPacket:
    """Scalar Hecke eigenvalue data on one ordinary block."""

    level: int
    p: int
    k: int
    n_max: int
    a: tuple
    diamond_gamma: PadicScalar | None
    chi_p: PadicScalar | None
    alpha: PadicScalar
    provenance: str
    block_rank: int

    def a_n(self, n: int) -> PadicScalar:
        return self.a[n - 1]

    def to_json_dict(self) -> dict:
        return {
            "level": self.level,
            "p": self.p,
            "precision": self.k,
            "a_n": [str(s.residue) for s in self.a],
            "alpha": str(self.alpha.residue),
            "provenance": self.provenance,
        }


def _block_scalar_of(dec: OrdinaryDecomposition, basis: IntMatrix, op, kb: int) -> int | None:
    q = dec.p**kb
    mat = summand_operator(dec, op)
    block_op = solve_mod(basis, mat.mul_mod(basis, q), dec.p, kb)
    if block_op is None or block_op.rows == 0:
        return None
    lam = block_op.get(0, 0)
    if block_op != IntMatrix.identity(block_op.rows).scale(lam).reduce_mod(q):
        return None
    return lam % q


def eigen_packets(dec: OrdinaryDecomposition, algebra: HeckeAlgebra, n_max: int) -> list[EigenPacket]:
    """One packet per block on which every T(n), n <= n_max, acts as a scalar.

    Non-scalar blocks are left to ordinary_blocks callers; the packet count
    and block ranks are consistent with the summand rank by construction.
    """
    if dec.rank == 0:
        return []
    if dec.space is None:
        raise OrdinaryError("packets need the symbol space on the decomposition")
    p = dec.p
    params = dec.space.params
    packets = []
    for block in ordinary_blocks(dec, n_max):
        if block.scalars is None:
            continue
        kb = block.precision
        a = tuple(PadicScalar(p, kb, block.scalars[n]) for n in range(1, n_max + 1))
        if a[0].residue != 1:
            raise OrdinaryError("packet does not begin with a_1 = 1")
        ap = a[p - 1]
        if ap.residue % p == 0:
            raise NotOrdinaryError("packet on the ordinary summand has non-unit a_p")

        diamond_gamma = None
        if params.r >= 2:
            lam = _block_scalar_of(
                dec,
                block.basis,
                restrict_operator(_gamma_diamond(dec.space), dec.lattice),
                kb,
            )
            if lam is not None:
                diamond_gamma = PadicScalar(p, kb, lam)

        chi_p = None
        if params.r == 0:
            lam = _block_scalar_of(
                dec,
                block.basis,
                restrict_operator(_diamond_full(dec.space, p % dec.space.level), dec.lattice),
                kb,
            )
            if lam is None:
                raise PrecisionError("tame character value unresolved on a scalar block")
            chi_p = PadicScalar(p, kb, lam)
            alpha = unit_root(ap, chi_p, kb)
            provenance = "p-old: unit root of the Frobenius quadratic"
        else:
            alpha = ap
            provenance = "p-stabilized: U_p eigenvalue at level divisible by p"

        packets.append(
            EigenPacket(
                level=dec.level,
                p=p,
                k=kb,
                n_max=n_max,
                a=a,
                diamond_gamma=diamond_gamma,
                chi_p=chi_p,
                alpha=alpha,
                provenance=provenance,
                block_rank=block.rank,
            )
        )
    if packets and not algebra.contains(_space_operator(dec, 2)):
        raise OrdinaryError("algebra does not contain the operators it claims")
    return packets


def _gamma_diamond(space: SymbolSpace):
    from .hecke import diamond

    return diamond(space, 1 + space.params.p)


@dataclass(frozen=True)
class CuspFormLattice:
    """Truncated q-expansion vectors dual to the ordinary Hecke algebra."""

    level: int
    p: int
    k: int
    n_max: int
    basis: IntMatrix
    duality_valuation: int

    @property
    def rank(self) -> int:
        return self.basis.rows


def qexp_basis(dec: OrdinaryDecomposition, algebra: HeckeAlgebra, n_max: int) -> CuspFormLattice:
    """Coordinates of T(1..n_max) in the ordinary Hecke algebra basis.

    The reported valuation is that of the index of the span of the T(n) in
    the full algebra: zero iff the evaluation pairing is perfect at this
    truncation. If positive, the truncation is extended (doubling, bounded)
    and the lattice records the length actually used.
    """
    p, k = dec.p, dec.k
    q = p**k
    rank = algebra.rank
    if rank == 0 or dec.rank == 0:
        return CuspFormLattice(dec.level, p, k, n_max, IntMatrix.zeros(0, n_max), 0)

    length = n_max
    while True:
        mats = [_space_operator(dec, n) for n in range(1, length + 1)]
        c = algebra.coords_matrix(mats)
        if c is not None:
            vals, _, _, _, _ = _kernels.local_snf(c.to_rows(), p, k)
            valuation = sum(v for v in vals[:rank]) if len(vals) >= rank else k * rank
            if valuation == 0 or length >= 8 * n_max:
                break
        else:
            valuation = k * rank
            if length >= 8 * n_max:
                c = IntMatrix.zeros(rank, length)
                break
        length *= 2

    lead = c.submatrix_cols(list(range(rank)))
    inv = inverse_mod(lead, p, k)
    if inv is not None:
        c = inv.mul_mod(c, q)
    return CuspFormLattice(dec.level, p, k, length, c, valuation)


def unit_root(a_p: PadicScalar, chi_p: PadicScalar, k: int) -> PadicScalar:
    """Unit root of X^2 - a_p X + p chi_p by Hensel lifting from a_p mod p.

    Requires a_p to be a unit; the complementary root has valuation 1
    whenever chi_p is a unit, and both Vieta identities are verified mod p^k.
    """
    p = a_p.p
    if chi_p.p != p:
        raise OrdinaryError("mixed primes in unit root computation")
    if a_p.residue % p == 0:
        raise NotOrdinaryError("a_p is not a p-adic unit")
    q = p**k
    x = a_p.residue % q
    c = chi_p.residue % q
    alpha = x % p
    for _ in range(2 * k + 4):
        f = (alpha * alpha - x * alpha + p * c) % q
        if f == 0:
            break
        deriv = (2 * alpha - x) % q
        alpha = (alpha - f * pow(deriv, -1, q)) % q
    else:
        raise OrdinaryError("Hensel iteration did not converge")
    if alpha % p == 0:
        raise OrdinaryError("Hensel limit is not a unit")
    beta = (x - alpha) % q
    if (alpha * beta - p * c) % q != 0:
        raise OrdinaryError("Vieta product identity failed")
    if c % p != 0 and (beta % (p * p) == 0 or beta % p != 0):
        raise OrdinaryError("complementary root does not have valuation 1")
    return PadicScalar(p, k, alpha)


@dataclass(frozen=True)
class StabilizationReport:
    """Outcome of comparing T(p) on the ordinary old part with the unit root."""

    ok: bool
    vacuous: bool
    old_rank: int
    ordinary_old_rank: int
    eigenvalue: PadicScalar | None
    alpha: PadicScalar | None
    note: str


def stabilization_check(
    packet: EigenPacket | None,
    dec: OrdinaryDecomposition,
    space: SymbolSpace,
) -> StabilizationReport:
    """T(p) on the ordinary projection of a packet's p-old plane is its unit root.

    The old plane is cut as the exact joint kernel of T(l) - a_l for small
    primes l away from the level; the projector e must kill exactly half of
    it (the non-unit stabilization), and T(p) must act on the survivor by
    unit_root(a_p, chi_p). A missing packet at a genus-zero base level, or a
    non-unit a_p, reports vacuous truth with a rank note.
    """
    p, k = dec.p, dec.k
    if packet is None:
        base = space.level // p ** space.params.r
        if base <= 4 or genus(base) == 0:
            return StabilizationReport(True, True, 0, 0, None, None, "no cusp forms at the base level")
        return StabilizationReport(False, False, 0, 0, None, None, "packet missing for a positive-genus base level")
    if packet.level * p != space.level:
        raise OrdinaryError("stabilization compares level N against level N*p")
    k = min(k, packet.k)
    q = p**k

    cut_primes = [l for l in (2, 5, 7, 13) if space.level % l and l != p][:3]
    stacked_rows: list[list[int]] = []
    d = dec.lattice.rank
    for l in cut_primes:
        a_l = packet.a_n(l).residue
        tl = restrict_operator(hecke_T(space, l), dec.lattice)
        delta = (tl - IntMatrix.identity(d).scale(a_l)).reduce_mod(q)
        stacked_rows.extend(delta.to_rows())
    stack = IntMatrix.from_rows(stacked_rows)
    ker = kernel_mod(stack, p, k)
    # unit-content directions only: exact eigendirections, not p-divisible tails
    old_basis = _image_basis(ker, p, k) if ker.cols else IntMatrix.zeros(d, 0)
    old_rank = old_basis.cols

    if packet.a_n(p).residue % p == 0:
        w = dec.e.mul_mod(old_basis, q) if old_rank else IntMatrix.zeros(d, 0)
        wrank = unit_rank(w, p, k) if old_rank else 0
        ok = wrank == 0
        return StabilizationReport(ok, True, old_rank, wrank, None, None, "non-ordinary packet: e kills both stabilizations")

    if old_rank == 0:
        return StabilizationReport(False, False, 0, 0, None, None, "expected p-old plane not found")

    w = dec.e.mul_mod(old_basis, q)
    w_basis = _image_basis(w, p, k) if w.cols else IntMatrix.zeros(d, 0)
    ord_rank = w_basis.cols
    if packet.chi_p is None:
        raise OrdinaryError("packet carries no tame character value at p")
    alpha = unit_root(packet.a_n(p), packet.chi_p, k)

    u_lat = restrict_operator(hecke_T(space, p), dec.lattice)
    action = solve_mod(w_basis, u_lat.mul_mod(w_basis, q), p, k)
    scalar_ok = False
    eigen = None
    if action is not None and action.rows > 0:
        lam = action.get(0, 0) % q
        scalar_ok = action == IntMatrix.identity(action.rows).scale(lam).reduce_mod(q)
        if scalar_ok:
            eigen = PadicScalar(p, k, lam)
    halves = ord_rank * 2 == old_rank
    ok = scalar_ok and eigen is not None and eigen.residue == alpha.residue and halves
    note = "unit-root eigenvalue matched" if ok else "stabilization mismatch"
    return StabilizationReport(ok, False, old_rank, ord_rank, eigen, alpha, note)
