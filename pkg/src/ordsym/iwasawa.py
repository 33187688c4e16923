"""Finite-level Iwasawa algebras and modules over them.

The layer-r algebra is the group ring of a cyclic p-group of order p^(r-1)
(the quotient of the principal units by the r-th congruence subgroup), with
distinguished generator gamma = image of 1 + p, working at precision p^k.
Modules are lattices with a gamma-action of the right order; the two main
checks are freeness (Nakayama lift made explicit and tested for injectivity)
and control (a trace map inducing an isomorphism after base change down a
layer, certified by surjectivity plus an exact kernel computation).
"""

from dataclasses import dataclass, field

from . import _kernels
from .exactlin import (
    IntMatrix,
    Lattice,
    image_membership_mod,
    kernel_mod,
    restrict_to_lattice,
    unit_rank,
)


class IwasawaError(RuntimeError):
    """Violation of a ring or module contract."""


@dataclass(frozen=True)
class LambdaRing:
    """Group ring of the cyclic group of order p^(r-1) over Z/p^k.

    Elements are coefficient vectors indexed by powers of the generator
    gamma; gamma is the image of the principal unit 1 + p, so gamma_unit
    records which diamond operator realizes it on symbol spaces.
    """

    p: int
    r: int
    k: int
    order: int
    q: int
    gamma_unit: int
    experimental: bool

    def zero(self) -> "LambdaElement":
        return LambdaElement(self, (0,) * self.order)

    def one(self) -> "LambdaElement":
        return self.gamma_power(0)

    def gamma(self) -> "LambdaElement":
        return self.gamma_power(1)

    def gamma_power(self, j: int) -> "LambdaElement":
        coeffs = [0] * self.order
        coeffs[j % self.order] = 1
        return LambdaElement(self, tuple(coeffs))

    def element(self, coeffs: list[int]) -> "LambdaElement":
        if len(coeffs) != self.order:
            raise IwasawaError("coefficient vector has wrong length")
        return LambdaElement(self, tuple(c % self.q for c in coeffs))


@dataclass(frozen=True)
class LambdaElement:
    ring: LambdaRing
    coeffs: tuple[int, ...]

    def _check(self, other: "LambdaElement") -> None:
        if self.ring != other.ring:
            raise IwasawaError("elements of different rings")

    def __add__(self, other: "LambdaElement") -> "LambdaElement":
        self._check(other)
        q = self.ring.q
        return LambdaElement(self.ring, tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LambdaElement") -> "LambdaElement":
        self._check(other)
        q = self.ring.q
        return LambdaElement(self.ring, tuple((a - b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "LambdaElement") -> "LambdaElement":
        self._check(other)
        n = self.ring.order
        q = self.ring.q
        out = [0] * n
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[(i + j) % n] = (out[(i + j) % n] + a * b) % q
        return LambdaElement(self.ring, tuple(out))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def make_lambda_ring(p: int, r: int, k: int) -> LambdaRing:
    """Layer-r algebra at precision k; p = 2 is accepted but experimental."""
    if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise IwasawaError("p must be prime")
    if r < 1 or k < 1:
        raise IwasawaError("need r >= 1 and k >= 1")
    return LambdaRing(
        p=p,
        r=r,
        k=k,
        order=p ** (r - 1),
        q=p**k,
        gamma_unit=1 + p,
        experimental=(p == 2),
    )


def augmentation(x: LambdaElement, s: int) -> LambdaElement:
    """Natural surjection to layer s < r: gamma_r maps to gamma_s.

    Coefficients are summed over residue classes of the exponent; s = 1
    gives the classical augmentation to Z/p^k.
    """
    ring = x.ring
    if s < 1 or s >= ring.r:
        raise IwasawaError("need 1 <= s < r")
    target = make_lambda_ring(ring.p, s, ring.k)
    coeffs = [0] * target.order
    for j, c in enumerate(x.coeffs):
        coeffs[j % target.order] = (coeffs[j % target.order] + c) % ring.q
    return LambdaElement(target, tuple(coeffs))


@dataclass(frozen=True)
class LambdaModule:
    """Lattice with a gamma-action of order dividing p^(r-1) mod p^k.

    gamma_action is the matrix of gamma on the lattice basis; hecke_ops
    holds restricted operators registered as commuting with gamma.
    """

    base: LambdaRing
    underlying: Lattice
    gamma_action: IntMatrix
    hecke_ops: tuple[IntMatrix, ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.underlying.rank

    def to_json_dict(self) -> dict:
        return {
            "ring": {"p": self.base.p, "r": self.base.r, "k": self.base.k},
            "lattice": self.underlying.to_json_dict(),
            "gamma": self.gamma_action.to_json_dict(),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "LambdaModule":
        ring = make_lambda_ring(int(d["ring"]["p"]), int(d["ring"]["r"]), int(d["ring"]["k"]))
        return LambdaModule(
            base=ring,
            underlying=Lattice.from_json_dict(d["lattice"]),
            gamma_action=IntMatrix.from_json_dict(d["gamma"]),
        )


def _matrix_of(g) -> IntMatrix:
    return g.matrix if hasattr(g, "matrix") else g


def _power_mod(a: IntMatrix, e: int, q: int) -> IntMatrix:
    result = IntMatrix.identity(a.rows)
    base = a.reduce_mod(q)
    while e:
        if e & 1:
            result = result.mul_mod(base, q)
        base = base.mul_mod(base, q)
        e >>= 1
    return result


def module_from_action(
    lattice: Lattice,
    g,
    ring: LambdaRing,
    hecke_ops: tuple[IntMatrix, ...] = (),
) -> LambdaModule:
    """Wrap a lattice with the restriction of an ambient gamma-action.

    The action must preserve the lattice and have order dividing p^(r-1)
    modulo p^k; registered Hecke operators must commute with it.
    """
    mat = _matrix_of(g)
    try:
        restricted = restrict_to_lattice(mat, lattice)
    except ValueError as exc:
        raise IwasawaError(str(exc)) from exc
    q = ring.q
    power = _power_mod(restricted, ring.order, q)
    if not (power - IntMatrix.identity(lattice.rank)).is_zero_mod(q):
        raise IwasawaError("not a Lambda_r-action: gamma order does not divide p^(r-1)")
    for op in hecke_ops:
        lhs = op.mul_mod(restricted, q)
        rhs = restricted.mul_mod(op, q)
        if lhs != rhs:
            raise IwasawaError("registered Hecke operator does not commute with gamma")
    return LambdaModule(base=ring, underlying=lattice, gamma_action=restricted, hecke_ops=tuple(hecke_ops))


@dataclass(frozen=True)
class FreenessReport:
    """Outcome of the explicit Nakayama argument.

    free: whether M is free over the layer ring at precision k.
    rank: the free rank when free.
    residue_rank: dim over F_p of M/(p, gamma - 1)M (generator count).
    generators: lifted generators, as columns in lattice coordinates.
    kernel_witness: nonzero kernel vector of the evaluation map when not free,
        as coefficients (one block of group-ring coefficients per generator).
    """

    free: bool
    rank: int | None
    residue_rank: int
    generators: IntMatrix
    kernel_witness: list[int] | None


def freeness_rank(module: LambdaModule) -> FreenessReport:
    """Decide freeness by lifting a residue basis and testing the evaluation map.

    Generators are lifted from a basis of M/(p, gamma - 1)M; the candidate map
    sends the j-th group-ring basis vector of the i-th summand to
    gamma^j . m_i. Freeness holds iff the generator count times the group
    order equals the dimension and the assembled square matrix is invertible
    mod p^k; otherwise a kernel vector certifies the failure.
    """
    ring = module.base
    p, k, q = ring.p, ring.k, ring.q
    d = module.dim
    if d == 0:
        return FreenessReport(True, 0, 0, IntMatrix.zeros(0, 0), None)
    gamma = module.gamma_action
    a = gamma - IntMatrix.identity(d)
    vals, _, uinv, _, _ = _kernels.local_snf(a.to_rows(), p, k, want_uinv=True)
    # columns of Uinv whose invariant is a non-unit span the residue cokernel
    gen_cols = [i for i in range(d) if i >= min(d, a.cols) or vals[i] > 0]
    dbar = len(gen_cols)
    generators = IntMatrix.from_rows([[uinv[row][i] % q for i in gen_cols] for row in range(d)])

    # evaluation matrix: columns gamma^j . m_i, ordered i-major
    powers = [IntMatrix.identity(d)]
    for _ in range(ring.order - 1):
        powers.append(powers[-1].mul_mod(gamma, q))
    cols: list[list[int]] = []
    for i in range(dbar):
        m_i = [generators.get(row, i) for row in range(d)]
        vec = IntMatrix.from_rows([[x] for x in m_i])
        for pw in powers:
            image = pw @ vec
            cols.append([image.get(row, 0) % q for row in range(d)])
    phi = IntMatrix.from_rows([[cols[j][i] for j in range(len(cols))] for i in range(d)])

    if dbar * ring.order == d and unit_rank(phi, p, k) == d:
        return FreenessReport(True, dbar, dbar, generators, None)
    ker = kernel_mod(phi, p, k)
    witness = None
    if ker.cols > 0:
        witness = [ker.get(i, 0) for i in range(ker.rows)]
    return FreenessReport(False, None, dbar, generators, witness)


@dataclass(frozen=True)
class ControlReport:
    """Diagnostics for a base-change comparison along a trace map."""

    ok: bool
    surjective: bool
    kernel_in_ideal_image: bool
    ideal_image_in_kernel: bool
    fine_dim: int
    coarse_dim: int


def control_check(fine: LambdaModule, coarse: LambdaModule, t) -> ControlReport:
    """Whether t induces an isomorphism fine (x)_{Lambda_r} Lambda_s -> coarse.

    Requires t to intertwine the gamma-actions. The base-change kernel is the
    augmentation-ideal image (gamma^(p^(s-1)) - 1) . fine; the check is
    surjectivity of t mod p^k plus equality of ker(t) with that image, each
    containment verified explicitly.
    """
    ring_r, ring_s = fine.base, coarse.base
    if ring_r.p != ring_s.p or ring_r.k != ring_s.k:
        raise IwasawaError("modules live over incompatible towers")
    if ring_s.r >= ring_r.r:
        raise IwasawaError("need coarse layer below fine layer")
    p, k, q = ring_r.p, ring_r.k, ring_r.q

    tmat = _matrix_of(t)
    if tmat.rows != coarse.dim or tmat.cols != fine.dim:
        raise IwasawaError("trace map has wrong shape")
    if tmat.mul_mod(fine.gamma_action, q) != coarse.gamma_action.mul_mod(tmat, q):
        raise IwasawaError("trace map does not intertwine the gamma-actions")

    surjective = unit_rank(tmat, p, k) == coarse.dim

    omega = _power_mod(fine.gamma_action, ring_s.order, q) - IntMatrix.identity(fine.dim)
    omega = omega.reduce_mod(q)
    ideal_image_in_kernel = tmat.mul_mod(omega, q).is_zero()
    ker = kernel_mod(tmat, p, k)
    if ker.cols == 0:
        kernel_in_ideal_image = True
    else:
        kernel_in_ideal_image = image_membership_mod(omega, ker, p, k)

    ok = surjective and ideal_image_in_kernel and kernel_in_ideal_image
    return ControlReport(
        ok=ok,
        surjective=surjective,
        kernel_in_ideal_image=kernel_in_ideal_image,
        ideal_image_in_kernel=ideal_image_in_kernel,
        fine_dim=fine.dim,
        coarse_dim=coarse.dim,
    )
