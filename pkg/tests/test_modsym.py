"""Symbol spaces: counts, quotient ranks, boundary, cusps, pairing, paths."""

import random
from math import gcd

import pytest

from ordsym.exactlin import IntMatrix, local_diag
from ordsym.modsym import (
    CuspSpace,
    LevelParams,
    UnsupportedLevelError,
    boundary_map,
    build_space,
    cusp_equivalent,
    cuspidal_lattice,
    genus,
    intersection_pairing,
    num_cusps,
    pair_raw_chains,
    path_to_symbols,
    quotient_rank,
    sl2_index,
)

from helpers import bareiss_det, solve_int

# frozen structural table: level -> (classes, cusps, genus, rank)
STRUCTURE = {
    11: (60, 10, 1, 11),
    15: (96, 16, 1, 17),
    33: (480, 40, 21, 81),
    45: (864, 64, 41, 145),
}


class TestClosedForms:
    @pytest.mark.parametrize("m,idx", [(11, 120), (15, 192), (33, 960), (45, 1728), (5, 24), (6, 24)])
    def test_sl2_index(self, m, idx):
        assert sl2_index(m) == idx

    @pytest.mark.parametrize("m,nc", [(1, 1), (2, 2), (3, 2), (4, 3), (5, 4), (11, 10), (15, 16), (33, 40), (45, 64)])
    def test_num_cusps(self, m, nc):
        assert num_cusps(m) == nc

    @pytest.mark.parametrize("m,g", [(1, 0), (4, 0), (5, 0), (11, 1), (15, 1), (33, 21), (45, 41)])
    def test_genus(self, m, g):
        assert genus(m) == g

    @pytest.mark.parametrize("m,rk", [(11, 11), (15, 17), (33, 81), (45, 145)])
    def test_quotient_rank(self, m, rk):
        assert quotient_rank(m) == rk


class TestLevelParams:
    def test_level_product(self):
        assert LevelParams(5, 3, 2).level == 45
        assert LevelParams(11, 3, 0).level == 11

    def test_tame_level_must_be_coprime_to_p(self):
        with pytest.raises(ValueError):
            LevelParams(6, 3, 1)

    def test_p_must_be_prime(self):
        with pytest.raises(ValueError):
            LevelParams(5, 4, 1)

    def test_small_levels_unsupported(self):
        with pytest.raises(UnsupportedLevelError):
            LevelParams(1, 3, 1)
        with pytest.raises(UnsupportedLevelError):
            LevelParams(1, 2, 2)
        with pytest.raises(UnsupportedLevelError):
            LevelParams(3, 5, 0)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            LevelParams(5, 3, -1)


class TestBuildSpace:
    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_structural_counts(self, spaces, level):
        classes, cusps, g, rank = STRUCTURE[level]
        sp = spaces[level]
        assert sp.n_classes == classes
        assert sp.cusps.count == cusps
        assert sp.genus == g
        assert sp.rank == rank

    def test_projection_section_identity(self, space15):
        assert space15.proj @ space15.sect == IntMatrix.identity(space15.rank)

    def test_sign_classes_identified(self, space15):
        m = space15.level
        for c, d in [(1, 0), (2, 7), (3, 4)]:
            assert space15.index(c, d) == space15.index((-c) % m, (-d) % m)

    def test_relation_chains_die_in_quotient(self, space15):
        sp = space15
        for i in [0, 5, 17]:
            vec = [0] * sp.n_classes
            vec[i] += 1
            vec[sp.s_perm[i]] += 1
            assert all(x == 0 for x in sp.proj.apply(vec)), "two-term relation survives"
            vec = [0] * sp.n_classes
            vec[i] += 1
            vec[sp.u_perm[i]] += 1
            vec[sp.u_perm[sp.u_perm[i]]] += 1
            assert all(x == 0 for x in sp.proj.apply(vec)), "three-term relation survives"

    def test_permutation_orders(self, space11):
        sp = space11
        n = sp.n_classes
        assert all(sp.s_perm[sp.s_perm[i]] == i for i in range(n))
        assert all(sp.u_perm[sp.u_perm[sp.u_perm[i]]] == i for i in range(n))

    def test_fans_partition_classes(self, space33):
        sp = space33
        seen = sorted(i for orbit in sp.t_orbits for i in orbit)
        assert seen == list(range(sp.n_classes))
        assert len(sp.t_orbits) == sp.cusps.count


class TestBoundary:
    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_boundary_columns_have_degree_zero(self, spaces, level):
        b = spaces[level].boundary_raw
        for j in range(b.cols):
            assert sum(b.get(i, j) for i in range(b.rows)) == 0

    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_boundary_image_rank(self, spaces, level):
        from ordsym.exactlin import kernel_int

        sp = spaces[level]
        b = boundary_map(sp)
        assert b.cols - kernel_int(b).rank == sp.cusps.count - 1

    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_cuspidal_rank_is_twice_genus(self, spaces, level):
        sp = spaces[level]
        assert cuspidal_lattice(sp).rank == 2 * sp.genus

    def test_boundary_kills_relations(self, space15):
        # the raw boundary must vanish on the two- and three-term relations,
        # otherwise the quotient boundary would depend on the section
        sp = space15
        for i in range(sp.n_classes):
            col_sum = [
                sp.boundary_raw.get(t, i) + sp.boundary_raw.get(t, sp.s_perm[i])
                for t in range(sp.cusps.count)
            ]
            assert all(x == 0 for x in col_sum)
            tri = [
                sp.boundary_raw.get(t, i)
                + sp.boundary_raw.get(t, sp.u_perm[i])
                + sp.boundary_raw.get(t, sp.u_perm[sp.u_perm[i]])
                for t in range(sp.cusps.count)
            ]
            assert all(x == 0 for x in tri)


class TestCusps:
    def test_equivalence_is_sign_insensitive(self):
        assert cusp_equivalent(15, (1, 5), (-1, -5 % 15))

    def test_infinite_cusp(self, space11):
        i1 = space11.cusps.index_of(1, 0)
        i2 = space11.cusps.index_of(-1, 0)
        assert i1 == i2

    def test_index_of_unknown_raises(self):
        cs = CuspSpace(11, ((1, 0),))
        with pytest.raises(ValueError):
            cs.index_of(0, 1)


class TestIntersectionPairing:
    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_antisymmetric(self, spaces, level):
        g = intersection_pairing(spaces[level])
        assert g == -g.transpose()

    @pytest.mark.parametrize("level", sorted(STRUCTURE))
    def test_unimodular(self, spaces, level):
        g = intersection_pairing(spaces[level])
        assert abs(bareiss_det(g)) == 1

    def test_level11_standard_symplectic(self, space11):
        g = intersection_pairing(space11)
        assert g.to_rows() in ([[0, -1], [1, 0]], [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("p", [3, 5, 11])
    def test_perfect_at_odd_primes(self, space45, p):
        g = intersection_pairing(space45)
        assert all(v == 0 for v in local_diag(g, p, 10))

    def test_self_pairing_vanishes(self, space15):
        sp = space15
        lat = cuspidal_lattice(sp)
        rng = random.Random(4)
        for _ in range(5):
            z = [0] * sp.rank
            for v in lat.basis:
                c = rng.randint(-3, 3)
                z = [a + c * b for a, b in zip(z, v)]
            raw = sp.raw_chain_of(z)
            assert pair_raw_chains(sp, raw, raw) == 0

    def test_bilinear(self, space15):
        sp = space15
        lat = cuspidal_lattice(sp)
        a = sp.raw_chain_of(list(lat.basis[0]))
        b = sp.raw_chain_of(list(lat.basis[1]))
        ab = [x + y for x, y in zip(a, b)]
        for probe in (a, b, ab):
            lhs = pair_raw_chains(sp, ab, probe)
            assert lhs == pair_raw_chains(sp, a, probe) + pair_raw_chains(sp, b, probe)

    def test_relation_chains_pair_to_zero(self, space15):
        # adding a relation vector to a cycle must not change any pairing
        sp = space15
        lat = cuspidal_lattice(sp)
        cycle = sp.raw_chain_of(list(lat.basis[0]))
        for i in [2, 9, 31]:
            two = [0] * sp.n_classes
            two[i] += 1
            two[sp.s_perm[i]] += 1
            tri = [0] * sp.n_classes
            tri[i] += 1
            tri[sp.u_perm[i]] += 1
            tri[sp.u_perm[sp.u_perm[i]]] += 1
            for rel in (two, tri):
                assert pair_raw_chains(sp, cycle, rel) == 0
                assert pair_raw_chains(sp, rel, cycle) == 0

    def test_open_chain_rejected(self, space11):
        sp = space11
        raw = [0] * sp.n_classes
        raw[0] = 1  # a single symbol is not closed
        with pytest.raises(AssertionError):
            pair_raw_chains(sp, raw, raw)


class TestPaths:
    def test_infinity_to_zero(self, space11):
        sp = space11
        chain = path_to_symbols(sp, (1, 0), (0, 1))
        assert chain == {sp.index(-1, 0): 1}

    def test_boundary_of_path(self, space15):
        sp = space15
        rng = random.Random(11)
        cusp_list = [(1, 0), (0, 1), (1, 3), (2, 5), (-1, 4), (1, 5), (4, 15), (7, 3)]
        for _ in range(12):
            alpha, beta = rng.sample(cusp_list, 2)
            chain = path_to_symbols(sp, alpha, beta)
            vec = [0] * sp.n_classes
            for i, cnt in chain.items():
                vec[i] = cnt
            out = sp.boundary_raw.apply(vec)
            expected = [0] * sp.cusps.count
            expected[sp.cusps.index_of(*beta)] += 1
            expected[sp.cusps.index_of(*alpha)] -= 1
            assert out == expected, f"path {alpha} -> {beta} has wrong boundary"

    def test_path_additivity_in_quotient(self, space15):
        sp = space15
        a, b, c = (1, 0), (2, 5), (1, 3)
        total = {}
        for chain, sign in [
            (path_to_symbols(sp, a, b), 1),
            (path_to_symbols(sp, b, c), 1),
            (path_to_symbols(sp, a, c), -1),
        ]:
            for i, cnt in chain.items():
                total[i] = total.get(i, 0) + sign * cnt
        vec = [0] * sp.n_classes
        for i, cnt in total.items():
            vec[i] = cnt
        assert all(x == 0 for x in sp.proj.apply(vec))


class TestActionMatrix:
    def test_identity_action(self, space15):
        sp = space15
        raw = sp.action_matrix([(1, 0, 0, 1)])
        assert sp.push_to_quotient(raw) == IntMatrix.identity(sp.rank)

    def test_action_preserves_relation_span(self, space15):
        # a full degree-2 coset sum keeps the relation span stable, which is
        # what makes the quotient operator independent of the section; a
        # proper subset of it does not
        sp = space15
        full = [(1, 0, 0, 2), (1, 0, 1, 2), (2, 0, 0, 1), (2, 1, 0, 1)]
        raw = sp.action_matrix(full)
        for i in range(sp.n_classes):
            vec = [0] * sp.n_classes
            vec[i] += 1
            vec[sp.s_perm[i]] += 1
            img = raw.apply(vec)
            assert all(x == 0 for x in sp.proj.apply(img)), "image left the relation span"

    def test_partial_coset_sum_breaks_relations(self, space15):
        sp = space15
        raw = sp.action_matrix([(1, 0, 0, 2), (2, 0, 0, 1), (1, 1, 0, 2)])
        broken = False
        for i in range(sp.n_classes):
            vec = [0] * sp.n_classes
            vec[i] += 1
            vec[sp.s_perm[i]] += 1
            if any(x != 0 for x in sp.proj.apply(raw.apply(vec))):
                broken = True
                break
        assert broken, "expected a non-coset sum to leave the relation span"
