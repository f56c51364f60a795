from __future__ import annotations

import json

import pytest

from cuphom.cupcomplex import psi_data
from cuphom.cupform import ThreeForm, component_part, connect_sum, free_part
from cuphom.errors import RelationError, SchemaError, SemanticError
from cuphom.hypercube import (
    HyperboxComplex,
    MappingCone,
    NotQuasiIsomorphism,
    TotalComplex,
    _compress_axis,
    cancel_acyclic_edge,
    check_relations,
    compress,
    cone_rank,
    face_complex,
    gluing_reduce,
    hypercube_from_total,
    random_hyperbox,
    random_hypercube,
    reduce_to_triangle,
    theta_matrix,
    total_complex,
    truncation_lattice,
)
from cuphom.linalg import F2Matrix, cone_differential
from cuphom.surgery import build_cup_model_cube
from oracles import homology_mod2

I1 = F2Matrix.identity(1)
SQUARE = [(0, 0), (0, 1), (1, 0), (1, 1)]


def square(maps, dims=None):
    return HyperboxComplex((1, 1), dims or {v: 1 for v in SQUARE}, maps)


def brute_rank(t: TotalComplex) -> int:
    return homology_mod2(t.differential.to_dense().tolist())


def split_data(rng):
    """psi_data for a random pair of forms agreeing away from index 1."""
    ell = int(rng.integers(3, 6))
    nu = free_part(ThreeForm.random(rng, ell, density=0.4), 1)
    parts = [component_part(ThreeForm.random(rng, ell, density=0.4), 1) for _ in range(2)]
    return psi_data(connect_sum(nu, parts[0]), connect_sum(nu, parts[1]), 1)


class TestRelations:
    def test_zero_cube(self):
        assert check_relations(square({})) == []

    def test_single_edge(self):
        h = HyperboxComplex((1,), {(0,): 1, (1,): 1}, {((0,), (1,)): I1})
        assert check_relations(h) == []

    def test_noncommuting_square(self):
        h = square({((0, 0), (1, 0)): I1, ((1, 0), (0, 1)): I1})
        bad = check_relations(h)
        assert [(v.eps, v.step) for v in bad] == [((0, 0), (1, 1))]
        with pytest.raises(RelationError) as exc:
            total_complex(h)
        assert exc.value.violations == [((0, 0), (1, 1))]

    def test_second_path_fixes_square(self):
        h = square({((0, 0), (1, 0)): I1, ((1, 0), (0, 1)): I1})
        fixed = h.with_maps({((0, 0), (0, 1)): I1, ((0, 1), (1, 0)): I1})
        assert check_relations(fixed) == []

    def test_diagonal_homotopy(self):
        # one path is the identity, the other zero; the diagonal H has d H + H d = Id
        d = F2Matrix.from_entries(2, 2, [(1, 0)])
        htpy = F2Matrix.from_entries(2, 2, [(0, 1)])
        assert d @ htpy + htpy @ d == F2Matrix.identity(2)
        maps = {(v, (0, 0)): d for v in SQUARE}
        maps[((0, 0), (1, 0))] = F2Matrix.identity(2)
        maps[((1, 0), (0, 1))] = F2Matrix.identity(2)
        h = HyperboxComplex((1, 1), {v: 2 for v in SQUARE}, maps)
        assert [(v.eps, v.step) for v in check_relations(h)] == [((0, 0), (1, 1))]
        assert check_relations(h.with_maps({((0, 0), (1, 1)): htpy})) == []


class TestTotalComplex:
    def test_examples(self):
        assert total_complex(square({}, {v: 0 for v in SQUARE})).dim == 0
        edge = HyperboxComplex((1,), {(0,): 1, (1,): 1}, {((0,), (1,)): I1})
        assert total_complex(edge).homology_rank() == 0
        cube = build_cup_model_cube(ThreeForm(3, {(1, 2, 3): 1}))
        assert total_complex(cube).homology_rank() == 6

    def test_rejects_box(self, rng):
        with pytest.raises(SemanticError):
            total_complex(random_hyperbox(rng, (2, 1)))

    def test_random_cubes_and_roundtrip(self, rng):
        ranks = set()
        for _ in range(20):
            h = random_hypercube(rng, int(rng.integers(1, 4)))
            t = total_complex(h)
            assert t.is_complex()
            assert t.homology_rank() == brute_rank(t)
            assert hypercube_from_total(t.differential, t.tags, h.size).maps == h.maps
            ranks.add(t.homology_rank())
        assert len(ranks) > 1

    def test_gradings_shift_by_norm(self):
        h = HyperboxComplex((1,), {(0,): 1, (1,): 1}, {}, {(0,): [3], (1,): [3]})
        assert total_complex(h).gradings == (3, 2)


class TestJson:
    def test_roundtrip(self, rng):
        h = random_hyperbox(rng, (2, 1))
        assert HyperboxComplex.from_json(json.dumps(h.to_json_obj())) == h

    @pytest.mark.parametrize(
        "obj",
        [
            {"vertices": {}},
            {"vertices": {"0": {"dim": 1}, "2": {"dim": 1}}},
            {"vertices": {"0": {"dim": 1}, "1": {"dim": -1}}},
            {"vertices": {"0": {"dim": 1, "maps": {"1": [[0, 1]]}}, "1": {"dim": 1}}},
            {"vertices": {"0": {"dim": 1, "maps": {"2": [[0, 0]]}}, "1": {"dim": 1}}},
            {"vertices": {"0": {"dim": 1, "colour": 1}, "1": {"dim": 1}}},
            {"vertices": {"0": {"dim": 1}, "1": {"dim": 1}}, "extra": 0},
            {"vertices": {"0": {"dim": 1, "grading": [0, 0]}, "1": {"dim": 1}}},
        ],
    )
    def test_schema_errors(self, obj):
        with pytest.raises(SchemaError):
            HyperboxComplex.from_json_obj(obj)


class TestFaces:
    def test_full_and_vertex(self, rng):
        h = random_hypercube(rng, 2)
        t = total_complex(h)
        assert face_complex(t, "**").differential == t.differential
        assert face_complex(t, (1, 0)).differential == h.d0((1, 0))

    def test_cup_model_faces_match(self):
        t = total_complex(build_cup_model_cube(ThreeForm(3, {(1, 2, 3): 1})))
        top, bottom = face_complex(t, "**1"), face_complex(t, "**0")
        assert top.dim == bottom.dim
        assert top.homology_rank() == bottom.homology_rank()

    def test_bad_face_spec(self, rng):
        with pytest.raises(ValueError):
            face_complex(random_hypercube(rng, 2), "*2")


def compression_oracle(h: HyperboxComplex) -> F2Matrix:
    """Total differential of a compressed (d, 1) box, built as a cone of a product.

    Column k is the cone of C^{k,0} -> C^{k,1}. Consecutive columns are joined
    by the chain maps [[A_k, 0], [H_k, B_k]], and the compressed square is the
    cone of their ordered product.
    """
    d = h.size[0]

    def col_diff(k):
        return cone_differential(h.map((k, 0), (0, 1)), h.d0((k, 0)), h.d0((k, 1)))

    prod = F2Matrix.identity(h.dims[(0, 0)] + h.dims[(0, 1)])
    for k in range(d):
        a, hk, b = h.map((k, 0), (1, 0)), h.map((k, 0), (1, 1)), h.map((k, 1), (1, 0))
        step = F2Matrix.block([[a, F2Matrix(a.rows, b.cols)], [hk, b]])
        assert step @ col_diff(k) == col_diff(k + 1) @ step
        prod = step @ prod
    return cone_differential(prod, col_diff(0), col_diff(d))


def transpose_box(h: HyperboxComplex) -> HyperboxComplex:
    return HyperboxComplex(
        h.size[::-1],
        {v[::-1]: n for v, n in h.dims.items()},
        {(e[::-1], s[::-1]): m for (e, s), m in h.maps.items()},
    )


class TestCompress:
    def test_unit_box_unchanged(self, rng):
        h = random_hypercube(rng, 2)
        assert compress(h) == h

    def test_zero_homotopies(self):
        verts = [(i, j) for i in range(3) for j in range(2)]
        maps = {}
        for i, j in verts:
            if i < 2:
                maps[((i, j), (1, 0))] = I1
            if j < 1:
                maps[((i, j), (0, 1))] = I1
        h = HyperboxComplex((2, 1), {v: 1 for v in verts}, maps)
        assert compress(h).map((0, 0), (1, 1)).is_zero()

    def test_two_by_one_formula(self, rng):
        for _ in range(30):
            h = random_hyperbox(rng, (2, 1))
            c = compress(h)
            expected = h.map((1, 0), (1, 1)) @ h.map((0, 0), (1, 0)) + h.map((1, 1), (1, 0)) @ h.map((0, 0), (1, 1))
            assert c.map((0, 0), (1, 1)) == expected
            assert check_relations(c) == []

    @pytest.mark.parametrize("size", [(2, 1), (3, 1)])
    def test_against_cone_oracle(self, rng, size):
        for _ in range(20):
            h = random_hyperbox(rng, size)
            assert total_complex(compress(h)).differential == compression_oracle(h)

    def test_second_axis(self, rng):
        for _ in range(20):
            h = random_hyperbox(rng, (1, 3))
            ours = total_complex(compress(h))
            theirs = total_complex(compress(transpose_box(h)))
            assert ours.homology_rank() == theirs.homology_rank()
            assert transpose_box(compress(h)) == compress(transpose_box(h))

    def test_two_by_two(self, rng):
        for _ in range(20):
            h = random_hyperbox(rng, (2, 2))
            first = compress(h, order=(1, 0))
            second = compress(h, order=(0, 1))
            for c in (first, second):
                assert check_relations(c) == []
            assert total_complex(first).homology_rank() == total_complex(second).homology_rank()
            # axis 1 first leaves a (2, 1) box for the oracle
            mid = _compress_axis(h, 1)
            assert total_complex(first).differential == compression_oracle(mid)

    def test_three_axes_rejected(self, rng):
        with pytest.raises(SemanticError, match="general compression out of scope"):
            compress(random_hypercube(rng, 3))


class TestCancellation:
    def test_identity_cone_summand(self):
        d = F2Matrix.from_entries(3, 3, [(1, 0)])
        t = TotalComplex(d, [(0,), (1,), (2,)])
        out = cancel_acyclic_edge(t, 0, lambda p: p[0] <= 1)
        assert out.kind == "subcomplex"
        assert out.remainder.dim == 1 and out.rank == 1 == t.homology_rank()
        assert out.pairs == (((0,), (1,)),)

    def test_non_quasi_isomorphism_rejected(self):
        t = TotalComplex(F2Matrix(3, 3), [(0,), (1,), (2,)])
        with pytest.raises(NotQuasiIsomorphism) as exc:
            cancel_acyclic_edge(t, 0, lambda p: p[0] <= 1)
        assert exc.value.edge == ((0,), (1,))

    def test_unpaired_position(self):
        t = TotalComplex(F2Matrix.from_entries(3, 3, [(1, 0)]), [(0,), (1,), (2,)])
        with pytest.raises(SemanticError, match="no partner"):
            cancel_acyclic_edge(t, 0, lambda p: p[0] == 2)

    def test_triangle_shape(self, rng):
        for _ in range(10):
            data = split_data(rng)
            h = data.homology_dim
            for lo, hi in ((-1, 2), (-2, 3)):
                t = truncation_lattice(data.d1, data.d2, lo, hi)
                tri, steps = reduce_to_triangle(t)
                assert set(tri.positions()) == {(0, 0, 0), (1, 0, 0), (1, 0, 1), (1, 1, 0)}
                assert tri.homology_rank() == 2 * h - 2 * data.psi.rank() == brute_rank(t)
                assert [s.rank for s in steps] == [tri.homology_rank()] * 2

    def test_noncommuting_lattice_rejected(self):
        d1 = F2Matrix.from_entries(2, 2, [(0, 1)])
        d2 = F2Matrix.from_entries(2, 2, [(1, 0)])
        with pytest.raises(ValueError):
            truncation_lattice(d1, d2)


class TestMappingCone:
    def test_examples(self):
        assert cone_rank(MappingCone.zero_differentials(F2Matrix(3, 3))) == 6
        assert cone_rank(MappingCone.zero_differentials(F2Matrix.identity(3))) == 0
        f = F2Matrix.from_entries(4, 4, [(0, 1)])
        assert cone_rank(MappingCone.zero_differentials(f)) == 6

    def test_rejects_non_chain_map(self):
        d = F2Matrix.from_entries(2, 2, [(1, 0)])
        with pytest.raises(SemanticError):
            MappingCone(d, F2Matrix(2, 2), F2Matrix.from_entries(2, 2, [(0, 1)]))

    def test_unequal_homology_uses_direct_rank(self):
        assert cone_rank(MappingCone.zero_differentials(F2Matrix(1, 2))) == 3

    def test_random_formula(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 9))
            f = F2Matrix.from_dense(rng.integers(0, 2, (n, n)))
            z = F2Matrix(n, n)
            direct = homology_mod2(cone_differential(f, z, z).to_dense().tolist())
            assert cone_rank(MappingCone(z, z, f)) == direct == 2 * n - 2 * f.rank()


class TestGluing:
    def test_examples(self, rng):
        F = F2Matrix.from_dense(rng.integers(0, 2, (3, 3)))
        K = F2Matrix.from_dense(rng.integers(0, 2, (2, 3)))
        assert gluing_reduce(F, F2Matrix(3, 2), F2Matrix.identity(2), K) == F
        eye = F2Matrix.identity(2)
        assert gluing_reduce(F2Matrix(2, 2), eye, eye, eye) == eye
        assert cone_rank(MappingCone.zero_differentials(theta_matrix(F2Matrix(2, 2), eye, eye, eye))) == 0

    def test_singular_rejected(self):
        z = F2Matrix(1, 1)
        with pytest.raises(SemanticError):
            gluing_reduce(z, z, z, z)

    def test_random_cone_ranks_agree(self, rng):
        # with J invertible, cone(Θ) and cone(F - G J^{-1} K) have the same homology
        for _ in range(100):
            a, b = (int(x) for x in rng.integers(1, 5, 2))
            while True:
                J = F2Matrix.from_dense(rng.integers(0, 2, (b, b)))
                if J.rank() == b:
                    break
            F = F2Matrix.from_dense(rng.integers(0, 2, (a, a)))
            G = F2Matrix.from_dense(rng.integers(0, 2, (a, b)))
            K = F2Matrix.from_dense(rng.integers(0, 2, (b, a)))
            theta = theta_matrix(F, G, J, K)
            reduced = gluing_reduce(F, G, J, K)
            assert theta.rank() == reduced.rank() + b
            assert cone_rank(MappingCone.zero_differentials(theta)) == cone_rank(MappingCone.zero_differentials(reduced))
