"""Torus-reduction pipeline: Cayley matrices, lattices, theta calculus."""

import random

import pytest

from projlaplace import appell, presets
from projlaplace.gkz import (
    ExponentData,
    GkzData,
    ReductionPlan,
    ThetaOperator,
    box_operators,
    cayley,
    hermite_normal_form,
    homogeneity_relations,
    lattice_basis,
    reduce_to_system,
)

F2_MATRIX = [
    [1, 1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 1, 1],
    [0, 1, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 1],
]


class TestCayley:
    def test_f2_combined_matrix(self):
        assert cayley(presets.f2_exponent_data()) == F2_MATRIX

    def test_single_monomial(self):
        data = ExponentData(blocks=(((3,),),), k=1)
        assert cayley(data) == [[1], [3]]

    def test_f4_matrix_shape_and_reduction(self):
        A = cayley(presets.f4_exponent_data())
        assert len(A) == 4 and len(A[0]) == 6
        out = reduce_to_system(presets.f4_gkz_data(), presets.f4_reduction_plan(), appell.F4_TABLE)
        assert out == appell.system("F4")

    def test_ragged_block_rejected(self):
        with pytest.raises(ValueError):
            ExponentData(blocks=(((0, 1), (0,)),), k=2)


class TestLatticeBasis:
    def test_f2_lattice_matches_reference(self):
        basis = lattice_basis(F2_MATRIX)
        assert hermite_normal_form(basis) == hermite_normal_form(presets.f2_reference_lattice())

    def test_identity_matrix_trivial_kernel(self):
        eye = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
        assert lattice_basis(eye) == []

    def test_rank_one_row(self):
        basis = lattice_basis([[1, 1]])
        assert hermite_normal_form(basis) == hermite_normal_form([[1, -1]])

    def test_kernel_vectors_annihilated(self):
        rng = random.Random(4)
        for _ in range(20):
            rows = rng.randint(1, 3)
            cols = rng.randint(rows, rows + 3)
            A = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)]
            for vec in lattice_basis(A):
                assert all(sum(a * v for a, v in zip(row, vec)) == 0 for row in A)

    def test_hnf_invariance_under_row_operations(self):
        base = presets.f2_reference_lattice()
        shuffled = [base[2], base[0], [a + b for a, b in zip(base[1], base[3])], base[3], base[1]]
        assert hermite_normal_form(base) == hermite_normal_form(shuffled)


class TestBoxOperators:
    def test_first_order_display(self):
        T = appell.F2_TABLE
        lhs, rhs = box_operators([presets.f2_reference_lattice()[2]], T)[0]
        assert str(lhs) == "(1)*v5^-1*th5"
        assert str(rhs) == "(1)*v4^-1*th4"

    def test_second_order_display(self):
        T = appell.F2_TABLE
        lhs, rhs = box_operators([presets.f2_reference_lattice()[0]], T)[0]
        assert str(lhs) == "(1)*v4^-1*v9^-1*th4*th9"
        assert str(rhs) == "(1)*v6^-1*v7^-1*th6*th7"

    def test_repeated_index_square_rule(self):
        T = appell.F2_TABLE
        lhs, rhs = box_operators([[2, -2]], T)[0]
        # d^2 = v^-2 (theta^2 - theta) on both sides
        assert str(lhs) == "(-1)*v1^-2*th1 + (1)*v1^-2*th1^2"
        assert str(rhs) == "(-1)*v2^-2*th2 + (1)*v2^-2*th2^2"

    def test_normal_ordering_is_associative(self):
        T = appell.F2_TABLE
        rng = random.Random(8)

        def random_op(n=2):
            terms = []
            for _ in range(rng.randint(1, 3)):
                coef = T.const(rng.randint(-3, 3))
                v_exp = tuple(rng.randint(-2, 2) for _ in range(n))
                th_exp = tuple(rng.randint(0, 2) for _ in range(n))
                terms.append((coef, v_exp, th_exp))
            return ThetaOperator(n, terms)

        for _ in range(25):
            A, B, C = random_op(), random_op(), random_op()
            assert (A * B) * C == A * (B * C)

    def test_commutation_rule(self):
        T = appell.F2_TABLE
        n = 1
        theta = ThetaOperator.from_term(n, T.one, (0,), (1,))
        v = ThetaOperator.from_term(n, T.one, (1,), (0,))
        lhs = theta * v
        rhs = v * theta + v
        assert lhs == rhs

    def test_box_operators_homogeneous(self):
        # hyperplane condition: equal total derivative order on both sides
        data = presets.f2_gkz_data()
        for vec in data.lattice:
            pos = sum(e for e in vec if e > 0)
            neg = -sum(e for e in vec if e < 0)
            assert pos == neg


class TestHomogeneity:
    def test_f2_rows(self):
        data = presets.f2_gkz_data()
        rels = homogeneity_relations(data)
        T = appell.F2_TABLE
        row4, rhs4 = rels[3]
        assert row4 == (0, 1, 0, 0, 0, 0, 0, 1, 0)
        assert rhs4 == -T.var("beta1")
        row3, rhs3 = rels[2]
        assert row3 == (0, 0, 0, 0, 0, 0, 1, 1, 1)
        assert rhs3 == -T.var("alpha")

    def test_hyperplane_check(self):
        data = presets.f2_gkz_data()
        for j in range(data.n_vars):
            assert sum(data.A[i][j] for i in range(data.m)) == 1

    def test_invalid_lattice_rejected(self):
        data = presets.f2_gkz_data()
        with pytest.raises(ValueError):
            GkzData(A=data.A, gamma=data.gamma, lattice=((1, 0, 0, 0, 0, 0, 0, 0, 0),), m=3, k=2)


class TestReduce:
    def test_f2_reduction_reproduces_system(self):
        out = reduce_to_system(presets.f2_gkz_data(), presets.f2_reduction_plan(), appell.F2_TABLE)
        assert out == appell.system("F2")

    def test_reduction_is_deterministic(self):
        data = presets.f2_gkz_data()
        plan = presets.f2_reduction_plan()
        first = reduce_to_system(data, plan, appell.F2_TABLE)
        second = reduce_to_system(data, plan, appell.F2_TABLE)
        assert first == second

    def test_plan_with_one_variable_rejected(self):
        T = appell.F2_TABLE
        with pytest.raises(ValueError):
            ReductionPlan(variable_defs=(("x", 1),), slice={})

    def test_inconsistent_slice_rejected(self):
        data = presets.f2_gkz_data()
        plan = presets.f2_reduction_plan()
        bad_slice = dict(plan.slice)
        bad_slice[7] = appell.F2_TABLE.var("y")  # x monomial no longer reproduced
        bad = ReductionPlan(variable_defs=plan.variable_defs, slice=bad_slice)
        with pytest.raises(ValueError):
            reduce_to_system(data, bad, appell.F2_TABLE)

    def test_f2_output_is_integrable(self):
        from projlaplace.rank4 import connection_form, maurer_cartan_residual

        out = reduce_to_system(presets.f2_gkz_data(), presets.f2_reduction_plan(), appell.F2_TABLE)
        res = maurer_cartan_residual(connection_form(out))
        assert all(entry.is_zero for row in res for entry in row)
