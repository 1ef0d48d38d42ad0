from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import centralizer_dim_gl, gl_unit, matpow_mod_p
from wmorita import liealg
from wmorita.liealg import (ConstructionError, GradingError, LieAlgebraError, build_gl, build_nilpotent_datum,
                            build_sl, centralizer, datum_from_partition)

GL2 = build_gl(2, 3)
E11, E12, E21, E22 = (GL2.basis_vector(i) for i in range(4))

ALGEBRAS = [build_gl(1, 3), build_gl(2, 3), build_gl(3, 3), build_sl(2, 3), build_sl(2, 5), build_sl(3, 5),
            build_gl(2, 3, 2)]


def test_gl2_bracket_ppower_and_form():
    assert GL2.bracket(E11, E12).tolist() == E12.tolist()
    assert not GL2.jacobson_p_power(E12).any()
    assert GL2.form(E12, E21) == 1


def test_jacobson_on_basis_vector_is_stored_value():
    for i in range(GL2.dim):
        assert np.array_equal(GL2.jacobson_p_power(GL2.basis_vector(i)), GL2.ppower[i])


def test_jacobson_on_sum_of_off_diagonal_units():
    # (E12 + E21)^3 = E12 + E21 as matrices
    x = (E12 + E21) % 3
    assert GL2.jacobson_p_power(x).tolist() == x.tolist()


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: f"{g.name}-{g.field}")
def test_structure_axioms_exhaustive(g):
    for check in (g.check_antisymmetry, g.check_jacobi, g.check_restricted, g.check_form):
        ok, wit = check()
        assert ok, wit


@pytest.mark.parametrize("g", ALGEBRAS, ids=lambda g: f"{g.name}-{g.field}")
def test_jacobson_matches_matrix_power(g):
    rng = np.random.default_rng(7)
    p = g.p
    for _ in range(100):
        x = g.field.random(rng, g.dim)
        X = g.to_matrix(x)
        oracle = np.array(matpow_mod_p(X.tolist(), p, p)) if g.field.k == 1 else None
        got = g.jacobson_p_power(x)
        assert np.array_equal(got, g.matrix_p_power(x))
        if oracle is not None:
            assert np.array_equal(g.to_matrix(got), oracle)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 2), st.lists(st.integers(0, 2), min_size=4, max_size=4))
def test_p_semilinearity(lam, coords):
    x = np.array(coords)
    lhs = GL2.jacobson_p_power((lam * x) % 3)
    rhs = (pow(lam, 3, 3) * GL2.jacobson_p_power(x)) % 3
    assert np.array_equal(lhs, rhs)


def test_centre_splits_unless_p_divides_n():
    assert GL2.check_centre_split()[0]
    assert not build_gl(3, 3).check_centre_split()[0]


def test_sl_rejected_when_p_divides_n():
    with pytest.raises(LieAlgebraError):
        build_sl(3, 3)


def test_kappa_examples():
    assert not GL2.kappa(np.zeros(4, dtype=np.int64)).any()
    chi = GL2.kappa(E12)
    assert chi.tolist() == [0, 0, 1, 0]


def test_regular_gl2_datum():
    dat = datum_from_partition(GL2, (2,))
    assert dat.d == 1 and dat.D == 3 and dat.dim_m == 1
    # m is spanned by E21
    assert dat.m_basis[:, 0].tolist() == E21.tolist()
    assert centralizer(GL2, dat.e).shape[1] == 2
    for name, (ok, wit) in dat.check_invariants().items():
        assert ok, (name, wit)


def test_gl3_subregular_datum():
    g = build_gl(3, 3)
    dat = datum_from_partition(g, (2, 1))
    assert dat.d == 2 and dat.dim_m == 2 and dat.D == 9
    # g(-1) has dimension two and contributes one isotropic vector
    assert int(np.sum(dat.weights == -1)) == 2
    assert centralizer(g, dat.e).shape[1] == 5
    assert centralizer_dim_gl(gl_unit(3, 0, 1), 3) == 5
    for name, (ok, wit) in dat.check_invariants().items():
        assert ok, (name, wit)


def test_zero_nilpotent_datum():
    dat = datum_from_partition(GL2, (1, 1))
    assert dat.d == 0 and dat.D == 1 and dat.dim_m == 0
    assert centralizer(GL2, dat.e).shape[1] == 4


@pytest.mark.parametrize("partition", [(3,), (2, 1), (1, 1, 1)])
def test_centralizer_dimension_against_oracle(partition):
    g = build_gl(3, 3)
    dat = datum_from_partition(g, partition)
    E = g.to_matrix(dat.e).tolist()
    assert centralizer(g, dat.e).shape[1] == centralizer_dim_gl(E, 3) == g.dim - 2 * dat.d


def test_e_outside_degree_two_is_rejected():
    e, w = liealg.partition_data(GL2, (2,))
    with pytest.raises(GradingError):
        build_nilpotent_datum(GL2, e, np.zeros_like(w))


def test_permuted_basis_gives_same_dimensions():
    g = build_gl(3, 3)
    perm = list(np.random.default_rng(1).permutation(g.dim))
    a = datum_from_partition(g, (2, 1))
    b = datum_from_partition(g.permuted(perm), (2, 1))
    assert (a.d, a.dim_m, a.centralizer.shape[1]) == (b.d, b.dim_m, b.centralizer.shape[1])


def test_corruption_hooks_break_axioms():
    assert not GL2.with_corrupted_structure(0, 1, 1).check_jacobi()[0] or \
        not GL2.with_corrupted_structure(0, 1, 1).check_antisymmetry()[0]
    assert not GL2.with_corrupted_ppower(0, 0).check_restricted()[0]


def test_datum_construction_failure_is_reported():
    # a grading with e in degree two but no valid centralizer condition
    e, w = liealg.partition_data(GL2, (2,))
    with pytest.raises((GradingError, ConstructionError)):
        build_nilpotent_datum(GL2, e, w * 2)
