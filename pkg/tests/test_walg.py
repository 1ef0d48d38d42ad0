from __future__ import annotations

import numpy as np
import pytest

from wmorita import linalg as la
from wmorita.ggg import build_reduced_ggg
from wmorita.liealg import build_gl, build_sl, datum_from_partition
from wmorita.walg import build_walgebra, commutant, endomorphism_oracle, theorem8_certify, whittaker_vectors

GL2 = build_gl(2, 3)
REG = datum_from_partition(GL2, (2,))


def _walg(datum, eta=None):
    M = build_reduced_ggg(datum, eta)
    return M, build_walgebra(M)


def test_zero_datum_whittaker_vectors_are_everything():
    M = build_reduced_ggg(datum_from_partition(GL2, (1, 1)))
    assert whittaker_vectors(M).shape[1] == M.dim == 81


def test_gl2_regular_dimension():
    M, W = _walg(REG)
    assert W.dim == 9 == 3 ** REG.centralizer.shape[1]


def test_gl1_abelian_oracle():
    dat = datum_from_partition(build_gl(1, 3), (1,))
    M, W = _walg(dat)
    ora = endomorphism_oracle(M, W)
    assert ora["mode"] == "commutant" and ora["dim"] == M.dim == W.dim == 3


def test_sl2_p5_dimension():
    dat = datum_from_partition(build_sl(2, 5), (2,))
    M, W = _walg(dat)
    assert (M.dim, W.dim) == (25, 5)
    ok, wit = theorem8_certify(M, W, np.random.default_rng(0))
    assert ok, wit


@pytest.mark.slow
def test_gl3_regular_dimension():
    dat = datum_from_partition(build_gl(3, 3), (3,))
    M, W = _walg(dat)
    assert W.dim == 27
    ok, wit = theorem8_certify(M, W, np.random.default_rng(0), pairs=3)
    assert ok and wit["oracle_mode"] == "generator"


def test_unit_associativity_and_lift_independence():
    rng = np.random.default_rng(5)
    M, W = _walg(REG, REG.random_eta(rng))
    F = W.field
    for _ in range(50):
        u, v, w = W.random(rng), W.random(rng), W.random(rng)
        assert np.array_equal(W.product(W.unit(), u), u)
        assert np.array_equal(W.product(u, W.unit()), u)
        assert np.array_equal(W.product(W.product(u, v), w), W.product(u, W.product(v, w)))
        assert np.array_equal(W.product(u, v), W.product_reverse_lift(u, v))
        assert W.is_whittaker(W.product(u, v))
    assert F.p == 3


def test_commutant_is_opposite_to_whittaker_product():
    # for E1, E2 in End(M): (E1 E2)(1) = E2(1) * E1(1)
    rng = np.random.default_rng(6)
    M, W = _walg(REG, REG.random_eta(rng))
    F = M.field
    K = commutant(M)
    assert K.shape[1] == W.dim
    n = M.dim
    one = M.generator_vector()
    for _ in range(50):
        c1, c2 = F.random(rng, K.shape[1]), F.random(rng, K.shape[1])
        E1 = F.matmul(K, c1).reshape(n, n)
        E2 = F.matmul(K, c2).reshape(n, n)
        u, v = F.matmul(E1, one), F.matmul(E2, one)
        assert np.array_equal(F.matmul(F.matmul(E1, E2), one), W.product(v, u))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_theorem8_random_eta(seed):
    rng = np.random.default_rng(seed)
    M, W = _walg(REG, REG.random_eta(rng))
    ok, wit = theorem8_certify(M, W, rng)
    assert ok and wit["dim"] == 9 and wit["oracle_dim"] == 9


def test_oracle_modes_agree():
    M, W = _walg(REG)
    small = endomorphism_oracle(M, W, cap=100)
    gen = endomorphism_oracle(M, W, cap=0)
    assert small["mode"] == "commutant" and gen["mode"] == "generator"
    assert small["dim"] == gen["dim"] and gen["commutes"]


def test_base_change_keeps_dimensions():
    g9 = build_gl(2, 3, 2)
    dat = datum_from_partition(g9, (2,))
    M, W = _walg(dat, dat.random_eta(np.random.default_rng(1)))
    assert (M.dim, W.dim) == (27, 9)
    assert la.rank(W.basis, g9.field) == 9
