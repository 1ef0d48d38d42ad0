from __future__ import annotations

import numpy as np
import pytest

from oracles import rank_mod_p
from wmorita import morita as mo
from wmorita.ggg import build_family_ggg, build_reduced_ggg
from wmorita.liealg import build_gl, build_sl, datum_from_partition
from wmorita.walg import build_walgebra

GL2 = build_gl(2, 3)
REG = datum_from_partition(GL2, (2,))
ZERO = datum_from_partition(GL2, (1, 1))
SL2 = datum_from_partition(build_sl(2, 5), (2,))


def _setup(datum, eta=None):
    M = build_reduced_ggg(datum, eta)
    W = build_walgebra(M)
    return M, W, mo.universal_basis(datum)


def test_universal_basis_examples():
    assert mo.universal_basis(ZERO).exponents == ((),)
    assert mo.universal_basis(REG).exponents == ((0,), (1,), (2,))
    assert mo.universal_basis(datum_from_partition(build_gl(3, 3), (3,))).size == 27


def test_freeness_examples():
    for datum in (REG, ZERO):
        M, W, B = _setup(datum)
        ok, wit = mo.freeness_certify(M, W, B)
        assert ok and wit["rank"] == M.dim
    rng = np.random.default_rng(0)
    for _ in range(3):
        M, W, B = _setup(SL2, SL2.random_eta(rng))
        assert mo.freeness_certify(M, W, B)[0]


def test_stacked_rank_against_monomialwise_oracle():
    M, W, B = _setup(REG)
    E = mo.basis_columns(M, B)
    rows = []
    for a in range(3 ** 4):
        rows.append(mo.apply_pbw(M, {a: 1}, E).T.reshape(-1).tolist())
    assert rank_mod_p(rows, 3) == 81 == mo.stacked_rank(M, B)
    ok, wit = mo.annihilator_null_certify(M, B)
    assert ok and wit["columns"] == 81


def test_phi_eta_examples():
    M, W, B = _setup(REG)
    ok, wit = mo.phi_eta_certify(M, B)
    assert ok and wit == {"source_dim": 81, "target_dim": 81, "rank": 81}
    M0, _, B0 = _setup(ZERO)
    assert mo.phi_eta_certify(M0, B0)[0]


def test_off_slice_target_vanishes():
    M, _, _ = _setup(REG)
    ok, wit = mo.offslice_certify(M)
    assert ok and wit["off_slice_dim"] == 0 and wit["on_slice_dim"] == 27


@pytest.mark.parametrize("datum", [REG, SL2], ids=["gl2", "sl2p5"])
def test_matrix_units(datum):
    rng = np.random.default_rng(1)
    M, W, B = _setup(datum, datum.random_eta(rng))
    frame = mo.build_frame(M, W, B)
    ok, wit = mo.matrix_units_certify(frame, rng, pairs=50)
    assert ok, wit
    assert wit["dimension_count"] == datum.p ** datum.n


def test_matrix_units_respect_universal_basis_order():
    rng = np.random.default_rng(2)
    M = build_reduced_ggg(REG)
    W = build_walgebra(M)
    B = mo.universal_basis(REG, permutation=[2, 0, 1])
    ok, wit = mo.matrix_units_certify(mo.build_frame(M, W, B), rng, pairs=10)
    assert ok, wit


@pytest.mark.parametrize("datum", [REG, ZERO, SL2], ids=["gl2", "zero", "sl2p5"])
def test_main_theorem(datum):
    rng = np.random.default_rng(3)
    etas = [datum.chi] + [datum.random_eta(rng) for _ in range(5)]
    cert = mo.main_theorem_certify(datum, etas, d=2)
    assert cert.verdict is True, (cert.surjectivity_step, cert.kernel_step, cert.rank_step)
    assert len(cert.per_eta) == 6


def test_dimension_identity_at_every_sample():
    rng = np.random.default_rng(4)
    for datum in (REG, SL2):
        for _ in range(3):
            M, W, B = _setup(datum, datum.random_eta(rng))
            assert datum.p ** datum.n == B.size ** 2 * W.dim == B.size * M.dim


def test_family_kernel_step():
    fam = build_family_ggg(REG)
    ok, wit = mo.family_kernel_certify(fam, mo.universal_basis(REG))
    assert ok, wit


def test_free_rank_step_leading_block_fallback():
    fam = build_family_ggg(REG)
    B = mo.universal_basis(REG)
    ok, wit = mo.free_rank_step(fam, B, 2)
    assert ok and wit["method"] == "truncated"
    old = mo.TRUNCATED_RANK_CAP
    try:
        mo.TRUNCATED_RANK_CAP = 0
        ok, wit = mo.free_rank_step(fam, B, 2)
        assert ok is None
        ok, wit = mo.free_rank_step(fam, B, 2, leading_rank=81)
        assert ok and wit["method"] == "leading-block"
    finally:
        mo.TRUNCATED_RANK_CAP = old
