from __future__ import annotations

import numpy as np
import pytest

from wmorita import equiv as eq
from wmorita import linalg as la
from wmorita import morita as mo
from wmorita.ggg import build_family_ggg, build_reduced_ggg
from wmorita.liealg import build_gl, build_sl, datum_from_partition
from wmorita.penv import ReductionContext
from wmorita.walg import build_walgebra, whittaker_vectors

GL2 = build_gl(2, 3)
REG = datum_from_partition(GL2, (2,))
ZERO = datum_from_partition(GL2, (1, 1))
SL2 = datum_from_partition(build_sl(2, 5), (2,))


def _iframe(datum, eta=None):
    M = build_reduced_ggg(datum, eta)
    W = build_walgebra(M)
    frame = mo.build_frame(M, W, mo.universal_basis(datum))
    return eq.build_idempotent_frame(frame)


@pytest.mark.parametrize("datum", [REG, ZERO, SL2], ids=["gl2", "zero", "sl2p5"])
def test_idempotents(datum):
    iframe = _iframe(datum)
    ok, wit = eq.idempotent_certify(iframe)
    assert ok, wit
    F = datum.field
    assert np.array_equal(F.matmul(iframe.iota, iframe.iota), iframe.iota)


def test_roundtrip_on_w_itself():
    iframe = _iframe(REG)
    W = iframe.frame.walg
    ok, wit = eq.skryabin_roundtrip_certify(iframe, W.left_operators(), np.random.default_rng(0), "W")
    assert ok, wit
    assert wit["dim_F(V)"] == 27 and wit["dim_G(F(V))"] == 9


def test_roundtrip_on_a_character():
    iframe = _iframe(REG)
    W = iframe.frame.walg
    chars = eq.w_characters(W)
    assert chars
    nu = [np.array([[v]]) for v in chars[0]]
    ok, wit = eq.skryabin_roundtrip_certify(iframe, nu, np.random.default_rng(0), "character")
    assert ok and wit["dim_F(V)"] == 3 and wit.get("tensor_quotient_dim") == 3


def test_noncommutative_w_characters_at_zero_nilpotent():
    # e = 0: W = U_0(gl_2) which has characters (through gl_2 -> gl_1, x -> tr x)
    iframe = _iframe(ZERO, np.zeros(4, dtype=np.int64))
    chars = eq.w_characters(iframe.frame.walg)
    assert chars
    W = iframe.frame.walg
    c = W.structure_constants()
    for vals in chars:
        v = np.array(vals)
        # chi(w_i w_k) = chi(w_i) chi(w_k)
        lhs = ZERO.field.matmul(c.reshape(-1, W.dim), v.reshape(-1, 1)).reshape(W.dim, W.dim)
        assert np.array_equal(lhs, np.outer(v, v) % 3)


def test_non_module_structure_is_rejected():
    iframe = _iframe(REG)
    W = iframe.frame.walg
    nu = [np.array([[1]]) for _ in range(W.dim)]
    ok, wit = eq.skryabin_roundtrip_certify(iframe, nu, np.random.default_rng(0))
    assert not ok and "error" in wit


def test_reverse_roundtrip_on_regular_and_ggg_modules():
    iframe = _iframe(REG)
    M = iframe.frame.module
    gens, act = eq.regular_module_action(ReductionContext.reduced(REG, M.eta))
    ok, wit = eq.reverse_roundtrip_certify(iframe, gens, act, "regular")
    assert ok and wit["dim"] == 81 and wit["dim_G"] == 27
    gens, act = eq.module_action(M)
    ok, wit = eq.reverse_roundtrip_certify(iframe, gens, act, "ggg")
    assert ok and wit["dim_G"] == 9


def test_whittaker_nilpotency():
    rng = np.random.default_rng(0)
    ok, wit = eq.whittaker_nilpotency_certify(REG, rng, modules=[build_reduced_ggg(REG)])
    assert ok and wit["i_max"] == 1
    dat = datum_from_partition(build_gl(3, 3), (2, 1))
    ok, wit = eq.whittaker_nilpotency_certify(dat, rng, samples=3)
    assert ok and wit["i_max"] <= 2


def test_whittaker_nilpotency_single_step_example():
    # y = E21, chi(y) = 1: (y - 1)^3 = y^3 - 1 = y^[3] + 1 - 1 = 0
    ctx = ReductionContext.family(REG)
    y = np.zeros(4, dtype=np.int64)
    y[REG.s] = 1
    elt = ctx.lie_element(y) - ctx.one()
    assert (elt ** 3).is_zero()


@pytest.mark.parametrize("datum,rank,dim_w", [(ZERO, 1, 81), (REG, 3, 9), (SL2, 5, 5)], ids=["zero", "gl2", "sl2p5"])
def test_free_rank_corollary(datum, rank, dim_w):
    ok, wit = eq.free_rank_corollary_certify(_iframe(datum))
    assert ok, wit
    assert (wit["D"], wit["dim_W"]) == (rank, dim_w)


@pytest.mark.parametrize("datum,d,count", [(REG, 0, 1), (REG, 2, 10), (ZERO, 1, 5)])
def test_pcentre_embedding(datum, d, count):
    ok, wit = eq.pcentre_embedding_certify(datum, d)
    assert ok and wit["monomials"] == count


@pytest.mark.parametrize("datum", [REG, ZERO, SL2], ids=["gl2", "zero", "sl2p5"])
def test_generalized_reduction(datum):
    rng = np.random.default_rng(2)
    fam = build_family_ggg(datum)
    for eta in (datum.chi, datum.random_eta(rng)):
        M = build_reduced_ggg(datum, eta)
        ok, wit = eq.generalized_reduction_certify(fam, M, 2 if datum is not ZERO else 1)
        assert ok, wit
        assert wit["quotient_dim"] == wit["dim_W"]


def test_generalized_reduction_reports_cap_as_inconclusive():
    fam = build_family_ggg(REG)
    ok, wit = eq.generalized_reduction_certify(fam, build_reduced_ggg(REG), 2, cap=10)
    assert ok is None and "cap" in wit["note"]


CASES = [REG, ZERO, SL2]


@pytest.mark.parametrize("datum", CASES, ids=["gl2", "zero", "sl2p5"])
@pytest.mark.parametrize("d", [0, 1, 2])
def test_pointed_system_matches_direct_truncation(datum, d):
    fam = build_family_ggg(datum)
    rng = np.random.default_rng(d)
    for eta in (datum.chi, datum.random_eta(rng)):
        M = build_reduced_ggg(datum, eta)
        a = eq.generalized_reduction_certify(fam, M, d)
        b = eq.generalized_reduction_direct(fam, M, d)
        assert a[0] == b[0]
        assert {k: v for k, v in a[1].items() if k != "parameters"} == b[1]


def test_pointed_kernel_reproduces_truncated_whittaker_vectors():
    # same dimension as the direct kernel, and the same image under evaluation at eta
    fam = build_family_ggg(REG)
    eta = REG.random_eta(np.random.default_rng(4))
    point = eq.eta_point(REG, eta)
    system = eq.PointedFamilySystem(fam, point)
    direct = eq.truncated_family_whittaker(fam, 2)
    K = system.kernel(2)
    assert K.shape[1] == direct.dim == 69
    F = REG.field
    exps = system.parameters(2)
    at_a = F.matmul(system.N, K[:system.t])
    ev = F.matmul(direct.evaluation_matrix(point), direct.basis)
    assert la.rank(np.hstack([ev, at_a]), F) == la.rank(ev, F) == system.t
    assert len(exps) == 10


def test_translated_operator_at_point_is_the_reduced_whittaker_system():
    fam = build_family_ggg(SL2)
    eta = SL2.random_eta(np.random.default_rng(3))
    M = build_reduced_ggg(SL2, eta)
    ops = eq.translated_operator(fam, eq.eta_point(SL2, eta))
    A = ops[(0,) * SL2.s]
    Wb = whittaker_vectors(M)
    assert not SL2.field.matmul(A, Wb).any()
    assert la.rank(A, SL2.field) == M.dim - Wb.shape[1]


def test_short_shifted_span_is_inconclusive():
    # gl2 at d = 1 is surjective but the kernel needs d = 2 to be spanned by shifts
    fam = build_family_ggg(REG)
    ok, wit = eq.generalized_reduction_certify(fam, build_reduced_ggg(REG), 1)
    assert ok is None and wit["minimal_d"] == 1 and wit["shifted_span"] < wit["kernel_dim"]


@pytest.mark.slow
def test_gl3_regular_reduction_needs_degree_four():
    dat = datum_from_partition(build_gl(3, 3), (3,))
    fam = build_family_ggg(dat)
    M = build_reduced_ggg(dat)
    ok, wit = eq.generalized_reduction_certify(fam, M, 2)
    assert ok is None and wit["minimal_d"] is None
    ok, wit = eq.generalized_reduction_certify(fam, M, 4)
    assert ok and wit["minimal_d"] == 3 and wit["quotient_dim"] == 27
