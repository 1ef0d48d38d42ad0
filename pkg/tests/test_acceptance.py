"""Acceptance criteria, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import matpow_mod_p  # noqa: E402
from wmorita import cli  # noqa: E402
from wmorita.ggg import build_reduced_ggg  # noqa: E402
from wmorita.liealg import build_gl, build_sl, datum_from_partition  # noqa: E402
from wmorita.equiv import pcentre_embedding_certify  # noqa: E402
from wmorita.suites import RunConfig, Session, describe, run  # noqa: E402
from wmorita.walg import build_walgebra, commutant, theorem8_certify  # noqa: E402

# gl_3 runs use fewer random eta points than the CLI default to keep the suite short
GL3_ETAS = 2


def _line(n: int, ok: bool, detail: str, capsys=None) -> None:
    text = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is None:
        print(text)
    else:
        with capsys.disabled():
            print("\n" + text)


def _timed(cfg: RunConfig):
    start = time.perf_counter()
    rep = run(cfg)
    return rep, time.perf_counter() - start


def _w(rep, anchor):
    return rep.entry(anchor).witnesses


def _verdicts(rep) -> dict:
    return {e.anchor: e.verdict for e in rep.entries}


def _no_failures(rep, allowed_inconclusive=()) -> bool:
    return all(v == "pass" or (v == "inconclusive" and a in allowed_inconclusive) for a, v in _verdicts(rep).items())


# ---------------------------------------------------------------------------

def criterion_1():
    cfg = RunConfig("gl", 2, 3, partition=(2,), seed=42, eta_samples=5)
    rep, secs = _timed(cfg)
    info = describe(cfg)
    thm8 = _w(rep, "Thm-8(2)")
    ok = (info["dim U_eta(g)"] == 81 and _w(rep, "Cor-4.2")["dim"] == 27 and info["D(chi)"] == 3
          and thm8["dim"] == 9 and all(s["oracle_mode"] == "commutant" and s["oracle_dim"] == 9 for s in thm8["samples"])
          and _w(rep, "Cor-8.3")["z_degree"] == 2 and _no_failures(rep) and secs < 60)
    return ok, f"gl2 p=3 (2): dims 81/27/3/9, {len(rep.entries)} entries all pass, {secs:.1f}s"


def criterion_2():
    cfg = RunConfig("sl", 2, 5, partition=(2,), seed=42, eta_samples=5)
    rep, secs = _timed(cfg)
    info = describe(cfg)
    ok = (info["dim U_eta(g)"] == 125 and _w(rep, "Cor-4.2")["dim"] == 25 and _w(rep, "Thm-8(2)")["dim"] == 5
          and info["D(chi)"] == 5 and _no_failures(rep) and secs < 60)
    return ok, f"sl2 p=5 regular: dims 125/25/5, D=5, all pass, {secs:.1f}s"


def criterion_3():
    cfg = RunConfig("gl", 3, 3, partition=(3,), seed=42, eta_samples=GL3_ETAS, suites=("walg", "morita"))
    rep, secs = _timed(cfg)
    info = describe(cfg)
    thm8 = _w(rep, "Thm-8(2)")
    v = _verdicts(rep)
    ok = (info["d(chi)"] == 3 and info["D(chi)"] == 27 and info["dim pi_eta Q_chi"] == 729
          and thm8["dim"] == 27 and all(s["oracle_mode"] == "generator" for s in thm8["samples"])
          and all(v[a] == "pass" for a in ("Prop-5.1", "Thm-1(i)", "Thm-1(ii)", "Thm-1(iii)", "Thm-8(2)"))
          and _no_failures(rep) and secs < 900)
    return ok, f"gl3 p=3 (3): d=3, D=27, dim pi Q=729, dim W=27, Prop-5.1/Thm-1/Thm-8(2) pass, {secs:.0f}s"


DIM_ANCHORS = {"m-construction": ("dim_m", "d", "D", "dim_m_perp", "dim_g_minus_one"),
               "Dynkin": ("dim_centralizer",), "Lem-3.1": ("dim",), "Cor-4.2": ("dim",),
               "Lem-4.5": ("rank", "monomials"), "Thm-8(1)": ("dim",), "Thm-8(2)": ("dim", "expected")}


def _dimensions(rep) -> dict:
    return {(a, k): rep.entry(a).witnesses.get(k) for a, keys in DIM_ANCHORS.items() for k in keys}


def criterion_4():
    base = dict(family="gl", rank=3, prime=3, partition=(2, 1), seed=42, eta_samples=GL3_ETAS)
    rep, secs = _timed(RunConfig(**base))
    perm, psecs = _timed(RunConfig(**base, permute_basis=True, suites=("liealg", "ggg", "walg")))
    info = describe(RunConfig(**base))
    mc = _w(rep, "m-construction")
    same = _dimensions(rep) == _dimensions(perm) and _no_failures(perm, ("Eq-2",))
    clean = _no_failures(rep, ("Eq-2", "Sec8-Thm", "Cor-8.3"))
    ok = (info["dim m"] == 2 == info["d(chi)"] and mc["dim_g_minus_one"] == 2 and clean
          and same and secs + psecs < 900)
    return ok, (f"gl3 p=3 (2,1): dim m=d=2, dim g(-1)=2, no failures={clean}, "
                f"permuted dims identical={same}, {secs + psecs:.0f}s")


def criterion_5():
    cfg = RunConfig("gl", 2, 3, partition=(1, 1), seed=42, eta_samples=5)
    rep, secs = _timed(cfg)
    info = describe(cfg)
    ok = (info["dim m"] == 0 and info["D(chi)"] == 1 and _w(rep, "Cor-4.2")["dim"] == 81
          and _w(rep, "Thm-8(2)")["dim"] == 81 and _no_failures(rep) and secs < 5)
    return ok, f"gl2 p=3 e=0: m=0, D=1, pi Q = U, all pass, {secs:.2f}s"


def criterion_6():
    rng = np.random.default_rng(42)
    jac_bad = 0
    algebras = [build_gl(2, 3), build_sl(2, 5), build_gl(3, 3), build_sl(3, 5)]
    for g in algebras:
        for _ in range(100):
            x = g.field.random(rng, g.dim)
            got = g.to_matrix(g.jacobson_p_power(x))
            jac_bad += not np.array_equal(got, np.array(matpow_mod_p(g.to_matrix(x).tolist(), g.p, g.p)))
    modules = 0
    end_bad = 0
    lift_bad = 0
    cases = [((2, 3, "gl"), (2,)), ((2, 3, "gl"), (1, 1)), ((2, 5, "sl"), (2,)), ((2, 5, "gl"), (2,))]
    for (n, p, fam), part in cases:
        g = build_gl(n, p) if fam == "gl" else build_sl(n, p)
        dat = datum_from_partition(g, part)
        for eta in (None, dat.random_eta(rng), dat.random_eta(rng)):
            M = build_reduced_ggg(dat, eta)
            if M.dim > 100:
                continue
            W = build_walgebra(M)
            modules += 1
            ok, wit = theorem8_certify(M, W, rng, pairs=10)
            K = commutant(M)
            one = M.generator_vector()
            F = M.field
            for _ in range(10):
                E1 = F.matmul(K, F.random(rng, K.shape[1])).reshape(M.dim, M.dim)
                E2 = F.matmul(K, F.random(rng, K.shape[1])).reshape(M.dim, M.dim)
                lhs = F.matmul(F.matmul(E1, E2), one)
                end_bad += not np.array_equal(lhs, W.product(F.matmul(E2, one), F.matmul(E1, one)))
            end_bad += not (ok and wit["oracle_mode"] == "commutant")
    dat = datum_from_partition(build_gl(2, 3), (2,))
    W = build_walgebra(build_reduced_ggg(dat, dat.random_eta(rng)))
    for _ in range(50):
        u, v = W.random(rng), W.random(rng)
        lift_bad += not np.array_equal(W.product(u, v), W.product_reverse_lift(u, v))
    ok = jac_bad == 0 and end_bad == 0 and lift_bad == 0 and modules >= 8
    return ok, (f"p-power mismatches {jac_bad}/400, commutant mismatches {end_bad} on {modules} modules, "
                f"lift mismatches {lift_bad}/50")


PROPERTY_ANCHORS = ("Lie-axioms", "Form", "Restricted", "Xi-central", "Lem-4.2-coker", "Lem-4.5")


def criterion_7():
    start = time.perf_counter()
    ok = True
    for fam, n, p in (("gl", 2, 3), ("sl", 2, 5)):
        rep = run(RunConfig(fam, n, p, seed=42, suites=("liealg", "penv", "ggg")))
        ok = ok and all(rep.entry(a).verdict == "pass" for a in PROPERTY_ANCHORS)
        ok = ok and _w(rep, "Lem-4.5")["faithful_degree"] == 2
        coker = _w(rep, "Lem-4.2-coker")
        ok = ok and coker["maps"] >= 50 and coker["failures"] == 0
        # truncated p-centre faithfulness at d = 2
        emb_ok, emb = pcentre_embedding_certify(Session(RunConfig(fam, n, p, seed=42)).datum, 2)
        ok = ok and emb_ok and emb["rank"] == emb["monomials"]
    secs = time.perf_counter() - start
    ok = ok and secs < 120
    return ok, f"property anchors pass on gl2 and sl2, >= 50 cokernel maps each, {secs:.1f}s"


def criterion_8():
    results = []
    for fault, anchor in (("structure", "Lie-axioms"), ("ppower", "Restricted")):
        rep = run(RunConfig(seed=42, suites=("liealg", "penv"), inject_fault=fault))
        code = cli.main(["verify", "--quiet", "--suites", "liealg", "--inject-fault", fault, "--output", "/dev/null"])
        results.append(rep.entry(anchor).verdict == "fail" and rep.exit_code == 1 and code == 1)
    return all(results), f"structure/ppower faults: anchor fails and exit code 1 = {results}"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8}
SLOW = {3, 4}


@pytest.mark.parametrize("n", [pytest.param(n, marks=pytest.mark.slow) if n in SLOW else n for n in CRITERIA])
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n]()
    _line(n, ok, detail, capsys)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        _line(n, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
