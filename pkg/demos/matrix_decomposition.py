"""Build U_eta(gl_2) at p = 3 as a 3 x 3 matrix algebra over its W-algebra.

    python demos/matrix_decomposition.py
"""

from __future__ import annotations

import numpy as np

from wmorita import build_gl, build_reduced_ggg, build_walgebra, datum_from_partition
from wmorita import morita as mo

g = build_gl(2, 3)
datum = datum_from_partition(g, (2,))
rng = np.random.default_rng(0)
eta = datum.random_eta(rng)

M = build_reduced_ggg(datum, eta)
W = build_walgebra(M)
B = mo.universal_basis(datum)
print(f"dim g = {g.dim}, d = {datum.d}, D = {datum.D}")
print(f"eta = {eta.tolist()}")
print(f"dim pi_eta Q_chi = {M.dim}, dim W = {W.dim}, universal basis size = {B.size}")

ok, wit = mo.freeness_certify(M, W, B)
print(f"free over W on the universal basis: {ok} {wit}")
ok, wit = mo.phi_eta_certify(M, B)
print(f"U_eta(g) -> (pi_eta Q_chi)^D bijective: {ok} {wit}")
frame = mo.build_frame(M, W, B)
ok, wit = mo.matrix_units_certify(frame, rng, pairs=20)
print(f"matrix units multiply correctly: {ok} {wit}")
