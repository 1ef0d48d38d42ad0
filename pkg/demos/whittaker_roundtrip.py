"""Send W-modules to Whittaker modules and back for sl_2 at p = 5.

    python demos/whittaker_roundtrip.py
"""

from __future__ import annotations

import numpy as np

from wmorita import build_reduced_ggg, build_sl, build_walgebra, datum_from_partition
from wmorita import equiv as eq
from wmorita import morita as mo

datum = datum_from_partition(build_sl(2, 5), (2,))
M = build_reduced_ggg(datum)
W = build_walgebra(M)
iframe = eq.build_idempotent_frame(mo.build_frame(M, W, mo.universal_basis(datum)))
rng = np.random.default_rng(1)

ok, wit = eq.skryabin_roundtrip_certify(iframe, W.left_operators(), rng, "W")
print(f"V = W (dim {W.dim}): {ok} {wit}")
for vals in eq.w_characters(W)[:3]:
    nu = [np.array([[v]]) for v in vals]
    ok, wit = eq.skryabin_roundtrip_certify(iframe, nu, rng, "character")
    print(f"character {list(vals)}: {ok} dim F(V) = {wit.get('dim_F(V)')}")
gens, act = eq.module_action(M)
ok, wit = eq.reverse_roundtrip_certify(iframe, gens, act, "Gelfand-Graev")
print(f"Gelfand-Graev module back and forth: {ok} {wit}")
