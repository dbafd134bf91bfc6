"""
Fourier transform on locally constant functions
===============================================

Support radius and constancy scale swap under the transform, and the cell
table transforms by a plain DFT.  Inversion and Plancherel hold to rounding.
"""

import numpy as np

from padicvt.corpus import make_corpus
from padicvt.schwartz import fourier, inverse_fourier, l2_norm

for entry in make_corpus(seed=7, count=6):
    f = entry.function
    g = fourier(f)
    back = inverse_fourier(g)
    err = np.max(np.abs(back.values - f.values))
    print(
        f"{entry.corpus_id}: p={f.prime} n={f.dimension} "
        f"B(p^{f.support_exp}) scale {f.scale} -> B(p^{g.support_exp}) scale {g.scale}; "
        f"inversion {err:.1e}, |f|={l2_norm(f):.6f} |Ff|={l2_norm(g):.6f}"
    )
