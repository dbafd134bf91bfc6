"""
The operator D^alpha two ways
=============================

A step function on Q_p is a finite table of cell values.  The operator with
symbol |xi|^alpha can be applied by Fourier multiplication or by summing the
hypersingular kernel over spheres; both are exact on cells, so they agree to
rounding.
"""

import numpy as np

from padicvt import VTParams, apply_hypersingular, apply_spectral
from padicvt.core import ball_at_zero
from padicvt.schwartz import StepFunction

# the indicator of Z_2, resolved on cells of radius 1/8 inside B(2)
f = StepFunction.indicator(ball_at_zero(2, 0), support_exp=1, scale=3)
params = VTParams(alpha=0.5, prime=2)

spectral = apply_spectral(f, params)
hyper = apply_hypersingular(f, params)
print("cells:", f.values.size)
print("spectral  values:", np.round(spectral.values.real[:4], 6))
print("hypersing values:", np.round(hyper.values.real[:4], 6))
print("max gap:", np.max(np.abs(spectral.values - hyper.values)))

# outside the support the image decays like |x|^(-alpha-1)
print("tail:", spectral.tail)

# a random complex function in two dimensions, p = 3
rng = np.random.default_rng(0)
g = StepFunction(3, 2, 0, 2, rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9)))
p2 = VTParams(alpha=1.5, prime=3, dimension=2)
gap = np.max(np.abs(apply_spectral(g, p2).values - apply_hypersingular(g, p2).values))
print("2-d gap at alpha = 1.5:", gap)
