"""
Boundary regularity at the origin
=================================

Two domains accumulate at 0.  The union of spheres |x| = 2^-3^k leaves a
fixed fraction of every annulus outside, and the solution decays like a
positive power of |x|.  The punctured disk leaves nothing outside, and the
fundamental solution c|x|^(alpha-1) is harmonic there but blows up.
"""

from padicvt.regularity import (
    LambdaSequence,
    check_measure_density,
    estimate_holder_exponent,
    fundamental_constant,
    fundamental_solution_harmonicity_check,
    make_punctured_disk,
    make_sphere_union_domain,
)
from padicvt.schwartz import RadialKernel

seq = LambdaSequence.geometric(3, 7)
omega = make_sphere_union_domain(seq, 2, seq.lambdas[-1])
print("density nu =", check_measure_density(omega, seq).nu)
rep = estimate_holder_exponent(omega, 0.5, g=RadialKernel(1.0, 0.4), m_list=(730,))
for r, s in zip(rep.radii, rep.sup_abs_u):
    print(f"  |x| = {r:.3e}   sup|u| = {s:.3e}")
print(f"gamma = {rep.gamma_fit:.4f}  r^2 = {rep.fit_r2:.4f}")

disk = make_punctured_disk(2, 40)
c = fundamental_constant(2, 0.5)
rep = estimate_holder_exponent(
    disk, 0.5, g=RadialKernel(c, -0.5), m_list=(40,), exterior_tail=True, density_seq=LambdaSequence.up_to(3, 39)
)
print(f"punctured disk: nu = {rep.nu_observed}, gamma = {rep.gamma_fit:.4f}")
h = fundamental_solution_harmonicity_check(2, 0.5, 14)
print(f"D^alpha of the fundamental solution off 0: {h.residual:.2e} (raw {h.raw_residual:.2e})")
