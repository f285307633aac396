"""Fitting a single spherical-harmonic mode on the unit sphere.

The boundary data is the trace of one exterior harmonic, so the adaptive
loop must stop exactly at that degree with a unit coefficient. This is the
cleanest way to see the machinery end to end: quadrature, assembly, SVD
solve, and the residual history.
"""

import numpy as np

import mrc

spec = mrc.SurfaceSpec.sphere(1.0)
rule = mrc.build_quadrature(spec, 24, 48)

# boundary data: f = Y_32 on the sphere (= h_32 restricted to r = 1)
c = np.zeros(mrc.n_terms(3))
c[mrc.flatten(3, 2)] = 1.0
data = mrc.boundary_data_from_oracle(rule, mrc.BandLimited(c))

report = mrc.run_mrc(spec, rule, data, mrc.MrcConfig(epsilon=1e-10, L_start=0, stagnation_patience=6))

print(f"termination: {report.termination}, chosen degree: {report.chosen_L}")
print("degree  residual")
for h in report.history:
    print(f"{h.L:6d}  {h.residual_l2:.3e}")
print(f"fitted c(3,2) = {report.coefficients[mrc.flatten(3, 2)]:.15f}  (exact: 1)")

# the fitted field is usable anywhere outside the sphere
x = np.array([0.0, 0.0, 2.5])
print(f"v({x}) = {report.field(x):.12e}")
