"""
Bures distance: closed form versus dynamic transport
=====================================================

The Bures distance between two covariance matrices has a closed form. The same
number is recovered by minimizing a kinetic action over a path of matrices.
"""
import numpy as np

from frs import GaussianParams, bures_dynamic_sq, bures_sq, gaussian_w2_sq

# two commuting matrices: the distance is the sum of squared differences of
# the square-rooted eigenvalues, (1 - 2)^2 + (1 - 2)^2 = 2
print("bures_sq(I, 4I) =", bures_sq(np.eye(2), 4 * np.eye(2)))

# a non-commuting pair
A0 = np.array([[2.0, 1.0], [1.0, 2.0]])
A1 = np.eye(2)
closed = bures_sq(A0, A1)
print(f"closed form       {closed:.8f}   (4 - 2 sqrt 3 = {4 - 2 * np.sqrt(3):.8f})")

# the dynamic form: four times the squared distance is the least action
for n in (8, 16, 32, 64):
    dynamic = bures_dynamic_sq(A0, A1, n) / 4.0
    print(f"dynamic, n = {n:3d}  {dynamic:.8f}   rel. error {abs(dynamic - closed) / closed:.1e}")

# Gaussians add the squared distance between the means
g0 = GaussianParams(np.zeros(2), A0)
g1 = GaussianParams(np.ones(2), A1)
print("W2^2 between the Gaussians =", gaussian_w2_sq(g0, g1))
