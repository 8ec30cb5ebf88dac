"""Hermite processes: fBM (m=1), Rosenblatt (m=2) and beyond.

All share the fBM covariance 0.5*(t^2H + s^2H - |t-s|^2H) and
self-similarity, but only m = 1 is Gaussian: the Rosenblatt marginal
carries heavy positive excess kurtosis.
"""

import numpy as np

from foulim import fgn, hermite
from foulim.hermite import HermiteSpec
from foulim.paths import TimeGrid

grid = TimeGrid(1.0, 200)
idx = np.array([50, 100, 200])

# the kernel tail fattens with m (one-coordinate decay |xi|^{(H-1)/m - 1/2}),
# so higher orders want a wider noise window for a faithful correlation shape
for m, window, n_xi in ((1, 40.0, 6000), (2, 40.0, 6000), (3, 120.0, 12000)):
    spec = HermiteSpec(H=0.7, m=m, xi_window=window, n_xi=n_xi)
    Z = hermite.hermite_ensemble(grid, spec, 0, 4000, f"demo-z{m}", idx)
    x = Z[:, -1]
    z = (x - x.mean()) / x.std()
    tt = grid.times()[idx]
    emp = Z.T @ Z / len(Z)
    thr = fgn.fbm_covariance(tt[:, None], tt[None, :], 0.7)
    print(f"m={m}: Var(Z_1)={x.var():.4f}, excess kurtosis {np.mean(z**4) - 3:+.3f}, "
          f"max cov rel err {np.max(np.abs(emp / thr - 1)):.3f}")

# self-similarity: lambda^H Z_{t/lambda} has the law of Z_t
spec = HermiteSpec(H=0.7, m=2, xi_window=40.0, n_xi=6000)
Z = hermite.hermite_ensemble(grid, spec, 1, 4000, "demo-ss", idx)
print(f"\nself-similarity (m=2): Var(2^H Z_1/2)={4**0.7 * Z[:, 1].var():.4f} "
      f"vs Var(Z_1)={Z[:, -1].var():.4f}")
