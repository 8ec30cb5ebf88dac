"""foulim: sampling and Monte Carlo verification for scaling limits of
functionals of the fractional Ornstein-Uhlenbeck process.

Subpackages by responsibility:

- fgn: exact fractional Gaussian noise / fBM sampling (circulant embedding)
- fou: the stationary rescaled fOU, its autocorrelation and scale integrals
- chaos: Hermite expansions, scaling regimes, limit constants
- hermite: Hermite processes (fBM, Rosenblatt, ...) and the coupled
  Wiener-kernel construction of the fOU
- harness: replica ensembles, variance scans, distributional diagnostics
- solvers: slow/fast systems, Young and Stratonovich limit equations,
  the kinetic (second-order) coupling
- cli: reproducible experiment runner (`foulim ...`)
- acceptance: the release-gating check suite (`foulim verify`)
"""

from . import chaos, fgn, fou, harness, hermite, solvers
from .chaos import ChaosFunction, Regime, ScalingRegime
from .fou import FouConfig
from .hermite import HermiteSpec, SharedNoise
from .paths import HurstParam, SamplePath, TimeGrid
from .streams import stream

__version__ = "0.1.0"

__all__ = [
    "ChaosFunction",
    "FouConfig",
    "HermiteSpec",
    "HurstParam",
    "Regime",
    "SamplePath",
    "ScalingRegime",
    "SharedNoise",
    "TimeGrid",
    "chaos",
    "fgn",
    "fou",
    "harness",
    "hermite",
    "solvers",
    "stream",
]
