"""Exclusion process with slow bonds over a smooth membrane on the torus.

A numpy/scipy toolkit for simulating the symmetric exclusion process whose
bonds crossing a smooth interface are slowed in proportion to the incidence
angle, and for verifying its diffusive-scaling behavior numerically: the
convergence of the rescaled lattice generator to the limiting membrane
operator, the spectral structure of the generator, and the hydrodynamic
density limit against exact semigroup evolution.
"""

from .engine import (Configuration, EventLog, ObservableSeries, ReplicaPlan,
                     RunResult, mc_density, mc_martingale, mc_pairings, pair,
                     qv_bound, qv_estimate, run, sample_initial)
from .domain_functions import (TestFunction, boundary_term_max, eval_H,
                               eval_LLambda, generator_residual,
                               make_membrane_function, make_smooth,
                               residual_profile, sample_H, sample_LLambda)
from .errors import (ConfigError, ConvergenceFailure, InvariantViolation,
                     MemsepError, NotOnSurface)
from .generator import (SparseGenerator, Spectrum, assemble,
                        check_density_range, evolve_density, reconstruct,
                        spectral_coefficients, spectrum, spectrum_residuals)
from .geometry import (Membrane, SurfacePoint, ball, circle, ellipse,
                       ellipsoid, implicit_membrane, interval, wrap_displacement,
                       wrap_point)
from .lattice import (RateField, SlowBond, TorusLattice, build_rate_field,
                      homogeneous_rates, slow_set, write_rates_csv)
from .profiles import ConstantProfile, CosineProfile, StepProfile

__version__ = "0.1.0"
