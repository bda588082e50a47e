"""Lorentz frames, electromagnetic field transformations, stress-energy
constraint systems and Poynting-flux diagnostics, with complex velocities
and infinite-speed limit frames."""
from .core import *  # noqa: F401,F403
from .core import Constants, UNIT
from .kinematics import (Branch, BoostSpec, Orthogonal3, boost_matrix,
                         composed_boost, composed_gamma, conjugate_boost,
                         decompose, gamma, limit_boost, rotation_matrix,
                         solve_w, thomas_rotation, velocity_compose)
from .fields import (ChargeCurrent, EMField, FieldJet, PlaneWave, PolynomialJet,
                     ConstantFields, maxwell_residual, transform_em_boost,
                     transform_em_matrix, transform_em_rotation, transform_jet,
                     transform_limit)
from .stress_energy import (StressEnergy, build_stress_energy,
                            nullspace_analysis, orthonormal_triple,
                            surface_coefficients, surface_equation_residual,
                            transform_stress_energy)
from .nonradiating import (Scenario, decay_check, extract_parallel, flux_scan,
                           reverse_process)

__version__ = "0.1.0"
