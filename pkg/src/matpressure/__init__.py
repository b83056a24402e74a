"""Pressure functions of matrix products: bounds, block structure, Lyapunov
exponents, finite-level equilibrium states and the singular value pressure."""

from .errors import (BudgetExceeded, InputError, MatPressureError, NumericalFailure,
                     PreconditionError, SearchFailure)
from .matfam import (MatrixFamily, exterior_power, frobenius_norm, op_norm, singular_values,
                     spectral_radius, word_product)
from .decomp import (BlockDecomposition, IrreducibilityCertificate, block_triangularize,
                     connecting_constant, find_invariant_subspace, is_irreducible, is_trivial)
from .pressure import (PressureEstimate, log_partition_sum, pressure_bounds, pressure_curve,
                       pressure_even_spectral, pressure_via_blocks)
from .ergodic import (Bernoulli, Mixture, PeriodicOrbit, block_lyapunov, cylinder_mass, entropy,
                      lyapunov, lyapunov_mc, parse_measure, variational_defect)
from .gibbs import (CylinderDistribution, cesaro_shift_average, equilibrium_description,
                    gibbs_ratio_stats, marginalize, nu_nq, pressure_derivative_check)
from .svf import (affinity_dimension, exterior_identity_check, phi, svf_energy,
                  svf_pressure_bounds, svf_submultiplicativity_check)
from .io import load_family, save_family

__version__ = "0.1.0"
