"""Hamiltonian mechanics on singular tangent structures.

The package implements frames of vector fields that degenerate along
prescribed loci (hypersurfaces to any order, corners, foliation leaves,
elliptic points), the exterior calculus and canonical symplectic geometry
of their phase spaces, admissible Hamiltonians with logarithmic and
negative-power singular parts, geodesic flows of frame metrics, and
minimally coupled charged-particle dynamics in Yang-Mills background
fields.  Worked physical systems (the singular sphere chart, the Lorentz
plane's space of geodesics, the compactified three-body problem, the
compactified black-hole plane, flat space-time, the spin Calogero-Moser
identity) ship as runnable scenarios behind the `esym` CLI.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateMetricError, EsymError, FrameError,
                     IntegrationAbort, RegionError, SingularTermError)
from .fields import Chart, ScalarField
from .estructure import (EFrame, bracket_residual, jacobi_residual,
                         make_b_structure, make_corner_structure,
                         make_custom_frame, make_elliptic_structure,
                         make_foliation_structure, make_vanishing_structure)
from .ecalculus import (EForm, EFunction, d_squared_residual, e_differential,
                        e_function_frame_gradient, interior_product,
                        lie_derivative, smooth_efunction)
from .phasespace import (PhasePoint, SymplecticMatrix, canonical_symplectic,
                         hamiltonian_field, liouville_components,
                         poisson_bracket, pushforward_velocity)
from .riemann import EMetric, geodesic_field, kinetic_hamiltonian, metric_sharp
from .gauge import (GaugeData, GaugePhasePoint, LieAlgebra,
                    coupled_poisson_bivector, curvature, minimal_coupling_map,
                    wong_field)
from .symmetry import ActionGenerator, level_tangency, moment_residual
from .integrator import IntegratorConfig, Trajectory, integrate, invariant_report
from .scenarios import SCENARIO_BUILDERS, build_scenario, calogero_reduced_hamiltonian
