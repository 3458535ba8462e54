"""sfkit: executable identities for spectral flow at desk scale.

Subspace calculus on finite-dimensional Grassmannians, symmetric-form index
theory, spectral flow of operator paths by independent methods, and a
closed-geodesic engine that verifies the periodic index formula as an exact
integer identity.

Conventions used throughout (also echoed in CLI reports):

* spectral flow of a path on [a, b] is n_minus(start) - n_minus(end), with
  endpoint eigenvalues inside the zero band counted as kernel;
* the Kato constant of a nested pair (empty infimum) is 1;
* the Maslov index carries the initial instant with weight -n_minus(G) and
  the final instant with the positive inertia of its crossing form, which is
  the unique choice under which the flow identities hold for indefinite G.
"""

from .errors import InputError, NumericalFailure
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    eig_pencil,
    eig_sym,
    eigvals_sym,
    kernel_basis,
    orthonormal_basis,
)
from .subspaces import (
    Subspace,
    SubspacePath,
    SymmetryOperator,
    conjugate_symmetries_to_constant,
    fredholm_pair_index,
    gap_distance,
    graph_projection,
    kato_gamma,
    lift_path,
    orthocomplement,
    projection,
    projection_restriction_index,
    relative_dimension,
    subspace_intersection,
    subspace_sum,
)
from .forms import (
    SpectralSplit,
    SymmetricForm,
    b_orthocomplement,
    inertia,
    is_isotropic,
    isotropic_bounds,
    morse_coindex,
    morse_index,
    negative_space_relative_dimension,
    nullity,
    restrict_form,
    spectral_split,
)
from .flow import (
    FlowReport,
    OperatorPath,
    PartitionControl,
    ReductionReport,
    VaryingReductionReport,
    cogredient_transform,
    eigenvalue_trace,
    sf_endpoints,
    sf_partition,
    sf_restricted,
    sf_varying,
    verify_reduction,
    verify_reduction_varying,
)
from .geodesics import (
    CoefficientSpec,
    GalerkinSpace,
    GeodesicFrameData,
    GeodesicReport,
    JacobiFlow,
    assemble_form,
    concavity_index,
    conjugate_instants,
    dirichlet_subspace,
    example_frame,
    jacobi_fundamental,
    jacobi_nullities,
    maslov_data,
    maslov_index,
    metric_symmetry,
    operator_path_for_frame,
    sf_dirichlet,
    sf_geodesic,
    sf_twisted,
    verify_periodic_formula,
)

__version__ = "0.1.0"
