"""Spectra of PT-symmetric Hamiltonians realized on wedge-shaped contours.

Modules: ``contour`` (profiles, arc length, pullback inner products),
``realize`` (real-line Hamiltonian and tip matching), ``squarewell``
(closed-form well on the wedge), ``monomial`` (shooting and Weyl-function
oracle for z^2 (iz)^nu), ``pseudoherm`` (metric, observables, C/P/T) and
``cli``.
"""
from .contour import (ArcLengthMap, ContourProfile, arclength_map, contour_inner_product,
                      custom_profile, flat_profile, map_to_contour, pushforward,
                      real_line_inner_product, wedge_profile)
from .errors import (DegenerateSpectrumError, DomainError, NumericError,
                     PreconditionError, WedgespecError)
from .monomial import (MonomialProblem, eigen_search, lemma_checks, weyl_data,
                       weyl_phi1_zeros, weyl_phi2_zeros)
from .pseudoherm import (BiorthoSystem, MetricPack, build_biortho,
                         cpt_inner_product_equivalence, dress_observable,
                         equivalent_hermitian, hamiltonian_matrix, metric_pack,
                         physical_inner_product, symmetry_suite, well_system)
from .realize import (build_real_hamiltonian, matching_condition, matching_residual,
                      monomial_potential, square_well_potential, verify_pt_symmetry,
                      wedge_decompose)
from .spectrum import SpectrumReport
from .squarewell import (WellProblem, count_real, exceptional_sweep, overlap_matrix,
                         real_spectrum)

__version__ = "0.1.0"
