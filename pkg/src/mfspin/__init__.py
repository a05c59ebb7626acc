"""Mean-field thermodynamics of Potts, cubic and O(N)-nematic spin models.

Free-energy profiles, mean-field-equation branches, first-order transition
location, hypercubic infrared integrals, forbidden-band certificates, and a
complete-graph Monte Carlo sampler for validating the large-deviation rate
function.
"""

from .models import (ModelSpec, potts, cubic, nematic, potts_phi, scalar_phi,
                     phi_full_scale, ising_theta, ising_rho, legendre_entropy)
from .lattice import IdEstimate, compute_id, compute_wd
from .solver import (BranchPoint, BranchSet, TransitionPoint, solve_branches,
                     trace_max_branch, trace_global_branch, find_transition,
                     barrier_height)
from .certification import (ErrorBudget, Certificate, allowed_bands,
                            compute_DJ, certify, energy_magnetization_gap)

__version__ = "0.1.0"

__all__ = [
    "ModelSpec", "potts", "cubic", "nematic",
    "potts_phi", "scalar_phi", "phi_full_scale",
    "ising_theta", "ising_rho", "legendre_entropy",
    "IdEstimate", "compute_id", "compute_wd",
    "BranchPoint", "BranchSet", "TransitionPoint", "solve_branches",
    "trace_max_branch", "trace_global_branch", "find_transition",
    "barrier_height",
    "ErrorBudget", "Certificate", "allowed_bands", "compute_DJ", "certify",
    "energy_magnetization_gap",
]
