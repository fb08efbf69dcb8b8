"""Gap probabilities for the spectrum-singularity kernel and Painleve III checks."""
from .classical import he_classical_check, tau_cross, tau_diag
from .errors import GapError
from .kernels import GapResult, KernelKind, KernelSpec, Method, gap_fredholm, gap_fredholm_hard_edge
from .sigma_ode import gap_hard_edge, gap_ss_cross, gap_ss_product, gap_ss_sigma1

__version__ = "0.1.0"

__all__ = [
    "GapError",
    "GapResult",
    "KernelKind",
    "KernelSpec",
    "Method",
    "gap_fredholm",
    "gap_fredholm_hard_edge",
    "gap_hard_edge",
    "gap_ss_cross",
    "gap_ss_product",
    "gap_ss_sigma1",
    "he_classical_check",
    "tau_cross",
    "tau_diag",
]
