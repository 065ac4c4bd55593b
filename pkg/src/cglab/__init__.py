"""Coarse-graining quantum channels: laws, samplers and Monte-Carlo statistics."""

__version__ = "0.1.0"

from .channel import apply_cg, apply_cg_general, fuzzy_measure, prob_vector  # noqa: E402
from .laws import cdf_p2, cdf_pn, pdf_p2, pdf_p2_separable, pdf_pn  # noqa: E402
from .avgstate import avg_state_coeffs, avg_state_mc  # noqa: E402
from .mc import fit_p, pushforward_radii, sweep_eps  # noqa: E402
from .sampling import make_rng, sample_haar_states, sample_preimage  # noqa: E402

__all__ = [
    "__version__", "apply_cg", "apply_cg_general", "fuzzy_measure", "prob_vector",
    "cdf_p2", "cdf_pn", "pdf_p2", "pdf_p2_separable", "pdf_pn",
    "avg_state_coeffs", "avg_state_mc", "fit_p", "pushforward_radii", "sweep_eps",
    "make_rng", "sample_haar_states", "sample_preimage",
]
