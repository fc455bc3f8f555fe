"""Faecal egg count reduction from before/after-treatment counts.

Bayesian hierarchical count models fitted by Hamiltonian Monte Carlo, the
classical reduction test with asymptotic and bootstrap intervals, prior
elicitation and a data simulator.
"""

__version__ = "0.1.0"

from .classical import FecrtResult, bootstrap_ci, fecrt_asymptotic_ci, fecrt_point
from .data import CountDataset, epg_view, load_csv, make_dataset, write_csv
from .elicit import beta_from_mode_concentration, solve_from_quantiles
from .hmc import PosteriorDraws, SamplerConfig, run_chains
from .models import ModelKind, PriorSpec, build_model, log_posterior, select_kind
from .posterior import FitSummary, derive_fecr, fecr_probs, render_text, split_rhat, summarize
from .simulate import SimConfig, simulate

__all__ = [
    "CountDataset", "FecrtResult", "FitSummary", "ModelKind", "PosteriorDraws", "PriorSpec",
    "SamplerConfig", "SimConfig", "beta_from_mode_concentration", "bootstrap_ci", "build_model",
    "derive_fecr", "epg_view", "fecr_probs", "fecrt_asymptotic_ci", "fecrt_point", "load_csv",
    "log_posterior", "make_dataset", "render_text", "run_chains", "select_kind", "simulate",
    "solve_from_quantiles", "split_rhat", "summarize", "write_csv",
]
