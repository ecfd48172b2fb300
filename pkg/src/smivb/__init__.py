"""Variational Bayes decomposition of superimposed multispectral intensities."""

from .baselines import EmReport, em_ml, log_likelihood, svd_pinv_weights
from .eds import (
    IdentificationResult,
    Score,
    identify_elements,
    make_compound_spectrum,
    score_identifications,
)
from .model import (
    SAS_PRESETS,
    ComponentBasis,
    Smi,
    WaveGrid,
    WeightDistribution,
    build_sas_basis,
    gamma_mixture_weights,
    default_sas_basis,
    sample_events,
    sphere_intensity,
    superpose,
    synth_eds_basis,
)
from .numerics import DomainError, digamma, gamma_pdf, log_sum_exp
from .vb import (
    DirichletState,
    Responsibilities,
    VbReport,
    posterior_mean,
    run_vb,
    vb_expectation,
    vb_init,
    vb_maximization,
)

__version__ = "0.1.0"
