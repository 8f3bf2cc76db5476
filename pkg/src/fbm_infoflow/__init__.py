"""Entropy flow, Fisher information and De Bruijn-type identity checks for
channels driven by fractional Brownian motion."""

from . import channels, doss, fbm, identities, infofunc, montecarlo, sigma
from .channels import (
    ChannelSpec,
    DensityField,
    InitialLaw,
    additive,
    density_at,
    gaussian_field,
    gaussian_law,
    grid_law,
    multiplicative,
    score_at,
)
from .doss import PhiSolution, invert_phi, pushforward_density, solve_phi
from .fbm import FbmPath, HurstParameter, covariance, sample_path, sample_paths
from .identities import (
    ConvexityProfile,
    IdentityReport,
    debruijn_check_additive,
    debruijn_check_mult,
    entropy_power_profile,
    fokker_planck_residual,
    kl_flow_check,
    stein_check,
)
from .infofunc import (
    QuadratureSpec,
    WeightFunction,
    entropy,
    entropy_power,
    generalized_fisher,
    kl_divergence,
    relative_fisher,
)
from .montecarlo import McEstimate, RunningMoments, mc_entropy, mc_expectation
from .sigma import SigmaModel, constant, custom, identity_channel, sqrt_one_plus_square

__version__ = "0.1.0"
