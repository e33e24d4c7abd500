"""Profiles and widths of random logarithmic trees.

Exact expected profiles and moments, generating-function rows for increasing
trees, asymptotic predictions, seeded generators and Monte Carlo gates.
"""

from .asympt import model_constants, mode_prediction, predict
from .exact import (central_moment_dp, enumerate_exact, expected_profile_dp,
                    expected_profile_stirling, split_distribution)
from .generate import generate_depths, generate_profiles, grow_checkpoints
from .model import ModelError, Profile, TreeModelSpec, log_scale, parse_model_spec, width_and_mode
from .montecarlo import simulate
from .rng import DEFAULT_SEED

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED", "ModelError", "Profile", "TreeModelSpec", "central_moment_dp",
    "enumerate_exact", "expected_profile_dp", "expected_profile_stirling", "generate_depths",
    "generate_profiles", "grow_checkpoints", "log_scale", "mode_prediction", "model_constants",
    "parse_model_spec", "predict", "simulate", "split_distribution", "width_and_mode",
]
