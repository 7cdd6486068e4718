"""Balancing flow, Bergman kernels and Calabi flow on CP^1."""

import json as _json

from ._bflab import (
    NumericalError,
    act,
    balanced_round_point,
    balancing_flow,
    balancing_potential,
    distance,
    experiments,
    fit_rate,
    fs_density,
    geodesic_point,
    grid,
    hilb,
    killing_norm,
    mu_bar,
    op_norm,
    perturbed_metric,
    rho,
    scalar_curvature,
    scaled_distance,
    t_iteration,
    trace_free,
)
from ._bflab import _run_experiment


def run_experiment(config, write=False):
    """Runs an experiment from a config dict and returns its summary dict."""
    return _json.loads(_run_experiment(_json.dumps(config), write))
