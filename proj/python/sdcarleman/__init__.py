"""Semi-discrete Carleman estimates for parabolic operators."""

import json

from ._sdcarleman import (
    CarlemanWeight,
    Grid,
    SdcError,
    WeightParams,
    avg,
    coupled_delta,
    default_config,
    diff,
    h2_norm,
    integral,
    l2_norm,
    run_suite,
    second_diff,
    solve_random,
    suite_names,
    theta_endpoint_closed_form,
    theta_midpoint_closed_form,
)


def run(name, config=None, **overrides):
    """Run a suite; `config` is a dict, keyword overrides use dotted keys with '__'."""
    text = json.dumps(config or {})
    sets = [f"{k.replace('__', '.')}={json.dumps(v)}" for k, v in overrides.items()]
    return run_suite(name, text, sets)


__all__ = [
    "CarlemanWeight", "Grid", "SdcError", "WeightParams", "avg", "coupled_delta", "default_config", "diff",
    "h2_norm", "integral", "l2_norm", "run", "run_suite", "second_diff", "solve_random", "suite_names",
    "theta_endpoint_closed_form", "theta_midpoint_closed_form",
]
