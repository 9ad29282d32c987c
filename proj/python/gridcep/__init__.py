"""Stochastic capacity-expansion planning for island power systems.

Thin Python surface over the C++ core: case loading, scenario utilities,
and the extensive-form / progressive-hedging solve paths.
"""

import sys

try:
    from gridcep import _core
except ImportError:  # running from a build tree: extension on sys.path
    import _core

    sys.modules[__name__ + "._core"] = _core

from gridcep._core import (  # noqa: E402,F401
    CaseBundle,
    EngineError,
    InvestmentPlan,
    PowerSystem,
    ScenarioDay,
    __version__,
    evaluate_plan,
    fuel_price,
    generate_outage_series,
    load_case,
    run_ph,
    scale_load,
    solve_ef,
    solve_operational,
    validate_system,
)

__all__ = [
    "CaseBundle",
    "EngineError",
    "InvestmentPlan",
    "PowerSystem",
    "ScenarioDay",
    "__version__",
    "evaluate_plan",
    "fuel_price",
    "generate_outage_series",
    "load_case",
    "run_ph",
    "scale_load",
    "solve_ef",
    "solve_operational",
    "validate_system",
]
