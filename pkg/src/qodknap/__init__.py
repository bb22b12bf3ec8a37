"""Simulator and cost model for an optical device that runs knapsack dynamic
programming by splitting and shifting laser beams."""

__version__ = "0.1.0"

from .knapsack import (  # noqa: E402
    KnapsackInstance,
    SolveResult,
    SubsumSet,
    Variant,
    dp_reachable_sums,
    exhaustive_oracle,
    solve,
    solve_variant1,
    solve_variant2,
    solve_variant3_approx,
    solve_variant3_exact,
    truncate_instance,
)
from .optics import DeviceParameters, feasibility_check, size_device  # noqa: E402
from .simulator import auto_device, simulate  # noqa: E402
