"""Joint pilot/payload power allocation for uplink MIMO-NOMA (MRC-SIC).

Closed-form average-SINR analysis under MMSE channel estimation error, a
max-min weighted-ASINR allocator solved as a geometric program, and a
deterministic Monte Carlo link simulator that cross-validates the two.
"""
from .model import (
    LargeScaleProfile,
    PowerAllocation,
    Scenario,
    SystemConfig,
    validate_config,
)
from .channel import CellGeometry, draw_user_drop, pilot_matrix
from .estimation import estimate, estimate_matrix_form
from .sinr import asinr_closed_form, instantaneous_sinr, theorem1_sample
from .optimizer import (
    Solution,
    build_gp,
    epa_allocation,
    jain_index,
    solve_jpa,
    solve_ppa,
)
from .linksim import SimJob, SimReport, run, sweep_energy

__version__ = "0.1.0"

__all__ = [
    "SystemConfig",
    "LargeScaleProfile",
    "PowerAllocation",
    "Scenario",
    "validate_config",
    "CellGeometry",
    "draw_user_drop",
    "pilot_matrix",
    "estimate",
    "estimate_matrix_form",
    "asinr_closed_form",
    "instantaneous_sinr",
    "theorem1_sample",
    "Solution",
    "build_gp",
    "solve_jpa",
    "solve_ppa",
    "epa_allocation",
    "jain_index",
    "SimJob",
    "SimReport",
    "run",
    "sweep_energy",
    "__version__",
]
