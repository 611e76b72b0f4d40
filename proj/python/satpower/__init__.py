"""Multibeam satellite downlink power allocation.

Thin wrapper over the compiled core: seeded channel simulation, admission
feasibility, the power allocators, and trained-model inference.
"""

from satpower._core import (
    CorruptModelError,
    InvalidConfigError,
    IoError,
    MlpModel,
    NormStats,
    SatpowerError,
    SystemParams,
    all_rates_mbps,
    allocate,
    analyze_feasibility,
    load_model,
    load_params,
    predict_allocation,
    run_trial,
    save_params,
    simulate_channel,
    simulate_coupling,
    sum_rate_allocate,
    waterfill,
)

__version__ = "0.1.0"

__all__ = [
    "CorruptModelError",
    "InvalidConfigError",
    "IoError",
    "MlpModel",
    "NormStats",
    "SatpowerError",
    "SystemParams",
    "all_rates_mbps",
    "allocate",
    "analyze_feasibility",
    "load_model",
    "load_params",
    "predict_allocation",
    "run_trial",
    "save_params",
    "simulate_channel",
    "simulate_coupling",
    "sum_rate_allocate",
    "waterfill",
]
