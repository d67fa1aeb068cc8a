"""Spiking networks whose neurons recur along time (TSRM) or taxel location (LSRM)."""
from ._accel import backend_name
from .model import (BranchNet, HybridNet, StreamingInference, TimeWeightConfig, build_model,
                    forward_hybrid, forward_lsrm, forward_tsrm, predict, time_weighted_output,
                    timestep_inference)
from .response import KernelConfig
from .spikes import LocationOrder, builtin_orders, from_events, location_view, pad_suffix

__version__ = "0.1.0"

__all__ = [
    "BranchNet", "HybridNet", "KernelConfig", "LocationOrder", "StreamingInference",
    "TimeWeightConfig", "backend_name", "build_model", "builtin_orders", "forward_hybrid",
    "forward_lsrm", "forward_tsrm", "from_events", "location_view", "pad_suffix", "predict",
    "time_weighted_output", "timestep_inference",
]
