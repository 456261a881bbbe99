"""Coding for endurance-limited memories: cell model, capacity regions,
finite-length constructions and exhaustive search."""
from .capacity import (EiaProfile, EipDiaProfile, EuDiaProfile, closed_form_max_sum_rate, compare_models,
                       counting_bound, eip_du_bounds, entropy, optimize_sum_rate)
from .codebook import ElmCodebook, ModelSpec, verify_elm_codebook
from .memory import MemoryTrace, apply_write, parity_project, replay_trace

__version__ = "0.1.0"

__all__ = [
    "EiaProfile", "EipDiaProfile", "EuDiaProfile", "ElmCodebook", "MemoryTrace", "ModelSpec",
    "apply_write", "closed_form_max_sum_rate", "compare_models", "counting_bound", "eip_du_bounds",
    "entropy", "optimize_sum_rate", "parity_project", "replay_trace", "verify_elm_codebook",
]
