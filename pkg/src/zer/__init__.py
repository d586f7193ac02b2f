"""Zipper entanglement renormalization for translation-invariant 1D free fermions."""

from .model import (
    CorrelationMatrix, Hopping, ModelSpec, chain_model, fill_levels, ground_state_correlation,
    ssh_model,
)
from .rg import RGConfig, RGTrace, level_decomposition, momentum_occupation, reconstruct, run_zer

__version__ = "0.1.0"

__all__ = [
    "CorrelationMatrix", "Hopping", "ModelSpec", "RGConfig", "RGTrace", "chain_model",
    "fill_levels", "ground_state_correlation", "level_decomposition", "momentum_occupation",
    "reconstruct", "run_zer", "ssh_model",
]
