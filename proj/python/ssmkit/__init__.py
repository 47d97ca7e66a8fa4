"""Structured state-space sequence model toolkit.

Thin Python layer over the C++ core: build models from JSON run
configurations, simulate and train them, and inspect their spectra.
"""

from ssmkit._core import (
    ConfigError,
    DataError,
    Model,
    NumericError,
    __version__,
    build_model,
    fit,
    hippo,
    load_checkpoint,
    metrics,
    model_from_json,
    num_threads,
    resolved_config,
    set_num_threads,
    synth,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "NumericError",
    "__version__",
    "build_model",
    "fit",
    "hippo",
    "load_checkpoint",
    "metrics",
    "model_from_json",
    "num_threads",
    "resolved_config",
    "set_num_threads",
    "synth",
]
