"""Band-limited wavelet analysis and change-point segmentation of heart-rate series."""

import json

from ._hrvband import (
    AnalysisResult,
    Band,
    BandResult,
    Coefficients,
    ConfigError,
    InputError,
    InvariantError,
    PenaltyPath,
    PenaltyPathEntry,
    Segment,
    Segmentation,
    Wavelet,
    fit_wavelet,
    index_to_clock,
    load_rr,
    orthosympathetic_band,
    parasympathetic_band,
    penalty_path,
    segment,
    selftest,
    synthesize,
    transform,
)
from . import _hrvband


def default_config():
    return json.loads(_hrvband.default_config())


def analyze(values=None, step=0.25, start_time=0.0, **config):
    """Analyse `values` (or config["input"]) with keyword overrides of the run configuration."""
    return _hrvband.analyze(json.dumps(config), values, step, start_time)


def run_analyze(**config):
    _hrvband.run_analyze(json.dumps(config))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
