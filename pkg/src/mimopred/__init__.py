"""Parametric prediction of time-varying frequency-selective MIMO channels."""

from .channel import (
    ChannelConfig,
    ChannelTensor,
    Path,
    PathSet,
    add_noise,
    channel_response,
    sample_grid,
    scenario_one_paths,
    scenario_two_paths,
)
from .crb import build_fim, prediction_bound
from .predictor import FitOptions, ModelEstimate, PredictionRequest, fit, predict
from .stacking import Model, build_stacked

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "ChannelTensor",
    "FitOptions",
    "Model",
    "ModelEstimate",
    "Path",
    "PathSet",
    "PredictionRequest",
    "add_noise",
    "build_fim",
    "build_stacked",
    "channel_response",
    "fit",
    "predict",
    "prediction_bound",
    "sample_grid",
    "scenario_one_paths",
    "scenario_two_paths",
]
