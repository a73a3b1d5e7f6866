from .features import FeatureRegistry, VirtualState, construct_virtual_state
from .gru import GruParams, gru_cell_forward, gru_forward, gru_gradients, init_gru_params
from .forecaster import Forecaster, ForecastConfig, train_forecaster

__all__ = [
    "FeatureRegistry",
    "VirtualState",
    "construct_virtual_state",
    "GruParams",
    "gru_cell_forward",
    "gru_forward",
    "gru_gradients",
    "init_gru_params",
    "Forecaster",
    "ForecastConfig",
    "train_forecaster",
]
