"""Physics-informed dynamic heterogeneous graphs for urban microclimate
field prediction: scene rasters, solar geometry, per-hour graph
construction, a relational-convolution + recurrent predictor, and a CLI."""

from .errors import UgkError
from .graphgen import BACKEND, GraphConfig, HeteroGraph, RelationKind
from .metrics import MetricsReport, compute_metrics
from .model import ModelConfig, UrbanModel, build_model, train
from .scene import Category, GridScene, WeatherRecord

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Category",
    "GraphConfig",
    "GridScene",
    "HeteroGraph",
    "MetricsReport",
    "ModelConfig",
    "RelationKind",
    "UgkError",
    "UrbanModel",
    "WeatherRecord",
    "build_model",
    "compute_metrics",
    "train",
    "__version__",
]
