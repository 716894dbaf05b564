"""Word-pair spatial relation classifier service.

Trains a DenseNet-121 on exported pair images (a table render with the two
words filled as solid red boxes) and serves predictions over the JSON/HTTP
wire protocol: ``POST /classify`` and ``GET /healthz``.
"""

from .labels import CLASSES
from .model import build_model, load_artifact, save_artifact
from .server import GeometricStub, create_app
from .train import TrainConfig, train

__all__ = [
    "CLASSES",
    "GeometricStub",
    "TrainConfig",
    "build_model",
    "create_app",
    "load_artifact",
    "save_artifact",
    "train",
]
