"""DenseNet-121 backbone with a 4-class head, plus artifact save/load."""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn
from torchvision.models import densenet121

from .labels import CLASSES

ARTIFACT_VERSION = "pairsvc-densenet121-v1"


def build_model() -> nn.Module:
    """DenseNet-121 initialized from scratch with a 4-way classifier head.

    Pretrained backbone weights would be preferable but require network
    access to fetch; desk-scale corpora train acceptably from scratch.
    """
    model = densenet121(weights=None)
    model.classifier = nn.Linear(model.classifier.in_features, len(CLASSES))
    return model


def save_artifact(model: nn.Module, path: str | Path, image_size: int, metrics: list[dict]) -> None:
    payload = {
        "version": ARTIFACT_VERSION,
        "classes": CLASSES,
        "image_size": image_size,
        "state_dict": model.state_dict(),
        "metrics": metrics,
    }
    torch.save(payload, path)


def load_artifact(path: str | Path) -> tuple[nn.Module, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("classes") != CLASSES:
        raise ValueError(
            f"artifact class order {payload.get('classes')} does not match {CLASSES}"
        )
    model = build_model()
    model.load_state_dict(payload["state_dict"])
    model.eval()
    meta = {k: payload[k] for k in ("version", "classes", "image_size", "metrics")}
    return model, meta
