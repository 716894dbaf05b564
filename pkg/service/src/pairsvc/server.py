"""Serving surface: ``POST /classify`` and ``GET /healthz``.

Requests carry base64 PNG pair images; responses return one label per pair
in request order. Validation errors name the offending field with a 400;
oversized batches get a 413. The classifier behind the app is pluggable:
a trained artifact or the geometric stub (which reads the two highlight
boxes back out of the image and applies overlap/gap rules), so protocol
conformance is testable without a training run.
"""

from __future__ import annotations

import base64
import binascii
import io
from collections import deque
from typing import Callable, Sequence

import torch
from fastapi import Body, FastAPI, HTTPException
from PIL import Image

from .data import image_to_tensor
from .labels import CLASSES
from .model import load_artifact

MAX_BATCH = 256

Classifier = Callable[[Sequence[Image.Image]], list[tuple[str, float]]]


class ModelClassifier:
    """Wraps a trained artifact; softmax confidence of the argmax class."""

    def __init__(self, model: torch.nn.Module, image_size: int, batch_size: int = 32) -> None:
        self.model = model.eval()
        self.image_size = image_size
        self.batch_size = batch_size

    @classmethod
    def from_artifact(cls, path: str) -> tuple["ModelClassifier", str]:
        model, meta = load_artifact(path)
        return cls(model, image_size=meta["image_size"]), meta["version"]

    def __call__(self, images: Sequence[Image.Image]) -> list[tuple[str, float]]:
        out: list[tuple[str, float]] = []
        with torch.no_grad():
            for start in range(0, len(images), self.batch_size):
                chunk = images[start : start + self.batch_size]
                batch = torch.stack([image_to_tensor(img, self.image_size) for img in chunk])
                probabilities = torch.softmax(self.model(batch), dim=1)
                confidence, index = probabilities.max(dim=1)
                out.extend(
                    (CLASSES[i], float(c)) for i, c in zip(index.tolist(), confidence.tolist())
                )
        return out


def _highlight_boxes(image: Image.Image) -> list[tuple[int, int, int, int]]:
    """Bounding boxes of the solid-red highlight regions (4-connected)."""
    rgb = image.convert("RGB")
    width, height = rgb.size
    pixels = rgb.load()

    def is_red(x, y):
        r, g, b = pixels[x, y]
        return r > 180 and g < 90 and b < 90

    seen = [[False] * height for _ in range(width)]
    boxes = []
    for x in range(width):
        for y in range(height):
            if seen[x][y] or not is_red(x, y):
                continue
            queue = deque([(x, y)])
            seen[x][y] = True
            x0 = x1 = x
            y0 = y1 = y
            while queue:
                cx, cy = queue.popleft()
                x0, x1 = min(x0, cx), max(x1, cx)
                y0, y1 = min(y0, cy), max(y1, cy)
                for nx, ny in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
                    if 0 <= nx < width and 0 <= ny < height and not seen[nx][ny] and is_red(nx, ny):
                        seen[nx][ny] = True
                        queue.append((nx, ny))
            boxes.append((x0, y0, x1 + 1, y1 + 1))
    boxes.sort(key=lambda b: (b[0] - b[2]) * (b[1] - b[3]))
    return boxes[:2]


class GeometricStub:
    """Label pairs from the highlight geometry alone (no learning).

    Useful as a service reference while no trained artifact exists: extent
    overlap decides same-row/same-column, small gaps decide same-cell.
    """

    def __call__(self, images: Sequence[Image.Image]) -> list[tuple[str, float]]:
        out = []
        for image in images:
            boxes = _highlight_boxes(image)
            if len(boxes) < 2:
                out.append(("same_cell", 1.0))
                continue
            (ax0, ay0, ax1, ay1), (bx0, by0, bx1, by1) = boxes
            v_overlap = min(ay1, by1) - max(ay0, by0)
            h_overlap = min(ax1, bx1) - max(ax0, bx0)
            v_ratio = max(0.0, v_overlap) / max(1, min(ay1 - ay0, by1 - by0))
            h_ratio = max(0.0, h_overlap) / max(1, min(ax1 - ax0, bx1 - bx0))
            gap = 0.6 * min(ay1 - ay0, by1 - by0)
            h_gap = max(bx0 - ax1, ax0 - bx1)
            v_gap = max(by0 - ay1, ay0 - by1)
            if v_ratio >= 0.25 and h_gap <= gap:
                out.append(("same_cell", min(1.0, v_ratio)))
            elif h_ratio >= 0.25 and v_gap <= gap:
                out.append(("same_cell", min(1.0, h_ratio)))
            elif v_ratio >= 0.25:
                out.append(("same_row", min(1.0, v_ratio)))
            elif h_ratio >= 0.25:
                out.append(("same_column", min(1.0, h_ratio)))
            else:
                out.append(("none", 1.0 - max(v_ratio, h_ratio)))
        return out


def create_app(classifier: Classifier, model_version: str = "stub") -> FastAPI:
    app = FastAPI(title="pair relation classifier")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_version": model_version}

    @app.post("/classify")
    def classify(payload: dict = Body(...)):
        pairs = payload.get("pairs")
        if pairs is None:
            raise HTTPException(status_code=400, detail="missing field 'pairs'")
        if not isinstance(pairs, list):
            raise HTTPException(status_code=400, detail="field 'pairs' must be an array")
        if len(pairs) > MAX_BATCH:
            raise HTTPException(
                status_code=413, detail=f"batch of {len(pairs)} exceeds limit {MAX_BATCH}"
            )
        images = []
        for index, entry in enumerate(pairs):
            if not isinstance(entry, dict) or "image_png_base64" not in entry:
                raise HTTPException(
                    status_code=400,
                    detail=f"pairs[{index}] missing field 'image_png_base64'",
                )
            try:
                raw = base64.b64decode(entry["image_png_base64"], validate=True)
                images.append(Image.open(io.BytesIO(raw)).convert("RGB"))
            except (binascii.Error, OSError, ValueError):
                raise HTTPException(
                    status_code=400,
                    detail=f"pairs[{index}].image_png_base64 is not a valid PNG",
                )
        labels = classifier(images)
        return {"labels": [{"label": name, "confidence": confidence} for name, confidence in labels]}

    return app
