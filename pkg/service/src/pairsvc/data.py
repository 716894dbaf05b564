"""Manifest-backed dataset: JSONL records pointing at rendered pair images."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import torch
from PIL import Image
from torch.utils.data import Dataset

from .labels import CLASS_TO_INDEX, CLASSES


@dataclass(frozen=True)
class ManifestRecord:
    image: Path
    label: str
    table_id: str
    hard: bool


def load_manifest(path: str | Path, limit: int | None = None) -> list[ManifestRecord]:
    """Read manifest lines; image paths resolve relative to the manifest."""
    path = Path(path)
    base = path.parent
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        obj = json.loads(line)
        label = obj["label"]
        if label not in CLASS_TO_INDEX:
            raise ValueError(f"manifest line {line_no}: unknown label {label!r}")
        records.append(
            ManifestRecord(
                image=base / obj["image"],
                label=label,
                table_id=str(obj.get("table_id", "")),
                hard=bool(obj.get("hard", False)),
            )
        )
        if limit is not None and len(records) >= limit:
            break
    return records


def class_census(records: list[ManifestRecord]) -> Counter:
    return Counter(r.label for r in records)


def require_all_classes(records: list[ManifestRecord], minimum: int = 2) -> None:
    census = class_census(records)
    missing = [c for c in CLASSES if census.get(c, 0) < minimum]
    if missing:
        raise ValueError(
            f"training data must hold at least {minimum} examples per class; "
            f"missing {missing}; census: {dict(census)}"
        )


def split_records(
    records: list[ManifestRecord], val_fraction: float, seed: int
) -> tuple[list[ManifestRecord], list[ManifestRecord]]:
    """Deterministic per-class split so validation sees every label."""
    rng = random.Random(seed)
    train: list[ManifestRecord] = []
    val: list[ManifestRecord] = []
    by_class: dict[str, list[ManifestRecord]] = {c: [] for c in CLASSES}
    for record in records:
        by_class[record.label].append(record)
    for cls in CLASSES:
        pool = sorted(by_class[cls], key=lambda r: str(r.image))
        rng.shuffle(pool)
        n_val = max(1, round(len(pool) * val_fraction)) if pool else 0
        val.extend(pool[:n_val])
        train.extend(pool[n_val:])
    rng.shuffle(train)
    rng.shuffle(val)
    return train, val


class PairImageDataset(Dataset):
    def __init__(self, records: list[ManifestRecord], image_size: int) -> None:
        self.records = records
        self.image_size = image_size

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int):
        record = self.records[index]
        with Image.open(record.image) as img:
            tensor = image_to_tensor(img, self.image_size)
        return tensor, CLASS_TO_INDEX[record.label]


def image_to_tensor(image: Image.Image, image_size: int) -> torch.Tensor:
    """RGB, square-resized, scaled to [-1, 1]."""
    rgb = image.convert("RGB")
    if rgb.size != (image_size, image_size):
        rgb = rgb.resize((image_size, image_size), Image.BILINEAR)
    data = torch.frombuffer(bytearray(rgb.tobytes()), dtype=torch.uint8)
    tensor = data.view(image_size, image_size, 3).permute(2, 0, 1).float()
    return tensor / 127.5 - 1.0
