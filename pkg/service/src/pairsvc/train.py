"""Training loop: fixed-seed, per-epoch validation accuracy, final report."""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader

from .data import PairImageDataset, load_manifest, require_all_classes, split_records
from .model import build_model, save_artifact


@dataclass
class TrainConfig:
    manifest: str
    out_dir: str
    val_fraction: float = 0.2
    epochs: int = 8
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    image_size: int = 224
    limit: int | None = None
    device: str = "cpu"
    log: bool = True


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def _evaluate(model: nn.Module, loader: DataLoader, device: str) -> float:
    model.eval()
    correct = 0
    total = 0
    with torch.no_grad():
        for images, targets in loader:
            logits = model(images.to(device))
            correct += (logits.argmax(dim=1).cpu() == targets).sum().item()
            total += targets.numel()
    return correct / total if total else 0.0


def train(config: TrainConfig) -> tuple[Path, list[dict]]:
    """Fit the classifier; returns the artifact path and the metrics log."""
    _seed_everything(config.seed)

    records = load_manifest(config.manifest, limit=config.limit)
    require_all_classes(records)
    train_records, val_records = split_records(records, config.val_fraction, config.seed)

    train_loader = DataLoader(
        PairImageDataset(train_records, config.image_size),
        batch_size=config.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(config.seed),
    )
    val_loader = DataLoader(
        PairImageDataset(val_records, config.image_size), batch_size=config.batch_size
    )

    device = config.device
    model = build_model().to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=max(1, int(config.epochs * 0.6)), gamma=0.3
    )
    criterion = nn.CrossEntropyLoss()

    metrics: list[dict] = []
    best_accuracy = -1.0
    best_epoch = -1
    best_state = None
    for epoch in range(config.epochs):
        model.train()
        started = time.perf_counter()
        total_loss = 0.0
        seen = 0
        for images, targets in train_loader:
            optimizer.zero_grad()
            logits = model(images.to(device))
            loss = criterion(logits, targets.to(device))
            loss.backward()
            optimizer.step()
            total_loss += loss.item() * targets.numel()
            seen += targets.numel()
        scheduler.step()
        entry = {
            "epoch": epoch,
            "train_loss": round(total_loss / max(seen, 1), 6),
            "val_accuracy": round(_evaluate(model, val_loader, device), 6),
        }
        metrics.append(entry)
        if entry["val_accuracy"] > best_accuracy:
            best_accuracy = entry["val_accuracy"]
            best_epoch = epoch
            best_state = {k: v.detach().cpu().clone() for k, v in model.state_dict().items()}
        if config.log:
            elapsed = round(time.perf_counter() - started, 2)
            print(json.dumps({**entry, "seconds": elapsed}), flush=True)

    if best_state is not None:
        model.load_state_dict(best_state)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifact = out_dir / "model.pt"
    save_artifact(model, artifact, config.image_size, metrics)
    (out_dir / "metrics.jsonl").write_text(
        "".join(json.dumps(m) + "\n" for m in metrics), encoding="utf-8"
    )
    summary = {
        "held_out_accuracy": best_accuracy if metrics else 0.0,
        "best_epoch": best_epoch,
        "train_examples": len(train_records),
        "val_examples": len(val_records),
        "epochs": config.epochs,
        "image_size": config.image_size,
        "seed": config.seed,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    if config.log:
        print(json.dumps(summary), flush=True)
    return artifact, metrics
