import json

import pytest

from pairsvc.data import load_manifest
from pairsvc.model import build_model, load_artifact, save_artifact
from pairsvc.server import ModelClassifier
from pairsvc.train import TrainConfig, train


def test_model_artifact_round_trip(tmp_path):
    model = build_model()
    save_artifact(model, tmp_path / "m.pt", image_size=64, metrics=[{"epoch": 0}])
    loaded, meta = load_artifact(tmp_path / "m.pt")
    assert meta["image_size"] == 64
    assert meta["classes"] == ["same_row", "same_column", "same_cell", "none"]
    assert meta["metrics"] == [{"epoch": 0}]


def test_training_smoke_and_determinism(tiny_manifest, tmp_path):
    config = dict(
        manifest=str(tiny_manifest),
        val_fraction=0.25,
        epochs=1,
        batch_size=16,
        learning_rate=1e-3,
        seed=11,
        image_size=64,
        log=False,
    )
    artifact_a, metrics_a = train(TrainConfig(out_dir=str(tmp_path / "a"), **config))
    artifact_b, metrics_b = train(TrainConfig(out_dir=str(tmp_path / "b"), **config))
    assert metrics_a == metrics_b  # fixed seed -> identical metrics log
    assert artifact_a.exists()
    assert (tmp_path / "a" / "metrics.jsonl").read_text() == (
        tmp_path / "b" / "metrics.jsonl"
    ).read_text()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert set(summary) >= {"held_out_accuracy", "train_examples", "val_examples"}

    classifier, version = ModelClassifier.from_artifact(artifact_a)
    from PIL import Image

    labels = classifier([Image.new("RGB", (224, 224), "white")])
    assert len(labels) == 1


def test_single_class_aborts(tiny_manifest, tmp_path):
    records = load_manifest(tiny_manifest)
    single = [r for r in records if r.label == "same_row"]
    path = tmp_path / "single.jsonl"
    with path.open("w") as fh:
        for r in single:
            fh.write(
                json.dumps({"image": str(r.image), "label": r.label, "table_id": r.table_id,
                            "a": 0, "b": 1, "hard": r.hard}) + "\n"
            )
    with pytest.raises(ValueError, match="census"):
        train(TrainConfig(manifest=str(path), out_dir=str(tmp_path / "out"), epochs=1, log=False))
