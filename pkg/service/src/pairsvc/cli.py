"""Service command line: train a model, serve a model or the stub."""

from __future__ import annotations

import click
import uvicorn

from .server import GeometricStub, ModelClassifier, create_app
from .train import TrainConfig, train as run_training


@click.group()
def main():
    """Word-pair relation classifier service."""


@main.command("train")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--epochs", type=int, default=8)
@click.option("--batch-size", type=int, default=32)
@click.option("--lr", "learning_rate", type=float, default=1e-3)
@click.option("--val-fraction", type=float, default=0.2)
@click.option("--image-size", type=int, default=224)
@click.option("--seed", type=int, default=0)
@click.option("--limit", type=int, default=None, help="Cap the number of manifest records.")
def train_command(**kwargs):
    """Fit DenseNet-121 on a pair-image manifest."""
    try:
        artifact, metrics = run_training(TrainConfig(**kwargs))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"model -> {artifact}")
    if metrics:
        click.echo(f"final held-out accuracy: {metrics[-1]['val_accuracy']:.4f}")


@main.command("serve")
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--stub", is_flag=True, help="Serve the geometric stub instead of a trained model.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8650)
def serve_command(model_path, stub, host, port):
    """Serve POST /classify and GET /healthz."""
    if stub or model_path is None:
        if not stub:
            raise click.ClickException("either --model or --stub is required")
        app = create_app(GeometricStub(), model_version="stub")
    else:
        classifier, version = ModelClassifier.from_artifact(model_path)
        app = create_app(classifier, model_version=version)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
