"""Command-line pipeline: reconstruct, evaluate, export-pairs, pairgen, classify.

Tables travel as files named by table id: detections are ``<id>.jsonl``,
images ``<id>.png``, predictions ``<id>.html`` plus ``<id>.structure.json``.
Ground truth is one JSONL file of annotation records whose ``filename`` stem
is the table id. All intermediate artifacts are JSON-lines so stages compose
via files, and the stage-wise path produces byte-identical HTML to the
single-shot one.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import click
from PIL import Image

from .errors import WordGridError
from .evaluate import evaluate_corpus
from .ingest import (
    format_pubtabnet_record,
    load_word_detections,
    parse_html_with_texts,
    parse_icdar_document,
    parse_pubtabnet_record,
)
from .model import GroundTruthTable
from .pairgen import WordPair, generate_pairs
from .pipeline import PipelineConfig, classify_pairs, reconstruct_from_labels
from .relations import LabeledPair, RelationLabel, export_training_pairs
from .synth import make_corpus, render_table_image

ENDPOINT_ENV = "WORDGRID_ENDPOINT"


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException(f"config {path} must hold a JSON object")
    return data


def _pipeline_config(config_path, **flags) -> PipelineConfig:
    """Precedence: explicit flags > config file > defaults."""
    merged = dict(_load_config_file(config_path))
    for key, value in flags.items():
        if value is not None:
            merged[key] = value
    merged.setdefault("classifier", "heuristic")
    try:
        return PipelineConfig(**merged)
    except (TypeError, WordGridError) as exc:
        raise click.ClickException(str(exc))


def _detection_files(path: Path) -> dict[str, Path]:
    if path.is_dir():
        return {p.stem: p for p in sorted(path.glob("*.jsonl"))}
    return {path.stem: path}


def _load_truth(path: Path) -> dict[str, GroundTruthTable]:
    tables = {}
    if path.suffix.lower() == ".xml":
        for table in parse_icdar_document(path.read_text(encoding="utf-8")):
            tables[table.table_id.replace("#", "_")] = table
        return tables
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        table = parse_pubtabnet_record(line)
        tables[Path(table.table_id).stem] = table
    return tables


def _write_pairs(pairs, fh) -> None:
    for p in pairs:
        fh.write(json.dumps({"a": p.a, "b": p.b, "direction": p.direction}) + "\n")


def _read_pairs(path: Path) -> list[WordPair]:
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            obj = json.loads(line)
            out.append(WordPair(a=obj["a"], b=obj["b"], direction=obj["direction"]))
    return out


def _read_labeled(path: Path) -> list[LabeledPair]:
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            obj = json.loads(line)
            out.append(
                LabeledPair(
                    pair=WordPair(a=obj["a"], b=obj["b"], direction=obj["direction"]),
                    label=RelationLabel(obj["label"]),
                    confidence=float(obj.get("confidence", 1.0)),
                )
            )
    return out


shared_options = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON config file."),
    click.option("--classifier", type=click.Choice(["oracle", "heuristic", "remote"]), default=None),
    click.option("--endpoint", "remote_endpoint", envvar=ENDPOINT_ENV, default=None, help="Remote classifier URL."),
    click.option("--fallback", type=click.Choice(["fail", "heuristic"]), default=None),
    click.option("--pair-m", "pair_m", type=int, default=None, help="Top-neighbor budget."),
    click.option("--pair-n", "pair_n", type=int, default=None, help="Left-neighbor budget."),
    click.option("--repair", is_flag=True, default=None, help="Drop lowest-confidence edges to break cycles."),
    click.option("--workers", type=int, default=None, help="Parallel tables."),
]


def with_shared_options(fn):
    for option in reversed(shared_options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Table structure recovery from word bounding boxes."""


@main.command()
@click.option("--detections", required=True, type=click.Path(exists=True, path_type=Path), help="Detections file or directory.")
@click.option("--truth", "truth_path", type=click.Path(exists=True, path_type=Path), default=None, help="Annotation JSONL (required for --classifier oracle).")
@click.option("--images", "images_dir", type=click.Path(exists=True, path_type=Path), default=None, help="Table images directory (required for --classifier remote).")
@click.option("--labels", "labels_path", type=click.Path(exists=True, path_type=Path), default=None, help="Precomputed labeled pairs (skips pairgen + classify).")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@with_shared_options
def reconstruct(detections, truth_path, images_dir, labels_path, out_dir, config_path, **flags):
    """Rebuild table structure as HTML plus a structure JSON per table."""
    config = _pipeline_config(config_path, **flags)
    out_dir.mkdir(parents=True, exist_ok=True)
    truth = _load_truth(truth_path) if truth_path else {}
    files = _detection_files(detections)

    def run_one(table_id: str, det_path: Path) -> Optional[str]:
        stage = "ingest"
        try:
            words = load_word_detections(det_path)
            if labels_path is not None:
                stage = "labels"
                labeled = _read_labeled(labels_path if labels_path.is_file() else labels_path / f"{table_id}.jsonl")
            else:
                stage = "pairgen"
                pairs = generate_pairs(words, config.pair_config)
                stage = "classify"
                image = None
                if images_dir is not None:
                    image_path = images_dir / f"{table_id}.png"
                    image = Image.open(image_path) if image_path.exists() else None
                labeled = classify_pairs(words, pairs, config, truth=truth.get(table_id), image=image)
            stage = "structure"
            result = reconstruct_from_labels(words, labeled, config)
            (out_dir / f"{table_id}.html").write_text(result.html, encoding="utf-8")
            (out_dir / f"{table_id}.structure.json").write_text(
                json.dumps(result.structure, indent=2), encoding="utf-8"
            )
            return None
        except WordGridError as exc:
            return f"{table_id}: {stage}: {exc}"

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        errors = [e for e in pool.map(lambda kv: run_one(*kv), sorted(files.items())) if e]
    for message in errors:
        click.echo(f"error: {message}", err=True)
    click.echo(f"reconstructed {len(files) - len(errors)}/{len(files)} tables -> {out_dir}")
    if errors:
        sys.exit(1)


@main.command()
@click.option("--pred", "pred_dir", required=True, type=click.Path(exists=True, path_type=Path), help="Directory of predicted <id>.html files.")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "report_path", type=click.Path(path_type=Path), default=None, help="Write the JSON report here.")
def evaluate(pred_dir, truth_path, report_path):
    """Score predictions against ground truth with adjacency-relation P/R/F1."""
    truth = _load_truth(truth_path)
    preds = {}
    for table_id in truth:
        html_path = pred_dir / f"{table_id}.html"
        if not html_path.exists():
            preds[table_id] = None
            continue
        try:
            grid, texts = parse_html_with_texts(html_path.read_text(encoding="utf-8"))
            preds[table_id] = (grid, texts)
        except WordGridError as exc:
            click.echo(f"warning: {table_id}: unreadable prediction ({exc})", err=True)
            preds[table_id] = None
    report = evaluate_corpus(preds, {tid: t for tid, t in truth.items()})
    click.echo(report.format_text())
    if report_path is not None:
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(report.to_json(), encoding="utf-8")
        click.echo(f"report -> {report_path}")


@main.command("export-pairs")
@click.option("--truth", "truth_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--images", "images_dir", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--detections", "detections_dir", type=click.Path(exists=True, path_type=Path), default=None, help="Word detections per table; tables without word boxes are skipped.")
@click.option("--synthetic", "synthetic", type=int, default=None, help="Generate N synthetic tables instead of reading --truth/--images.")
@click.option("--seed", type=int, default=0)
@click.option("--balance", type=float, default=0.5, help="Fraction of hard cases.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def export_pairs(truth_path, images_dir, detections_dir, synthetic, seed, balance, out_dir):
    """Render labeled pair images and a manifest for classifier training."""
    if synthetic is not None:
        tables = make_corpus(seed, synthetic)
        images = {t.table_id: render_table_image(t) for t in tables}
    else:
        if truth_path is None or images_dir is None:
            raise click.ClickException("either --synthetic or both --truth and --images are required")
        tables = list(_load_truth(truth_path).values())
        for table in tables:
            table.table_id = Path(table.table_id).stem
            if table.word_boxes is None and detections_dir is not None:
                det_path = detections_dir / f"{table.table_id}.jsonl"
                if det_path.exists():
                    table.word_boxes = load_word_detections(det_path)
        images = {}
        for table in tables:
            path = images_dir / f"{table.table_id}.png"
            if path.exists():
                images[table.table_id] = path
    summary = export_training_pairs(tables, images, out_dir, balance=balance, seed=seed)
    click.echo(
        f"exported {summary.records} pairs ({summary.hard} hard / {summary.simple} simple), "
        f"skipped {summary.skipped_tables} tables -> {summary.manifest_path}"
    )
    for label, count in sorted(summary.by_label.items()):
        click.echo(f"  {label:<12} {count}")


@main.command()
@click.option("--detections", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="Pairs JSONL (stdout otherwise).")
@with_shared_options
def pairgen(detections, out_path, config_path, **flags):
    """Emit candidate word pairs as JSON lines."""
    config = _pipeline_config(config_path, **flags)
    words = load_word_detections(detections)
    pairs = generate_pairs(words, config.pair_config)
    if out_path is None:
        _write_pairs(pairs, sys.stdout)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with out_path.open("w", encoding="utf-8") as fh:
            _write_pairs(pairs, fh)
    click.echo(f"{len(pairs)} pairs", err=True)


@main.command()
@click.option("--detections", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--truth", "truth_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--image", "image_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--table-id", default=None, help="Table id for --truth lookup (detections stem otherwise).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@with_shared_options
def classify(detections, pairs_path, truth_path, image_path, table_id, out_path, config_path, **flags):
    """Label candidate pairs with the configured classifier."""
    config = _pipeline_config(config_path, **flags)
    words = load_word_detections(detections)
    pairs = _read_pairs(pairs_path)
    truth = None
    if truth_path is not None:
        tables = _load_truth(truth_path)
        truth = tables.get(table_id or Path(detections).stem)
    image = Image.open(image_path) if image_path else None
    try:
        labeled = classify_pairs(words, pairs, config, truth=truth, image=image)
    except WordGridError as exc:
        raise click.ClickException(str(exc))
    lines = [
        json.dumps(
            {
                "a": lp.pair.a,
                "b": lp.pair.b,
                "direction": lp.pair.direction,
                "label": lp.label.value,
                "confidence": lp.confidence,
            }
        )
        for lp in labeled
    ]
    text = "\n".join(lines) + ("\n" if lines else "")
    if out_path is None:
        sys.stdout.write(text)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
    click.echo(f"{len(lines)} labels", err=True)


@main.command()
@click.option("--count", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.option("--no-spans", "spans", is_flag=True, flag_value=False, default=True)
@click.option("--no-blanks", "blanks", is_flag=True, flag_value=False, default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def synth(count, seed, spans, blanks, out_dir):
    """Generate a synthetic corpus: truth.jsonl, detections/, images/."""
    out_dir = Path(out_dir)
    (out_dir / "detections").mkdir(parents=True, exist_ok=True)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    tables = make_corpus(seed, count, spans=spans, blanks=blanks)
    with (out_dir / "truth.jsonl").open("w", encoding="utf-8") as fh:
        for table in tables:
            table.table_id = f"{table.table_id}.png"
            fh.write(json.dumps(format_pubtabnet_record(table)) + "\n")
            table.table_id = Path(table.table_id).stem
            with (out_dir / "detections" / f"{table.table_id}.jsonl").open("w", encoding="utf-8") as det:
                for w in table.word_boxes:
                    det.write(
                        json.dumps(
                            {"id": w.id, "bbox": [w.x_min, w.y_min, w.x_max, w.y_max], "text": w.text}
                        )
                        + "\n"
                    )
            render_table_image(table).save(out_dir / "images" / f"{table.table_id}.png")
    click.echo(f"{count} tables -> {out_dir}")


if __name__ == "__main__":
    main()
