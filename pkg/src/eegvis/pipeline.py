"""Experiment stages shared by the CLI commands.

Each stage reads what it needs from a run directory, writes its artifacts
back into it, and derives its randomness from the run's master seed.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import torch

from eegvis.core.config import RunConfig
from eegvis.core.errors import DegenerateInputError, EegVisError, MissingArtifactError
from eegvis.core.metric_log import MetricLog
from eegvis.core.run_dir import (
    ABLATION_SUMMARY,
    EMBEDDING_FILE,
    ENCODER_DIR,
    ENCODER_LOG,
    GENERATOR_DIR,
    PER_CLASS_IS_FILE,
    REPORT_FILE,
    SAMPLES_DIR,
    SCORES_FILE,
    SURROGATE_DIR,
    SURROGATE_LOG,
    create_run_dir,
    find_artifact,
)
from eegvis.core.seeding import derive_seed
from eegvis.data.dataset import PairedDataset, load_dataset, normalize_signal
from eegvis.data.images import export_image_grid, to_channels_first
from eegvis.data.synthetic import synthesize_dataset
from eegvis.encoder.model import EncoderModel, embed, load_encoder, save_encoder
from eegvis.encoder.train import EncoderTrainingResult, train_classifier_baseline, train_encoder
from eegvis.gan.models import Generator, LatentSampler, generate, load_generator
from eegvis.gan.train import GanTrainingResult, train_gan
from eegvis.metrics.clustering import kmeans_accuracy
from eegvis.metrics.diversity import class_consistency
from eegvis.metrics.embedding import export_embedding_2d
from eegvis.metrics.inception import per_class_inception_scores
from eegvis.metrics.report import (
    REFERENCE_INCEPTION_SCORES,
    ClassScore,
    ScoreReport,
    class_diversity,
    render_report,
    write_per_class_table,
)
from eegvis.metrics.surrogate import (
    SurrogateClassifier,
    accuracy,
    load_surrogate,
    save_surrogate,
    train_surrogate_classifier,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, dict[str, Any]], None]

REGIMES: dict[str, tuple[bool, bool]] = {
    "none": (False, False),
    "ms_only": (True, False),
    "aug_only": (False, True),
    "both": (True, True),
}
SUMMARY_COLUMNS = [
    "regime",
    "use_ms",
    "use_aug",
    "status",
    "classifier",
    "is_mean",
    "is_std",
    "kmeans_acc",
    "encoder_train_kmeans_acc",
    "class_consistency",
    "diversity",
    "surrogate_test_acc",
    "images_per_class",
    "num_images",
    "reference_is",
    "error",
]


def load_run_dataset(cfg: RunConfig) -> PairedDataset:
    """Load the configured container, or synthesise the configured dataset."""
    if cfg.data.path is not None:
        if not cfg.data.path.exists():
            raise MissingArtifactError(f"Dataset not found: {cfg.data.path}")
        return load_dataset(cfg.data.path)
    seed = cfg.data.synthetic.seed
    if seed is None:
        seed = derive_seed(cfg.seed, "data")
    return synthesize_dataset(cfg.data.synthetic, seed=seed)


def _require(name: str, run_dir: Path, shared: bool = True) -> Path:
    path = find_artifact(name, run_dir) if shared else run_dir / name
    if path is None or not path.exists():
        raise MissingArtifactError(f"No {name} checkpoint found for run {run_dir}")
    return path


def find_encoder(run_dir: Path) -> EncoderModel:
    """Load the encoder of a run (or of an enclosing ablation directory)."""
    return load_encoder(_require(ENCODER_DIR, run_dir))


def find_generator(run_dir: Path) -> Generator:
    return load_generator(_require(GENERATOR_DIR, run_dir, shared=False))


def run_encoder_stage(
    cfg: RunConfig,
    ds: PairedDataset,
    run_dir: Path,
    progress_callback: ProgressCallback | None = None,
) -> EncoderTrainingResult:
    """Train the encoder in the configured regime and checkpoint it."""
    seed = derive_seed(cfg.seed, "encoder")
    trainer = train_encoder if cfg.encoder.regime == "triplet" else train_classifier_baseline
    result = trainer(
        ds,
        cfg.encoder,
        seed,
        device=cfg.device,
        kmeans_restarts=cfg.metrics.restarts,
        log_path=run_dir / ENCODER_LOG,
        progress_callback=progress_callback,
    )
    save_encoder(run_dir / ENCODER_DIR, result.model, result.head)
    return result


def ensure_surrogate(cfg: RunConfig, ds: PairedDataset, run_dir: Path) -> tuple[SurrogateClassifier, float]:
    """Reuse the surrogate of the run or its ablation directory, or train one into ``run_dir``.

    Returns the classifier and its accuracy on the test image pool.
    """
    existing = find_artifact(SURROGATE_DIR, run_dir)
    if existing is not None:
        classifier = load_surrogate(existing).to(cfg.device)
        test_images, test_labels = ds.image_pool("test")
        return classifier, accuracy(classifier.probabilities, to_channels_first(test_images), test_labels)

    result = train_surrogate_classifier(
        ds,
        derive_seed(cfg.seed, "metrics"),
        epochs=cfg.metrics.surrogate_epochs,
        lr=cfg.metrics.surrogate_lr,
        device=cfg.device,
        log_path=run_dir / SURROGATE_LOG,
    )
    save_surrogate(run_dir / SURROGATE_DIR, result.classifier)
    return result.classifier, result.test_accuracy


def run_gan_stage(
    cfg: RunConfig,
    ds: PairedDataset,
    run_dir: Path,
    classifier: SurrogateClassifier | None = None,
    progress_callback: ProgressCallback | None = None,
) -> GanTrainingResult:
    """Train the GAN on the frozen encoder of the run (or of its ablation directory)."""
    encoder = find_encoder(run_dir).to(cfg.device)
    return train_gan(
        ds,
        encoder,
        cfg.gan,
        cfg.seed,
        device=cfg.device,
        classifier=classifier.probabilities if classifier is not None else None,
        output_dir=run_dir,
        images_per_class=cfg.metrics.images_per_class,
        splits=cfg.metrics.splits,
        progress_callback=progress_callback,
    )


def conditioned_images(
    generator: Generator,
    encoder: EncoderModel,
    ds: PairedDataset,
    per_class: int,
    seed: int,
    device: str = "cpu",
) -> tuple[torch.Tensor, np.ndarray]:
    """Generate ``per_class`` images per class from test-split EEG windows.

    Windows are drawn per class (with replacement when a class has fewer
    than ``per_class``); classes without test windows fall back to train.
    """
    rng = np.random.default_rng(seed)
    eeg_test, labels_test = ds.split("test")
    eeg_train, labels_train = ds.split("train")
    windows, labels = [], []
    for label in range(ds.num_classes):
        pool = eeg_test[labels_test == label]
        if len(pool) == 0:
            pool = eeg_train[labels_train == label]
        if len(pool) == 0:
            continue
        idx = rng.choice(len(pool), size=per_class, replace=len(pool) < per_class)
        windows.append(pool[idx])
        labels.extend([label] * per_class)
    psi = embed(encoder, normalize_signal(np.concatenate(windows))).to(device)
    z = LatentSampler(generator.latent_dim, seed).sample(len(labels)).to(device)
    return generate(generator, z, psi), np.asarray(labels, dtype=np.int64)


def _class_names(ds: PairedDataset) -> list[str] | None:
    names = ds.metadata.get("class_names")
    if not names:
        return None
    names = names.split(",")
    return names if len(names) == ds.num_classes else None


def _encoder_scores(cfg: RunConfig, encoder: EncoderModel, ds: PairedDataset, run_dir: Path) -> dict[str, float | None]:
    scores: dict[str, float | None] = {}
    for name, key in (("train", "encoder_train_kmeans_acc"), ("test", "kmeans_acc")):
        eeg, labels = ds.split(name)
        if len(labels) < ds.num_classes:
            scores[key] = None
            continue
        emb = embed(encoder, normalize_signal(eeg)).cpu().numpy()
        scores[key], _ = kmeans_accuracy(
            emb, labels, k=ds.num_classes, restarts=cfg.metrics.restarts,
            seed=derive_seed(cfg.seed, "metrics"), max_iter=cfg.metrics.max_iter,
        )
        if name == "test":
            try:
                export_embedding_2d(emb, labels, run_dir / EMBEDDING_FILE)
            except (DegenerateInputError, ValueError) as e:
                logger.warning("Skipping 2D embedding export: %s", e)
    return scores


def evaluate_run(cfg: RunConfig, ds: PairedDataset, run_dir: Path) -> ScoreReport:
    """Score a trained run and write scores.json, per_class_is.csv, embedding_2d.csv and report.md."""
    encoder = find_encoder(run_dir).to(cfg.device)
    generator = find_generator(run_dir).to(cfg.device)
    classifier, surrogate_acc = ensure_surrogate(cfg, ds, run_dir)

    per_class = cfg.metrics.images_per_class
    images, labels = conditioned_images(
        generator, encoder, ds, per_class, derive_seed(cfg.seed, "metrics"), cfg.device
    )
    splits = min(cfg.metrics.splits, len(labels))
    rows = per_class_inception_scores(images, labels, classifier.probabilities, splits, _class_names(ds))
    write_per_class_table(rows, run_dir / PER_CLASS_IS_FILE)
    overall = rows[-1]

    report = ScoreReport(
        is_mean=overall["is_mean"],
        is_std=overall["is_std"],
        class_consistency=class_consistency(images, labels, classifier.probabilities),
        diversity=class_diversity(images, labels),
        images_per_class=per_class,
        num_images=len(labels),
        use_ms=cfg.gan.use_ms,
        use_aug=cfg.gan.use_aug,
        surrogate_test_acc=surrogate_acc,
        per_class_is=[ClassScore.model_validate(row) for row in rows[:-1]],
        **_encoder_scores(cfg, encoder, ds, run_dir),
    )
    report.save(run_dir / SCORES_FILE)
    render_report(report, run_dir / REPORT_FILE, run_name=run_dir.name)
    logger.info(
        "IS %.3f +/- %.3f, class consistency %.3f, diversity %.4f",
        report.is_mean, report.is_std, report.class_consistency, report.diversity,
    )
    return report


def generate_grid(
    run_dir: Path, ds: PairedDataset, per_class: int, seed: int, path: Path | None = None, device: str = "cpu"
) -> Path:
    """Write one grid row per class of images conditioned on test EEG."""
    encoder = find_encoder(run_dir).to(device)
    generator = find_generator(run_dir).to(device)
    images, _ = conditioned_images(generator, encoder, ds, per_class, seed, device)
    path = path or run_dir / SAMPLES_DIR / f"generated_seed{seed}.png"
    return export_image_grid(images, path, nrow=per_class)


@dataclass
class RegimeOutcome:
    regime: str
    status: str
    report: ScoreReport | None = None
    error: str = ""


def _reference_line() -> str:
    values = " ".join(f"{name}={value}" for name, value in REFERENCE_INCEPTION_SCORES.items())
    return f"reference inception scores on real recordings (not comparable): {values}"


def _summary_row(outcome: RegimeOutcome) -> dict[str, Any]:
    use_ms, use_aug = REGIMES[outcome.regime]
    row: dict[str, Any] = {
        "regime": outcome.regime,
        "use_ms": use_ms,
        "use_aug": use_aug,
        "status": outcome.status,
        "reference_is": REFERENCE_INCEPTION_SCORES[outcome.regime],
        "error": outcome.error,
    }
    if outcome.report is not None:
        fields = outcome.report.model_dump(exclude={"per_class_is", "use_ms", "use_aug"})
        row.update({k: v for k, v in fields.items() if k in SUMMARY_COLUMNS})
    return row


def run_ablation(
    cfg: RunConfig,
    ds: PairedDataset,
    out_dir: Path,
    regimes: list[str],
    on_regime: Callable[[RegimeOutcome], None] | None = None,
) -> list[RegimeOutcome]:
    """Train and evaluate one GAN per regime against a shared encoder and surrogate.

    The shared encoder and surrogate live in ``out_dir``; each regime gets
    ``out_dir/<regime>``. A failing regime is recorded and the rest still run.
    The summary header reads ``incomplete`` until every requested regime has
    been attempted.
    """
    create_run_dir(out_dir, cfg)
    if find_artifact(ENCODER_DIR, out_dir) is None:
        logger.info("Training shared encoder")
        run_encoder_stage(cfg, ds, out_dir)
    classifier, _ = ensure_surrogate(cfg, ds, out_dir)

    summary = MetricLog(
        SUMMARY_COLUMNS, out_dir / ABLATION_SUMMARY, comments=["status: incomplete", _reference_line()]
    )
    outcomes = []
    for regime in regimes:
        use_ms, use_aug = REGIMES[regime]
        regime_cfg = cfg.model_copy(
            update={
                "gan": cfg.gan.model_copy(update={"use_ms": use_ms, "use_aug": use_aug}),
                "output_dir": out_dir / regime,
            }
        )
        run_dir = create_run_dir(out_dir / regime, regime_cfg)
        logger.info("Regime %s (mode seeking %s, augmentation %s)", regime, use_ms, use_aug)
        try:
            run_gan_stage(regime_cfg, ds, run_dir, classifier)
            outcome = RegimeOutcome(regime, "completed", evaluate_run(regime_cfg, ds, run_dir))
        except EegVisError as e:
            logger.error("Regime %s failed: %s", regime, e)
            outcome = RegimeOutcome(regime, "failed", error=str(e))
        except Exception as e:
            logger.exception("Regime %s failed unexpectedly", regime)
            outcome = RegimeOutcome(regime, "failed", error=f"{type(e).__name__}: {e}")
        outcomes.append(outcome)
        summary.append(_summary_row(outcome))
        if on_regime:
            on_regime(outcome)

    summary.set_comments(["status: complete", _reference_line()])
    return outcomes
