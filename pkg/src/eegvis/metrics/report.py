"""Evaluation summary: scores of generated images and the rendered report."""

import csv
import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
import torch
from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel, ConfigDict, Field

from eegvis.core.errors import WriteError
from eegvis.metrics.diversity import class_consistency, pairwise_diversity
from eegvis.metrics.inception import inception_score

logger = logging.getLogger(__name__)

# Published figures on real recordings; shown for orientation, never asserted.
REFERENCE_INCEPTION_SCORES = {"none": 3.61, "ms_only": 4.27, "aug_only": 6.5, "both": 6.78}
REFERENCE_KMEANS_ACCURACY = {"softmax": 0.178, "triplet": 0.53}


class ClassScore(BaseModel):
    name: str = Field(alias="class")
    is_mean: float
    is_std: float

    model_config = ConfigDict(populate_by_name=True)


class ScoreReport(BaseModel):
    """Everything ``evaluate`` writes to ``scores.json``."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    classifier: str = Field(default="surrogate", description="Network that produced IS and consistency")
    is_mean: float
    is_std: float
    class_consistency: float
    diversity: float
    images_per_class: int
    num_images: int
    use_ms: bool | None = None
    use_aug: bool | None = None
    encoder_train_kmeans_acc: float | None = None
    kmeans_acc: float | None = Field(default=None, description="Encoder k-means accuracy on the test split")
    surrogate_test_acc: float | None = None
    per_class_is: list[ClassScore] = Field(default_factory=list)

    def save(self, path: Path) -> None:
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(self.model_dump_json(indent=2, by_alias=True) + "\n")
        except OSError as e:
            raise WriteError(f"Cannot write {path}: {e}") from e

    @classmethod
    def load(cls, path: Path) -> "ScoreReport":
        return cls.model_validate_json(Path(path).read_text())


def class_diversity(images: torch.Tensor, labels: np.ndarray) -> float:
    """Mean within-class pairwise diversity over classes with two or more images."""
    labels = np.asarray(labels)
    values = [
        pairwise_diversity(images[torch.from_numpy(labels == label)])
        for label in np.unique(labels)
        if np.sum(labels == label) >= 2
    ]
    return float(np.mean(values)) if values else float("nan")


def score_samples(
    images: torch.Tensor,
    labels: np.ndarray,
    classifier: Callable[[torch.Tensor], torch.Tensor] | None,
    splits: int = 10,
) -> dict[str, float]:
    """IS, class consistency and within-class diversity of generated images.

    Classifier-based scores are NaN when no classifier is given.
    """
    scores = {"diversity": class_diversity(images, labels)}
    if classifier is None:
        scores.update(is_mean=float("nan"), is_std=float("nan"), class_consistency=float("nan"))
        return scores
    scores["is_mean"], scores["is_std"] = inception_score(images, classifier, splits)
    scores["class_consistency"] = class_consistency(images, labels, classifier)
    return scores


def write_per_class_table(rows: list[dict[str, float | str]], path: Path) -> None:
    try:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=["class", "is_mean", "is_std"])
            writer.writeheader()
            writer.writerows(rows)
    except OSError as e:
        raise WriteError(f"Cannot write {path}: {e}") from e


def get_template_env() -> Environment:
    """Get Jinja2 environment for report templates."""
    template_dir = Path(__file__).parent / "templates"
    return Environment(
        loader=FileSystemLoader(str(template_dir)),
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render_report(report: ScoreReport, path: Path, run_name: str = "") -> None:
    """Render ``report.md`` next to ``scores.json``."""
    template = get_template_env().get_template("report.md.jinja2")
    content = template.render(
        report=report,
        run_name=run_name,
        reference_is=REFERENCE_INCEPTION_SCORES,
        reference_kmeans=REFERENCE_KMEANS_ACCURACY,
    )
    try:
        Path(path).write_text(content)
    except OSError as e:
        raise WriteError(f"Cannot write {path}: {e}") from e
    logger.info("Report written to %s", path)
