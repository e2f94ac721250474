"""Tests for the surrogate classifier, score report and rendered summary."""

import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
import torch
from assertpy import assert_that
from PIL import Image

from eegvis.core.errors import ConfigError
from eegvis.data.images import export_image_grid, to_channels_first, to_uint8
from eegvis.metrics.inception import inception_score
from eegvis.metrics.report import (
    REFERENCE_INCEPTION_SCORES,
    ClassScore,
    ScoreReport,
    render_report,
    score_samples,
    write_per_class_table,
)
from eegvis.metrics.surrogate import load_surrogate, save_surrogate, train_surrogate_classifier
from tests.conftest import single_class_dataset


def _report(**overrides) -> ScoreReport:
    fields = {
        "is_mean": 2.5,
        "is_std": 0.1,
        "class_consistency": 0.9,
        "diversity": 0.2,
        "images_per_class": 4,
        "num_images": 12,
        "use_ms": True,
        "use_aug": False,
        "kmeans_acc": 0.8,
        "per_class_is": [ClassScore(name="class_0", is_mean=1.5, is_std=0.0)],
    }
    fields.update(overrides)
    return ScoreReport(**fields)


def test_untrained_surrogate_is_uniform(tiny_dataset):
    """0 epochs leaves the zero head: uniform posteriors and IS = 1."""
    result = train_surrogate_classifier(tiny_dataset, seed=0, epochs=0)
    images, _ = tiny_dataset.image_pool("train")
    probs = result.classifier.probabilities(to_channels_first(images))

    assert_that(torch.allclose(probs, torch.full_like(probs, 1.0 / 3))).is_true()
    mean, _ = inception_score(to_channels_first(images), result.classifier.probabilities, splits=1)
    assert_that(mean).is_close_to(1.0, 1e-6)
    assert_that(len(result.log)).is_zero()


def test_surrogate_is_deterministic(tiny_dataset):
    """Same seed gives identical parameters."""
    a = train_surrogate_classifier(tiny_dataset, seed=3, epochs=2)
    b = train_surrogate_classifier(tiny_dataset, seed=3, epochs=2)

    for (name, p), q in zip(a.classifier.state_dict().items(), b.classifier.state_dict().values(), strict=True):
        assert_that(torch.equal(p, q)).described_as(name).is_true()
    assert_that(a.log.rows).is_equal_to(b.log.rows)


def test_surrogate_needs_two_classes():
    """A single-class dataset cannot train a classifier."""
    with pytest.raises(ConfigError):
        train_surrogate_classifier(single_class_dataset(), seed=0)


def test_surrogate_checkpoint_round_trip(tiny_dataset):
    """A reloaded surrogate gives identical posteriors."""
    result = train_surrogate_classifier(tiny_dataset, seed=1, epochs=1)
    images = to_channels_first(tiny_dataset.image_pool("test")[0])
    with tempfile.TemporaryDirectory() as tmpdir:
        save_surrogate(Path(tmpdir) / "surrogate", result.classifier)
        restored = load_surrogate(Path(tmpdir) / "surrogate")

    assert_that(torch.equal(restored.probabilities(images), result.classifier.probabilities(images))).is_true()


def test_score_samples_without_classifier():
    """Without a classifier only diversity is computed; the rest is NaN."""
    images = torch.rand(6, 3, 8, 8, generator=torch.Generator().manual_seed(0))
    scores = score_samples(images, np.repeat(np.arange(3), 2), None)

    assert_that(math.isnan(scores["is_mean"])).is_true()
    assert_that(math.isnan(scores["class_consistency"])).is_true()
    assert_that(scores["diversity"]).is_greater_than(0.0)


def test_score_report_round_trip_with_nan():
    """NaN scores survive scores.json; per-class rows serialise under 'class'."""
    report = _report(is_mean=float("nan"), is_std=float("nan"))
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "scores.json"
        report.save(path)
        raw = json.loads(path.read_text())
        loaded = ScoreReport.load(path)

    assert_that(raw["per_class_is"][0]).contains_key("class")
    assert_that(raw["classifier"]).is_equal_to("surrogate")
    assert_that(math.isnan(loaded.is_mean)).is_true()
    assert_that(loaded.per_class_is[0].name).is_equal_to("class_0")
    assert_that(loaded.kmeans_acc).is_equal_to(0.8)


def test_per_class_table_layout():
    """The per-class table has class, mean and SD columns."""
    rows = [{"class": "0", "is_mean": 1.2, "is_std": 0.1}, {"class": "All", "is_mean": 1.4, "is_std": 0.05}]
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "per_class_is.csv"
        write_per_class_table(rows, path)
        lines = path.read_text().splitlines()

    assert_that(lines[0]).is_equal_to("class,is_mean,is_std")
    assert_that(lines[-1]).starts_with("All,")


def test_render_report():
    """report.md carries the scores, the per-class rows and the reference values."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "report.md"
        render_report(_report(), path, run_name="r1")
        content = path.read_text()

    assert_that(content).contains("# Evaluation report: r1")
    assert_that(content).contains("| Inception score | 2.500 ± 0.100 |")
    assert_that(content).contains("| class_0 | 1.500 | 0.000 |")
    assert_that(content).contains("mode-seeking on, augmentation off")
    assert_that(content).contains(str(REFERENCE_INCEPTION_SCORES["both"]))
    assert_that(content).contains("| train | n/a |")


def test_uint8_mapping():
    """-1 maps to 0, 1 to 255 and out-of-range values are clamped."""
    values = torch.tensor([-2.0, -1.0, 0.0, 1.0, 3.0])
    assert_that(to_uint8(values).tolist()).is_equal_to([0, 0, 128, 255, 255])


def test_export_image_grid(tiny_dataset):
    """A grid PNG is written for channels-last arrays."""
    images, _ = tiny_dataset.image_pool("test")
    with tempfile.TemporaryDirectory() as tmpdir:
        path = export_image_grid(images, Path(tmpdir) / "sheet" / "grid.png", nrow=2)
        with Image.open(path) as png:
            size, mode = png.size, png.mode

    assert_that(mode).is_equal_to("RGB")
    # 2 columns x 3 rows of 8px tiles with 2px padding
    assert_that(size).is_equal_to((2 + 2 * 10, 2 + 3 * 10))
