"""Tests for the EEG encoder, triplet loss and triplet mining."""

import tempfile
from pathlib import Path

import numpy as np
import pytest
import torch
import torch.nn.functional as F
from assertpy import assert_that

from eegvis.core.config import EncoderConfig
from eegvis.core.errors import ConfigError, MiningError, ShapeError
from eegvis.encoder.model import (
    EMBEDDING_DIM,
    ClassifierHead,
    EncoderModel,
    embed,
    load_encoder,
    save_encoder,
)
from eegvis.encoder.train import (
    SOFTMAX_COLUMNS,
    TRIPLET_COLUMNS,
    ClassBalancedSampler,
    train_classifier_baseline,
    train_encoder,
)
from eegvis.encoder.triplet import (
    TripletBatch,
    mine_all_valid,
    mine_hard,
    mine_semi_hard,
    mine_triplets,
    pairwise_sq_distances,
    triplet_loss,
)
from tests.conftest import single_class_dataset

TINY_ENCODER = EncoderConfig(epochs=2, batch_classes=3, batch_per_class=4, hidden_size=16)


def _triplets(*rows: tuple[int, int, int]) -> TripletBatch:
    return TripletBatch(torch.tensor(rows, dtype=torch.long))


def _oracle_semi_hard(dist: torch.Tensor, labels: list[int], margin: float) -> list[tuple[int, int, int]]:
    """Brute-force semi-hard selection with the same fallback and tie rules."""
    n = len(labels)
    out = []
    for a in range(n):
        for p in range(n):
            if a == p or labels[a] != labels[p]:
                continue
            d_ap = float(dist[a, p])
            # window edge rounded the way the miner computes it (float32)
            upper = float(dist[a, p] + margin)
            negatives = [(float(dist[a, i]), i) for i in range(n) if labels[i] != labels[a]]
            semi = [c for c in negatives if d_ap < c[0] < upper]
            beyond = [c for c in negatives if c[0] > d_ap]
            pool = semi or beyond or negatives
            out.append((a, p, min(pool)[1]))
    return out


def test_embed_shape_and_norm():
    """N windows give N x 128 unit-norm embeddings."""
    torch.manual_seed(0)
    model = EncoderModel(channels=4, hidden_size=16)
    x = np.random.default_rng(0).normal(size=(6, 4, 12)).astype(np.float32)
    emb = embed(model, x)

    assert_that(tuple(emb.shape)).is_equal_to((6, EMBEDDING_DIM))
    norms = emb.norm(dim=1)
    assert_that(float((norms - 1.0).abs().max())).is_less_than(1e-5)


def test_embed_duplicate_rows_are_identical():
    """Duplicated input windows embed to bit-identical rows."""
    torch.manual_seed(1)
    model = EncoderModel(channels=3, hidden_size=8)
    x = np.random.default_rng(1).normal(size=(1, 3, 10)).astype(np.float32)
    emb = embed(model, np.concatenate([x, x, x]))
    assert_that(torch.equal(emb[0], emb[1])).is_true()
    assert_that(torch.equal(emb[0], emb[2])).is_true()


def test_embed_without_norm():
    """With output_norm off the embeddings are not rescaled."""
    torch.manual_seed(2)
    model = EncoderModel(channels=2, hidden_size=8, output_norm=False)
    with torch.no_grad():
        model.projection.weight.mul_(10.0)
        model.projection.bias.fill_(1.0)
    emb = embed(model, np.ones((3, 2, 5), dtype=np.float32))
    assert_that(float(emb.norm(dim=1).min())).is_greater_than(2.0)


def test_embed_rejects_wrong_channel_count():
    """A window with a different channel count is a shape error."""
    model = EncoderModel(channels=4, hidden_size=8)
    with pytest.raises(ShapeError):
        embed(model, np.zeros((2, 3, 10), dtype=np.float32))


def test_triplet_loss_inactive_with_slack():
    """e_a = e_p and |e_a - e_n|^2 = 2 beta gives zero loss."""
    emb = torch.tensor([[0.0], [0.0], [0.4**0.5]], dtype=torch.float64)
    loss = triplet_loss(emb, _triplets((0, 1, 2)), margin=0.2)
    assert_that(float(loss)).is_equal_to(0.0)


def test_triplet_loss_hand_value():
    """d_ap = d_an = 1 with beta 0.2 gives 0.2."""
    emb = torch.tensor([[0.0], [1.0], [-1.0]], dtype=torch.float64)
    loss = triplet_loss(emb, _triplets((0, 1, 2)), margin=0.2)
    assert_that(float(loss)).is_close_to(0.2, 1e-12)


def test_triplet_loss_empty_batch_has_zero_gradient():
    """No triplets means loss 0 with a zero gradient that still reaches emb."""
    emb = torch.randn(4, 8, dtype=torch.float64, requires_grad=True)
    loss = triplet_loss(emb, TripletBatch.empty(), margin=0.2)
    loss.backward()
    assert_that(float(loss)).is_equal_to(0.0)
    assert_that(float(emb.grad.abs().sum())).is_equal_to(0.0)


def test_triplet_loss_gradient_matches_finite_differences():
    """Analytic gradient equals central differences on active triplets (double)."""
    torch.manual_seed(3)
    emb = torch.randn(8, 128, dtype=torch.float64, requires_grad=True)
    labels = torch.tensor([0, 0, 1, 1, 2, 2, 3, 3])
    triplets = mine_all_valid(labels)
    # margin large enough that every triplet is active
    assert_that(
        torch.autograd.gradcheck(lambda e: triplet_loss(e, triplets, 1000.0), (emb,), eps=1e-6, atol=1e-6, rtol=1e-4)
    ).is_true()


def test_baseline_cross_entropy_gradient_matches_finite_differences():
    """Softmax cross-entropy through the head and the encoder passes double-precision checks."""
    torch.manual_seed(6)
    model = EncoderModel(channels=2, hidden_size=8, output_norm=False).double()
    head = ClassifierHead(num_classes=3).double()
    labels = torch.tensor([0, 1, 2, 1])
    features = torch.randn(4, EMBEDDING_DIM, dtype=torch.float64, requires_grad=True)
    windows = torch.randn(4, 2, 6, dtype=torch.float64, requires_grad=True)

    checks = [
        (lambda f: F.cross_entropy(head(f), labels), (features,)),
        (lambda x: F.cross_entropy(head(model(x)), labels), (windows,)),
    ]
    for fn, inputs in checks:
        assert_that(torch.autograd.gradcheck(fn, inputs, eps=1e-6, atol=1e-6, rtol=1e-4)).is_true()


def test_triplet_loss_is_isometry_invariant():
    """An orthogonal transform of the embedding space leaves the loss unchanged."""
    torch.manual_seed(4)
    emb = torch.randn(10, 16, dtype=torch.float64)
    q, _ = torch.linalg.qr(torch.randn(16, 16, dtype=torch.float64))
    labels = torch.tensor([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
    triplets = mine_all_valid(labels)

    before = triplet_loss(emb, triplets, 0.5)
    after = triplet_loss(emb @ q, triplets, 0.5)
    assert_that(float((before - after).abs())).is_less_than(1e-5)
    assert_that(float(before)).is_greater_than_or_equal_to(0.0)


def test_mine_semi_hard_example():
    """Anchor 0 / positive 1 picks index 2, the only negative inside the margin window."""
    emb = torch.tensor([[0.0], [0.1], [0.5], [2.0]])
    triplets = mine_semi_hard(emb, torch.tensor([0, 0, 1, 1]), margin=1.0)
    assert_that(triplets.as_tuples()).contains((0, 1, 2))


def test_mine_semi_hard_matches_brute_force():
    """200 random batches (size <= 32, 2-5 classes) agree exactly with enumeration."""
    rng = np.random.default_rng(5)
    for trial in range(200):
        n = int(rng.integers(2, 33))
        num_classes = int(rng.integers(2, 6))
        labels = rng.integers(0, num_classes, size=n)
        labels[0], labels[1] = 0, 1
        if trial % 2:
            # coarse grid: many exact distance ties
            emb = torch.from_numpy(rng.integers(0, 3, size=(n, 2)).astype(np.float32))
        else:
            emb = torch.from_numpy(rng.normal(size=(n, 3)).astype(np.float32))
        margin = float(rng.uniform(0.05, 2.0))

        mined = mine_semi_hard(emb, torch.from_numpy(labels), margin).as_tuples()
        expected = _oracle_semi_hard(pairwise_sq_distances(emb), labels.tolist(), margin)
        assert_that(mined).described_as(f"trial {trial}").is_equal_to(expected)


def test_mined_triplets_are_valid():
    """Every strategy returns label[a] == label[p] != label[n] with a != p."""
    torch.manual_seed(6)
    emb = torch.randn(12, 4)
    labels = torch.tensor([0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3])
    for strategy in ("semi_hard", "hard", "all_valid"):
        triplets = mine_triplets(emb, labels, 0.2, strategy)
        assert_that(len(triplets)).is_greater_than(0)
        for a, p, n in triplets.as_tuples():
            assert_that(a).is_not_equal_to(p)
            assert_that(int(labels[a])).is_equal_to(int(labels[p]))
            assert_that(int(labels[a])).is_not_equal_to(int(labels[n]))


def test_mine_hard_picks_closest_negative():
    """Hard mining ignores the margin and takes the nearest negative."""
    emb = torch.tensor([[0.0], [1.0], [0.2], [5.0]])
    triplets = mine_hard(emb, torch.tensor([0, 0, 1, 1]))
    assert_that(triplets.as_tuples()[0]).is_equal_to((0, 1, 2))


def test_mine_all_valid_counts():
    """Two classes of two give 2 ordered pairs x 2 negatives per class."""
    triplets = mine_all_valid(torch.tensor([0, 0, 1, 1]))
    assert_that(len(triplets)).is_equal_to(8)


def test_single_class_batch_is_mining_error():
    """All labels equal leaves no negatives."""
    with pytest.raises(MiningError):
        mine_semi_hard(torch.randn(4, 3), torch.zeros(4, dtype=torch.long), 0.2)


def test_sampler_clamps_batch_spec(tiny_dataset):
    """P and Kb are clamped to the classes and samples available."""
    _, labels = tiny_dataset.split("train")
    sampler = ClassBalancedSampler(labels, batch_classes=10, batch_per_class=8, rng=np.random.default_rng(0))
    batch = sampler.sample()

    assert_that(sampler.batch_classes).is_equal_to(3)
    assert_that(sampler.batch_per_class).is_equal_to(4)
    assert_that(len(batch)).is_equal_to(12)
    assert_that(len(set(batch.tolist()))).is_equal_to(12)


def test_train_encoder_zero_epochs(tiny_dataset):
    """0 epochs returns the initialised model and an empty log."""
    cfg = TINY_ENCODER.model_copy(update={"epochs": 0})
    result = train_encoder(tiny_dataset, cfg, seed=0, kmeans_restarts=1)
    assert_that(len(result.log)).is_zero()
    assert_that(result.head).is_none()


def test_train_encoder_logs_each_epoch(tiny_dataset):
    """Each epoch appends loss and k-means accuracies; reruns are identical."""
    with tempfile.TemporaryDirectory() as tmpdir:
        log_path = Path(tmpdir) / "encoder_log.csv"
        first = train_encoder(tiny_dataset, TINY_ENCODER, seed=1, kmeans_restarts=1, log_path=log_path)
        second = train_encoder(tiny_dataset, TINY_ENCODER, seed=1, kmeans_restarts=1)
        header = log_path.read_text().splitlines()[0]

    assert_that(header).is_equal_to(",".join(TRIPLET_COLUMNS))
    assert_that(first.log.column("epoch")).is_equal_to([1, 2])
    assert_that(first.log.rows).is_equal_to(second.log.rows)
    for acc in first.log.column("test_kmeans_acc"):
        assert_that(acc).is_between(0.0, 1.0)


def test_train_encoder_infeasible_batch_is_config_error():
    """A single-class train split cannot form triplets."""
    with pytest.raises(ConfigError):
        train_encoder(single_class_dataset(), TINY_ENCODER, seed=0)


def test_train_classifier_baseline_logs_cls_acc(tiny_dataset):
    """The softmax baseline log carries a cls_acc column."""
    result = train_classifier_baseline(tiny_dataset, TINY_ENCODER, seed=0, kmeans_restarts=1)

    assert_that(result.log.columns).is_equal_to(SOFTMAX_COLUMNS)
    assert_that(result.head).is_not_none()
    assert_that(result.log.rows[-1]["cls_acc"]).is_between(0.0, 1.0)
    assert_that(result.model.output_norm).is_false()


def test_train_classifier_baseline_single_class_is_config_error():
    """K = 1 makes softmax degenerate."""
    with pytest.raises(ConfigError):
        train_classifier_baseline(single_class_dataset(), TINY_ENCODER, seed=0)


def test_encoder_checkpoint_round_trip(tiny_dataset):
    """A reloaded encoder reproduces embeddings bit-exactly."""
    result = train_encoder(tiny_dataset, TINY_ENCODER.model_copy(update={"epochs": 1}), seed=2, kmeans_restarts=1)
    x, _ = tiny_dataset.split("test")
    with tempfile.TemporaryDirectory() as tmpdir:
        save_encoder(Path(tmpdir) / "encoder", result.model)
        restored = load_encoder(Path(tmpdir) / "encoder")

    assert_that(restored.config()).is_equal_to(result.model.config())
    assert_that(torch.equal(embed(restored, x), embed(result.model, x))).is_true()
