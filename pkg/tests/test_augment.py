"""Tests for the differentiable augmentation block."""

import torch
from assertpy import assert_that

from eegvis.core.config import AugmentConfig
from eegvis.gan.augment import (
    AugmentationPolicy,
    AugmentParams,
    DiffAugment,
    adjust_brightness,
    adjust_contrast,
    adjust_saturation,
    translate,
)


def _images(n: int = 4, size: int = 8, seed: int = 0, scale: float = 0.5) -> torch.Tensor:
    generator = torch.Generator().manual_seed(seed)
    return (torch.rand(n, 3, size, size, generator=generator, dtype=torch.float64) * 2.0 - 1.0) * scale


def test_identity_policy_is_bit_exact():
    """Zero-magnitude ranges return the input unchanged."""
    x = _images(size=32).float()
    out, params = DiffAugment(AugmentationPolicy.identity(), seed=0)(x)

    assert_that(torch.equal(out, x)).is_true()
    assert_that(params.shift).is_none()
    assert_that(params.brightness).is_none()


def test_policy_from_config():
    """The policy mirrors the augmentation section of the run config."""
    policy = AugmentationPolicy.from_config(AugmentConfig(ops=["translation", "contrast"], translation_ratio=0.25))

    assert_that(policy.ops).is_equal_to(("translation", "contrast"))
    assert_that(policy.max_shift(32)).is_equal_to(8)
    assert_that(policy.active("brightness", 32)).is_false()
    assert_that(policy.active("contrast", 32)).is_true()


def test_translation_shift_is_capped():
    """Shifts stay within floor(0.125 H), so at least 75% of each axis survives."""
    augment = DiffAugment(AugmentationPolicy(ops=("translation",)), seed=1)
    params = augment.draw(64, 32)
    out, _ = augment(torch.ones(64, 3, 32, 32), params)

    assert_that(int(params.shift.abs().max())).is_less_than_or_equal_to(4)
    rows_alive = (out[:, 0].sum(dim=2) > 0).sum(dim=1)
    cols_alive = (out[:, 0].sum(dim=1) > 0).sum(dim=1)
    assert_that(int(rows_alive.min())).is_greater_than_or_equal_to(28)
    assert_that(int(cols_alive.min())).is_greater_than_or_equal_to(28)


def test_translate_moves_pixels_with_zero_fill():
    """Output (i, j) takes input (i - dy, j - dx); vacated pixels are 0."""
    x = torch.arange(16, dtype=torch.float32).view(1, 1, 4, 4).repeat(1, 3, 1, 1)
    out = translate(x, torch.tensor([[1, -1]]))

    assert_that(out[0, 0, 0].tolist()).is_equal_to([0.0, 0.0, 0.0, 0.0])
    assert_that(out[0, 0, 1].tolist()).is_equal_to([1.0, 2.0, 3.0, 0.0])
    assert_that(out[0, 0, 3].tolist()).is_equal_to([9.0, 10.0, 11.0, 0.0])


def test_color_ops_follow_their_definitions():
    """Brightness adds, saturation scales toward gray, contrast toward the image mean."""
    x = _images(n=2)
    one = torch.ones(2, dtype=torch.float64)

    assert_that(torch.allclose(adjust_brightness(x, 0.25 * one), x + 0.25)).is_true()
    gray = x.mean(dim=1, keepdim=True).expand_as(x)
    assert_that(torch.allclose(adjust_saturation(x, 0.0 * one), gray)).is_true()
    mean = x.mean(dim=(1, 2, 3), keepdim=True).expand_as(x)
    assert_that(torch.allclose(adjust_contrast(x, 0.0 * one), mean)).is_true()
    assert_that(torch.equal(adjust_contrast(x, one), x)).is_true()


def test_each_op_gradient_matches_finite_differences():
    """With fixed parameters every op passes a double-precision gradient check."""
    x = _images(n=2, size=8).requires_grad_(True)
    factors = torch.tensor([0.7, 1.3], dtype=torch.float64)
    shift = torch.tensor([[1, -2], [0, 1]])
    ops = [
        lambda t: translate(t, shift),
        lambda t: adjust_brightness(t, factors),
        lambda t: adjust_saturation(t, factors),
        lambda t: adjust_contrast(t, factors),
    ]
    for op in ops:
        assert_that(torch.autograd.gradcheck(op, (x,), eps=1e-6, atol=1e-6, rtol=1e-4)).is_true()


def test_full_block_gradient_with_replayed_parameters():
    """The composed block is differentiable and its input gradient is nonzero."""
    policy = AugmentationPolicy(brightness=0.1, saturation=(0.9, 1.1), contrast=(0.9, 1.1))
    augment = DiffAugment(policy, seed=2)
    x = _images(n=3, size=16, scale=0.4).requires_grad_(True)
    params = augment.draw(3, 16)

    assert_that(
        torch.autograd.gradcheck(lambda t: augment(t, params)[0], (x,), eps=1e-6, atol=1e-6, rtol=1e-4)
    ).is_true()
    augment(x, params)[0].sum().backward()
    assert_that(float(x.grad.abs().sum())).is_greater_than(0.0)


def test_same_seed_same_draws():
    """Two blocks with one seed draw identical parameters; replay reproduces the output."""
    x = _images(size=16).float()
    a = DiffAugment(AugmentationPolicy(), seed=3)
    b = DiffAugment(AugmentationPolicy(), seed=3)
    out_a, params_a = a(x)
    out_b, params_b = b(x)
    replayed, _ = a(x, params_a)

    assert_that(torch.equal(params_a.shift, params_b.shift)).is_true()
    assert_that(torch.equal(out_a, out_b)).is_true()
    assert_that(torch.equal(replayed, out_a)).is_true()


def test_output_stays_in_range():
    """Color jitter is clipped back to [-1, 1]."""
    x = _images(n=16, size=8, scale=1.0).float()
    out, _ = DiffAugment(AugmentationPolicy(ops=("brightness", "contrast")), seed=4)(x)
    assert_that(float(out.abs().max())).is_less_than_or_equal_to(1.0)


def test_params_move_between_devices():
    """Skipped ops stay None when parameters are moved."""
    params = AugmentParams(brightness=torch.zeros(2)).to("cpu")
    assert_that(params.shift).is_none()
    assert_that(params.brightness.tolist()).is_equal_to([0.0, 0.0])
