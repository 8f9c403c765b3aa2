# Copyright (c) 2024 The creative-adversarial authors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to
# deal in the Software without restriction, including without limitation the
# rights to use, copy, modify, merge, publish, distribute, sublicense, and/or
# sell copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NON-INFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
# FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS
# IN THE SOFTWARE.

import numpy as np
import pytest

from numpy.testing import assert_array_equal

from creative.exceptions import ConfigError, NumericError, ShapeError
from creative.models.config import DiscriminatorConfig
from creative.models.graph import NetworkGraph, count_parameters
from creative.models.networks import (
    build_discriminator, build_generator, discriminator_forward,
    discriminator_specs, generator_forward, sample_noise
)
from creative.options import load_config

# -----------------------------------------------------------------------------
# Generator
# -----------------------------------------------------------------------------

# Desk generator maps noise onto 32x32 images in (-1, 1)
def test_generator_desk(rng):
    generator = build_generator(desk_generator, 0)
    images = generator_forward(generator, sample_noise(2, 100, rng))
    assert images.shape == (2, 3, 32, 32)
    assert np.all(np.abs(images) < 1)

# Equal seeds yield bit-identical parameters
def test_generator_determinism():
    a = build_generator(desk_generator, 3).named_parameters()
    b = build_generator(desk_generator, 3).named_parameters()
    assert list(a) == list(b)
    for name in a:
        assert_array_equal(a[name].value, b[name].value)

# Zero noise yields a fixed image for fixed weights
def test_generator_zero_noise():
    generator = build_generator(desk_generator, 0)
    z = np.zeros((2, 100))
    assert_array_equal(generator.forward(z, "infer"), generator.forward(z, "infer"))

# Perturbing a single weight changes the output
def test_generator_sensitivity(rng):
    generator = build_generator(desk_generator, 0)
    z = sample_noise(2, 100, rng)
    before = generator.forward(z, "infer")
    param = generator.named_parameters()["00.dense.weight"]
    param.value[0, 0] += 0.5
    assert not np.array_equal(before, generator.forward(z, "infer"))

# Noise of the wrong dimension is rejected
def test_generator_noise_dimension(rng):
    generator = build_generator(desk_generator, 0)
    with pytest.raises(ShapeError, match = "noise dimension"):
        generator.forward(rng.standard_normal((2, 64)))

# Non-finite noise is rejected
def test_generator_non_finite_noise():
    generator = build_generator(desk_generator, 0)
    z = np.zeros((2, 100))
    z[0, 0] = np.nan
    with pytest.raises(NumericError):
        generator.forward(z)

# Stages must upsample to the output size
def test_generator_inconsistent_output_size():
    with pytest.raises(ConfigError, match = "output size"):
        build_generator({ **desk_generator, "output_size": 64 }, 0)

# Full-size generator maps noise onto 256x256 images
@pytest.mark.slow
def test_generator_full_size(rng):
    generator = build_generator({}, 0)
    images = generator.forward(sample_noise(2, 100, rng))
    assert images.shape == (2, 3, 256, 256)
    assert np.all(np.abs(images) < 1)

# -----------------------------------------------------------------------------
# Discriminator
# -----------------------------------------------------------------------------

# Desk body reduces 32x32 images to a 4x4x128 feature map
def test_discriminator_body_desk(rng):
    discriminator = build_discriminator(desk_discriminator, 0)
    images = rng.uniform(-1, 1, (2, 3, 32, 32))
    features = images
    for layer in discriminator.body.layers[:-1]:
        features = layer.forward(features, "train")
    assert features.shape == (2, 128, 4, 4)

# Real/fake probabilities and style posteriors
def test_discriminator_outputs(rng):
    discriminator = build_discriminator(desk_discriminator, 0)
    r, posteriors = discriminator_forward(
        discriminator, rng.uniform(-1, 1, (3, 3, 32, 32))
    )
    assert r.shape == (3,)
    assert np.all((r > 0) & (r < 1))
    assert posteriors.shape == (3, 4)
    np.testing.assert_allclose(posteriors.sum(axis = 1), 1)

# Untrained style head is close to uniform over 25 styles
def test_discriminator_untrained_posteriors(rng):
    discriminator = build_discriminator({
        **desk_discriminator, "num_styles": 25
    }, 0)
    _, posteriors = discriminator.forward(rng.uniform(-1, 1, (4, 3, 32, 32)))
    assert np.all(np.abs(posteriors - 0.04) < 0.02)
    assert abs(posteriors.mean() - 0.04) < 1e-12

# Equal seeds yield bit-identical parameters
def test_discriminator_determinism():
    a = build_discriminator(desk_discriminator, 5).named_parameters()
    b = build_discriminator(desk_discriminator, 5).named_parameters()
    for name in a:
        assert_array_equal(a[name].value, b[name].value)

# Parameters are named by graph, layer index and kind
def test_discriminator_parameter_names():
    names = list(build_discriminator(desk_discriminator, 0).named_parameters())
    assert names[:2] == ["body.00.conv2d.weight", "body.00.conv2d.bias"]
    assert "body.03.batchnorm2d.gamma" in names
    assert names[-1].startswith("style.")

# Images of the wrong size are rejected
def test_discriminator_image_size(rng):
    discriminator = build_discriminator(desk_discriminator, 0)
    with pytest.raises(ShapeError, match = "height"):
        discriminator.forward(rng.uniform(-1, 1, (2, 3, 16, 32)))

# Backward without any gradient is rejected
def test_discriminator_backward_without_gradients(rng):
    discriminator = build_discriminator(desk_discriminator, 0)
    discriminator.forward(rng.uniform(-1, 1, (2, 3, 32, 32)))
    with pytest.raises(ShapeError):
        discriminator.backward(None, None)

# Image gradient accumulates both heads
def test_discriminator_backward(rng):
    discriminator = build_discriminator(desk_discriminator, 0)
    images = rng.uniform(-1, 1, (2, 3, 32, 32))
    discriminator.forward(images)
    grad = discriminator.backward(np.ones(2), np.ones((2, 4)))
    assert grad.shape == images.shape
    assert np.any(discriminator.named_parameters()["real.00.dense.weight"].grad)

# Body collapsing below 1x1 is rejected
def test_discriminator_collapse():
    with pytest.raises(ConfigError, match = "collapses"):
        build_discriminator({
            **desk_discriminator, "body_channels": [8, 8, 8, 8, 8, 8]
        }, 0)

# Fewer than two styles are rejected
def test_discriminator_num_styles():
    with pytest.raises(ConfigError, match = "num_styles"):
        build_discriminator({ **desk_discriminator, "num_styles": 1 }, 0)

# Full-size body has the pinned number of trainable scalars
def test_discriminator_full_body_size():
    body, _, _ = discriminator_specs(load_config(DiscriminatorConfig))
    total = 0
    for spec in body:
        if spec.kind == "conv2d":
            total += spec.in_features * spec.out_features * spec.kernel ** 2
            total += spec.out_features
        elif spec.kind == "batchnorm2d":
            total += 2 * spec.in_features
    assert total == 6985568

# Full-size body has the pinned number of trainable scalars when built
@pytest.mark.slow
def test_discriminator_full_body_count():
    body, _, _ = discriminator_specs(load_config(DiscriminatorConfig))
    graph = NetworkGraph(body, np.random.default_rng(0))
    assert count_parameters(graph) == 6985568

# Full-size body reduces 256x256 images to a 4x4x512 feature map
@pytest.mark.slow
def test_discriminator_body_full_size(rng):
    body, _, _ = discriminator_specs(load_config(DiscriminatorConfig))
    graph = NetworkGraph(body[:-1], np.random.default_rng(0))
    features = graph.forward(rng.uniform(-1, 1, (2, 3, 256, 256)))
    assert features.shape == (2, 512, 4, 4)

# -----------------------------------------------------------------------------
# Noise
# -----------------------------------------------------------------------------

# Noise is reproducible and shaped
def test_sample_noise_reproducible():
    a = sample_noise(5, 100, np.random.default_rng(9))
    b = sample_noise(5, 100, np.random.default_rng(9))
    assert a.shape == (5, 100)
    assert_array_equal(a, b)

# Noise is standard normal
def test_sample_noise_moments():
    z = sample_noise(100000, 1, np.random.default_rng(0))
    assert abs(z.mean()) < 0.02
    assert abs(z.var() - 1) < 0.05

# At least one noise vector is required
def test_sample_noise_empty():
    with pytest.raises(ShapeError):
        sample_noise(0, 100, np.random.default_rng(0))

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Desk generator and discriminator with the smallest body
desk_generator = {
    "stage_channels": [256, 128, 64],
    "output_size": 32
}
desk_discriminator = {
    "image_size": 32,
    "body_channels": [32, 64, 128],
    "head_hidden": [64],
    "num_styles": 4
}
