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

from __future__ import annotations

import logging
import numpy as np
import os

from mkdocs.config.base import Config
from mkdocs.config.config_options import Choice, ListOfItems, Type

from creative.data.batching import BatchPlan, minibatches
from creative.data.corpus import StyleDataset
from creative.exceptions import CheckpointError, DataError
from creative.kernel.optim import Parameter, adam_step
from creative.kernel.tensor import Tensor, expect_extent
from creative.losses.objectives import (
    style_classification_loss, style_classification_loss_grad
)
from creative.models.graph import NetworkGraph
from creative.models.networks import discriminator_specs
from creative.options import Bounded, load_config, to_dict
from creative.training.checkpoint import read_container, write_container

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Style probe configuration - an independent classifier trained on real
# images only, so generated images are not graded by their own adversary
class ProbeConfig(Config):
    image_size = Bounded(int, lower = 1, default = 32)
    input_channels = Bounded(int, lower = 1, default = 3)
    num_styles = Bounded(int, lower = 2, default = 4)

    # Settings for network
    body_channels = ListOfItems(Bounded(int, lower = 1), default = [32, 64, 128])
    kernel = Bounded(int, lower = 1, default = 4)
    stride = Bounded(int, lower = 1, default = 2)
    pad = Bounded(int, lower = 0, default = 1)
    head_hidden = ListOfItems(Bounded(int, lower = 1), default = [256])
    style_output = Choice(["softmax"], default = "softmax")
    slope = Bounded(float, lower = 0, upper = 1,
        lower_open = True, upper_open = True, default = 0.2
    )
    init_std = Bounded(float, lower = 0, lower_open = True, default = 0.02)
    precision = Choice(["float64", "float32"], default = "float64")

    # Settings for training
    learning_rate = Bounded(float, lower = 0, lower_open = True, default = 2e-4)
    beta1 = Bounded(float, lower = 0, upper = 1, upper_open = True, default = 0.5)
    beta2 = Bounded(float, lower = 0, upper = 1, upper_open = True, default = 0.999)
    batch_size = Bounded(int, lower = 2, default = 64)
    epochs = Bounded(int, lower = 1, default = 5)
    seed = Type(int, default = 0)

# -----------------------------------------------------------------------------

# Style probe - a discriminator body with the style head only
class StyleProbe:

    # Initialize probe
    def __init__(self, config: ProbeConfig, seed: int | None = None):
        self.config = config
        body, _, style = discriminator_specs(config)
        self.graph = NetworkGraph(
            body + style,
            np.random.default_rng(config.seed if seed is None else seed),
            config.precision
        )

    # Compute style posteriors
    def forward(self, images: Tensor, mode: str = "train") -> Tensor:
        expect_extent(images.shape[1], self.config.input_channels, "channels")
        expect_extent(images.shape[2], self.config.image_size, "height")
        expect_extent(images.shape[3], self.config.image_size, "width")
        return self.graph.forward(images, mode)

    # Propagate gradient of the posteriors
    def backward(self, grad: Tensor, param_grads: bool = True) -> Tensor:
        return self.graph.backward(grad, param_grads)

    # Parameters by stable name
    def named_parameters(self) -> dict[str, Parameter]:
        return self.graph.named_parameters()

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Train probe on real images with the style classification loss
def train_probe(
    dataset: StyleDataset, config: ProbeConfig | None = None,
    seed: int | None = None
) -> StyleProbe:
    if config is None:
        config = load_config(ProbeConfig, {
            "image_size": dataset.size,
            "input_channels": dataset.images.shape[1],
            "num_styles": dataset.num_styles
        }, name = "probe")

    # Ensure probe and corpus agree
    if config.num_styles != dataset.num_styles:
        raise DataError(
            f"Probe distinguishes {config.num_styles} styles, "
            f"but the corpus has {dataset.num_styles}"
        )

    # Initialize probe and plan batches
    seed = config.seed if seed is None else seed
    probe = StyleProbe(config, seed)
    plan = BatchPlan(min(config.batch_size, len(dataset)), seed)
    params = probe.named_parameters()

    # Train epoch by epoch
    for epoch in range(config.epochs):
        losses = []
        for images, labels in minibatches(dataset, plan, epoch):
            probe.graph.zero_grad()
            posteriors = probe.forward(images, "train")
            losses.append(style_classification_loss(posteriors, labels))
            probe.backward(style_classification_loss_grad(posteriors, labels))

            # Update parameters
            for param in params.values():
                adam_step(param, config.learning_rate, config.beta1, config.beta2)

        # Log progress
        log.info(f"Probe epoch {epoch + 1}: loss {np.mean(losses):.4f}")

    # Return probe
    return probe

# Save probe weights and running statistics
def save_probe(probe: StyleProbe, path: str | os.PathLike) -> str:
    arrays = {
        f"value/{name}": param.value
        for name, param in probe.named_parameters().items()
    }
    arrays.update({
        f"buffer/{name}": value
        for name, value in probe.graph.named_buffers().items()
    })

    # Write container
    write_container(path, "probe", { "config": to_dict(probe.config) }, arrays)
    return str(path)

# Load probe weights and running statistics
def load_probe(path: str | os.PathLike) -> StyleProbe:
    meta, arrays = read_container(path, "probe")
    probe = StyleProbe(load_config(ProbeConfig, meta["config"], name = "probe"))

    # Restore parameters and buffers
    try:
        for name, param in probe.named_parameters().items():
            param.value = np.array(
                arrays[f"value/{name}"], dtype = param.value.dtype
            ).reshape(param.shape)
        for name in probe.graph.named_buffers():
            probe.graph.set_buffer(name, arrays[f"buffer/{name}"])

    # Name the missing or mismatching array
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"Probe '{path}' is inconsistent: {e}")

    # Return probe
    return probe

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.eval")
