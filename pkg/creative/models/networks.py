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

from collections.abc import Mapping

from creative.exceptions import ConfigError, ShapeError
from creative.kernel.layers import LayerSpec
from creative.kernel.optim import Parameter
from creative.kernel.tensor import Tensor, expect_extent, expect_finite
from creative.options import load_config

from .config import DiscriminatorConfig, GeneratorConfig
from .graph import NetworkGraph, count_parameters

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Generator - maps noise vectors to images in (-1, 1)
class Generator(NetworkGraph):

    # Initialize generator
    def __init__(self, config: GeneratorConfig, seed: int):
        self.config = config
        super().__init__(
            _generator_specs(config),
            np.random.default_rng(seed), config.precision
        )

    # Generate images from noise
    def forward(self, z: Tensor, mode: str = "train") -> Tensor:
        if z.ndim != 2:
            raise ShapeError(f"Expected noise of shape (N, D), but got {z.shape}")

        # Ensure noise is valid
        expect_extent(z.shape[1], self.config.noise_dim, "noise dimension")
        expect_finite(z, "noise")
        return super().forward(z, mode)

# -----------------------------------------------------------------------------

# Discriminator - a convolutional body shared by the real/fake head, which
# yields the probability that an image is real, and the style head, which
# yields the posterior over the K styles
class Discriminator:

    # Initialize discriminator - the body is drawn first, then the real/fake
    # head, then the style head, all from one seeded stream
    def __init__(self, config: DiscriminatorConfig, seed: int):
        self.config = config
        body, real, style = discriminator_specs(config)

        # Build graphs
        rng = np.random.default_rng(seed)
        self.body = NetworkGraph(body, rng, config.precision)
        self.real = NetworkGraph(real, rng, config.precision)
        self.style = NetworkGraph(style, rng, config.precision)

    # Graphs by name, in a stable order
    @property
    def graphs(self) -> dict[str, NetworkGraph]:
        return { "body": self.body, "real": self.real, "style": self.style }

    # Evaluate both heads on a batch of images
    def forward(
        self, images: Tensor, mode: str = "train"
    ) -> tuple[Tensor, Tensor]:
        if images.ndim != 4:
            raise ShapeError(
                f"Expected images of shape (N, C, H, W), but got {images.shape}"
            )

        # Ensure images match the configured geometry
        size = self.config.image_size
        expect_extent(images.shape[1], self.config.input_channels, "channels")
        expect_extent(images.shape[2], size, "height")
        expect_extent(images.shape[3], size, "width")

        # Evaluate body and heads
        features = self.body.forward(images, mode)
        r = self.real.forward(features, mode)[:, 0]
        posteriors = self.style.forward(features, mode)
        return r, posteriors

    # Propagate gradients of both heads into the body - either gradient may
    # be omitted, in which case the head is skipped
    def backward(
        self, grad_r: Tensor | None, grad_posteriors: Tensor | None,
        param_grads: bool = True
    ) -> Tensor:
        grad = None

        # Propagate gradient of real/fake head
        if grad_r is not None:
            grad = self.real.backward(grad_r.reshape(-1, 1), param_grads)

        # Propagate gradient of style head
        if grad_posteriors is not None:
            grad_style = self.style.backward(grad_posteriors, param_grads)
            grad = grad_style if grad is None else grad + grad_style

        # Ensure there is something to propagate
        if grad is None:
            raise ShapeError("Backward through discriminator without gradients")

        # Propagate through body
        return self.body.backward(grad, param_grads)

    # -------------------------------------------------------------------------

    # Parameters by stable name, prefixed with the graph name
    def named_parameters(self) -> dict[str, Parameter]:
        return {
            f"{prefix}.{name}": param
            for prefix, graph in self.graphs.items()
            for name, param in graph.named_parameters().items()
        }

    # Buffers by stable name, prefixed with the graph name
    def named_buffers(self) -> dict[str, Tensor]:
        return {
            f"{prefix}.{name}": value
            for prefix, graph in self.graphs.items()
            for name, value in graph.named_buffers().items()
        }

    # Replace buffer by name
    def set_buffer(self, name: str, value: Tensor):
        prefix, name = name.split(".", 1)
        self.graphs[prefix].set_buffer(name, value)

    # Clear accumulated gradients of all parameters
    def zero_grad(self):
        for graph in self.graphs.values():
            graph.zero_grad()

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Build generator with weights drawn from the seeded stream
def build_generator(
    config: GeneratorConfig | Mapping, seed: int
) -> Generator:
    if not isinstance(config, GeneratorConfig):
        config = load_config(GeneratorConfig, config, name = "generator")

    # Build generator
    generator = Generator(config, seed)
    log.debug(
        f"Built generator with {count_parameters(generator)} parameters "
        f"for {config.output_size}x{config.output_size} images"
    )

    # Return generator
    return generator

# Build discriminator with weights drawn from the seeded stream
def build_discriminator(
    config: DiscriminatorConfig | Mapping, seed: int
) -> Discriminator:
    if not isinstance(config, DiscriminatorConfig):
        config = load_config(DiscriminatorConfig, config, name = "discriminator")

    # Build discriminator
    discriminator = Discriminator(config, seed)
    log.debug(
        f"Built discriminator with "
        f"{sum(p.size for p in discriminator.named_parameters().values())} "
        f"parameters for {config.num_styles} styles"
    )

    # Return discriminator
    return discriminator

# Generate images - shorthand for the generator's forward pass
def generator_forward(
    generator: Generator, z: Tensor, mode: str = "train"
) -> Tensor:
    return generator.forward(z, mode)

# Evaluate real/fake probabilities and style posteriors
def discriminator_forward(
    discriminator: Discriminator, images: Tensor, mode: str = "train"
) -> tuple[Tensor, Tensor]:
    return discriminator.forward(images, mode)

# Draw standard normal noise from the given stream
def sample_noise(
    n: int, noise_dim: int, rng: np.random.Generator,
    precision: str = "float64"
) -> Tensor:
    if n < 1:
        raise ShapeError(f"Expected at least one noise vector, but got {n}")
    return rng.standard_normal((n, noise_dim)).astype(precision)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Create layer specifications of generator - a dense projection into the
# base feature map, then one fractionally-strided convolution per stage
def _generator_specs(config: GeneratorConfig) -> list[LayerSpec]:
    stages, base = config.stage_channels, config.base_spatial
    if not stages:
        raise ConfigError("Generator requires at least one stage")

    # Collect shared settings
    geometry = dict(
        kernel = config.kernel, stride = config.stride, pad = config.pad
    )
    slope, std = config.slope, config.init_std

    # Project noise into base feature map
    specs = [
        LayerSpec("dense", config.noise_dim, base * base * stages[0],
            init_std = std
        ),
        LayerSpec("reshape", shape = (stages[0], base, base)),
        LayerSpec("batchnorm2d", stages[0]),
        LayerSpec("leaky_relu", slope = slope)
    ]

    # Upsample stage by stage
    size = base
    for c_in, c_out in zip(stages, stages[1:]):
        size = _upsampled(size, config)
        specs += [
            LayerSpec("conv_transpose2d", c_in, c_out,
                init_std = std, **geometry
            ),
            LayerSpec("batchnorm2d", c_out),
            LayerSpec("leaky_relu", slope = slope)
        ]

    # Map onto output channels without normalization
    size = _upsampled(size, config)
    specs += [
        LayerSpec("conv_transpose2d", stages[-1], config.output_channels,
            init_std = std, **geometry
        ),
        LayerSpec("tanh")
    ]

    # Ensure stage arithmetic is consistent with output size
    if size != config.output_size:
        raise ConfigError(
            f"Generator stages {list(stages)} upsample {base}x{base} to "
            f"{size}x{size}, but output size is {config.output_size}"
        )

    # Return specifications
    return specs

# Create layer specifications of discriminator body and heads
def discriminator_specs(
    config: DiscriminatorConfig
) -> tuple[list[LayerSpec], list[LayerSpec], list[LayerSpec]]:
    channels = config.body_channels
    if not channels:
        raise ConfigError("Discriminator requires at least one body stage")

    # Collect shared settings
    geometry = dict(
        kernel = config.kernel, stride = config.stride, pad = config.pad
    )
    slope, std = config.slope, config.init_std

    # Downsample stage by stage, normalizing all but the first convolution
    body, size, c_in = [], config.image_size, config.input_channels
    for index, c_out in enumerate(channels):
        size = (size + 2 * config.pad - config.kernel) // config.stride + 1
        if size < 1:
            raise ConfigError(
                f"Discriminator body {list(channels)} collapses "
                f"{config.image_size}x{config.image_size} images below 1x1"
            )

        # Convolution, normalization and activation
        body.append(LayerSpec("conv2d", c_in, c_out, init_std = std, **geometry))
        if index:
            body.append(LayerSpec("batchnorm2d", c_out))
        body.append(LayerSpec("leaky_relu", slope = slope))
        c_in = c_out

    # Flatten feature map
    features = c_in * size * size
    body.append(LayerSpec("reshape", shape = (features,)))

    # Real/fake head collapses features into one probability
    real = [
        LayerSpec("dense", features, 1, init_std = std),
        LayerSpec("sigmoid")
    ]

    # Style head maps features onto K posteriors through hidden layers
    style, d_in = [], features
    for d_out in config.head_hidden:
        style += [
            LayerSpec("dense", d_in, d_out, init_std = std),
            LayerSpec("leaky_relu", slope = slope)
        ]
        d_in = d_out

    # Finish with softmax or independent sigmoids
    style += [
        LayerSpec("dense", d_in, config.num_styles, init_std = std),
        LayerSpec(config.style_output)
    ]

    # Return specifications
    return body, real, style

# Compute spatial extent after a fractionally-strided convolution
def _upsampled(size: int, config: GeneratorConfig) -> int:
    return (size - 1) * config.stride - 2 * config.pad + config.kernel

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.models")
