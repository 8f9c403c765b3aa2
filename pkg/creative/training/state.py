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

import numpy as np

from dataclasses import dataclass

from creative.kernel.tensor import Tensor
from creative.losses.signals import Variant
from creative.models.networks import (
    Discriminator, Generator, build_discriminator, build_generator,
    sample_noise
)

from .config import TrainConfig, check_config

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Training state - everything needed to continue a run bit-exactly
@dataclass(eq = False)
class TrainState:
    config: TrainConfig
    generator: Generator
    discriminator: Discriminator

    # Noise stream and fixed evaluation noise panel
    rng: np.random.Generator
    panel: Tensor

    # Digest of the corpus the run trains on
    fingerprint: str

    # Counters - the batch counter is the number of batches consumed in the
    # current epoch, the step counter runs over all epochs
    epoch: int = 0
    batch: int = 0
    step: int = 0

    # Training variant
    @property
    def variant(self) -> Variant:
        return Variant.parse(self.config.variant)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Create initial training state - generator, discriminator, noise and panel
# are drawn from separate streams derived from the seed
def init_state(config: TrainConfig, fingerprint: str) -> TrainState:
    check_config(config)
    seed = config.seed

    # Build networks
    generator = build_generator(config.generator, seed)
    discriminator = build_discriminator(config.discriminator, seed + 1)

    # Draw fixed evaluation noise panel
    panel = sample_noise(
        config.sample_count, config.generator.noise_dim,
        np.random.default_rng([seed, 3]), config.generator.precision
    )

    # Return state
    return TrainState(
        config, generator, discriminator,
        np.random.default_rng([seed, 2]), panel, fingerprint
    )
