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

from collections.abc import Mapping
from mkdocs.config.base import Config
from mkdocs.config.config_options import Choice, Optional, SubConfig, Type

from creative.exceptions import ConfigError
from creative.models.config import DiscriminatorConfig, GeneratorConfig
from creative.options import Bounded, load_config, merge

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Synthetic corpus configuration
class SynthConfig(Config):
    styles = Bounded(int, lower = 2, default = 4)
    per_style = Bounded(int, lower = 1, default = 500)
    seed = Type(int, default = 7)

# Training configuration - defaults follow the 256x256 setup
class TrainConfig(Config):
    variant = Choice(["gan", "sc_can", "can"], default = "can")
    seed = Type(int, default = 0)

    # Settings for optimizer
    learning_rate = Bounded(float, lower = 0, lower_open = True, default = 1e-4)
    beta1 = Bounded(float, lower = 0, upper = 1, upper_open = True, default = 0.5)
    beta2 = Bounded(float, lower = 0, upper = 1, upper_open = True, default = 0.999)
    epsilon = Bounded(float, lower = 0, lower_open = True, default = 1e-8)

    # Settings for schedule
    batch_size = Bounded(int, lower = 2, default = 128)
    epochs = Bounded(int, lower = 1, default = 100)
    log_every = Bounded(int, lower = 1, default = 50)
    checkpoint_every = Bounded(int, lower = 0, default = 0)
    sample_count = Bounded(int, lower = 1, default = 64)
    eval_count = Bounded(int, lower = 2, default = 256)

    # Settings for corpus
    data = Optional(Type(str))
    augment = Type(bool, default = False)
    holdout = Bounded(float, lower = 0, upper = 1, upper_open = True,
        default = 0.2
    )
    split_seed = Type(int, default = 0)
    synth = SubConfig(SynthConfig)

    # Settings for networks
    generator = SubConfig(GeneratorConfig)
    discriminator = SubConfig(DiscriminatorConfig)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Resolve training configuration - values override the preset, and the
# preset overrides the defaults
def resolve_config(
    preset: str | None = None, values: Mapping | None = None
) -> TrainConfig:
    if preset is not None and preset not in presets:
        raise ConfigError(
            f"Unknown preset '{preset}', expected one of: {', '.join(presets)}"
        )

    # Merge preset and values, then validate
    base = presets[preset] if preset else {}
    config = load_config(TrainConfig, merge(base, values or {}),
        name = "training"
    )

    # Ensure networks fit together
    check_config(config)
    return config

# Ensure the generator produces what the discriminator consumes
def check_config(config: TrainConfig):
    generator, discriminator = config.generator, config.discriminator
    if generator.output_size != discriminator.image_size:
        raise ConfigError(
            f"Generator output size {generator.output_size} differs from "
            f"discriminator image size {discriminator.image_size}"
        )
    if generator.output_channels != discriminator.input_channels:
        raise ConfigError(
            f"Generator output channels {generator.output_channels} differ "
            f"from discriminator input channels {discriminator.input_channels}"
        )
    if generator.precision != discriminator.precision:
        raise ConfigError("Generator and discriminator precision differ")

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Presets, applied on top of the defaults
presets: dict[str, dict] = {

    # 256x256 images, 25 styles, batch 128, 100 epochs
    "paper": {},

    # 32x32 images, 4 styles, batch 64, 30 epochs
    "desk": {
        "batch_size": 64,
        "epochs": 30,
        "generator": {
            "stage_channels": [256, 128, 64],
            "output_size": 32
        },
        "discriminator": {
            "image_size": 32,
            "body_channels": [64, 128, 256],
            "num_styles": 4
        }
    },

    # 64x64 baseline without style classification
    "dcgan64": {
        "variant": "gan",
        "generator": {
            "stage_channels": [1024, 512, 256, 128],
            "output_size": 64
        },
        "discriminator": {
            "image_size": 64,
            "body_channels": [64, 128, 256, 512]
        }
    }
}
