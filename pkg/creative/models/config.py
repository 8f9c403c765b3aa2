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

from mkdocs.config.base import Config
from mkdocs.config.config_options import Choice, ListOfItems

from creative.options import Bounded

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Generator configuration - defaults follow the 256x256 architecture
class GeneratorConfig(Config):
    noise_dim = Bounded(int, lower = 1, default = 100)

    # Settings for stages
    base_spatial = Bounded(int, lower = 1, default = 4)
    stage_channels = ListOfItems(
        Bounded(int, lower = 1), default = [1024, 1024, 512, 256, 128, 64]
    )
    output_channels = Bounded(int, lower = 1, default = 3)
    output_size = Bounded(int, lower = 1, default = 256)

    # Settings for fractionally-strided convolutions
    kernel = Bounded(int, lower = 1, default = 4)
    stride = Bounded(int, lower = 1, default = 2)
    pad = Bounded(int, lower = 0, default = 1)

    # Settings for activations and initialization
    slope = Bounded(float, lower = 0, upper = 1,
        lower_open = True, upper_open = True, default = 0.2
    )
    init_std = Bounded(float, lower = 0, lower_open = True, default = 0.02)
    precision = Choice(["float64", "float32"], default = "float64")

# Discriminator configuration - defaults follow the 256x256 architecture
class DiscriminatorConfig(Config):
    image_size = Bounded(int, lower = 1, default = 256)
    input_channels = Bounded(int, lower = 1, default = 3)

    # Settings for body
    body_channels = ListOfItems(
        Bounded(int, lower = 1), default = [32, 64, 128, 256, 512, 512]
    )
    kernel = Bounded(int, lower = 1, default = 4)
    stride = Bounded(int, lower = 1, default = 2)
    pad = Bounded(int, lower = 0, default = 1)

    # Settings for heads
    num_styles = Bounded(int, lower = 2, default = 25)
    head_hidden = ListOfItems(Bounded(int, lower = 1), default = [1024, 512])
    style_output = Choice(["softmax", "sigmoid"], default = "softmax")

    # Settings for activations and initialization
    slope = Bounded(float, lower = 0, upper = 1,
        lower_open = True, upper_open = True, default = 0.2
    )
    init_std = Bounded(float, lower = 0, lower_open = True, default = 0.02)
    precision = Choice(["float64", "float32"], default = "float64")
