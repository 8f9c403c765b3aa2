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

from PIL import ImageColor

from creative.exceptions import DataError

from .corpus import StyleDataset

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Generate a synthetic style corpus - style k belongs to procedural family
# k mod 4, is parametrized by k div 4, and paints with its own two-color
# palette, while phase, position and colors are jittered per image. Pixels
# are quantized to 8 bits, so written corpora ingest back bit-exactly
def synth_style_corpus(
    num_styles: int, per_style: int, size: int, seed: int
) -> StyleDataset:
    if num_styles < 2:
        raise DataError(f"Expected at least 2 styles, but got {num_styles}")
    if per_style < 1:
        raise DataError(f"Expected at least 1 image per style, but got {per_style}")
    if size < 4:
        raise DataError(f"Expected image size of at least 4, but got {size}")

    # Generate styles in order from one stream
    rng = np.random.default_rng(seed)
    digits = len(str(num_styles - 1))
    images, labels, names = [], [], []
    for k in range(num_styles):
        family = families[k % len(families)]
        variant = k // len(families)

        # Paint pattern with style palette
        pattern = _patterns[family](rng, per_style, size, variant)
        images.append(_colorize(rng, pattern, k, num_styles))
        labels.append(np.full(per_style, k, dtype = np.int64))
        names.append(f"{k:0{digits}d}-{family}-{variant}")

    # Quantize to 8 bits
    images = np.concatenate(images)
    images = np.rint((images + 1) * 127.5) / 127.5 - 1
    log.info(
        f"Generated {len(images)} images of {num_styles} synthetic styles"
    )

    # Return dataset
    return StyleDataset(images, np.concatenate(labels), tuple(names))

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Create coordinate grids in [0, 1)
def _grid(size: int):
    axis = np.arange(size) / size
    return np.meshgrid(axis, axis, indexing = "ij")

# Stripes of style-specific orientation
def _stripes(rng: np.random.Generator, n: int, size: int, variant: int):
    y, x = _grid(size)
    angle = np.pi * (0.15 + 0.35 * variant) + rng.normal(0, 0.05, (n, 1, 1))
    phase = rng.uniform(0, 2 * np.pi, (n, 1, 1))
    return np.sin(
        2 * np.pi * 4 * (x * np.cos(angle) + y * np.sin(angle)) + phase
    )

# Checkerboards of style-specific period
def _checker(rng: np.random.Generator, n: int, size: int, variant: int):
    y, x = _grid(size)
    period = 2 + variant
    shift = rng.uniform(0, 2 * np.pi, (n, 2, 1, 1))
    return np.tanh(4 * (
        np.sin(2 * np.pi * period * x + shift[:, 0]) *
        np.sin(2 * np.pi * period * y + shift[:, 1])
    ))

# Concentric rings around a jittered center
def _radial(rng: np.random.Generator, n: int, size: int, variant: int):
    y, x = _grid(size)
    center = rng.uniform(0.3, 0.7, (n, 2, 1, 1))
    radius = np.hypot(y - center[:, 0], x - center[:, 1])
    phase = rng.uniform(0, 2 * np.pi, (n, 1, 1))
    return np.cos(2 * np.pi * (3 + 2 * variant) * radius + phase)

# Soft blobs at random positions
def _blobs(rng: np.random.Generator, n: int, size: int, variant: int):
    y, x = _grid(size)
    count = 3 + variant
    center = rng.uniform(0, 1, (n, count, 2, 1, 1))
    width = 0.08 + 0.04 * variant
    field = np.exp(-(
        (y - center[:, :, 0]) ** 2 + (x - center[:, :, 1]) ** 2
    ) / (2 * width ** 2)).sum(axis = 1)
    return 2 * np.clip(field, 0, 1) - 1

# Map pattern in [-1, 1] onto a jittered two-color palette of the style
def _colorize(
    rng: np.random.Generator, pattern: np.ndarray, k: int, num_styles: int
):
    hue = 360 * k / num_styles
    palette = np.array([
        ImageColor.getrgb(f"hsv({hue:.0f},85%,95%)"),
        ImageColor.getrgb(f"hsv({(hue + 150) % 360:.0f},60%,35%)")
    ], dtype = np.float64) / 127.5 - 1

    # Jitter colors per image
    n = pattern.shape[0]
    colors = palette[None] + rng.uniform(-0.1, 0.1, (n, 2, 3))
    weight = ((pattern + 1) / 2)[:, None]

    # Blend colors and add pixel noise
    image = (
        weight * colors[:, 0, :, None, None] +
        (1 - weight) * colors[:, 1, :, None, None]
    )
    image += rng.normal(0, 0.03, image.shape)
    return np.clip(image, -1, 1)

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Procedural families, cycled over styles
families = ("stripes", "checker", "radial", "blobs")

# Pattern generators by family
_patterns = {
    "stripes": _stripes,
    "checker": _checker,
    "radial":  _radial,
    "blobs":   _blobs
}

# Set up logging
log = logging.getLogger("creative.data")
