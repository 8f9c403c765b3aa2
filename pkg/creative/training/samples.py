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
import math
import os

from PIL import Image

from creative.data.corpus import to_image
from creative.exceptions import ShapeError, StorageError
from creative.kernel.tensor import Tensor

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Write images of shape (N, C, S, S) in [-1, 1] as a PNG grid
def write_grid(
    images: Tensor, path: str | os.PathLike,
    columns: int = 8, padding: int = 2
) -> str:
    if images.ndim != 4 or images.shape[0] == 0:
        raise ShapeError(
            f"Expected a non-empty batch of images, but got {images.shape}"
        )

    # Compute grid geometry
    n, _, height, width = images.shape
    columns = min(columns, n)
    rows = math.ceil(n / columns)
    grid = Image.new(mode = "RGB", size = (
        columns * (width + padding) + padding,
        rows * (height + padding) + padding
    ))

    # Paste images row by row
    for index, image in enumerate(images):
        row, column = divmod(index, columns)
        grid.paste(to_image(image), (
            padding + column * (width + padding),
            padding + row * (height + padding)
        ))

    # Save grid
    try:
        grid.save(path, format = "PNG")
    except OSError as e:
        raise StorageError(f"Couldn't write sample grid '{path}': {e}")

    # Return path
    log.debug(f"Wrote {n} samples to '{path}'")
    return str(path)

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.training")
