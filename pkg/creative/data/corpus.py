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

import hashlib
import logging
import numpy as np
import os

from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from PIL import Image, UnidentifiedImageError

from creative.exceptions import DataError, ShapeError, StorageError
from creative.kernel.tensor import Tensor

from .manifest import render_manifest

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Style-labeled image collection - images are stored as one (N, C, S, S)
# tensor in [-1, 1], and style indices follow the sorted style names
@dataclass(frozen = True, eq = False)
class StyleDataset:
    images: Tensor
    labels: Tensor
    style_names: tuple[str, ...]

    # Ensure the dataset is consistent
    def __post_init__(self):
        if self.images.ndim != 4 or self.images.shape[2] != self.images.shape[3]:
            raise ShapeError(
                f"Expected square images of shape (N, C, S, S), "
                f"but got {self.images.shape}"
            )

        # Check labels
        if self.labels.shape != (self.images.shape[0],):
            raise ShapeError(
                f"Mismatch in labels: expected {self.images.shape[0]}, "
                f"but got {self.labels.shape}"
            )
        if len(self.style_names) < 1:
            raise DataError("Dataset has no styles")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= len(self.style_names)
        ):
            raise DataError(
                f"Style labels must lie in [0, {len(self.style_names)})"
            )

        # Freeze tensors
        self.images.setflags(write = False)
        self.labels.setflags(write = False)

    # Number of samples
    def __len__(self):
        return self.images.shape[0]

    # Number of styles
    @property
    def num_styles(self) -> int:
        return len(self.style_names)

    # Spatial extent of all images
    @property
    def size(self) -> int:
        return self.images.shape[2]

    # Image count by style name, in style order
    @property
    def manifest(self) -> dict[str, int]:
        counts = np.bincount(self.labels, minlength = self.num_styles)
        return dict(zip(self.style_names, (int(c) for c in counts)))

    # Iterate over pairs of image and style index
    def samples(self) -> Iterator[tuple[Tensor, int]]:
        for image, label in zip(self.images, self.labels):
            yield image, int(label)

    # Create dataset from a subset of samples
    def subset(self, indices: Tensor) -> StyleDataset:
        return StyleDataset(
            np.ascontiguousarray(self.images[indices]),
            np.ascontiguousarray(self.labels[indices]),
            self.style_names
        )

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Ingest a corpus laid out as `root/<style>/<image>` - styles and files are
# sorted by name, so the result does not depend on the listing order, and
# images are decoded in parallel, but collected in sorted order
def ingest_directory(
    root: str | os.PathLike, size: int, augment: bool = False,
    concurrency: int | None = None
) -> StyleDataset:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"Corpus directory '{root}' does not exist")

    # Collect styles and their images
    styles = sorted(path for path in root.iterdir() if path.is_dir())
    if not styles:
        raise DataError(f"Corpus directory '{root}' contains no style folders")

    # Collect image files per style
    paths, labels = [], []
    for index, style in enumerate(styles):
        files = sorted(
            path for path in style.iterdir()
            if path.is_file() and path.suffix.lower() in extensions
        )
        if not files:
            raise DataError(f"Style folder '{style}' contains no images")

        # Assign style index
        paths.extend(files)
        labels.extend([index] * len(files))

    # Decode images concurrently, collecting them in submission order
    concurrency = concurrency or max(1, (os.cpu_count() or 2) - 1)
    with ThreadPoolExecutor(concurrency) as pool:
        jobs = [pool.submit(_decode, path, size, augment) for path in paths]
        decoded = [job.result() for job in jobs]

    # Each image contributes itself and, if augmented, five crops
    images = np.stack([image for group in decoded for image in group])
    labels = np.repeat(np.array(labels, dtype = np.int64), len(decoded[0]))
    log.info(
        f"Ingested {len(images)} samples of {len(styles)} styles "
        f"from '{root}'"
    )

    # Return dataset
    return StyleDataset(images, labels, tuple(path.name for path in styles))

# Crop the four corners and the middle at 90% of height and width - crops
# are returned as top-left, top-right, bottom-left, bottom-right and mid
def five_crop(image: Tensor) -> list[Tensor]:
    if image.ndim != 3:
        raise ShapeError(f"Expected image of shape (C, H, W), but got {image.shape}")

    # Ensure crops are not degenerate
    _, height, width = image.shape
    if height < 10 or width < 10:
        raise ShapeError(
            f"Five-crop requires images of at least 10x10, "
            f"but got {height}x{width}"
        )

    # Compute crop extents and offsets
    h, w = int(0.9 * height), int(0.9 * width)
    offsets = [
        (0, 0), (0, width - w),
        (height - h, 0), (height - h, width - w),
        ((height - h) // 2, (width - w) // 2)
    ]

    # Return crops
    return [image[:, y:y + h, x:x + w].copy() for y, x in offsets]

# Resize image of shape (C, H, W) to (C, S, S) with bilinear interpolation
def resize(image: Tensor, size: int) -> Tensor:
    if image.shape[1:] == (size, size):
        return np.array(image, dtype = np.float64)

    # Resize each channel as a floating point image
    return np.stack([
        np.asarray(
            Image.fromarray(channel.astype(np.float32))
                .resize((size, size), Image.Resampling.BILINEAR),
            dtype = np.float64
        )
        for channel in image
    ])

# Split dataset into training and held-out samples with a seeded permutation
def split_dataset(
    dataset: StyleDataset, holdout: float, seed: int
) -> tuple[StyleDataset, StyleDataset]:
    if not 0 <= holdout < 1:
        raise DataError(f"Held-out fraction must lie in [0, 1), but got {holdout}")

    # Permute and split indices, keeping the original order within each part
    order = np.random.default_rng(seed).permutation(len(dataset))
    count = int(holdout * len(dataset))
    return (
        dataset.subset(np.sort(order[count:])),
        dataset.subset(np.sort(order[:count]))
    )

# Compute digest of style names, labels and pixels
def corpus_fingerprint(dataset: StyleDataset) -> str:
    digest = hashlib.sha256()
    digest.update("\n".join(dataset.style_names).encode("utf-8"))
    digest.update(dataset.labels.astype("<i8").tobytes())
    digest.update(dataset.images.astype("<f8").tobytes())
    return digest.hexdigest()

# Write corpus as `root/<style>/<index>.png` with a manifest
def write_corpus(
    dataset: StyleDataset, root: str | os.PathLike,
    concurrency: int | None = None
) -> Path:
    root = Path(root)

    # Create style folders
    try:
        for name in dataset.style_names:
            os.makedirs(root / name, exist_ok = True)

        # Encode images concurrently
        concurrency = concurrency or max(1, (os.cpu_count() or 2) - 1)
        with ThreadPoolExecutor(concurrency) as pool:
            jobs = [
                pool.submit(
                    to_image(image).save,
                    root / dataset.style_names[label] / f"{index:05d}.png"
                )
                for index, (image, label) in enumerate(dataset.samples())
            ]
            for job in jobs:
                job.result()

        # Write manifest
        path = root / "manifest.txt"
        path.write_text(render_manifest(dataset), encoding = "utf-8")

    # Surface failing writes as storage errors
    except OSError as e:
        raise StorageError(f"Couldn't write corpus to '{root}': {e}")

    # Return root
    log.info(f"Wrote {len(dataset)} images to '{root}'")
    return root

# Convert image of shape (C, H, W) in [-1, 1] to an 8-bit RGB image
def to_image(image: Tensor) -> Image.Image:
    pixels = np.clip(np.rint((image + 1) * 127.5), 0, 255).astype(np.uint8)
    if pixels.shape[0] == 1:
        return Image.fromarray(pixels[0]).convert("RGB")
    return Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0)))

# Convert 8-bit image to tensor of shape (C, H, W) in [-1, 1]
def from_image(image: Image.Image) -> Tensor:
    pixels = np.asarray(image.convert("RGB"), dtype = np.float64)
    return pixels.transpose(2, 0, 1) / 127.5 - 1

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Decode image, returning it with its crops, if requested
def _decode(path: Path, size: int, augment: bool) -> list[Tensor]:
    try:
        with Image.open(path) as file:
            image = from_image(file)

    # Name the offending file
    except (UnidentifiedImageError, OSError) as e:
        raise DataError(f"Couldn't decode image '{path}': {e}")

    # Resize image and crops
    images = [image]
    if augment:
        images.extend(five_crop(image))
    return [resize(image, size) for image in images]

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Accepted raster formats
extensions = (".png", ".jpg", ".jpeg")

# Set up logging
log = logging.getLogger("creative.data")
