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

from collections.abc import Iterator
from dataclasses import dataclass

from creative.exceptions import ConfigError, DataError
from creative.kernel.tensor import Tensor

from .corpus import StyleDataset

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Batch plan - batch normalization needs at least two samples per batch
@dataclass(frozen = True)
class BatchPlan:
    batch_size: int
    seed: int
    drop_last: bool = True

    # Ensure the batch size is valid
    def __post_init__(self):
        if self.batch_size < 2:
            raise ConfigError(
                f"Batch size must be at least 2, but got {self.batch_size}"
            )

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Number of batches per epoch
def num_batches(dataset: StyleDataset, plan: BatchPlan) -> int:
    _check(dataset, plan)
    return len(_bounds(len(dataset), plan))

# Serve batches of images and style indices in the seeded order of the
# epoch, optionally skipping batches that were already consumed
def minibatches(
    dataset: StyleDataset, plan: BatchPlan, epoch: int, skip: int = 0
) -> Iterator[tuple[Tensor, Tensor]]:
    _check(dataset, plan)
    order = np.random.default_rng(plan.seed ^ epoch).permutation(len(dataset))
    return _serve(dataset, order, _bounds(len(dataset), plan)[skip:])

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Compute batch boundaries of an epoch - when the remainder is kept, a single
# remaining sample joins the last full batch, so no batch is smaller than 2
def _bounds(n: int, plan: BatchPlan) -> list[tuple[int, int]]:
    size, rest = plan.batch_size, n % plan.batch_size
    bounds = [(start, start + size) for start in range(0, n - rest, size)]
    if plan.drop_last or not rest:
        return bounds

    # Keep remainder
    if rest == 1:
        bounds[-1] = (bounds[-1][0], n)
    else:
        bounds.append((n - rest, n))
    return bounds

# Slice permutation into batches
def _serve(dataset: StyleDataset, order: Tensor, bounds):
    for start, stop in bounds:
        batch = order[start:stop]
        yield dataset.images[batch], dataset.labels[batch]

# Ensure the dataset can be served with the plan
def _check(dataset: StyleDataset, plan: BatchPlan):
    if len(dataset) == 0:
        raise DataError("Cannot serve batches from an empty dataset")
    if plan.batch_size > len(dataset):
        raise DataError(
            f"Batch size {plan.batch_size} exceeds dataset size {len(dataset)}"
        )
