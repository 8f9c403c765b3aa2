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

from creative.exceptions import NumericError, ShapeError

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Resolve floating point precision by name
def resolve_dtype(precision: str | np.dtype = "float64") -> np.dtype:
    if isinstance(precision, np.dtype):
        return precision
    if precision not in precisions:
        raise ShapeError(
            f"Unsupported precision '{precision}', "
            f"expected one of: {', '.join(precisions)}"
        )
    return precisions[precision]

# Ensure that the tensor has the given number of dimensions
def expect_rank(value: Tensor, rank: int, name: str):
    if value.ndim != rank:
        raise ShapeError(
            f"Expected '{name}' to have {rank} dimensions, "
            f"but it has shape {value.shape}"
        )

# Ensure that two extents agree
def expect_extent(actual: int, expected: int, dimension: str):
    if actual != expected:
        raise ShapeError(
            f"Mismatch in {dimension}: expected {expected}, but got {actual}"
        )

# Ensure that all values are finite
def expect_finite(value: Tensor, name: str):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"Non-finite values in '{name}'")

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Dense n-dimensional real array - row-major, images are (N, C, H, W)
Tensor = np.ndarray

# Supported precisions
precisions = {
    "float64": np.dtype(np.float64),
    "float32": np.dtype(np.float32)
}
