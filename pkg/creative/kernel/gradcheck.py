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

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from creative.exceptions import ShapeError

from .tensor import Tensor, expect_finite

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Result of a gradient check
@dataclass
class GradCheckReport:
    tolerance: float
    errors: dict[str, float] = field(default_factory = dict)

    # Largest relative error over all parameters
    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default = 0.0)

    # Whether all parameters are within tolerance
    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    # Name of the parameter with the largest relative error
    @property
    def worst(self) -> str | None:
        if not self.errors:
            return None
        return max(self.errors, key = self.errors.get)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Compare analytic gradients against central differences - the closure must
# evaluate the loss at the current values of the given arrays, which are
# perturbed in place, and return the loss and the analytic gradients
def grad_check(
    closure: Callable[[], tuple[float, Mapping[str, Tensor]]],
    params: Mapping[str, Tensor], h: float = 1e-5, tolerance: float = 1e-4,
    entries: int | None = None, seed: int = 0, floor: float = 1e-4
) -> GradCheckReport:
    for name, value in params.items():
        expect_finite(value, name)

    # Compute analytic gradients at the unperturbed point
    _, analytic = _evaluate(closure)
    report = GradCheckReport(tolerance)

    # Large parameters are checked on a seeded subset of their entries
    rng = np.random.default_rng(seed)
    for name, value in params.items():
        if name not in analytic:
            raise ShapeError(f"Closure returned no gradient for '{name}'")

        # Select entries to check
        flat = value.reshape(-1)
        indices = np.arange(flat.size)
        if entries is not None and flat.size > entries:
            indices = np.sort(rng.choice(flat.size, entries, replace = False))

        # Compute central differences entry by entry
        numeric = np.empty(indices.size)
        for i, index in enumerate(indices):
            original = flat[index]
            flat[index] = original + h
            plus, _ = _evaluate(closure)
            flat[index] = original - h
            minus, _ = _evaluate(closure)
            flat[index] = original
            numeric[i] = (plus - minus) / (2 * h)

        # Compute largest relative error over entries - magnitudes below the
        # floor are compared absolutely, scaled by the floor
        exact = np.asarray(analytic[name], dtype = np.float64).reshape(-1)[indices]
        scale = np.maximum(np.maximum(np.abs(exact), np.abs(numeric)), floor)
        report.errors[name] = float(
            np.max(np.abs(exact - numeric) / scale, initial = 0.0)
        )
        log.debug(f"Relative error of '{name}': {report.errors[name]:.3e}")

    # Return report
    return report

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Evaluate closure and ensure it produced a scalar
def _evaluate(closure):
    loss, grads = closure()
    loss = np.asarray(loss)
    if loss.size != 1 or loss.ndim > 1:
        raise ShapeError(
            f"Gradient check requires a scalar loss, "
            f"but the closure returned shape {loss.shape}"
        )

    # Return loss as float
    return float(loss.reshape(())), grads

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.kernel")
