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

from dataclasses import dataclass, field

from creative.exceptions import NumericError

from .tensor import Tensor

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Trainable weight with its accumulated gradient and optimizer state
@dataclass(eq = False)
class Parameter:
    value: Tensor
    grad: Tensor = field(default = None)
    adam_m: Tensor = field(default = None)
    adam_v: Tensor = field(default = None)
    step_count: int = 0

    # Initialize gradient and optimizer state, if not given
    def __post_init__(self):
        for name in ("grad", "adam_m", "adam_v"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros_like(self.value))

    # Shape of the weight
    @property
    def shape(self):
        return self.value.shape

    # Number of scalars in the weight
    @property
    def size(self):
        return self.value.size

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Apply one Adam update with bias correction - the gradient is left intact
# for inspection and must be cleared explicitly with zero_grad
def adam_step(
    param: Parameter, learning_rate: float = 1e-4,
    beta1: float = 0.5, beta2: float = 0.999, epsilon: float = 1e-8
) -> Parameter:
    grad = param.grad
    if not np.all(np.isfinite(grad)):
        raise NumericError(
            f"Non-finite gradient in parameter of shape {param.shape}, "
            f"refusing to apply optimizer step {param.step_count + 1}"
        )

    # Update biased moment estimates in place
    param.step_count += 1
    param.adam_m *= beta1
    param.adam_m += (1 - beta1) * grad
    param.adam_v *= beta2
    param.adam_v += (1 - beta2) * grad * grad

    # Correct bias and update value
    m_hat = param.adam_m / (1 - beta1 ** param.step_count)
    v_hat = param.adam_v / (1 - beta2 ** param.step_count)
    param.value -= learning_rate * m_hat / (np.sqrt(v_hat) + epsilon)

    # Return parameter
    return param

# Clear the accumulated gradient
def zero_grad(param: Parameter) -> Parameter:
    param.grad.fill(0)
    return param
