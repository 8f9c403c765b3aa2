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

from dataclasses import dataclass
from enum import Enum

from creative.exceptions import ConfigError
from creative.kernel.tensor import Tensor

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Training variant
class Variant(str, Enum):
    GAN = "gan"
    SC_CAN = "sc_can"
    CAN = "can"

    # Whether the discriminator learns to classify styles
    @property
    def learns_styles(self) -> bool:
        return self is not Variant.GAN

    # Whether the generator is penalized for unambiguous styles
    @property
    def uses_ambiguity(self) -> bool:
        return self is Variant.CAN

    # Resolve variant from its name, e.g. `sc-can` or `SC_CAN`
    @classmethod
    def parse(cls, value: str | Variant) -> Variant:
        if isinstance(value, Variant):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ConfigError(
                f"Unknown variant '{value}', expected one of: "
                f"{', '.join(variant.value for variant in cls)}"
            )

# -----------------------------------------------------------------------------

# Per-batch discriminator outputs of one training step, and the losses
# assembled from them
@dataclass
class StepSignals:
    s_D_r: Tensor
    s_D_c: Tensor
    s_G_f: Tensor
    s_G_c: Tensor

    # Per-sample negative log-likelihood of the true style, if it is not
    # given by the posterior at the true style, e.g. for independent sigmoids
    style_nll: Tensor | None = None

    # Assembled losses
    loss_d: float = float("nan")
    loss_g: float = float("nan")
