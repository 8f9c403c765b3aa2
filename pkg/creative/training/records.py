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

import json
import math
import os

from dataclasses import asdict, dataclass, field, fields

from creative.exceptions import StorageError

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Record of one training step - the time the step finished at and its
# duration are the only fields that differ between identical runs, so they
# are excluded from comparisons
@dataclass
class StepLog:
    step: int
    epoch: int
    loss_d: float
    loss_g: float
    real_score: float
    fake_score: float
    fake_entropy: float
    timestamp: float = field(default = 0.0, compare = False)
    wallclock: float = field(default = 0.0, compare = False)

    # Whether all recorded values are finite
    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in (
            self.loss_d, self.loss_g,
            self.real_score, self.fake_score, self.fake_entropy
        ))

    # Format record for the run log
    def __str__(self):
        return (
            f"step {self.step} (epoch {self.epoch}): "
            f"L_D = {self.loss_d:.4f}, L_G = {self.loss_g:.4f}, "
            f"D(x) = {self.real_score:.3f}, D(G(z)) = {self.fake_score:.3f}, "
            f"H = {self.fake_entropy:.3f}"
        )

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Append records to a line-delimited file
def append_step_logs(path: str | os.PathLike, logs: list[StepLog]):
    try:
        with open(path, "a", encoding = "utf-8") as f:
            for log in logs:
                f.write(json.dumps(asdict(log), sort_keys = True) + "\n")

    # Surface failing writes as storage errors
    except OSError as e:
        raise StorageError(f"Couldn't append to step log '{path}': {e}")

# Read records from a line-delimited file
def read_step_logs(path: str | os.PathLike) -> list[StepLog]:
    names = set(item.name for item in fields(StepLog))
    try:
        with open(path, encoding = "utf-8") as f:
            return [
                StepLog(**{
                    key: value for key, value in json.loads(line).items()
                    if key in names
                })
                for line in f if line.strip()
            ]

    # Surface failing reads as storage errors
    except (OSError, ValueError) as e:
        raise StorageError(f"Couldn't read step log '{path}': {e}")
