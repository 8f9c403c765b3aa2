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
import numpy as np

from scipy import stats
from typing import NamedTuple

from creative.exceptions import DataError

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Result of a two-sample t-test
class TTestResult(NamedTuple):
    t: float
    p: float

    # Whether the test was undefined due to zero variance in both samples
    @property
    def degenerate(self) -> bool:
        return math.isnan(self.p)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Welch's unequal-variance t-test with two-sided p-value - swapping samples
# negates t and preserves p
def two_sample_ttest(sample_a, sample_b) -> TTestResult:
    a = np.asarray(sample_a, dtype = np.float64)
    b = np.asarray(sample_b, dtype = np.float64)
    if a.size < 2 or b.size < 2:
        raise DataError(
            f"Each sample needs at least 2 values, but got {a.size} and {b.size}"
        )

    # Compute squared standard errors
    var_a = a.var(ddof = 1) / a.size
    var_b = b.var(ddof = 1) / b.size
    error = var_a + var_b

    # Flag degenerate variance, as the statistic is undefined
    if error == 0:
        log.warning("Both samples have zero variance, t-test is undefined")
        return TTestResult(float("nan"), float("nan"))

    # Compute statistic and Welch-Satterthwaite degrees of freedom
    t = (a.mean() - b.mean()) / math.sqrt(error)
    df = error ** 2 / (var_a ** 2 / (a.size - 1) + var_b ** 2 / (b.size - 1))

    # Return statistic and two-sided p-value
    p = 2 * stats.t.sf(abs(t), df)
    return TTestResult(float(t), float(min(p, 1.0)))

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.eval")
