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

import copy
import logging
import numpy as np
import pytest

from creative.data.synth import synth_style_corpus
from creative.training.config import resolve_config

# -----------------------------------------------------------------------------
# Fixtures
# -----------------------------------------------------------------------------

# Seeded stream for random test inputs
@pytest.fixture
def rng():
    return np.random.default_rng(1234)

# Synthetic corpus of 3 styles with 8 images of 8x8 pixels each
@pytest.fixture(scope = "session")
def tiny_corpus():
    return synth_style_corpus(3, 8, 8, 7)

# Settings of tiny networks and schedules, on top of the desk preset
@pytest.fixture
def tiny_values():
    return copy.deepcopy(tiny)

# Training configuration matching the tiny corpus - 4 batches per epoch
@pytest.fixture
def tiny_config(tiny_values):
    return resolve_config("desk", tiny_values)

# Remove log handlers installed by the command line after each test
@pytest.fixture(autouse = True)
def reset_logging():
    yield
    logger = logging.getLogger("creative")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)
    logger.propagate = True

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Tiny networks and schedule - 18 training images, 4 batches per epoch
tiny = {
    "batch_size": 4,
    "epochs": 2,
    "log_every": 1,
    "holdout": 0.25,
    "sample_count": 4,
    "synth": { "styles": 3, "per_style": 8 },
    "generator": {
        "noise_dim": 8,
        "base_spatial": 2,
        "stage_channels": [8, 4],
        "output_size": 8
    },
    "discriminator": {
        "image_size": 8,
        "body_channels": [4, 8],
        "head_hidden": [16],
        "num_styles": 3
    }
}
