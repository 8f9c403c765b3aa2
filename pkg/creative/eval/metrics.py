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

from typing import Protocol

from creative.data.corpus import StyleDataset
from creative.exceptions import DataError
from creative.kernel.tensor import Tensor
from creative.losses.objectives import posterior_entropy, style_ambiguity_term
from creative.models.networks import Discriminator, Generator, sample_noise

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Anything that maps images onto style posteriors
class StyleClassifier(Protocol):
    config: object

    def forward(self, images: Tensor, mode: str = "train"): ...

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Compute style posteriors of images in batches, in inference mode
def style_posteriors(
    classifier: StyleClassifier, images: Tensor, batch_size: int = 64
) -> Tensor:
    outputs = []
    for start in range(0, len(images), batch_size):
        output = classifier.forward(images[start:start + batch_size], "infer")
        outputs.append(output[1] if isinstance(output, tuple) else output)

    # Return posteriors
    return np.concatenate(outputs)

# Generate images from a seeded noise stream, in batches
def generate(
    generator: Generator, n: int, seed: int, batch_size: int = 64
) -> Tensor:
    z = sample_noise(
        n, generator.config.noise_dim, np.random.default_rng(seed),
        generator.config.precision
    )
    return np.concatenate([
        generator.forward(z[start:start + batch_size], "infer")
        for start in range(0, n, batch_size)
    ])

# -----------------------------------------------------------------------------

# Compute style posterior entropy of generated samples - returns mean, standard
# deviation and the per-sample values in nats
def mean_style_entropy(
    generator: Generator, classifier: StyleClassifier,
    n_samples: int, seed: int, num_styles: int | None = None
) -> tuple[float, float, Tensor]:
    posteriors = _generated_posteriors(
        generator, classifier, n_samples, seed, num_styles
    )

    # Normalize independent sigmoids before computing entropy
    values = posterior_entropy(posteriors, normalize = _is_sigmoid(classifier))
    return float(values.mean()), float(values.std()), values

# Compute mean style ambiguity term of generated samples
def mean_ambiguity(
    generator: Generator, classifier: StyleClassifier,
    n_samples: int, seed: int, num_styles: int | None = None
) -> float:
    posteriors = _generated_posteriors(
        generator, classifier, n_samples, seed, num_styles
    )
    simplex = not _is_sigmoid(classifier)
    return float(style_ambiguity_term(posteriors, simplex).mean())

# Compute mean real/fake score the discriminator assigns to generated samples
def mean_real_score(
    discriminator: Discriminator, generator: Generator,
    n_samples: int, seed: int, batch_size: int = 64
) -> float:
    fakes = generate(generator, n_samples, seed, batch_size)
    scores = [
        discriminator.forward(fakes[start:start + batch_size], "infer")[0]
        for start in range(0, n_samples, batch_size)
    ]
    return float(np.concatenate(scores).mean())

# Compute real/fake accuracy at threshold 0.5 over the real samples and as
# many generated samples, and style accuracy over the real samples
def classifier_accuracy(
    discriminator: Discriminator, dataset: StyleDataset,
    generator: Generator | None = None, seed: int = 0, batch_size: int = 64
) -> tuple[float, float]:
    if len(dataset) == 0:
        raise DataError("Cannot compute accuracy on an empty split")

    # Evaluate discriminator on real samples
    scores, posteriors = [], []
    for start in range(0, len(dataset), batch_size):
        r, p = discriminator.forward(
            dataset.images[start:start + batch_size], "infer"
        )
        scores.append(r)
        posteriors.append(p)

    # Compute style accuracy and count real samples judged real
    posteriors = np.concatenate(posteriors)
    style = float(np.mean(np.argmax(posteriors, axis = 1) == dataset.labels))
    correct = int(np.sum(np.concatenate(scores) > 0.5))
    total = len(dataset)

    # Count generated samples judged fake
    if generator is not None:
        fakes = generate(generator, len(dataset), seed, batch_size)
        for start in range(0, len(fakes), batch_size):
            r, _ = discriminator.forward(fakes[start:start + batch_size], "infer")
            correct += int(np.sum(r <= 0.5))
        total += len(fakes)

    # Return accuracies
    return correct / total, style

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Compute style posteriors of generated samples
def _generated_posteriors(generator, classifier, n_samples, seed, num_styles):
    if n_samples < 30:
        raise DataError(
            f"Expected at least 30 samples for entropy estimates, "
            f"but got {n_samples}"
        )

    # Ensure classifier and corpus agree on the number of styles
    if num_styles is not None and classifier.config.num_styles != num_styles:
        raise DataError(
            f"Classifier distinguishes {classifier.config.num_styles} styles, "
            f"but the corpus has {num_styles}"
        )

    # Generate samples and classify them
    return style_posteriors(classifier, generate(generator, n_samples, seed))

# Whether the classifier uses independent sigmoids
def _is_sigmoid(classifier) -> bool:
    return getattr(classifier.config, "style_output", "softmax") == "sigmoid"
