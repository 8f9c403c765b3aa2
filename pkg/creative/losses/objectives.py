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

from scipy.special import entr

from creative.exceptions import DataError, ShapeError
from creative.kernel.tensor import Tensor

from .signals import StepSignals, Variant

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Logarithm clamped at the floor - any single log term is at least ln(1e-12)
def safe_log(p: Tensor) -> Tensor:
    return np.log(np.maximum(p, LOG_FLOOR))

# Derivative of safe_log, zero where the clamp is active
def safe_log_grad(p: Tensor) -> Tensor:
    p = np.asarray(p, dtype = np.float64)
    return np.where(p > LOG_FLOOR, 1.0 / np.maximum(p, LOG_FLOOR), 0.0)

# -----------------------------------------------------------------------------

# Discriminator loss of the plain adversarial game
def gan_d_loss(r_real: Tensor, r_fake: Tensor) -> float:
    _check_batch(r_real, "real scores")
    _check_batch(r_fake, "fake scores")
    return float(
        -np.mean(safe_log(r_real)) - np.mean(safe_log(1 - r_fake))
    )

# Partial derivatives of gan_d_loss with respect to both score batches
def gan_d_loss_grad(r_real: Tensor, r_fake: Tensor) -> tuple[Tensor, Tensor]:
    _check_batch(r_real, "real scores")
    _check_batch(r_fake, "fake scores")
    return (
        -safe_log_grad(r_real) / r_real.size,
        safe_log_grad(1 - r_fake) / r_fake.size
    )

# Non-saturating generator loss
def gan_g_loss(r_fake: Tensor) -> float:
    _check_batch(r_fake, "fake scores")
    return float(-np.mean(safe_log(r_fake)))

# Partial derivative of gan_g_loss with respect to the fake scores
def gan_g_loss_grad(r_fake: Tensor) -> Tensor:
    _check_batch(r_fake, "fake scores")
    return -safe_log_grad(r_fake) / r_fake.size

# -----------------------------------------------------------------------------

# Per-sample style ambiguity - the negative cross-entropy between the uniform
# distribution and the posterior, treating each style as a binary decision;
# over the simplex, it is maximal for the uniform posterior
def style_ambiguity_term(posteriors: Tensor, simplex: bool = True) -> Tensor:
    _check_posteriors(posteriors, simplex)
    k = posteriors.shape[1]
    return np.sum(
        safe_log(posteriors) / k + (1 - 1 / k) * safe_log(1 - posteriors),
        axis = 1
    )

# Partial derivatives of the per-sample style ambiguity
def style_ambiguity_grad(posteriors: Tensor, simplex: bool = True) -> Tensor:
    _check_posteriors(posteriors, simplex)
    k = posteriors.shape[1]
    return (
        safe_log_grad(posteriors) / k -
        (1 - 1 / k) * safe_log_grad(1 - posteriors)
    )

# Per-sample negative log-likelihood of the true style - with independent
# sigmoids, every style contributes a one-vs-all binary term
def style_nll(
    posteriors: Tensor, labels: Tensor, output: str = "softmax"
) -> Tensor:
    onehot = _onehot(posteriors, labels)
    if output == "softmax":
        return -np.sum(onehot * safe_log(posteriors), axis = 1)

    # Sum binary terms
    return -np.sum(
        onehot * safe_log(posteriors) + (1 - onehot) * safe_log(1 - posteriors),
        axis = 1
    )

# Style classification loss of the discriminator
def style_classification_loss(
    posteriors: Tensor, labels: Tensor, output: str = "softmax"
) -> float:
    return float(np.mean(style_nll(posteriors, labels, output)))

# Partial derivatives of style_classification_loss
def style_classification_loss_grad(
    posteriors: Tensor, labels: Tensor, output: str = "softmax"
) -> Tensor:
    onehot = _onehot(posteriors, labels)
    n = posteriors.shape[0]
    grad = -onehot * safe_log_grad(posteriors)
    if output != "softmax":
        grad += (1 - onehot) * safe_log_grad(1 - posteriors)

    # Return gradient averaged over batch
    return grad / n

# -----------------------------------------------------------------------------

# Discriminator loss with style classification
def can_d_loss(signals: StepSignals) -> float:
    _check_batch(signals.s_D_r, "real scores")
    _check_batch(signals.s_G_f, "fake scores")

    # Resolve per-sample style term
    nll = signals.style_nll
    if nll is None:
        _check_batch(signals.s_D_c, "style scores")
        nll = -safe_log(signals.s_D_c)

    # Assemble loss
    return float(
        -np.mean(safe_log(signals.s_D_r))
        + np.mean(nll)
        - np.mean(safe_log(1 - signals.s_G_f))
    )

# Generator loss with style ambiguity - a weight of zero yields gan_g_loss
def can_g_loss(signals: StepSignals, ambiguity_weight: float = 1.0) -> float:
    _check_batch(signals.s_G_f, "fake scores")
    _check_batch(signals.s_G_c, "ambiguity terms")
    return float(
        -np.mean(safe_log(signals.s_G_f))
        - ambiguity_weight * np.mean(signals.s_G_c)
    )

# Discriminator loss of the given variant - the plain game drops the style
# term, both creative variants classify styles
def discriminator_loss(signals: StepSignals, variant: Variant) -> float:
    if Variant.parse(variant).learns_styles:
        return can_d_loss(signals)
    return gan_d_loss(signals.s_D_r, signals.s_G_f)

# Generator loss of the given variant - only the creative variant is
# penalized for unambiguous styles
def generator_loss(signals: StepSignals, variant: Variant) -> float:
    if Variant.parse(variant).uses_ambiguity:
        return can_g_loss(signals)
    return gan_g_loss(signals.s_G_f)

# Partial derivatives of the discriminator loss with respect to the outputs
# on real and fake images - the style gradient is None for the plain game
def discriminator_loss_grad(
    r_real: Tensor, posteriors_real: Tensor, labels: Tensor, r_fake: Tensor,
    variant: Variant, output: str = "softmax"
) -> tuple[Tensor, Tensor | None, Tensor]:
    grad_real, grad_style = discriminator_real_grad(
        r_real, posteriors_real, labels, variant, output
    )
    return grad_real, grad_style, discriminator_fake_grad(r_fake)

# Partial derivatives of the discriminator loss with respect to the outputs
# on real images - the real and fake halves are independent, so each half
# can be propagated right after its own forward pass
def discriminator_real_grad(
    r_real: Tensor, posteriors_real: Tensor, labels: Tensor,
    variant: Variant, output: str = "softmax"
) -> tuple[Tensor, Tensor | None]:
    _check_batch(r_real, "real scores")
    grad_real = -safe_log_grad(r_real) / r_real.size

    # Add style classification for creative variants
    grad_style = None
    if Variant.parse(variant).learns_styles:
        grad_style = style_classification_loss_grad(
            posteriors_real, labels, output
        )

    # Return gradients
    return grad_real, grad_style

# Partial derivative of the discriminator loss with respect to the outputs
# on fake images
def discriminator_fake_grad(r_fake: Tensor) -> Tensor:
    _check_batch(r_fake, "fake scores")
    return safe_log_grad(1 - r_fake) / r_fake.size

# Partial derivatives of the generator loss with respect to the outputs on
# fake images - the style gradient is None unless ambiguity is used
def generator_loss_grad(
    r_fake: Tensor, posteriors_fake: Tensor, variant: Variant,
    output: str = "softmax"
) -> tuple[Tensor, Tensor | None]:
    grad_fake = gan_g_loss_grad(r_fake)
    grad_style = None
    if Variant.parse(variant).uses_ambiguity:
        simplex = output == "softmax"
        grad_style = -style_ambiguity_grad(
            posteriors_fake, simplex
        ) / posteriors_fake.shape[0]

    # Return gradients
    return grad_fake, grad_style

# -----------------------------------------------------------------------------

# Per-sample entropy of the style posterior in nats - rows of independent
# sigmoids must be normalized first
def posterior_entropy(posteriors: Tensor, normalize: bool = False) -> Tensor:
    if normalize:
        posteriors = posteriors / posteriors.sum(axis = 1, keepdims = True)
    _check_posteriors(posteriors, True)
    return np.sum(entr(posteriors), axis = 1)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Ensure the batch is not empty
def _check_batch(values: Tensor, name: str):
    if np.size(values) == 0:
        raise ShapeError(f"Empty batch of {name}")

# Ensure rows are probability vectors
def _check_posteriors(posteriors: Tensor, simplex: bool):
    if posteriors.ndim != 2 or posteriors.shape[0] == 0:
        raise ShapeError(
            f"Expected posteriors of shape (N, K), but got {posteriors.shape}"
        )

    # Check row sums
    if simplex:
        sums = posteriors.sum(axis = 1)
        if np.any(np.abs(sums - 1) > 1e-6) or np.any(posteriors < 0):
            raise DataError(
                f"Posterior rows must be probability vectors, "
                f"but row sums range from {sums.min():.6g} to {sums.max():.6g}"
            )

# Create one-hot encoding of labels matching the posteriors
def _onehot(posteriors: Tensor, labels: Tensor) -> Tensor:
    labels = np.asarray(labels)
    if posteriors.ndim != 2 or labels.shape != (posteriors.shape[0],):
        raise ShapeError(
            f"Mismatch in labels: expected shape ({posteriors.shape[0]},), "
            f"but got {labels.shape}"
        )

    # Ensure labels are in range
    k = posteriors.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise DataError(f"Style labels must lie in [0, {k})")

    # Return one-hot encoding
    onehot = np.zeros(posteriors.shape, dtype = np.float64)
    onehot[np.arange(labels.size), labels] = 1.0
    return onehot

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Floor of clamped logarithms
LOG_FLOOR = 1e-12
