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

from creative.kernel.gradcheck import GradCheckReport, grad_check
from creative.losses.objectives import (
    discriminator_fake_grad, discriminator_loss, discriminator_real_grad,
    generator_loss, generator_loss_grad, style_ambiguity_term, style_nll
)
from creative.losses.signals import StepSignals, Variant
from creative.models.networks import (
    Discriminator, Generator, build_discriminator, build_generator,
    sample_noise
)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Check gradients of both composite losses on tiny networks - the generator
# loss is differentiated through the discriminator into the generator, the
# discriminator loss with respect to the discriminator. The small step keeps
# perturbations from crossing the kinks of the leaky rectifiers
def check_losses(
    variant: Variant | str = Variant.CAN, seed: int = 0,
    tolerance: float = 1e-4, entries: int | None = 64,
    style_output: str = "softmax", h: float = 1e-6
) -> dict[str, GradCheckReport]:
    variant = Variant.parse(variant)
    generator = build_generator(tiny_generator, seed)
    discriminator = build_discriminator(
        { **tiny_discriminator, "style_output": style_output }, seed + 1
    )

    # Draw a batch of real images, labels and noise
    rng = np.random.default_rng([seed, 4])
    real = rng.uniform(-1, 1, (4, 3, 8, 8))
    labels = np.array([0, 1, 2, 0])
    z = sample_noise(4, tiny_generator["noise_dim"], rng)
    fakes = generator.forward(z, "frozen")

    # Check discriminator loss on fixed real and generated images
    reports = {}
    closure = _discriminator_closure(discriminator, real, labels, fakes, variant)
    reports["discriminator"] = grad_check(closure, {
        name: param.value
        for name, param in discriminator.named_parameters().items()
    }, h = h, tolerance = tolerance, entries = entries, seed = seed)

    # Check generator loss through the discriminator
    closure = _generator_closure(generator, discriminator, z, variant)
    reports["generator"] = grad_check(closure, {
        name: param.value
        for name, param in generator.named_parameters().items()
    }, h = h, tolerance = tolerance, entries = entries, seed = seed)

    # Return reports
    return reports

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Create closure evaluating the discriminator loss and its gradients
def _discriminator_closure(
    discriminator: Discriminator, real, labels, fakes, variant: Variant
):
    output = discriminator.config.style_output
    def closure():
        discriminator.zero_grad()

        # Propagate loss on real images
        r_real, posteriors_real = discriminator.forward(real, "train")
        discriminator.backward(*discriminator_real_grad(
            r_real, posteriors_real, labels, variant, output
        ))

        # Propagate loss on generated images
        r_fake, posteriors_fake = discriminator.forward(fakes, "train")
        discriminator.backward(discriminator_fake_grad(r_fake), None)

        # Assemble loss
        loss = discriminator_loss(StepSignals(
            s_D_r = r_real,
            s_D_c = posteriors_real[np.arange(len(labels)), labels],
            s_G_f = r_fake,
            s_G_c = style_ambiguity_term(posteriors_fake, output == "softmax"),
            style_nll = style_nll(posteriors_real, labels, output)
        ), variant)
        return loss, _grads(discriminator)

    # Return closure
    return closure

# Create closure evaluating the generator loss and its gradients
def _generator_closure(
    generator: Generator, discriminator: Discriminator, z, variant: Variant
):
    output = discriminator.config.style_output
    def closure():
        generator.zero_grad()

        # Evaluate discriminator on generated images
        fakes = generator.forward(z, "train")
        r_fake, posteriors_fake = discriminator.forward(fakes, "frozen")
        loss = generator_loss(StepSignals(
            s_D_r = r_fake,
            s_D_c = r_fake,
            s_G_f = r_fake,
            s_G_c = style_ambiguity_term(posteriors_fake, output == "softmax")
        ), variant)

        # Propagate loss into generator
        grad_r, grad_style = generator_loss_grad(
            r_fake, posteriors_fake, variant, output
        )
        generator.backward(discriminator.backward(
            grad_r, grad_style, param_grads = False
        ))
        return loss, _grads(generator)

    # Return closure
    return closure

# Copy accumulated gradients by parameter name
def _grads(network) -> dict:
    return {
        name: param.grad.copy()
        for name, param in network.named_parameters().items()
    }

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Tiny generator - 8x8 images from 8-dimensional noise
tiny_generator = {
    "noise_dim": 8,
    "base_spatial": 2,
    "stage_channels": [6, 4],
    "output_size": 8
}

# Tiny discriminator - 8x8 images, 3 styles
tiny_discriminator = {
    "image_size": 8,
    "body_channels": [4, 8],
    "head_hidden": [16],
    "num_styles": 3
}
