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
import os
import time

from dataclasses import replace
from pathlib import Path

from creative.data.batching import BatchPlan, minibatches, num_batches
from creative.data.corpus import (
    StyleDataset, corpus_fingerprint, ingest_directory, split_dataset
)
from creative.data.synth import synth_style_corpus
from creative.eval.metrics import classifier_accuracy
from creative.exceptions import DataError, NumericError, StorageError
from creative.kernel.optim import adam_step
from creative.kernel.tensor import Tensor
from creative.losses.objectives import (
    discriminator_fake_grad, discriminator_loss, discriminator_real_grad,
    generator_loss, generator_loss_grad, posterior_entropy,
    style_ambiguity_term, style_nll
)
from creative.losses.signals import StepSignals
from creative.models.networks import sample_noise

from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainConfig
from .records import StepLog, append_step_logs
from .samples import write_grid
from .state import TrainState, init_state

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Execute one alternating update - the discriminator is updated on the real
# and the generated batch in separate passes, then the generator is updated
# against the updated discriminator on the same generated batch
def train_step(
    state: TrainState, images: Tensor, labels: Tensor,
    rng: np.random.Generator | None = None
) -> tuple[TrainState, StepLog]:
    started = time.time()
    config, variant = state.config, state.variant
    generator, discriminator = state.generator, state.discriminator
    output = discriminator.config.style_output
    if rng is None:
        rng = state.rng

    # Draw noise and generate images
    z = sample_noise(
        len(images), config.generator.noise_dim, rng, config.generator.precision
    )
    fakes = generator.forward(z, "train")

    # Propagate discriminator loss on real images
    discriminator.zero_grad()
    r_real, posteriors_real = discriminator.forward(images, "train")
    grad_r, grad_style = discriminator_real_grad(
        r_real, posteriors_real, labels, variant, output
    )
    discriminator.backward(grad_r, grad_style)

    # Propagate discriminator loss on generated images
    r_fake, posteriors_fake = discriminator.forward(fakes, "train")
    discriminator.backward(discriminator_fake_grad(r_fake), None)

    # Assemble discriminator loss
    signals = StepSignals(
        s_D_r = r_real,
        s_D_c = posteriors_real[np.arange(len(labels)), labels],
        s_G_f = r_fake,
        s_G_c = _ambiguity(posteriors_fake, output),
        style_nll = None if output == "softmax" else
            style_nll(posteriors_real, labels, output)
    )
    signals.loss_d = discriminator_loss(signals, variant)

    # Start record - values of the generator update are filled in later
    record = StepLog(
        step = state.step,
        epoch = state.epoch,
        loss_d = signals.loss_d,
        loss_g = float("nan"),
        real_score = float(np.mean(r_real)),
        fake_score = float(np.mean(r_fake)),
        fake_entropy = float("nan")
    )
    _check_finite(signals.loss_d, "discriminator loss", record)

    # Update discriminator
    _update(discriminator, config, record)

    # Evaluate updated discriminator on the same generated images, keeping
    # its parameters and running statistics untouched
    generator.zero_grad()
    r_fake, posteriors_fake = discriminator.forward(fakes, "frozen")
    signals.loss_g = generator_loss(replace(signals,
        s_G_f = r_fake, s_G_c = _ambiguity(posteriors_fake, output)
    ), variant)

    # Record scores the generator is trained against
    record.loss_g = signals.loss_g
    record.fake_score = float(np.mean(r_fake))
    record.fake_entropy = float(np.mean(posterior_entropy(
        posteriors_fake, normalize = output != "softmax"
    )))
    _check_finite(signals.loss_g, "generator loss", record)

    # Propagate generator loss through discriminator into generator
    grad_r, grad_style = generator_loss_grad(
        r_fake, posteriors_fake, variant, output
    )
    generator.backward(discriminator.backward(
        grad_r, grad_style, param_grads = False
    ))

    # Update generator
    _update(generator, config, record)
    if not record.is_finite():
        raise NumericError(f"Non-finite values at step {record.step}", record)

    # Return state and record
    record.timestamp = time.time()
    record.wallclock = record.timestamp - started
    return state, record

# Train from scratch - the corpus is ingested or synthesized according to the
# configuration, unless given, and artifacts are written to the output folder
def train(
    config: TrainConfig, dataset: StyleDataset | None = None,
    out: str | os.PathLike | None = None
) -> tuple[TrainState, list[StepLog]]:
    dataset = dataset if dataset is not None else load_dataset(config)
    state = init_state(config, corpus_fingerprint(dataset))
    return _run(state, dataset, out)

# Continue a run from a checkpoint on the same corpus
def resume(
    path: str | os.PathLike, dataset: StyleDataset | None = None,
    out: str | os.PathLike | None = None
) -> tuple[TrainState, list[StepLog]]:
    state = load_checkpoint(path)
    dataset = dataset if dataset is not None else load_dataset(state.config)

    # Ensure the corpus is the one the run started with
    if corpus_fingerprint(dataset) != state.fingerprint:
        raise DataError(
            f"Corpus differs from the corpus checkpoint '{path}' was trained on"
        )

    # Continue run
    log.info(f"Resuming at epoch {state.epoch}, step {state.step}")
    return _run(state, dataset, out)

# Load corpus of a configuration - a directory, or a synthetic corpus
def load_dataset(config: TrainConfig) -> StyleDataset:
    size = config.discriminator.image_size
    if config.data:
        return ingest_directory(config.data, size, config.augment)

    # Synthesize corpus
    synth = config.synth
    return synth_style_corpus(synth.styles, synth.per_style, size, synth.seed)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Run epochs until the configured number is reached
def _run(state: TrainState, dataset: StyleDataset, out):
    config = state.config
    if dataset.num_styles != config.discriminator.num_styles:
        raise DataError(
            f"Corpus has {dataset.num_styles} styles, but the discriminator "
            f"distinguishes {config.discriminator.num_styles}"
        )

    # Split corpus and plan batches
    train_set, heldout = split_dataset(dataset, config.holdout, config.split_seed)
    plan = BatchPlan(config.batch_size, config.seed)
    count = num_batches(train_set, plan)

    # Prepare output folder
    if out is not None:
        out = Path(out)
        try:
            os.makedirs(out, exist_ok = True)
        except OSError as e:
            raise StorageError(f"Couldn't create output folder '{out}': {e}")

    # Train epoch by epoch, skipping batches consumed before a resume
    logs: list[StepLog] = []
    pending: list[StepLog] = []
    while state.epoch < config.epochs:
        for images, labels in minibatches(
            train_set, plan, state.epoch, skip = state.batch
        ):
            _, record = train_step(state, images, labels)
            state.batch += 1
            state.step += 1
            logs.append(record)

            # Log progress
            if state.step % config.log_every == 0:
                log.info(str(record))
                pending.append(record)

            # Checkpoint periodically
            every = config.checkpoint_every
            if every and state.step % every == 0:
                _flush(out, pending)
                _checkpoint(state, heldout, out)

        # Advance epoch
        state.epoch += 1
        state.batch = 0
        if not config.checkpoint_every:
            _flush(out, pending)
            _checkpoint(state, heldout, out)

    # Write final state
    _flush(out, pending)
    if out is not None:
        save_checkpoint(state, out / "final.ckpt")
        write_grid(_panel(state), out / "samples_final.png")
    log.info(f"Finished {config.epochs} epochs of {count} batches")

    # Return state and records
    return state, logs

# Save checkpoint and sample grid, and log held-out accuracies
def _checkpoint(state: TrainState, heldout: StyleDataset, out):
    if len(heldout):
        real_fake, style = classifier_accuracy(
            state.discriminator, heldout, state.generator,
            seed = state.config.seed + state.step
        )
        log.info(
            f"Held-out accuracy at step {state.step}: "
            f"real/fake {real_fake:.3f}, style {style:.3f}"
        )

    # Write checkpoint and samples
    if out is not None:
        name = f"epoch{state.epoch}_step{state.step}"
        save_checkpoint(state, out / f"checkpoint_{name}.ckpt")
        write_grid(_panel(state), out / f"samples_{name}.png")

# Append pending records to the run log
def _flush(out, pending: list[StepLog]):
    if out is not None and pending:
        append_step_logs(out / "steps.jsonl", pending)
    pending.clear()

# Generate images from the fixed evaluation noise panel
def _panel(state: TrainState) -> Tensor:
    return state.generator.forward(state.panel, "infer")

# Compute per-sample ambiguity of style posteriors
def _ambiguity(posteriors: Tensor, output: str) -> Tensor:
    return style_ambiguity_term(posteriors, simplex = output == "softmax")

# Apply one optimizer step to every parameter of a network
def _update(network, config: TrainConfig, record: StepLog):
    for name, param in network.named_parameters().items():
        try:
            adam_step(param,
                config.learning_rate, config.beta1, config.beta2, config.epsilon
            )
        except NumericError as e:
            raise NumericError(
                f"Step {record.step}, parameter '{name}': {e.message}", record
            )

# Ensure loss is finite
def _check_finite(value: float, name: str, record: StepLog):
    if not np.isfinite(value):
        raise NumericError(f"Non-finite {name} at step {record.step}", record)

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Set up logging
log = logging.getLogger("creative.training")
