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

import click
import logging
import numpy as np

from collections.abc import Sequence

from creative import __version__
from creative.data.corpus import (
    corpus_fingerprint, ingest_directory, split_dataset, write_corpus
)
from creative.data.manifest import render_manifest
from creative.data.synth import synth_style_corpus
from creative.eval.metrics import generate, style_posteriors
from creative.eval.probe import ProbeConfig, load_probe, save_probe, train_probe
from creative.eval.report import compare_variants
from creative.exceptions import CreativeException, DataError, NumericError
from creative.options import load_config
from creative.training.checkpoint import load_checkpoint
from creative.training.config import presets, resolve_config
from creative.training.samples import write_grid
from creative.training.trainer import load_dataset, resume, train
from creative.training.verify import check_losses

from .settings import read_settings, setup_logging

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Command line entry point
@click.group(context_settings = { "help_option_names": ["-h", "--help"] })
@click.version_option(__version__, prog_name = "creative")
@click.option("-v", "--verbose", is_flag = True, help = "Log debug messages.")
@click.option("-q", "--quiet", is_flag = True, help = "Log warnings only.")
def cli(verbose: bool, quiet: bool):
    """Train and evaluate creative adversarial networks."""
    if verbose:
        setup_logging(logging.DEBUG)
    elif quiet:
        setup_logging(logging.WARNING)
    else:
        setup_logging(logging.INFO)

# -----------------------------------------------------------------------------

# Synthesize a style-labeled corpus
@cli.command("synth-data")
@click.option("--styles", type = click.IntRange(min = 2), default = 4,
    show_default = True, help = "Number of styles."
)
@click.option("--per-style", type = click.IntRange(min = 1), default = 500,
    show_default = True, help = "Number of images per style."
)
@click.option("--size", type = click.IntRange(min = 4), default = 32,
    show_default = True, help = "Edge length of images."
)
@click.option("--seed", type = int, default = 7, show_default = True,
    help = "Seed of the corpus."
)
@click.option("--out", type = click.Path(file_okay = False), required = True,
    help = "Corpus directory."
)
def synth_data(styles: int, per_style: int, size: int, seed: int, out: str):
    """Write a synthetic corpus of procedurally drawn styles."""
    dataset = synth_style_corpus(styles, per_style, size, seed)
    write_corpus(dataset, out)
    click.echo(render_manifest(dataset), nl = False)

# Print the style table of a corpus
@cli.command("manifest")
@click.argument("data", type = click.Path(file_okay = False))
@click.option("--size", type = click.IntRange(min = 1), default = 32,
    show_default = True, help = "Edge length images are decoded at."
)
def manifest(data: str, size: int):
    """Print the number of images per style of a corpus."""
    click.echo(render_manifest(ingest_directory(data, size)), nl = False)

# -----------------------------------------------------------------------------

# Train a network pair - flags override the configuration file, which
# overrides the preset, which overrides the built-in defaults
@cli.command("train")
@click.option("--preset", type = click.Choice(list(presets)), default = "desk",
    show_default = True, help = "Network and schedule preset."
)
@click.option("--config", "config_file", type = click.Path(dir_okay = False),
    help = "Configuration file of 'key = value' lines."
)
@click.option("--variant", type = click.Choice(["gan", "sc_can", "can"]),
    help = "Objective to train [default: can]."
)
@click.option("--data", type = click.Path(file_okay = False),
    help = "Corpus directory [default: synthetic corpus]."
)
@click.option("--epochs", type = click.IntRange(min = 1),
    help = "Number of epochs [default: 100, preset desk: 30]."
)
@click.option("--batch", type = click.IntRange(min = 2),
    help = "Minibatch size [default: 128, preset desk: 64]."
)
@click.option("--lr", type = click.FloatRange(min = 0, min_open = True),
    help = "Learning rate of both networks [default: 0.0001]."
)
@click.option("--seed", type = int,
    help = "Seed of weights, noise and batch order [default: 0]."
)
@click.option("--holdout", type = click.FloatRange(min = 0, max = 1, max_open = True),
    help = "Fraction of the corpus held out for accuracies [default: 0.2]."
)
@click.option("--split-seed", type = int,
    help = "Seed of the held-out split [default: 0]."
)
@click.option("--augment/--no-augment", default = None,
    help = "Add five crops of every image [default: no]."
)
@click.option("--log-every", type = click.IntRange(min = 1),
    help = "Steps between step logs [default: 50]."
)
@click.option("--checkpoint-every", type = click.IntRange(min = 0),
    help = "Steps between checkpoints, 0 for every epoch [default: 0]."
)
@click.option("--resume", "resume_from", type = click.Path(dir_okay = False),
    help = "Continue from a checkpoint, ignoring all other settings."
)
@click.option("--out", type = click.Path(file_okay = False), required = True,
    help = "Run directory for checkpoints, step logs and sample grids."
)
def train_command(
    preset: str, config_file: str | None, resume_from: str | None, out: str,
    **flags
):
    """Train a generator and discriminator pair."""
    if resume_from:
        resume(resume_from, out = out)
        return

    # Collect settings in order of precedence
    settings = read_settings(config_file) if config_file else {}
    values = { **settings, **{
        options[name]: value
        for name, value in flags.items() if value is not None
    }}

    # Infer number of styles from the corpus, unless set explicitly
    config = resolve_config(preset, values)
    dataset = load_dataset(config)
    if "discriminator.num_styles" not in values:
        values["discriminator.num_styles"] = dataset.num_styles
        config = resolve_config(preset, values)

    # Train and report
    state, _ = train(config, dataset, out)
    click.echo(f"Trained {state.step} steps, final checkpoint in '{out}'")

# Train the independent style probe on real images
@cli.command("train-probe")
@click.option("--data", type = click.Path(file_okay = False), required = True,
    help = "Corpus directory."
)
@click.option("--size", type = click.IntRange(min = 1), default = 32,
    show_default = True, help = "Edge length images are decoded at."
)
@click.option("--epochs", type = click.IntRange(min = 1), default = 5,
    show_default = True, help = "Number of epochs."
)
@click.option("--batch", type = click.IntRange(min = 2), default = 64,
    show_default = True, help = "Minibatch size."
)
@click.option("--lr", type = click.FloatRange(min = 0, min_open = True),
    default = 2e-4, show_default = True, help = "Learning rate."
)
@click.option("--seed", type = int, default = 0, show_default = True,
    help = "Seed of weights and batch order."
)
@click.option("--holdout", type = click.FloatRange(min = 0, max = 1, max_open = True),
    default = 0.2, show_default = True,
    help = "Fraction of the corpus held out for the accuracy."
)
@click.option("--split-seed", type = int, default = 0, show_default = True,
    help = "Seed of the held-out split."
)
@click.option("--out", type = click.Path(dir_okay = False), required = True,
    help = "Probe file."
)
def train_probe_command(
    data: str, size: int, epochs: int, batch: int, lr: float, seed: int,
    holdout: float, split_seed: int, out: str
):
    """Train the style classifier used to grade generated images."""
    dataset = ingest_directory(data, size)
    train_set, heldout = split_dataset(dataset, holdout, split_seed)
    config = load_config(ProbeConfig, {
        "image_size": size,
        "input_channels": dataset.images.shape[1],
        "num_styles": dataset.num_styles,
        "epochs": epochs,
        "batch_size": batch,
        "learning_rate": lr,
        "seed": seed
    }, name = "probe")

    # Train and save probe
    probe = train_probe(train_set, config)
    save_probe(probe, out)

    # Report held-out accuracy
    if len(heldout):
        posteriors = style_posteriors(probe, heldout.images)
        accuracy = np.mean(np.argmax(posteriors, axis = 1) == heldout.labels)
        click.echo(f"Held-out style accuracy: {accuracy:.4f}")

# Write a grid of generated samples
@cli.command("sample")
@click.option("--checkpoint", type = click.Path(dir_okay = False),
    required = True, help = "Training checkpoint."
)
@click.option("--n", type = click.IntRange(min = 1), default = 64,
    show_default = True, help = "Number of samples."
)
@click.option("--seed", type = int, default = 0, show_default = True,
    help = "Seed of the noise."
)
@click.option("--columns", type = click.IntRange(min = 1), default = 8,
    show_default = True, help = "Number of grid columns."
)
@click.option("--out", type = click.Path(dir_okay = False), required = True,
    help = "PNG file."
)
def sample(checkpoint: str, n: int, seed: int, columns: int, out: str):
    """Generate images from a checkpoint."""
    state = load_checkpoint(checkpoint)
    write_grid(generate(state.generator, n, seed), out, columns)

# Compare trained variants - every variant flag is repeatable, runs of two
# variants sharing a training seed are compared pair by pair
@cli.command("eval")
@click.option("--can", type = click.Path(dir_okay = False), multiple = True,
    help = "Checkpoint trained with the ambiguity loss, repeatable."
)
@click.option("--sc-can", type = click.Path(dir_okay = False), multiple = True,
    help = "Checkpoint trained with style classification only, repeatable."
)
@click.option("--gan", type = click.Path(dir_okay = False), multiple = True,
    help = "Checkpoint trained without style classification, repeatable."
)
@click.option("--probe", type = click.Path(dir_okay = False), required = True,
    help = "Style probe from 'train-probe'."
)
@click.option("--n", type = click.IntRange(min = 30), default = 500,
    show_default = True, help = "Number of samples per run and seed."
)
@click.option("--seed", "seeds", type = int, multiple = True, default = [0],
    show_default = True, help = "Seed of the noise, repeatable."
)
@click.option("--data", type = click.Path(file_okay = False),
    help = "Training corpus, to score discriminators on its held-out split."
)
@click.option("--out", type = click.Path(dir_okay = False),
    default = "report.txt", show_default = True,
    help = "Report file, written along with a CSV table."
)
def eval_command(
    can: Sequence[str], sc_can: Sequence[str], gan: Sequence[str], probe: str,
    n: int, seeds: Sequence[int], data: str | None, out: str
):
    """Measure style entropy of generated images per variant."""
    paths = { "can": can, "sc_can": sc_can, "gan": gan }
    runs = {
        name: [load_checkpoint(path) for path in group]
        for name, group in paths.items() if group
    }
    if not runs:
        raise click.UsageError("Expected at least one of --can, --sc-can, --gan")

    # Recover the held-out split the variants were trained with
    heldout = None
    if data:
        state = next(iter(runs.values()))[0]
        dataset = ingest_directory(
            data, state.config.discriminator.image_size, state.config.augment
        )
        if corpus_fingerprint(dataset) != state.fingerprint:
            raise DataError(f"Corpus '{data}' is not the training corpus")
        _, heldout = split_dataset(
            dataset, state.config.holdout, state.config.split_seed
        )

    # Compare and write report
    report = compare_variants(runs, load_probe(probe), n, seeds, heldout)
    for pair in report.paired:
        click.echo(
            f"{pair.a} vs {pair.b}: higher entropy in {pair.wins} of "
            f"{len(pair.deltas)} paired runs, margin {pair.margin:.4f} nats"
        )
    for path in report.write(out):
        click.echo(f"Wrote '{path}'")

# Verify gradients of both composite losses
@cli.command("grad-check")
@click.option("--variant", type = click.Choice(["gan", "sc_can", "can"]),
    default = "can", show_default = True, help = "Objective to check."
)
@click.option("--style-output", type = click.Choice(["softmax", "sigmoid"]),
    default = "softmax", show_default = True, help = "Style head output."
)
@click.option("--tolerance", type = click.FloatRange(min = 0, min_open = True),
    default = 1e-4, show_default = True, help = "Largest relative error."
)
@click.option("--seed", type = int, default = 0, show_default = True,
    help = "Seed of weights, inputs and checked entries."
)
def grad_check_command(
    variant: str, style_output: str, tolerance: float, seed: int
):
    """Compare analytic gradients against finite differences."""
    reports = check_losses(variant, seed, tolerance,
        style_output = style_output
    )
    for network, report in reports.items():
        click.echo(
            f"{network}: max relative error {report.max_error:.3e} "
            f"({report.worst})"
        )

    # Fail if any network exceeds the tolerance
    failed = [name for name, report in reports.items() if not report.passed]
    if failed:
        raise NumericError(
            f"Gradient check of {', '.join(failed)} exceeds tolerance {tolerance}"
        )

# -----------------------------------------------------------------------------

# Run command line and return exit code - errors print a single line
# `<ErrorClass>: <diagnostic>` to standard error
def run(argv: Sequence[str] | None = None) -> int:
    try:
        result = cli.main(
            args = list(argv) if argv is not None else None,
            prog_name = "creative", standalone_mode = False
        )

    # Map errors to exit codes
    except click.ClickException as e:
        if isinstance(e, CreativeException):
            e.show()
        else:
            message = " ".join(e.format_message().split())
            click.echo(f"{type(e).__name__}: {message}", err = True)
        return e.exit_code
    except click.Abort:
        click.echo("Abort: interrupted", err = True)
        return 1

    # Return exit code of --help and --version, or success
    return result if isinstance(result, int) else 0

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Configuration keys of training flags
options = {
    "variant": "variant",
    "data": "data",
    "epochs": "epochs",
    "batch": "batch_size",
    "lr": "learning_rate",
    "seed": "seed",
    "holdout": "holdout",
    "split_seed": "split_seed",
    "augment": "augment",
    "log_every": "log_every",
    "checkpoint_every": "checkpoint_every"
}
