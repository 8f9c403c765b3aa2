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

import logging
import numpy as np
import pytest
import regex as re
import time

from dataclasses import replace

from creative.data.corpus import corpus_fingerprint
from creative.exceptions import (
    CheckpointError, ConfigError, DataError, NumericError
)
from creative.options import to_json
from creative.training.checkpoint import load_checkpoint, save_checkpoint
from creative.training.config import TrainConfig, resolve_config
from creative.training.records import StepLog, append_step_logs, read_step_logs
from creative.training.state import init_state
from creative.training import trainer
from creative.training.trainer import resume, train, train_step

# -----------------------------------------------------------------------------
# Configuration
# -----------------------------------------------------------------------------

# Defaults follow the published hyperparameters
def test_default_config():
    config = resolve_config()
    assert config.learning_rate == 1e-4
    assert config.beta1 == 0.5
    assert config.batch_size == 128
    assert config.epochs == 100
    assert config.variant == "can"

    # Generator and discriminator
    generator, discriminator = config.generator, config.discriminator
    assert generator.noise_dim == 100
    assert generator.output_size == 256
    assert discriminator.body_channels == [32, 64, 128, 256, 512, 512]
    assert discriminator.num_styles == 25
    for network in (generator, discriminator):
        assert network.init_std == 0.02
        assert network.slope == 0.2
        assert (network.kernel, network.stride, network.pad) == (4, 2, 1)

# Values override the preset
def test_resolve_config_preset():
    config = resolve_config("desk", { "epochs": 3, "generator.noise_dim": 16 })
    assert config.epochs == 3
    assert config.batch_size == 64
    assert config.generator.noise_dim == 16
    assert config.generator.output_size == 32

# Zero epochs are rejected
def test_resolve_config_zero_epochs(tiny_values):
    with pytest.raises(ConfigError, match = "epochs") as info:
        resolve_config("desk", { **tiny_values, "epochs": 0 })
    assert info.value.exit_code == 2

# Unknown keys and presets are rejected
def test_resolve_config_unknown():
    with pytest.raises(ConfigError, match = "Unknown training key 'epoch'"):
        resolve_config(None, { "epoch": 3 })
    with pytest.raises(ConfigError, match = "Unknown preset"):
        resolve_config("huge")

# Generator output must match discriminator input
def test_resolve_config_mismatch():
    with pytest.raises(ConfigError, match = "output size"):
        resolve_config("desk", { "discriminator.image_size": 64 })

# -----------------------------------------------------------------------------
# Training step
# -----------------------------------------------------------------------------

# Every layer of both networks takes an optimizer step
def test_train_step(tiny_config, tiny_corpus):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    networks = {
        "generator": state.generator,
        "discriminator": state.discriminator
    }
    before = { network: _values(graph) for network, graph in networks.items() }

    # Execute step
    _, record = train_step(state, tiny_corpus.images[:4], tiny_corpus.labels[:4])
    assert record.is_finite()
    assert 0 < record.real_score < 1
    assert 0 <= record.fake_entropy <= np.log(3) + 1e-9

    # Weights of every layer of each network have moved
    for network, graph in networks.items():
        after = _values(graph)
        weights = [name for name in after if name.endswith(".weight")]
        assert weights, network
        for name in weights:
            assert not np.array_equal(before[network][name], after[name]), name
        for param in graph.named_parameters().values():
            assert param.step_count == 1

# Records carry the time the step finished, which is ignored by comparisons
def test_step_log_timestamp(tiny_config, tiny_corpus, tmp_path):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    started = time.time()
    _, record = train_step(state, tiny_corpus.images[:4], tiny_corpus.labels[:4])
    assert started <= record.timestamp <= time.time()
    assert 0 <= record.wallclock <= record.timestamp - started + 1e-6

    # Timestamps survive the step log, but don't affect equality
    append_step_logs(tmp_path / "steps.jsonl", [record])
    [loaded] = read_step_logs(tmp_path / "steps.jsonl")
    assert loaded.timestamp == record.timestamp
    assert replace(record, timestamp = 0.0, wallclock = 0.0) == record

# Generator update leaves the discriminator untouched
def test_train_step_alternation(tiny_config, tiny_corpus, monkeypatch):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    discriminator = state.discriminator
    updated = {}

    # Capture discriminator right after its own update
    update = trainer._update
    def capture(network, config, record):
        update(network, config, record)
        if network is discriminator:
            updated["values"] = _values(discriminator)
            updated["grads"] = {
                name: param.grad.copy()
                for name, param in discriminator.named_parameters().items()
            }
            updated["buffers"] = {
                name: value.copy()
                for name, value in discriminator.named_buffers().items()
            }

    # Execute step
    monkeypatch.setattr(trainer, "_update", capture)
    train_step(state, tiny_corpus.images[:4], tiny_corpus.labels[:4])

    # Parameters, gradients and running statistics are unchanged
    assert updated["buffers"]
    for name, value in _values(discriminator).items():
        np.testing.assert_array_equal(value, updated["values"][name])
    for name, param in discriminator.named_parameters().items():
        np.testing.assert_array_equal(param.grad, updated["grads"][name])
    for name, value in discriminator.named_buffers().items():
        np.testing.assert_array_equal(value, updated["buffers"][name])

# Runs with and without the ambiguity loss diverge at the generator update
def test_train_step_paired_variants(tiny_values, tiny_corpus):
    states = {}
    for variant in ("can", "sc_can"):
        config = resolve_config("desk", { **tiny_values, "variant": variant })
        states[variant] = init_state(config, corpus_fingerprint(tiny_corpus))
        train_step(
            states[variant], tiny_corpus.images[:4], tiny_corpus.labels[:4]
        )

    # Discriminators took the same update
    can, sc_can = states["can"], states["sc_can"]
    a, b = _values(can.discriminator), _values(sc_can.discriminator)
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])

    # Generators did not
    a, b = _values(can.generator), _values(sc_can.generator)
    assert any(not np.array_equal(a[name], b[name]) for name in a)

# Non-finite losses abort with the offending record
def test_train_step_non_finite(tiny_config, tiny_corpus):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    images = np.array(tiny_corpus.images[:4])
    images[0, 0, 0, 0] = np.nan
    with pytest.raises(NumericError, match = "step 0") as info:
        train_step(state, images, tiny_corpus.labels[:4])
    assert isinstance(info.value.record, StepLog)
    assert info.value.exit_code == 4

# -----------------------------------------------------------------------------
# Training runs
# -----------------------------------------------------------------------------

# Run writes logs, checkpoints and sample grids
def test_train_artifacts(tiny_config, tiny_corpus, tmp_path):
    state, logs = train(tiny_config, tiny_corpus, tmp_path)
    assert len(logs) == 8
    assert (state.epoch, state.batch, state.step) == (2, 0, 8)
    assert [record.step for record in logs] == list(range(8))

    # Artifacts
    for name in (
        "checkpoint_epoch1_step4.ckpt", "checkpoint_epoch2_step8.ckpt",
        "samples_epoch1_step4.png", "final.ckpt", "samples_final.png"
    ):
        assert (tmp_path / name).is_file()
    assert read_step_logs(tmp_path / "steps.jsonl") == logs

# Configured corpus is synthesized when no corpus is given
def test_train_synthesized(tiny_config, tiny_corpus):
    _, a = train(tiny_config)
    _, b = train(tiny_config, tiny_corpus)
    assert a == b

# Identical seeds yield identical records over more than 100 steps
def test_train_determinism(tiny_values, tiny_corpus):
    config = resolve_config("desk", { **tiny_values, "epochs": 26 })
    _, a = train(config, tiny_corpus)
    _, b = train(config, tiny_corpus)
    assert len(a) == 104
    assert a == b

# Different seeds yield different records
def test_train_seeds(tiny_values, tiny_corpus):
    _, a = train(resolve_config("desk", tiny_values), tiny_corpus)
    _, b = train(resolve_config("desk", { **tiny_values, "seed": 1 }), tiny_corpus)
    assert a != b

# Corpus must have as many styles as the discriminator distinguishes
def test_train_num_styles(tiny_values, tiny_corpus):
    config = resolve_config("desk", { **tiny_values, "discriminator.num_styles": 4 })
    with pytest.raises(DataError, match = "3 styles"):
        train(config, tiny_corpus)

# Resumed run reproduces the uninterrupted run bit-exactly
@pytest.mark.parametrize("variant", ["gan", "sc_can", "can"])
def test_resume(variant, tiny_values, tiny_corpus, tmp_path):
    config = resolve_config("desk", { **tiny_values, "variant": variant })
    full, logs = train(config, tiny_corpus, tmp_path / "full")

    # Resume after the first epoch
    path = tmp_path / "full" / "checkpoint_epoch1_step4.ckpt"
    resumed, rest = resume(path, tiny_corpus, tmp_path / "resumed")
    assert rest == logs[4:]
    assert resumed.step == full.step

    # Final parameters are identical
    a = full.generator.named_parameters()
    b = resumed.generator.named_parameters()
    for name in a:
        assert np.array_equal(a[name].value, b[name].value)

# Resume within an epoch, from a periodic checkpoint
def test_resume_mid_epoch(tiny_values, tiny_corpus, tmp_path):
    config = resolve_config("desk", { **tiny_values, "checkpoint_every": 3 })
    _, logs = train(config, tiny_corpus, tmp_path)
    _, rest = resume(tmp_path / "checkpoint_epoch0_step3.ckpt", tiny_corpus)
    assert rest == logs[3:]

# Resume rejects a different corpus
def test_resume_other_corpus(tiny_config, tiny_corpus, tmp_path):
    train(tiny_config, tiny_corpus, tmp_path)
    other = tiny_corpus.subset(np.arange(len(tiny_corpus) - 1))
    with pytest.raises(DataError, match = "differs"):
        resume(tmp_path / "final.ckpt", other)

# -----------------------------------------------------------------------------
# Checkpoints
# -----------------------------------------------------------------------------

# Save, load and save again yields identical bytes
def test_checkpoint_roundtrip(tiny_config, tiny_corpus, tmp_path):
    state, _ = train(tiny_config, tiny_corpus)
    save_checkpoint(state, tmp_path / "a.ckpt")
    loaded = load_checkpoint(tmp_path / "a.ckpt")
    save_checkpoint(loaded, tmp_path / "b.ckpt")
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()

    # Streams and counters are restored
    assert to_json(loaded.config) == to_json(state.config)
    assert loaded.rng.bit_generator.state == state.rng.bit_generator.state
    assert (loaded.epoch, loaded.batch, loaded.step) == (2, 0, 8)

# Truncated checkpoints are rejected
def test_checkpoint_truncated(tiny_config, tiny_corpus, tmp_path):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    path = tmp_path / "state.ckpt"
    save_checkpoint(state, path)
    path.write_bytes(path.read_bytes()[:-100])
    with pytest.raises(CheckpointError, match = "corrupted") as info:
        load_checkpoint(path)
    assert info.value.exit_code == 5

# Files of other formats are rejected
def test_checkpoint_foreign(tmp_path):
    path = tmp_path / "notes.ckpt"
    path.write_bytes(b"just some notes")
    with pytest.raises(CheckpointError, match = "not a checkpoint"):
        load_checkpoint(path)

# Missing checkpoints are rejected
def test_checkpoint_missing(tmp_path):
    with pytest.raises(CheckpointError, match = "Couldn't read"):
        load_checkpoint(tmp_path / "missing.ckpt")

# Loading with an expected configuration names the differing keys
def test_checkpoint_expect(tiny_values, tiny_config, tiny_corpus, tmp_path):
    state = init_state(tiny_config, corpus_fingerprint(tiny_corpus))
    save_checkpoint(state, tmp_path / "state.ckpt")
    load_checkpoint(tmp_path / "state.ckpt", expect = tiny_config)

    # Load with a different variant
    other = resolve_config("desk", { **tiny_values, "variant": "gan" })
    with pytest.raises(CheckpointError, match = "mismatch in: variant"):
        load_checkpoint(tmp_path / "state.ckpt", expect = other)

# -----------------------------------------------------------------------------
# Acceptance
# -----------------------------------------------------------------------------

# Discriminator learns the styles of the synthetic corpus at desk scale
@pytest.mark.slow
def test_desk_discriminator_learns_styles(caplog):
    caplog.set_level(logging.INFO, logger = "creative")
    config = resolve_config("desk", { "variant": "sc_can" })
    assert isinstance(config, TrainConfig)
    train(config)

    # Collect held-out accuracies logged at checkpoints
    accuracies = [
        (float(match["real"]), float(match["style"]))
        for match in re.finditer(
            r"real/fake (?P<real>[\d.]+), style (?P<style>[\d.]+)", caplog.text
        )
    ]
    assert len(accuracies) == 30
    assert any(real >= 0.8 and style >= 0.9 for real, style in accuracies)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Copy parameter values of a network by name
def _values(network):
    return {
        name: param.value.copy()
        for name, param in network.named_parameters().items()
    }
