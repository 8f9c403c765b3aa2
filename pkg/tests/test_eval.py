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

import math
import numpy as np
import pytest

from scipy import stats

from creative.data.corpus import split_dataset
from creative.eval.metrics import (
    classifier_accuracy, generate, mean_ambiguity, mean_style_entropy,
    style_posteriors
)
from creative.eval.probe import ProbeConfig, load_probe, save_probe, train_probe
from creative.eval.report import (
    EvalReport, PairedRuns, PairTest, VariantScores, compare_variants
)
from creative.eval.stats import two_sample_ttest
from creative.exceptions import CheckpointError, DataError
from creative.models.networks import build_discriminator, build_generator
from creative.options import load_config
from creative.training.checkpoint import save_checkpoint
from creative.training.config import resolve_config
from creative.training.trainer import load_dataset, train

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Classifier with fixed posteriors for every image
class FixedClassifier:

    # Initialize classifier with a posterior row
    def __init__(self, row):
        self.row = np.asarray(row, dtype = np.float64)
        self.config = load_config(ProbeConfig, {
            "image_size": 8, "num_styles": len(self.row)
        }, name = "probe")

    # Return the same posteriors for every image
    def forward(self, images, mode = "train"):
        return np.tile(self.row, (len(images), 1))

# -----------------------------------------------------------------------------
# Statistics
# -----------------------------------------------------------------------------

# Welch's t-test matches an independent implementation
def test_ttest_reference():
    rng = np.random.default_rng(42)
    for _ in range(100):
        a = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.integers(2, 50))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.integers(2, 50))
        t, p = two_sample_ttest(a, b)
        expected = stats.ttest_ind(a, b, equal_var = False)
        assert t == pytest.approx(expected.statistic, rel = 1e-9)
        assert p == pytest.approx(expected.pvalue, rel = 1e-9)

# Identical samples don't differ
def test_ttest_identical(rng):
    a = rng.normal(0, 1, 20)
    assert two_sample_ttest(a, a) == (0.0, 1.0)

# Swapping samples negates t and preserves p
def test_ttest_symmetry(rng):
    a, b = rng.normal(0, 1, 20), rng.normal(0.5, 2, 30)
    t, p = two_sample_ttest(a, b)
    u, q = two_sample_ttest(b, a)
    assert t == -u
    assert p == q

# Clearly separated samples
def test_ttest_separated(rng):
    _, p = two_sample_ttest(rng.normal(0, 1, 50), rng.normal(3, 1, 50))
    assert p < 1e-3

# Zero variance in both samples is flagged
def test_ttest_degenerate():
    result = two_sample_ttest([1.0, 1.0, 1.0], [2.0, 2.0])
    assert result.degenerate
    assert math.isnan(result.t)

# Samples need at least two values
def test_ttest_too_small():
    with pytest.raises(DataError, match = "at least 2"):
        two_sample_ttest([1.0], [1.0, 2.0])

# -----------------------------------------------------------------------------
# Metrics
# -----------------------------------------------------------------------------

# Uniform posteriors have maximal entropy
def test_entropy_uniform():
    generator = build_generator(tiny_generator, 0)
    mean, std, values = mean_style_entropy(
        generator, FixedClassifier(np.full(4, 0.25)), 30, 0
    )
    assert mean == pytest.approx(math.log(4))
    assert std == pytest.approx(0, abs = 1e-12)
    assert values.shape == (30,)

# Certain posteriors have zero entropy and a heavy ambiguity penalty
def test_entropy_certain():
    generator = build_generator(tiny_generator, 0)
    classifier = FixedClassifier([0, 1, 0])
    assert mean_style_entropy(generator, classifier, 30, 0)[0] == 0
    assert mean_ambiguity(generator, classifier, 30, 0) < -27

# Entropy is bounded by the logarithm of the number of styles
def test_entropy_bounds():
    generator = build_generator(tiny_generator, 0)
    discriminator = build_discriminator(tiny_discriminator, 1)
    _, _, values = mean_style_entropy(generator, discriminator, 40, 3)
    assert np.all((values >= 0) & (values <= math.log(3) + 1e-12))

# Entropy estimates need at least 30 samples
def test_entropy_too_few_samples():
    generator = build_generator(tiny_generator, 0)
    with pytest.raises(DataError, match = "at least 30"):
        mean_style_entropy(generator, FixedClassifier([0.5, 0.5]), 29, 0)

# Classifier must distinguish as many styles as the corpus has
def test_entropy_num_styles():
    generator = build_generator(tiny_generator, 0)
    with pytest.raises(DataError, match = "distinguishes 2 styles"):
        mean_style_entropy(generator, FixedClassifier([0.5, 0.5]), 30, 0, 3)

# Generation is seeded and batched transparently
def test_generate():
    generator = build_generator(tiny_generator, 0)
    a = generate(generator, 10, 5, batch_size = 3)
    b = generate(generator, 10, 5)
    assert a.shape == (10, 3, 8, 8)
    np.testing.assert_allclose(a, b)

# Posteriors are computed in batches
def test_style_posteriors(tiny_corpus):
    discriminator = build_discriminator(tiny_discriminator, 1)
    a = style_posteriors(discriminator, tiny_corpus.images, batch_size = 5)
    b = style_posteriors(discriminator, tiny_corpus.images)
    assert a.shape == (24, 3)
    np.testing.assert_allclose(a, b)

# Accuracies lie in [0, 1]
def test_classifier_accuracy(tiny_corpus):
    discriminator = build_discriminator(tiny_discriminator, 1)
    generator = build_generator(tiny_generator, 0)
    real_fake, style = classifier_accuracy(discriminator, tiny_corpus, generator)
    assert 0 <= real_fake <= 1
    assert 0 <= style <= 1

# Accuracy requires samples
def test_classifier_accuracy_empty(tiny_corpus):
    discriminator = build_discriminator(tiny_discriminator, 1)
    empty = tiny_corpus.subset(np.arange(0))
    with pytest.raises(DataError, match = "empty"):
        classifier_accuracy(discriminator, empty)

# -----------------------------------------------------------------------------
# Style probe
# -----------------------------------------------------------------------------

# Probe learns the styles of the training images
def test_train_probe(tiny_corpus):
    probe = train_probe(tiny_corpus, probe_config(epochs = 30))
    posteriors = style_posteriors(probe, tiny_corpus.images)
    np.testing.assert_allclose(posteriors.sum(axis = 1), 1)
    accuracy = np.mean(np.argmax(posteriors, axis = 1) == tiny_corpus.labels)
    assert accuracy > 0.5

# Saved probe yields identical posteriors
def test_probe_roundtrip(tiny_corpus, tmp_path):
    probe = train_probe(tiny_corpus, probe_config())
    loaded = load_probe(save_probe(probe, tmp_path / "probe.ckpt"))
    np.testing.assert_array_equal(
        style_posteriors(probe, tiny_corpus.images),
        style_posteriors(loaded, tiny_corpus.images)
    )

# Training checkpoints are not probes
def test_probe_wrong_kind(tiny_config, tiny_corpus, tmp_path):
    state, _ = train(tiny_config, tiny_corpus)
    save_checkpoint(state, tmp_path / "state.ckpt")
    with pytest.raises(CheckpointError, match = "not a probe"):
        load_probe(tmp_path / "state.ckpt")

# Probe must match the corpus
def test_train_probe_num_styles(tiny_corpus):
    config = load_config(ProbeConfig, {
        **probe_values, "num_styles": 4
    }, name = "probe")
    with pytest.raises(DataError, match = "4 styles"):
        train_probe(tiny_corpus, config)

# -----------------------------------------------------------------------------
# Reports
# -----------------------------------------------------------------------------

# Variants are compared pairwise on pooled seeds
def test_compare_variants(tiny_values, tiny_corpus, tmp_path):
    can, _ = train(resolve_config("desk", tiny_values), tiny_corpus)
    gan, _ = train(resolve_config("desk", {
        **tiny_values, "variant": "gan"
    }), tiny_corpus)
    save_checkpoint(gan, tmp_path / "gan.ckpt")

    # Compare variant in memory with variant on disk
    probe = train_probe(tiny_corpus, probe_config())
    _, heldout = split_dataset(tiny_corpus, 0.25, 0)
    report = compare_variants(
        { "can": can, "gan": tmp_path / "gan.ckpt" },
        probe, 30, [0, 1], heldout
    )
    assert list(report.variants) == ["can", "gan"]
    assert [(test.a, test.b) for test in report.tests] == [("can", "gan")]
    for scores in report.variants.values():
        assert 0 <= scores.entropy_mean <= math.log(3) + 1e-12
        assert 0 <= scores.real_score_mean <= 1
        assert 0 <= scores.style_accuracy <= 1
        assert scores.runs == [0]

    # Runs sharing a training seed are paired
    [pair] = report.paired
    assert (pair.a, pair.b, pair.seeds) == ("can", "gan", [0])

    # Comparison is a pure function of its inputs
    again = compare_variants(
        { "gan": tmp_path / "gan.ckpt", "can": can },
        probe, 30, [0, 1], heldout
    )
    assert again.dumps() == report.dumps()

# Runs of two variants are compared seed by seed
def test_compare_variants_paired_runs(tiny_values, tiny_corpus):
    runs = {
        variant: [
            train(resolve_config("desk", {
                **tiny_values, "variant": variant, "seed": seed
            }), tiny_corpus)[0]
            for seed in (1, 0)
        ]
        for variant in ("can", "sc_can")
    }

    # Compare runs
    probe = train_probe(tiny_corpus, probe_config())
    report = compare_variants(runs, probe, 30, [5])
    assert report.variants["can"].runs == [0, 1]
    assert [(test.a, test.b) for test in report.tests] == [("can", "sc_can")]

    # Differences of mean entropy are computed per training seed
    [pair] = report.paired
    assert pair.seeds == [0, 1]
    for seed, delta in zip(pair.seeds, pair.deltas):
        can = next(s for s in runs["can"] if s.config.seed == seed)
        sc_can = next(s for s in runs["sc_can"] if s.config.seed == seed)
        expected = (
            mean_style_entropy(can.generator, probe, 30, 5)[0] -
            mean_style_entropy(sc_can.generator, probe, 30, 5)[0]
        )
        assert delta == pytest.approx(expected, abs = 1e-12)
    assert pair.wins == sum(delta > 0 for delta in pair.deltas)
    assert pair.margin == pytest.approx(np.mean(pair.deltas))

# Checkpoints must be compared as the variant they were trained as
def test_compare_variants_mislabelled(tiny_values, tiny_corpus):
    gan, _ = train(resolve_config("desk", {
        **tiny_values, "variant": "gan"
    }), tiny_corpus)
    probe = train_probe(tiny_corpus, probe_config(epochs = 1))
    with pytest.raises(DataError, match = "compared as 'can' was trained as 'gan'"):
        compare_variants({ "can": gan }, probe, 30, [0])

# Runs of one variant must differ in their training seed
def test_compare_variants_duplicate_runs(tiny_config, tiny_corpus):
    state, _ = train(tiny_config, tiny_corpus)
    probe = train_probe(tiny_corpus, probe_config(epochs = 1))
    with pytest.raises(DataError, match = "share training seeds"):
        compare_variants({ "can": [state, state] }, probe, 30, [0])

# Variants trained on different corpora are not compared
def test_compare_variants_corpora(tiny_values, tiny_corpus):
    a, _ = train(resolve_config("desk", tiny_values), tiny_corpus)
    b, _ = train(resolve_config("desk", {
        **tiny_values, "variant": "gan"
    }), tiny_corpus)
    b.fingerprint = "other"
    probe = train_probe(tiny_corpus, probe_config(epochs = 1))
    with pytest.raises(DataError, match = "different corpora"):
        compare_variants({ "can": a, "gan": b }, probe, 30, [0])

# Report survives serialization
def test_report_roundtrip(tmp_path):
    report = EvalReport(4, 500, [0, 1], {
        "can": VariantScores(1.2, 0.1, -5.1, 0.4, 0.9, 0.95, [0, 1]),
        "sc_can": VariantScores(0.8, 0.2, -9.3)
    }, [PairTest("can", "sc_can", 4.2, 1.5e-5)], [
        PairedRuns("can", "sc_can", [0, 1], [0.3, -0.1])
    ])
    text = report.dumps()
    loaded = EvalReport.loads(text)
    assert loaded.dumps() == text
    assert loaded.variants["can"] == report.variants["can"]
    assert loaded.paired == report.paired
    assert math.isnan(loaded.variants["sc_can"].style_accuracy)

    # Report and table are written next to each other
    txt, csv = report.write(tmp_path / "report.txt")
    assert EvalReport.loads(open(txt).read()).dumps() == text
    table = open(csv).read()
    assert table.startswith("variant,entropy_mean")
    assert "can vs sc_can,2,1," in table

# Malformed reports are rejected
def test_report_malformed():
    with pytest.raises(DataError, match = "Malformed"):
        EvalReport.loads("samples = 500\n")

# -----------------------------------------------------------------------------
# Experiments
# -----------------------------------------------------------------------------

# Ambiguity loss raises style entropy of generated images - runs of both
# variants on the desk preset with five paired training seeds
@pytest.mark.slow
def test_desk_ambiguity_raises_entropy():
    runs = { "can": [], "sc_can": [] }
    for variant, group in runs.items():
        for seed in range(5):
            config = resolve_config("desk", { "variant": variant, "seed": seed })
            group.append(train(config)[0])

    # Train probe on the training split of the same corpus
    dataset = load_dataset(config)
    train_set, _ = split_dataset(dataset, config.holdout, config.split_seed)
    probe = train_probe(train_set, load_config(ProbeConfig, {
        "num_styles": dataset.num_styles, "epochs": 10
    }, name = "probe"))

    # Compare variants on fresh noise
    report = compare_variants(runs, probe, 500, [11])
    [pair] = report.paired
    [test] = report.tests
    assert pair.wins >= 4
    assert pair.margin >= 0.2
    assert test.t > 0 and test.p < 0.05
    assert report.variants["can"].real_score_mean > 0.2

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Create probe configuration for the tiny corpus
def probe_config(**values):
    return load_config(ProbeConfig, { **probe_values, **values }, name = "probe")

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Tiny generator and discriminator for 8x8 images of 3 styles
tiny_generator = {
    "noise_dim": 8,
    "base_spatial": 2,
    "stage_channels": [8, 4],
    "output_size": 8
}
tiny_discriminator = {
    "image_size": 8,
    "body_channels": [4, 8],
    "head_hidden": [16],
    "num_styles": 3
}

# Tiny probe
probe_values = {
    "image_size": 8,
    "num_styles": 3,
    "body_channels": [4, 8],
    "head_hidden": [16],
    "batch_size": 4,
    "epochs": 2
}
