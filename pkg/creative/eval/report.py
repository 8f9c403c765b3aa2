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

import csv
import io
import json
import logging
import numpy as np
import os
import regex

from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields
from typing import Union

from creative.data.corpus import StyleDataset
from creative.exceptions import DataError, StorageError
from creative.losses.signals import Variant
from creative.templates import render
from creative.training.checkpoint import load_checkpoint
from creative.training.state import TrainState

from .metrics import (
    classifier_accuracy, mean_ambiguity, mean_real_score, mean_style_entropy
)
from .probe import StyleProbe
from .stats import two_sample_ttest

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Scores of one variant, pooled over its runs and the noise seeds
@dataclass
class VariantScores:
    entropy_mean: float
    entropy_std: float
    ambiguity_mean: float
    real_score_mean: float = float("nan")
    real_fake_accuracy: float = float("nan")
    style_accuracy: float = float("nan")

    # Training seeds of the runs
    runs: list[int] = field(default_factory = list)

# Pooled comparison of style entropy
@dataclass
class PairTest:
    a: str
    b: str
    t: float
    p: float

# Comparison of mean style entropy between runs sharing a training seed
@dataclass
class PairedRuns:
    a: str
    b: str
    seeds: list[int]
    deltas: list[float]

    # Number of pairs in which the first variant has the larger entropy
    @property
    def wins(self) -> int:
        return sum(delta > 0 for delta in self.deltas)

    # Mean entropy margin of the first variant in nats
    @property
    def margin(self) -> float:
        return float(np.mean(self.deltas))

# Evaluation report
@dataclass
class EvalReport:
    num_styles: int
    samples: int
    seeds: list[int]
    variants: dict[str, VariantScores] = field(default_factory = dict)
    tests: list[PairTest] = field(default_factory = list)
    paired: list[PairedRuns] = field(default_factory = list)

    # Serialize as key = value records - values are JSON, which preserves
    # floats exactly, including undefined p-values
    def dumps(self) -> str:
        records = [
            ("num_styles", self.num_styles),
            ("samples", self.samples),
            ("seeds", self.seeds)
        ]

        # Add scores and tests
        for name, scores in self.variants.items():
            for key, value in asdict(scores).items():
                records.append((f"variant.{name}.{key}", value))
        for test in self.tests:
            records.append((f"test.{test.a}.{test.b}.t", test.t))
            records.append((f"test.{test.a}.{test.b}.p", test.p))
        for pair in self.paired:
            records.append((f"paired.{pair.a}.{pair.b}.seeds", pair.seeds))
            records.append((f"paired.{pair.a}.{pair.b}.deltas", pair.deltas))

        # Render document
        return render("report.txt.j2", records = [
            (key, json.dumps(value)) for key, value in records
        ])

    # Parse key = value records
    @classmethod
    def loads(cls, text: str) -> EvalReport:
        values = {}
        for line in text.splitlines():
            match = RECORD_RE.match(line)
            if match:
                values[match.group("key")] = json.loads(match.group("value"))

        # Collect scores, tests and paired runs by key
        variants, tests, paired = {}, {}, {}
        try:
            for key, value in values.items():
                kind, *path = key.split(".")
                if kind == "variant":
                    name, metric = path
                    variants.setdefault(name, {})[metric] = value
                elif kind == "test":
                    a, b, metric = path
                    tests.setdefault((a, b), {})[metric] = value
                elif kind == "paired":
                    a, b, metric = path
                    paired.setdefault((a, b), {})[metric] = value

            # Create report
            report = cls(
                values["num_styles"], values["samples"], values["seeds"],
                { name: VariantScores(**scores) for name, scores in variants.items() },
                [PairTest(a, b, **test) for (a, b), test in tests.items()],
                [PairedRuns(a, b, **pair) for (a, b), pair in paired.items()]
            )

        # Report malformed documents
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Malformed evaluation report: {e}")

        # Return report
        return report

    # Render as comma-separated table, one row per variant and comparison
    def table(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator = "\n")
        columns = [item.name for item in fields(VariantScores)]

        # Write scores
        writer.writerow(["variant", *columns])
        for name, scores in self.variants.items():
            row = asdict(scores)
            row["runs"] = " ".join(str(seed) for seed in scores.runs)
            writer.writerow([name, *(row[key] for key in columns)])

        # Write tests
        writer.writerow([])
        writer.writerow(["comparison", "t", "p"])
        for test in self.tests:
            writer.writerow([f"{test.a} vs {test.b}", test.t, test.p])

        # Write paired runs
        if self.paired:
            writer.writerow([])
            writer.writerow(["paired comparison", "pairs", "wins", "margin"])
            for pair in self.paired:
                writer.writerow([
                    f"{pair.a} vs {pair.b}", len(pair.deltas),
                    pair.wins, pair.margin
                ])

        # Return table
        return buffer.getvalue()

    # Write report and table next to each other
    def write(self, path: str | os.PathLike) -> tuple[str, str]:
        base, _ = os.path.splitext(path)
        try:
            with open(f"{base}.txt", "w", encoding = "utf-8") as f:
                f.write(self.dumps())
            with open(f"{base}.csv", "w", encoding = "utf-8") as f:
                f.write(self.table())

        # Surface failing writes as storage errors
        except OSError as e:
            raise StorageError(f"Couldn't write report '{path}': {e}")

        # Return paths
        return f"{base}.txt", f"{base}.csv"

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Compare trained variants - every variant is given one checkpoint or the
# checkpoints of several runs. Style entropies are pooled over runs and noise
# seeds and compared pairwise, runs of two variants sharing a training seed
# are compared pair by pair, and accuracies are averaged over the runs if a
# held-out split is given
def compare_variants(
    checkpoints: Mapping[str, Checkpoint | Sequence[Checkpoint]],
    probe: StyleProbe, n: int, seeds: Sequence[int],
    heldout: StyleDataset | None = None
) -> EvalReport:
    if not checkpoints:
        raise DataError("Nothing to compare")
    if not seeds:
        raise DataError("At least one seed is required")

    # Load runs of every variant
    runs = {}
    for name, value in checkpoints.items():
        variant = Variant.parse(name)
        runs[variant.value] = _load_runs(variant, value)

    # Ensure all variants were trained on the same corpus
    states = [state for group in runs.values() for state in group]
    fingerprints = set(state.fingerprint for state in states)
    if len(fingerprints) > 1:
        raise DataError(
            f"Checkpoints of {', '.join(runs)} were trained on different corpora"
        )

    # Ensure probe and networks agree on the number of styles
    num_styles = probe.config.num_styles
    for name, group in runs.items():
        for state in group:
            if state.config.discriminator.num_styles != num_styles:
                raise DataError(
                    f"Probe distinguishes {num_styles} styles, but variant "
                    f"'{name}' was trained on "
                    f"{state.config.discriminator.num_styles}"
                )

    # Score variants in a stable order
    report = EvalReport(num_styles, n, list(seeds))
    entropies, run_means = {}, {}
    for variant in order:
        if variant not in runs:
            continue

        # Compute entropies, ambiguity and real/fake scores of every run
        values, ambiguity, real, accuracies = [], [], [], []
        run_means[variant] = {}
        for state in runs[variant]:
            generator = state.generator
            run = []
            for seed in seeds:
                run.extend(mean_style_entropy(generator, probe, n, seed)[2])
                ambiguity.append(mean_ambiguity(generator, probe, n, seed))
                real.append(mean_real_score(
                    state.discriminator, generator, n, seed
                ))
            run_means[variant][state.config.seed] = float(np.mean(run))
            values.extend(run)

            # Compute accuracies of the run's discriminator
            if heldout is not None:
                accuracies.append(classifier_accuracy(
                    state.discriminator, heldout, generator, seeds[0]
                ))

        # Compute scores
        entropies[variant] = values
        scores = VariantScores(
            entropy_mean = float(np.mean(values)),
            entropy_std = float(np.std(values)),
            ambiguity_mean = float(np.mean(ambiguity)),
            real_score_mean = float(np.mean(real)),
            runs = list(run_means[variant])
        )
        if accuracies:
            scores.real_fake_accuracy, scores.style_accuracy = (
                float(value) for value in np.mean(accuracies, axis = 0)
            )

        # Add scores
        report.variants[variant] = scores
        log.info(
            f"Variant '{variant}': entropy {scores.entropy_mean:.4f} nats "
            f"(std {scores.entropy_std:.4f}) over {len(scores.runs)} run(s)"
        )

    # Compare entropies pairwise on pooled samples, and run by run
    for a, b in pairs:
        if a in entropies and b in entropies:
            t, p = two_sample_ttest(entropies[a], entropies[b])
            report.tests.append(PairTest(a, b, t, p))
            log.info(f"Entropy of '{a}' vs '{b}': t = {t:.4f}, p = {p:.4g}")

            # Pair runs by training seed
            shared = sorted(set(run_means[a]) & set(run_means[b]))
            if shared:
                pair = PairedRuns(a, b, shared, [
                    run_means[a][seed] - run_means[b][seed] for seed in shared
                ])
                report.paired.append(pair)
                log.info(
                    f"Entropy of '{a}' exceeds '{b}' in {pair.wins} of "
                    f"{len(shared)} paired runs, margin {pair.margin:.4f} nats"
                )

    # Return report
    return report

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Load the runs of a variant, ordered by training seed
def _load_runs(variant: Variant, value) -> list[TrainState]:
    if isinstance(value, (str, os.PathLike, TrainState)):
        value = [value]
    states = [
        item if isinstance(item, TrainState) else load_checkpoint(item)
        for item in value
    ]
    if not states:
        raise DataError(f"No checkpoints given for variant '{variant.value}'")

    # Ensure every run was trained with the variant it is compared as
    for state in states:
        if state.variant is not variant:
            raise DataError(
                f"Checkpoint compared as '{variant.value}' was trained "
                f"as '{state.variant.value}'"
            )

    # Ensure runs of a variant have distinct training seeds
    training = [state.config.seed for state in states]
    if len(set(training)) != len(training):
        raise DataError(
            f"Runs of variant '{variant.value}' share training seeds: "
            f"{sorted(training)}"
        )

    # Return runs in a stable order
    return sorted(states, key = lambda state: state.config.seed)

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Checkpoint given by path or as a loaded training state
Checkpoint = Union[str, os.PathLike, TrainState]

# Variants in report order, and the pairs whose entropies are compared
order = ("can", "sc_can", "gan")
pairs = (("can", "sc_can"), ("can", "gan"), ("sc_can", "gan"))

# Record of a report document
RECORD_RE = regex.compile(r"^(?P<key>[\w.]+)\s*=\s*(?P<value>.+?)\s*$")

# Set up logging
log = logging.getLogger("creative.eval")
