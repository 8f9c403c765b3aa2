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

import hashlib
import json
import logging
import numpy as np
import os
import struct

from collections.abc import Mapping

from creative.exceptions import CheckpointError
from creative.kernel.tensor import Tensor
from creative.models.networks import build_discriminator, build_generator
from creative.options import load_config, to_dict, to_json

from .config import TrainConfig, check_config
from .state import TrainState

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Save training state, including optimizer state, buffers and streams
def save_checkpoint(state: TrainState, path: str | os.PathLike) -> str:
    meta = {
        "config": to_dict(state.config),
        "fingerprint": state.fingerprint,
        "epoch": state.epoch,
        "batch": state.batch,
        "step": state.step,
        "rng": state.rng.bit_generator.state,
        "step_counts": {}
    }

    # Collect parameters, optimizer state and buffers of both networks
    arrays: dict[str, Tensor] = {}
    for prefix, network in _networks(state).items():
        for name, param in network.named_parameters().items():
            arrays[f"{prefix}/value/{name}"] = param.value
            arrays[f"{prefix}/adam_m/{name}"] = param.adam_m
            arrays[f"{prefix}/adam_v/{name}"] = param.adam_v
            meta["step_counts"][f"{prefix}/{name}"] = param.step_count
        for name, value in network.named_buffers().items():
            arrays[f"{prefix}/buffer/{name}"] = value

    # Add evaluation noise panel and write container
    arrays["panel"] = state.panel
    write_container(path, "train", meta, arrays)
    log.debug(f"Saved checkpoint '{path}' at step {state.step}")
    return str(path)

# Load training state - if a configuration is given, the checkpoint must
# have been written with exactly that configuration
def load_checkpoint(
    path: str | os.PathLike, expect: TrainConfig | None = None
) -> TrainState:
    meta, arrays = read_container(path, "train")
    config = load_config(TrainConfig, meta["config"], name = "checkpoint")
    check_config(config)

    # Ensure configuration matches
    if expect is not None and to_json(expect) != to_json(config):
        actual, wanted = to_dict(config), to_dict(expect)
        keys = [
            key for key in sorted(set(actual) | set(wanted))
            if actual.get(key) != wanted.get(key)
        ]
        raise CheckpointError(
            f"Checkpoint '{path}' was written with a different configuration, "
            f"mismatch in: {', '.join(keys)}"
        )

    # Rebuild networks and restore their state
    state = TrainState(
        config,
        build_generator(config.generator, config.seed),
        build_discriminator(config.discriminator, config.seed + 1),
        np.random.default_rng(),
        _array(arrays, "panel", None, config.generator.precision),
        meta["fingerprint"],
        meta["epoch"], meta["batch"], meta["step"]
    )
    for prefix, network in _networks(state).items():
        for name, param in network.named_parameters().items():
            shape, dtype = param.shape, param.value.dtype
            for slot in ("value", "adam_m", "adam_v"):
                setattr(param, slot, _array(
                    arrays, f"{prefix}/{slot}/{name}", shape, dtype
                ))

            # Gradients are not part of the state
            param.grad = np.zeros_like(param.value)
            param.step_count = int(meta["step_counts"][f"{prefix}/{name}"])

        # Restore buffers
        for name, value in network.named_buffers().items():
            network.set_buffer(name, _array(
                arrays, f"{prefix}/buffer/{name}", value.shape, value.dtype
            ))

    # Restore noise stream and return state
    try:
        state.rng.bit_generator.state = meta["rng"]
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"Invalid stream state in '{path}': {e}")
    return state

# -----------------------------------------------------------------------------

# Write versioned container - a JSON header, named little-endian float64
# arrays with shape headers, and a SHA-256 checksum of everything before
def write_container(
    path: str | os.PathLike, kind: str,
    meta: Mapping, arrays: Mapping[str, Tensor]
):
    header = json.dumps(
        { **meta, "kind": kind }, sort_keys = True, separators = (",", ":")
    ).encode("utf-8")

    # Write magic, version and header
    data = bytearray(MAGIC)
    data += struct.pack("<I", VERSION)
    data += struct.pack("<Q", len(header)) + header

    # Write arrays in order
    data += struct.pack("<I", len(arrays))
    for name, value in arrays.items():
        key = name.encode("utf-8")
        value = np.asarray(value)
        data += struct.pack("<H", len(key)) + key
        data += struct.pack("<B", value.ndim)
        data += struct.pack(f"<{value.ndim}Q", *value.shape)
        data += value.astype("<f8").tobytes()

    # Append checksum
    data += hashlib.sha256(data).digest()

    # Write atomically, so an interrupted write never clobbers a checkpoint
    temp = f"{path}.tmp"
    try:
        with open(temp, "wb") as f:
            f.write(data)
        os.replace(temp, path)

    # Surface failing writes as checkpoint errors
    except OSError as e:
        raise CheckpointError(f"Couldn't write checkpoint '{path}': {e}")

# Read versioned container, verifying magic, version, kind and checksum
def read_container(
    path: str | os.PathLike, kind: str
) -> tuple[dict, dict[str, Tensor]]:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f"Couldn't read checkpoint '{path}': {e}")

    # Check magic and version
    if len(data) < len(MAGIC) + 4 or not data.startswith(MAGIC):
        raise CheckpointError(f"File '{path}' is not a checkpoint")
    version, = struct.unpack_from("<I", data, len(MAGIC))
    if version != VERSION:
        raise CheckpointError(
            f"Checkpoint '{path}' has format version {version}, "
            f"but only version {VERSION} is supported"
        )

    # Check checksum
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if len(data) < len(MAGIC) + 4 + DIGEST_SIZE or (
        hashlib.sha256(body).digest() != digest
    ):
        raise CheckpointError(
            f"Checkpoint '{path}' is corrupted or truncated (checksum mismatch)"
        )

    # Parse header and arrays
    try:
        meta, arrays = _parse(body, len(MAGIC) + 4)
    except (struct.error, ValueError, KeyError) as e:
        raise CheckpointError(f"Checkpoint '{path}' is corrupted: {e}")

    # Ensure kind matches
    if meta.pop("kind", None) != kind:
        raise CheckpointError(f"Checkpoint '{path}' is not a {kind} checkpoint")
    return meta, arrays

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Parse header and arrays starting at the given offset
def _parse(data: bytes, offset: int):
    size, = struct.unpack_from("<Q", data, offset)
    offset += 8
    meta = json.loads(data[offset:offset + size].decode("utf-8"))
    offset += size

    # Parse arrays
    count, = struct.unpack_from("<I", data, offset)
    offset += 4
    arrays = {}
    for _ in range(count):
        length, = struct.unpack_from("<H", data, offset)
        offset += 2
        name = data[offset:offset + length].decode("utf-8")
        offset += length

        # Parse shape
        ndim, = struct.unpack_from("<B", data, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}Q", data, offset)
        offset += 8 * ndim

        # Parse values
        count = int(np.prod(shape, dtype = np.int64))
        if offset + 8 * count > len(data):
            raise ValueError(f"array '{name}' exceeds file size")
        arrays[name] = np.frombuffer(
            data, dtype = "<f8", count = count, offset = offset
        ).reshape(shape)
        offset += 8 * count

    # Ensure there is no trailing data
    if offset != len(data):
        raise ValueError(f"{len(data) - offset} trailing bytes")
    return meta, arrays

# Retrieve array of the expected shape in the given precision
def _array(arrays: dict, name: str, shape, dtype) -> Tensor:
    if name not in arrays:
        raise CheckpointError(f"Checkpoint lacks array '{name}'")

    # Ensure shape matches
    value = arrays[name]
    if shape is not None and tuple(value.shape) != tuple(shape):
        raise CheckpointError(
            f"Array '{name}' has shape {value.shape}, expected {tuple(shape)}"
        )
    return np.array(value, dtype = dtype)

# Networks of a training state by prefix
def _networks(state: TrainState):
    return { "generator": state.generator, "discriminator": state.discriminator }

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Magic bytes, format version and checksum size
MAGIC = b"CREATIVE"
VERSION = 1
DIGEST_SIZE = 32

# Set up logging
log = logging.getLogger("creative.training")
