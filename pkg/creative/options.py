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

import json
import logging

from collections.abc import Mapping
from mkdocs.config.base import Config, ValidationError
from mkdocs.config.config_options import Type
from typing import TypeVar

from .exceptions import ConfigError

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Bounded number option
class Bounded(Type):

    # Initialize option with optional lower and upper bounds - open bounds
    # exclude the bound itself, e.g. a learning rate must be strictly positive
    def __init__(
        self, type_: type, *,
        lower: float | None = None, upper: float | None = None,
        lower_open: bool = False, upper_open: bool = False, **kwargs
    ):
        super().__init__(type_, **kwargs)
        self.lower, self.lower_open = lower, lower_open
        self.upper, self.upper_open = upper, upper_open

    # Coerce integers and numeric strings before checking the type, as values
    # from configuration files and flags are not always of the exact type
    def pre_validation(self, config: Config, key_name: str):
        value = config.get(key_name)
        if value is None or isinstance(value, bool):
            return

        # Integers are valid floats
        if self._type is float and isinstance(value, int):
            config[key_name] = float(value)

        # Strings like "1e-4" are not resolved to numbers by YAML 1.1
        elif isinstance(value, str):
            try:
                config[key_name] = self._type(value)
            except ValueError:
                pass

    # Ensure the value lies inside the bounds
    def run_validation(self, value):
        value = super().run_validation(value)
        if isinstance(value, bool):
            raise ValidationError(
                f"Expected type: {self._type} but received: {type(value)}"
            )

        # Check lower bound
        if self.lower is not None:
            if value < self.lower or (self.lower_open and value == self.lower):
                relation = ">" if self.lower_open else ">="
                raise ValidationError(
                    f"Expected a value {relation} {self.lower}, "
                    f"but received: {value}"
                )

        # Check upper bound
        if self.upper is not None:
            if value > self.upper or (self.upper_open and value == self.upper):
                relation = "<" if self.upper_open else "<="
                raise ValidationError(
                    f"Expected a value {relation} {self.upper}, "
                    f"but received: {value}"
                )

        # Return validated value
        return value

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Load and validate configuration - unknown keys and validation errors are
# raised as configuration errors naming the key, warnings are logged
def load_config(
    schema: type[SomeConfig], values: Mapping | None = None, *,
    name: str = "configuration"
) -> SomeConfig:
    config = schema()
    values = to_dict(values or {})

    # Reject unknown keys early - MkDocs only warns about them
    known = set(key for key, _ in schema._schema)
    for key in values:
        if key not in known:
            raise ConfigError(f"Unknown {name} key '{key}'")

    # Load and validate configuration
    config.load_dict(values)
    errors, warnings = config.validate()
    for key, warning in warnings:
        if "Unrecognised configuration name" in str(warning):
            raise ConfigError(f"Invalid {name} key '{key}': {warning}")
        log.warning(f"Configuration key '{key}': {warning}")

    # Raise on first error
    for key, error in errors:
        raise ConfigError(f"Invalid value for {name} key '{key}': {error}")

    # Return validated configuration
    return config

# Convert configuration into plain, JSON-serializable data
def to_dict(config: Mapping) -> dict:
    return { key: _plain(value) for key, value in config.items() }

# Serialize configuration into canonical JSON
def to_json(config: Mapping) -> str:
    return json.dumps(to_dict(config), sort_keys = True, separators = (",", ":"))

# Merge dotted keys into nested dictionaries, e.g. `generator.noise_dim`
def merge(base: Mapping, patch: Mapping) -> dict:
    result = to_dict(base)
    for key, value in patch.items():
        *path, name = key.split(".")

        # Descend into nested dictionaries, creating them if necessary
        node = result
        for part in path:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"Key '{part}' is not a nested configuration")

        # Merge nested dictionaries, replace everything else
        if isinstance(value, Mapping) and isinstance(node.get(name), dict):
            node[name] = merge(node[name], value)
        else:
            node[name] = _plain(value)

    # Return merged dictionary
    return result

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Convert a configuration value into plain data
def _plain(value):
    if isinstance(value, Mapping):
        return to_dict(value)
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Type variable for configuration schemas
SomeConfig = TypeVar("SomeConfig", bound = Config)

# Set up logging
log = logging.getLogger("creative.options")
