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
import pytest

from mkdocs.config.base import Config
from mkdocs.config.config_options import Type

from creative.cli.settings import ColorFormatter, read_settings
from creative.exceptions import ConfigError
from creative.options import Bounded, load_config, merge, to_dict, to_json

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Configuration with bounded options
class ExampleConfig(Config):
    rate = Bounded(float, lower = 0, lower_open = True, default = 1e-4)
    count = Bounded(int, lower = 1, upper = 10, default = 3)
    name = Type(str, default = "desk")

# -----------------------------------------------------------------------------
# Options
# -----------------------------------------------------------------------------

# Defaults are applied
def test_load_config_defaults():
    config = load_config(ExampleConfig)
    assert (config.rate, config.count, config.name) == (1e-4, 3, "desk")

# Integers and numeric strings are coerced
def test_bounded_coercion():
    config = load_config(ExampleConfig, { "rate": 1, "count": "7" })
    assert config.rate == 1.0 and isinstance(config.rate, float)
    assert config.count == 7
    assert load_config(ExampleConfig, { "rate": "2e-4" }).rate == 2e-4

# Values outside the bounds are rejected
@pytest.mark.parametrize("values", [
    { "rate": 0 }, { "rate": -1.0 }, { "count": 0 }, { "count": 11 },
    { "count": True }, { "count": "many" }
])
def test_bounded_rejects(values):
    with pytest.raises(ConfigError, match = "Invalid value for example key"):
        load_config(ExampleConfig, values, name = "example")

# Unknown keys are rejected
def test_load_config_unknown_key():
    with pytest.raises(ConfigError, match = "Unknown example key 'rates'"):
        load_config(ExampleConfig, { "rates": 1.0 }, name = "example")

# Dotted keys are merged into nested dictionaries
def test_merge():
    base = { "epochs": 30, "generator": { "noise_dim": 100, "output_size": 32 } }
    result = merge(base, {
        "generator.noise_dim": 16, "discriminator": { "num_styles": 3 }
    })
    assert result == {
        "epochs": 30,
        "generator": { "noise_dim": 16, "output_size": 32 },
        "discriminator": { "num_styles": 3 }
    }
    assert base["generator"]["noise_dim"] == 100

# Nested dictionaries are merged, lists replaced
def test_merge_nested():
    base = { "discriminator": { "body_channels": [32, 64], "num_styles": 4 } }
    result = merge(base, { "discriminator": { "body_channels": [8] } })
    assert result["discriminator"] == { "body_channels": [8], "num_styles": 4 }

# Dotted keys can't descend into plain values
def test_merge_conflict():
    with pytest.raises(ConfigError, match = "not a nested configuration"):
        merge({ "epochs": 30 }, { "epochs.count": 3 })

# Configurations serialize canonically
def test_to_json():
    config = load_config(ExampleConfig, { "count": 5 })
    assert to_dict(config) == { "rate": 1e-4, "count": 5, "name": "desk" }
    assert to_json(config) == '{"count":5,"name":"desk","rate":0.0001}'

# -----------------------------------------------------------------------------
# Configuration files
# -----------------------------------------------------------------------------

# Settings are YAML scalars and flow sequences with dotted keys
def test_read_settings(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("\n".join([
        "# Tiny run",
        "variant = sc_can",
        "learning_rate = 2e-4   # doubled",
        "",
        "generator.stage_channels = [8, 4]",
        "augment = true",
        "data ="
    ]))
    assert read_settings(path) == {
        "variant": "sc_can",
        "learning_rate": "2e-4",
        "generator.stage_channels": [8, 4],
        "augment": True,
        "data": None
    }

# Lines that are not settings are rejected with their number
def test_read_settings_invalid_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("epochs = 3\nepochs: 4\n")
    with pytest.raises(ConfigError, match = "Invalid line 2"):
        read_settings(path)

# Malformed values are rejected with their key
def test_read_settings_invalid_value(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("generator.stage_channels = [8, 4\n")
    with pytest.raises(ConfigError, match = "generator.stage_channels"):
        read_settings(path)

# Missing files are configuration errors
def test_read_settings_missing(tmp_path):
    with pytest.raises(ConfigError, match = "Couldn't read"):
        read_settings(tmp_path / "missing.cfg")

# -----------------------------------------------------------------------------
# Logging
# -----------------------------------------------------------------------------

# Records are prefixed with their padded level
def test_color_formatter():
    record = logging.LogRecord(
        "creative.training", logging.WARNING, __file__, 1,
        "Held-out accuracy %s", ("low",), None
    )
    text = ColorFormatter().format(record)
    assert "WARNING " in text
    assert text.endswith(" -  Held-out accuracy low")
