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
import os
import regex
import yaml

from colorama import Fore, Style

from creative.exceptions import ConfigError

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Log formatter printing a colored level prefix
class ColorFormatter(logging.Formatter):

    # Format record as `LEVEL    -  message`
    def format(self, record: logging.LogRecord) -> str:
        color = colors.get(record.levelno, "")
        prefix = f"{record.levelname:<8}"
        return f"{color}{prefix}{Style.RESET_ALL} -  {record.getMessage()}"

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Read configuration file of `key = value` lines - keys may be dotted to
# address nested settings, values are YAML scalars or flow sequences, and
# lines starting with `#` are comments
def read_settings(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding = "utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Couldn't read configuration file '{path}': {e}")

    # Parse line by line
    settings = {}
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue

        # Ensure line is a setting
        match = SETTING_RE.match(line)
        if not match:
            raise ConfigError(
                f"Invalid line {number} in configuration file '{path}': "
                f"expected 'key = value'"
            )

        # Coerce value
        key, value = match.group("key"), match.group("value")
        try:
            settings[key] = yaml.safe_load(value) if value else None
        except yaml.YAMLError as e:
            raise ConfigError(
                f"Invalid value for key '{key}' in configuration file "
                f"'{path}': {e}"
            )

    # Return settings
    return settings

# Install colored log handler on the package logger
def setup_logging(level: int = logging.INFO):
    handler = logging.StreamHandler()
    handler.setFormatter(ColorFormatter())

    # Replace previously installed handlers
    logger = logging.getLogger("creative")
    for previous in list(logger.handlers):
        logger.removeHandler(previous)
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Setting in a configuration file, ignoring trailing comments
SETTING_RE = regex.compile(
    r"^\s*(?P<key>[A-Za-z_][\w]*(?:\.[A-Za-z_][\w]*)*)\s*=\s*"
    r"(?P<value>.*?)\s*(?:\s#.*)?$"
)

# Colors of log levels
colors = {
    logging.DEBUG:   Fore.LIGHTBLACK_EX,
    logging.INFO:    Fore.CYAN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR:   Fore.RED
}
