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

from typing import Any

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Base exception - all errors are click exceptions carrying their exit code,
# and are shown as a single line starting with the error class
class CreativeException(click.ClickException):
    exit_code = 1

    # Print error class and diagnostic on a single line
    def show(self, file = None):
        message = " ".join(self.format_message().split())
        click.echo(f"{type(self).__name__}: {message}", file = file, err = True)

# -----------------------------------------------------------------------------

# Invalid configuration or flag values
class ConfigError(CreativeException):
    exit_code = 2

# Unreadable or inconsistent corpus
class DataError(CreativeException):
    exit_code = 3

# Tensor shapes that don't line up
class ShapeError(DataError):
    pass

# Non-finite gradients or losses
class NumericError(CreativeException):
    exit_code = 4

    # Initialize error with the record of the offending step, if any
    def __init__(self, message: str, record: Any = None):
        super().__init__(message)
        self.record = record

# Failed reads or writes
class StorageError(CreativeException):
    exit_code = 5

# Corrupted, truncated or mismatching checkpoint
class CheckpointError(StorageError):
    pass
