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

from functools import cache
from jinja2 import Environment, PackageLoader, StrictUndefined

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Render text template with the given context
def render(name: str, **context) -> str:
    return _environment().get_template(name).render(**context)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Create template environment once - block tags don't emit newlines, so the
# templates read like the documents they produce
@cache
def _environment() -> Environment:
    return Environment(
        loader = PackageLoader("creative", "templates"),
        undefined = StrictUndefined,
        keep_trailing_newline = True,
        trim_blocks = True,
        lstrip_blocks = True,
        autoescape = False
    )
