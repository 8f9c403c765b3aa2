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

from collections.abc import Mapping
from typing import TYPE_CHECKING

from creative.exceptions import DataError
from creative.templates import render

if TYPE_CHECKING:
    from .corpus import StyleDataset

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Render manifest as a table of styles and image counts with a total row
def render_manifest(source: StyleDataset | Mapping[str, int]) -> str:
    manifest = source if isinstance(source, Mapping) else source.manifest
    if not manifest:
        raise DataError("Cannot render manifest without styles")

    # Render table, sizing the style column to the longest name
    rows = list(manifest.items())
    return render("manifest.txt.j2",
        rows = rows,
        total = sum(count for _, count in rows),
        width = max(len("Style"), *(len(name) for name, _ in rows))
    )
