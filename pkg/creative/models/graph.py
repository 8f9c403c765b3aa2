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

import numpy as np

from collections.abc import Iterable

from creative.kernel.layers import Layer, LayerSpec, build_layer
from creative.kernel.optim import Parameter, zero_grad
from creative.kernel.tensor import Tensor, resolve_dtype

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Ordered stack of layers with forward and backward evaluation - the graph
# caches activations during forward, so a backward must follow a forward on
# the same input, and a graph must not be shared between threads
class NetworkGraph:

    # Initialize graph, drawing weights from the given stream in layer order
    def __init__(
        self, specs: Iterable[LayerSpec], rng: np.random.Generator,
        precision: str = "float64"
    ):
        self.dtype = resolve_dtype(precision)
        self.layers: list[Layer] = [
            build_layer(spec, rng, precision) for spec in specs
        ]

    # Layer specifications
    @property
    def specs(self) -> list[LayerSpec]:
        return [layer.spec for layer in self.layers]

    # Evaluate layers in order
    def forward(self, input: Tensor, mode: str = "train") -> Tensor:
        output = np.asarray(input, dtype = self.dtype)
        for layer in self.layers:
            output = layer.forward(output, mode)

        # Return output
        return output

    # Propagate gradient in reverse order, returning the input gradient
    def backward(self, grad: Tensor, param_grads: bool = True) -> Tensor:
        grad = np.asarray(grad, dtype = self.dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad, param_grads)

        # Return input gradient
        return grad

    # -------------------------------------------------------------------------

    # Parameters by stable name, e.g. `03.conv2d.weight`
    def named_parameters(self) -> dict[str, Parameter]:
        return {
            f"{_key(index, layer)}.{name}": param
            for index, layer in enumerate(self.layers)
            for name, param in layer.parameters.items()
        }

    # Buffers by stable name, e.g. `04.batchnorm2d.running_mean`
    def named_buffers(self) -> dict[str, Tensor]:
        return {
            f"{_key(index, layer)}.{name}": value
            for index, layer in enumerate(self.layers)
            for name, value in layer.buffers.items()
        }

    # Replace buffer by name
    def set_buffer(self, name: str, value: Tensor):
        index, _, key = name.split(".")
        layer = self.layers[int(index)]
        if key not in layer.buffers:
            raise KeyError(name)

        # Copy value into buffer of matching shape and precision
        layer.buffers[key] = np.array(value, dtype = self.dtype).reshape(
            layer.buffers[key].shape
        )

    # Clear accumulated gradients of all parameters
    def zero_grad(self):
        for param in self.named_parameters().values():
            zero_grad(param)

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Count trainable scalars of a graph
def count_parameters(graph: NetworkGraph) -> int:
    return sum(
        param.size for param in graph.named_parameters().values()
    )

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Compute stable key of a layer
def _key(index: int, layer: Layer):
    return f"{index:02d}.{layer.spec.kind}"
