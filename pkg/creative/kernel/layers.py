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

from dataclasses import dataclass

from creative.exceptions import ConfigError, ShapeError

from . import functional as F
from .optim import Parameter
from .tensor import Tensor, resolve_dtype

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Layer specification
@dataclass(frozen = True)
class LayerSpec:
    kind: str

    # Channels or features going in and out of parametric layers
    in_features: int | None = None
    out_features: int | None = None

    # Convolution geometry
    kernel: int = 4
    stride: int = 2
    pad: int = 1

    # Activation and normalization settings
    slope: float = 0.2
    epsilon: float = 1e-5
    momentum: float = 0.1

    # Per-sample target shape of reshape layers
    shape: tuple[int, ...] | None = None

    # Standard deviation of initial weights
    init_std: float = 0.02

    # Ensure the layer settings are consistent
    def __post_init__(self):
        if self.kind not in layers:
            raise ConfigError(
                f"Unknown layer kind '{self.kind}', "
                f"expected one of: {', '.join(layers)}"
            )

        # Check convolution geometry
        if self.stride < 1:
            raise ConfigError(f"Expected stride >= 1, but got {self.stride}")
        if self.pad < 0:
            raise ConfigError(f"Expected padding >= 0, but got {self.pad}")
        if self.kernel < 1:
            raise ConfigError(f"Expected kernel >= 1, but got {self.kernel}")

        # Check activation slope
        if not 0 < self.slope < 1:
            raise ConfigError(f"Expected slope in (0, 1), but got {self.slope}")

        # Check extents of parametric layers
        if self.kind in parametric:
            for name in ("in_features", "out_features"):
                value = getattr(self, name)
                if self.kind == "batchnorm2d" and name == "out_features":
                    continue
                if value is None or value < 1:
                    raise ConfigError(
                        f"Layer '{self.kind}' requires {name} >= 1, "
                        f"but got {value}"
                    )

        # Check reshape target
        if self.kind == "reshape" and not self.shape:
            raise ConfigError("Layer 'reshape' requires a target shape")

# -----------------------------------------------------------------------------

# Layer specification bound to its parameters, buffers and forward cache
class Layer:
    parameter_names: tuple[str, ...] = ()

    # Initialize layer
    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self.parameters: dict[str, Parameter] = {}
        self.buffers: dict[str, Tensor] = {}
        self._cache = None

    # Compute output and remember what backward needs
    def forward(self, input: Tensor, mode: str = "train") -> Tensor:
        raise NotImplementedError

    # Propagate gradient, accumulating parameter gradients if requested
    def backward(self, grad: Tensor, param_grads: bool = True) -> Tensor:
        raise NotImplementedError

    # -------------------------------------------------------------------------

    # Retrieve and clear forward cache - each backward consumes one forward
    def _consume(self):
        if self._cache is None:
            raise ShapeError(
                f"Backward through '{self.spec.kind}' layer without "
                f"a preceding forward"
            )

        # Clear and return cache
        cache, self._cache = self._cache, None
        return cache

    # Accumulate parameter gradients
    def _accumulate(self, *grads: Tensor):
        for name, grad in zip(self.parameter_names, grads):
            self.parameters[name].grad += grad

# -----------------------------------------------------------------------------

# Affine layer
class Dense(Layer):
    parameter_names = ("weight", "bias")

    def forward(self, input, mode = "train"):
        self._cache = input
        weight, bias = self.parameters["weight"], self.parameters["bias"]
        return F.dense(input, weight.value, bias.value)

    def backward(self, grad, param_grads = True):
        input = self._consume()
        grad_input, grad_weight, grad_bias = F.dense_backward(
            grad, input, self.parameters["weight"].value
        )
        if param_grads:
            self._accumulate(grad_weight, grad_bias)
        return grad_input

# Strided convolution
class Conv2d(Layer):
    parameter_names = ("weight", "bias")

    def forward(self, input, mode = "train"):
        self._cache = input
        weight, bias = self.parameters["weight"], self.parameters["bias"]
        return F.conv2d(
            input, weight.value, bias.value, self.spec.stride, self.spec.pad
        )

    def backward(self, grad, param_grads = True):
        input = self._consume()
        grad_input, grad_weight, grad_bias = F.conv2d_backward(
            grad, input, self.parameters["weight"].value,
            self.spec.stride, self.spec.pad
        )
        if param_grads:
            self._accumulate(grad_weight, grad_bias)
        return grad_input

# Fractionally-strided convolution
class ConvTranspose2d(Layer):
    parameter_names = ("weight", "bias")

    def forward(self, input, mode = "train"):
        self._cache = input
        weight, bias = self.parameters["weight"], self.parameters["bias"]
        return F.conv_transpose2d(
            input, weight.value, bias.value, self.spec.stride, self.spec.pad
        )

    def backward(self, grad, param_grads = True):
        input = self._consume()
        grad_input, grad_weight, grad_bias = F.conv_transpose2d_backward(
            grad, input, self.parameters["weight"].value,
            self.spec.stride, self.spec.pad
        )
        if param_grads:
            self._accumulate(grad_weight, grad_bias)
        return grad_input

# Batch normalization - mode "train" uses batch statistics and updates the
# running statistics, "frozen" uses batch statistics without updating them,
# and "infer" uses the running statistics
class BatchNorm2d(Layer):
    parameter_names = ("gamma", "beta")

    def forward(self, input, mode = "train"):
        if mode not in modes:
            raise ShapeError(f"Unknown mode '{mode}'")

        # Normalize input
        output, cache = F.batchnorm2d(
            input,
            self.parameters["gamma"].value, self.parameters["beta"].value,
            self.buffers["running_mean"], self.buffers["running_var"],
            self.spec.epsilon, self.spec.momentum,
            "infer" if mode == "infer" else "train"
        )

        # Update running statistics in train mode only
        if mode == "train":
            self.buffers["running_mean"] = cache.running_mean
            self.buffers["running_var"] = cache.running_var

        # Return output
        self._cache = cache
        return output

    def backward(self, grad, param_grads = True):
        cache = self._consume()
        grad_input, grad_gamma, grad_beta = F.batchnorm2d_backward(
            grad, cache, self.parameters["gamma"].value
        )
        if param_grads:
            self._accumulate(grad_gamma, grad_beta)
        return grad_input

# -----------------------------------------------------------------------------

# Leaky rectified linear unit
class LeakyReLU(Layer):

    def forward(self, input, mode = "train"):
        self._cache = input
        return F.leaky_relu(input, self.spec.slope)

    def backward(self, grad, param_grads = True):
        return F.leaky_relu_backward(grad, self._consume(), self.spec.slope)

# Logistic sigmoid
class Sigmoid(Layer):

    def forward(self, input, mode = "train"):
        self._cache = F.sigmoid(input)
        return self._cache

    def backward(self, grad, param_grads = True):
        return F.sigmoid_backward(grad, self._consume())

# Hyperbolic tangent
class Tanh(Layer):

    def forward(self, input, mode = "train"):
        self._cache = F.tanh(input)
        return self._cache

    def backward(self, grad, param_grads = True):
        return F.tanh_backward(grad, self._consume())

# Softmax over the last axis
class Softmax(Layer):

    def forward(self, input, mode = "train"):
        self._cache = F.softmax(input)
        return self._cache

    def backward(self, grad, param_grads = True):
        return F.softmax_backward(grad, self._consume())

# Reshape of each sample, keeping the batch axis
class Reshape(Layer):

    def forward(self, input, mode = "train"):
        self._cache = input.shape
        try:
            return input.reshape(input.shape[0], *self.spec.shape)
        except ValueError as e:
            raise ShapeError(
                f"Mismatch in reshape: cannot reshape {input.shape[1:]} "
                f"into {self.spec.shape}"
            ) from e

    def backward(self, grad, param_grads = True):
        return grad.reshape(self._consume())

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Create layer from specification, drawing weights from the given stream
def build_layer(
    spec: LayerSpec, rng: np.random.Generator, precision: str = "float64"
) -> Layer:
    layer = layers[spec.kind](spec)
    layer.parameters, layer.buffers = initialize(spec, rng, precision)
    return layer

# Initialize parameters and buffers - weights are drawn from a zero-centered
# normal distribution, biases are zero, batch normalization starts as identity
def initialize(
    spec: LayerSpec, rng: np.random.Generator, precision: str = "float64"
) -> tuple[dict[str, Parameter], dict[str, Tensor]]:
    dtype = resolve_dtype(precision)
    c_in, c_out, k = spec.in_features, spec.out_features, spec.kernel

    # Draw weights of the given shape
    def normal(*shape):
        return rng.normal(0.0, spec.init_std, size = shape).astype(dtype)

    # Affine and convolution layers
    if spec.kind == "dense":
        weight = normal(c_in, c_out)
    elif spec.kind == "conv2d":
        weight = normal(c_out, c_in, k, k)
    elif spec.kind == "conv_transpose2d":
        weight = normal(c_in, c_out, k, k)

    # Batch normalization
    elif spec.kind == "batchnorm2d":
        return {
            "gamma": Parameter(np.ones(c_in, dtype = dtype)),
            "beta":  Parameter(np.zeros(c_in, dtype = dtype))
        }, {
            "running_mean": np.zeros(c_in, dtype = dtype),
            "running_var":  np.ones(c_in, dtype = dtype)
        }

    # Activations and reshapes have no state
    else:
        return {}, {}

    # Return weight and zero bias
    return {
        "weight": Parameter(weight),
        "bias":   Parameter(np.zeros(c_out, dtype = dtype))
    }, {}

# -----------------------------------------------------------------------------
# Data
# -----------------------------------------------------------------------------

# Layer implementations
layers: dict[str, type[Layer]] = {
    "dense":            Dense,
    "conv2d":           Conv2d,
    "conv_transpose2d": ConvTranspose2d,
    "batchnorm2d":      BatchNorm2d,
    "leaky_relu":       LeakyReLU,
    "sigmoid":          Sigmoid,
    "tanh":             Tanh,
    "softmax":          Softmax,
    "reshape":          Reshape
}

# Layers carrying parameters
parametric = ("dense", "conv2d", "conv_transpose2d", "batchnorm2d")

# Evaluation modes
modes = ("train", "frozen", "infer")
