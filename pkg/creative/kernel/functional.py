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

from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit
from typing import NamedTuple

from creative.exceptions import ShapeError

from .tensor import Tensor, expect_extent, expect_rank

# -----------------------------------------------------------------------------
# Classes
# -----------------------------------------------------------------------------

# Saved state of a batch normalization forward pass
class BatchNormCache(NamedTuple):
    mode: str
    normalized: Tensor
    inv_std: Tensor
    running_mean: Tensor
    running_var: Tensor

# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------

# Two-dimensional cross-correlation (no kernel flip) plus bias
def conv2d(
    input: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, pad: int = 0
) -> Tensor:
    n, c, h, w = _check_conv(input, weight, bias, stride, pad)
    f, _, kh, kw = weight.shape

    # Compute output extents
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1

    # Multiply sliding windows with flattened filters
    cols = _im2col(input, kh, kw, stride, pad, ho, wo)
    out = cols @ weight.reshape(f, -1).T + bias
    return np.ascontiguousarray(out.reshape(n, ho, wo, f).transpose(0, 3, 1, 2))

# Gradients of conv2d with respect to input, weight and bias
def conv2d_backward(
    grad_out: Tensor, saved_input: Tensor, weight: Tensor,
    stride: int = 1, pad: int = 0, cols: Tensor | None = None
) -> tuple[Tensor, Tensor, Tensor]:
    n, c, h, w = _check_conv(
        saved_input, weight, np.zeros(weight.shape[0]), stride, pad
    )
    f, _, kh, kw = weight.shape

    # Ensure the gradient matches the forward output of the saved input
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1
    _check_grad(grad_out, (n, f, ho, wo))

    # Reuse sliding windows of forward pass, if given
    if cols is None:
        cols = _im2col(saved_input, kh, kw, stride, pad, ho, wo)

    # Compute gradients
    grad = grad_out.transpose(0, 2, 3, 1).reshape(-1, f)
    grad_weight = (grad.T @ cols).reshape(weight.shape)
    grad_bias = grad_out.sum(axis = (0, 2, 3))
    grad_input = _col2im(
        grad @ weight.reshape(f, -1), (n, c, h, w), kh, kw, stride, pad, ho, wo
    )

    # Return gradients
    return grad_input, grad_weight, grad_bias

# Fractionally-strided convolution - the adjoint of conv2d with the same
# geometry, where weights are laid out as (input channels, filters, kH, kW)
def conv_transpose2d(
    input: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, pad: int = 0
) -> Tensor:
    n, c, h, w = _check_conv_transpose(input, weight, bias, stride, pad)
    _, f, kh, kw = weight.shape

    # Compute output extents
    ho = (h - 1) * stride - 2 * pad + kh
    wo = (w - 1) * stride - 2 * pad + kw

    # Scatter each input pixel times the kernel into the output
    cols = input.transpose(0, 2, 3, 1).reshape(-1, c) @ weight.reshape(c, -1)
    out = _col2im(cols, (n, f, ho, wo), kh, kw, stride, pad, h, w)
    return out + bias.reshape(1, f, 1, 1)

# Gradients of conv_transpose2d with respect to input, weight and bias
def conv_transpose2d_backward(
    grad_out: Tensor, saved_input: Tensor, weight: Tensor,
    stride: int = 1, pad: int = 0
) -> tuple[Tensor, Tensor, Tensor]:
    n, c, h, w = _check_conv_transpose(
        saved_input, weight, np.zeros(weight.shape[1]), stride, pad
    )
    _, f, kh, kw = weight.shape

    # Ensure the gradient matches the forward output of the saved input
    ho = (h - 1) * stride - 2 * pad + kh
    wo = (w - 1) * stride - 2 * pad + kw
    _check_grad(grad_out, (n, f, ho, wo))

    # The input gradient is a plain convolution of the output gradient
    cols = _im2col(grad_out, kh, kw, stride, pad, h, w)
    grad_input = cols @ weight.reshape(c, -1).T
    grad_input = grad_input.reshape(n, h, w, c).transpose(0, 3, 1, 2)

    # Compute parameter gradients
    inputs = saved_input.transpose(0, 2, 3, 1).reshape(-1, c)
    grad_weight = (inputs.T @ cols).reshape(weight.shape)
    grad_bias = grad_out.sum(axis = (0, 2, 3))

    # Return gradients
    return np.ascontiguousarray(grad_input), grad_weight, grad_bias

# -----------------------------------------------------------------------------

# Affine map of a batch of row vectors
def dense(input: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    _check_dense(input, weight, bias)
    return input @ weight + bias

# Gradients of dense with respect to input, weight and bias
def dense_backward(
    grad_out: Tensor, saved_input: Tensor, weight: Tensor
) -> tuple[Tensor, Tensor, Tensor]:
    _check_dense(saved_input, weight, np.zeros(weight.shape[1]))
    _check_grad(grad_out, (saved_input.shape[0], weight.shape[1]))
    return (
        grad_out @ weight.T,
        saved_input.T @ grad_out,
        grad_out.sum(axis = 0)
    )

# -----------------------------------------------------------------------------

# Per-channel batch normalization - in train mode, the batch statistics are
# used and the returned running statistics are updated with the momentum, in
# infer mode the running statistics are used as they are
def batchnorm2d(
    input: Tensor, gamma: Tensor, beta: Tensor,
    running_mean: Tensor, running_var: Tensor,
    epsilon: float = 1e-5, momentum: float = 0.1, mode: str = "train"
) -> tuple[Tensor, BatchNormCache]:
    expect_rank(input, 4, "input")
    n, c, h, w = input.shape
    for name, value in [
        ("gamma", gamma), ("beta", beta),
        ("running_mean", running_mean), ("running_var", running_var)
    ]:
        expect_extent(value.shape[0], c, f"channels of '{name}'")

    # Normalize with batch statistics
    if mode == "train":
        if n < 2:
            raise ShapeError(
                f"Batch normalization in train mode requires a batch size "
                f"of at least 2, but got {n}"
            )

        # Compute batch statistics and update running statistics
        mean = input.mean(axis = (0, 2, 3))
        var = input.var(axis = (0, 2, 3))
        size = n * h * w
        running_mean = (1 - momentum) * running_mean + momentum * mean
        running_var = (
            (1 - momentum) * running_var +
            momentum * var * size / max(size - 1, 1)
        )

    # Normalize with running statistics
    elif mode == "infer":
        mean, var = running_mean, running_var

    # Otherwise, the mode is unknown
    else:
        raise ShapeError(f"Unknown batch normalization mode '{mode}'")

    # Normalize and apply affine transform
    inv_std = 1.0 / np.sqrt(var + epsilon)
    normalized = (input - mean.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
    output = normalized * gamma.reshape(1, c, 1, 1) + beta.reshape(1, c, 1, 1)

    # Return output and cache
    return output, BatchNormCache(
        mode, normalized, inv_std, running_mean, running_var
    )

# Gradients of batchnorm2d with respect to input, gamma and beta
def batchnorm2d_backward(
    grad_out: Tensor, cache: BatchNormCache, gamma: Tensor
) -> tuple[Tensor, Tensor, Tensor]:
    _check_grad(grad_out, cache.normalized.shape)
    n, c, h, w = grad_out.shape
    normalized = cache.normalized

    # Compute parameter gradients
    grad_gamma = (grad_out * normalized).sum(axis = (0, 2, 3))
    grad_beta = grad_out.sum(axis = (0, 2, 3))

    # In infer mode, the map is affine in the input
    scale = (gamma * cache.inv_std).reshape(1, c, 1, 1)
    if cache.mode == "infer":
        return grad_out * scale, grad_gamma, grad_beta

    # In train mode, account for the dependency of the batch statistics
    size = n * h * w
    grad_input = scale / size * (
        size * grad_out
        - grad_beta.reshape(1, c, 1, 1)
        - normalized * grad_gamma.reshape(1, c, 1, 1)
    )

    # Return gradients
    return grad_input, grad_gamma, grad_beta

# -----------------------------------------------------------------------------

# Leaky rectified linear unit
def leaky_relu(input: Tensor, slope: float = 0.2) -> Tensor:
    return np.where(input > 0, input, slope * input)

# Gradient of leaky_relu
def leaky_relu_backward(
    grad_out: Tensor, saved_input: Tensor, slope: float = 0.2
) -> Tensor:
    _check_grad(grad_out, saved_input.shape)
    return grad_out * np.where(saved_input > 0, 1.0, slope)

# Logistic sigmoid
def sigmoid(input: Tensor) -> Tensor:
    return expit(input)

# Gradient of sigmoid, computed from its output
def sigmoid_backward(grad_out: Tensor, saved_output: Tensor) -> Tensor:
    _check_grad(grad_out, saved_output.shape)
    return grad_out * saved_output * (1 - saved_output)

# Hyperbolic tangent
def tanh(input: Tensor) -> Tensor:
    return np.tanh(input)

# Gradient of tanh, computed from its output
def tanh_backward(grad_out: Tensor, saved_output: Tensor) -> Tensor:
    _check_grad(grad_out, saved_output.shape)
    return grad_out * (1 - saved_output * saved_output)

# Softmax over the class axis
def softmax(input: Tensor, axis: int = -1) -> Tensor:
    if input.ndim == 0 or input.shape[axis] < 1:
        raise ShapeError("Softmax requires at least one class")

    # Shift logits for numerical stability and normalize
    shifted = np.exp(input - input.max(axis = axis, keepdims = True))
    return shifted / shifted.sum(axis = axis, keepdims = True)

# Gradient of softmax, computed from its output
def softmax_backward(
    grad_out: Tensor, saved_output: Tensor, axis: int = -1
) -> Tensor:
    _check_grad(grad_out, saved_output.shape)
    inner = (grad_out * saved_output).sum(axis = axis, keepdims = True)
    return saved_output * (grad_out - inner)

# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------

# Extract sliding windows as rows, ordered by batch, then output position
def _im2col(
    input: Tensor, kh: int, kw: int, stride: int, pad: int, ho: int, wo: int
) -> Tensor:
    n, c, _, _ = input.shape
    if pad:
        input = np.pad(input, ((0, 0), (0, 0), (pad, pad), (pad, pad)))

    # Create strided view on windows and copy into rows
    windows = sliding_window_view(input, (kh, kw), axis = (2, 3))
    windows = windows[:, :, ::stride, ::stride][:, :, :ho, :wo]
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * kh * kw)

# Accumulate rows of windows back into an image - the adjoint of _im2col
def _col2im(
    cols: Tensor, shape: tuple[int, int, int, int],
    kh: int, kw: int, stride: int, pad: int, ho: int, wo: int
) -> Tensor:
    n, c, h, w = shape
    cols = cols.reshape(n, ho, wo, c, kh, kw).transpose(0, 3, 1, 2, 4, 5)

    # Accumulate one kernel offset at a time - the order of accumulation is
    # fixed, so results are bit-identical across runs
    image = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype = cols.dtype)
    for y in range(kh):
        for x in range(kw):
            image[
                :, :,
                y:y + stride * ho:stride,
                x:x + stride * wo:stride
            ] += cols[..., y, x]

    # Remove padding
    return np.ascontiguousarray(image[:, :, pad:pad + h, pad:pad + w])

# Check operands of conv2d and return the input shape
def _check_conv(input, weight, bias, stride, pad):
    expect_rank(input, 4, "input")
    expect_rank(weight, 4, "weight")
    _check_geometry(stride, pad)
    n, c, h, w = input.shape
    f, cw, kh, kw = weight.shape

    # Check channels and bias
    expect_extent(cw, c, "input channels")
    expect_extent(bias.shape[0], f, "bias extent")

    # Check that the kernel fits into the padded input
    if h + 2 * pad < kh:
        raise ShapeError(
            f"Mismatch in height: padded height {h + 2 * pad} is smaller "
            f"than kernel height {kh}"
        )
    if w + 2 * pad < kw:
        raise ShapeError(
            f"Mismatch in width: padded width {w + 2 * pad} is smaller "
            f"than kernel width {kw}"
        )

    # Return input shape
    return n, c, h, w

# Check operands of conv_transpose2d and return the input shape
def _check_conv_transpose(input, weight, bias, stride, pad):
    expect_rank(input, 4, "input")
    expect_rank(weight, 4, "weight")
    _check_geometry(stride, pad)
    n, c, h, w = input.shape
    cw, f, kh, kw = weight.shape

    # Check channels and bias
    expect_extent(cw, c, "input channels")
    expect_extent(bias.shape[0], f, "bias extent")

    # Check that the output is not empty
    if (h - 1) * stride - 2 * pad + kh < 1 or (w - 1) * stride - 2 * pad + kw < 1:
        raise ShapeError(
            f"Mismatch in height or width: padding {pad} leaves no output "
            f"for input {h}x{w}"
        )

    # Return input shape
    return n, c, h, w

# Check stride and padding
def _check_geometry(stride: int, pad: int):
    if stride < 1:
        raise ShapeError(f"Expected stride >= 1, but got {stride}")
    if pad < 0:
        raise ShapeError(f"Expected padding >= 0, but got {pad}")

# Check operands of dense
def _check_dense(input, weight, bias):
    expect_rank(input, 2, "input")
    expect_rank(weight, 2, "weight")
    expect_extent(weight.shape[0], input.shape[1], "inner dimension")
    expect_extent(bias.shape[0], weight.shape[1], "bias extent")

# Check that a gradient has the shape of the forward output
def _check_grad(grad_out: Tensor, shape: tuple):
    if tuple(grad_out.shape) != tuple(shape):
        raise ShapeError(
            f"Mismatch in gradient shape: expected {tuple(shape)}, "
            f"but got {tuple(grad_out.shape)}"
        )
