"""Fully-connected networks over the autodiff tape, with binary weight I/O."""

from __future__ import annotations

import struct

import numpy as np

from .tensor import GradientError, Tensor

WEIGHT_MAGIC = b"WNN1"

_ACTIVATIONS = ("tanh", "relu")


class DimensionError(ValueError):
    """Input feature dimension does not match the network."""


class Mlp:
    """Multi-layer perceptron: linear layers with tanh/relu hidden units.

    The output layer is linear (identity activation).  Weights are stored as
    (fan_in, fan_out) matrices so a batch forward is ``x @ W + b``.
    """

    def __init__(self, sizes, activation="tanh", rng=None):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}")
        self.sizes = list(int(s) for s in sizes)
        self.activation = activation
        self.weights = []
        self.biases = []
        rng = rng if rng is not None else np.random.default_rng(0)
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            a = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-a, a, size=(fan_in, fan_out))
            self.weights.append(Tensor(w, requires_grad=True))
            self.biases.append(Tensor(np.zeros(fan_out), requires_grad=True))

    @property
    def in_dim(self):
        return self.sizes[0]

    @property
    def out_dim(self):
        return self.sizes[-1]

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x):
        """Run the network on ``x`` (shape ``(in,)`` or ``(batch, in)``)."""
        if not isinstance(x, Tensor):
            x = Tensor(x)
        if x.data.shape[-1] != self.in_dim:
            raise DimensionError(
                f"input dim {x.data.shape[-1]} != network input {self.in_dim}"
            )
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = h.tanh() if self.activation == "tanh" else h.relu()
        return h

    def __call__(self, x):
        return self.forward(x)

    def copy(self):
        dup = Mlp.__new__(Mlp)
        dup.sizes = list(self.sizes)
        dup.activation = self.activation
        dup.weights = [Tensor(w.data.copy(), requires_grad=True) for w in self.weights]
        dup.biases = [Tensor(b.data.copy(), requires_grad=True) for b in self.biases]
        return dup

    # -- serialization --------------------------------------------------------

    def to_bytes(self):
        """Versioned binary layout: magic, u32 layer count, per-layer dims,
        then per layer f32 row-major weights followed by biases."""
        parts = [WEIGHT_MAGIC, struct.pack("<I", len(self.weights))]
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            parts.append(struct.pack("<II", fan_in, fan_out))
        for w, b in zip(self.weights, self.biases):
            parts.append(w.data.astype("<f4").tobytes())
            parts.append(b.data.astype("<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob, activation="tanh"):
        if blob[:4] != WEIGHT_MAGIC:
            raise ValueError("bad magic; not a serialized network")
        (n_layers,) = struct.unpack_from("<I", blob, 4)
        off = 8
        dims = []
        for _ in range(n_layers):
            fan_in, fan_out = struct.unpack_from("<II", blob, off)
            dims.append((fan_in, fan_out))
            off += 8
        sizes = [dims[0][0]] + [d[1] for d in dims]
        for (a, b), (c, _) in zip(dims[:-1], dims[1:]):
            if b != c:
                raise ValueError("inconsistent layer dims in blob")
        net = cls.__new__(cls)
        net.sizes = sizes
        net.activation = activation
        net.weights = []
        net.biases = []
        for fan_in, fan_out in dims:
            w = np.frombuffer(blob, dtype="<f4", count=fan_in * fan_out, offset=off)
            off += 4 * fan_in * fan_out
            b = np.frombuffer(blob, dtype="<f4", count=fan_out, offset=off)
            off += 4 * fan_out
            net.weights.append(
                Tensor(w.astype(np.float64).reshape(fan_in, fan_out), requires_grad=True)
            )
            net.biases.append(Tensor(b.astype(np.float64), requires_grad=True))
        return net


def input_gradient(mlp, x):
    """Gradient of a scalar-output network with respect to its input.

    For a batched ``x`` the rows are independent, so the per-row input
    gradients are returned with the same shape as ``x``.
    """
    if mlp.out_dim != 1:
        raise GradientError(f"network output dim {mlp.out_dim}, expected scalar")
    xt = Tensor(np.asarray(x, dtype=np.float64), requires_grad=True)
    out = mlp.forward(xt).sum()
    out.backward()
    g = xt.grad if xt.grad is not None else np.zeros_like(xt.data)
    return g.reshape(np.asarray(x).shape)
