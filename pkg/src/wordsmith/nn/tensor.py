"""Tape-based reverse-mode autodiff over numpy arrays.

The graph is dynamic: every op appends a node holding its parents and a
backward closure.  ``backward()`` on a scalar output walks the tape once in
reverse topological order and accumulates adjoints into ``.grad``.
"""

from __future__ import annotations

import numpy as np


class GradientError(ValueError):
    """Raised when a gradient contract is violated (non-scalar loss, etc.)."""


class Tensor:
    """A node in the autodiff graph wrapping a float64 numpy array.

    Leaf tensors created with ``requires_grad=True`` (parameters, probed
    inputs) receive gradients; everything built from them is tracked
    automatically.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("tensor holds non-finite values")
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents if self.requires_grad else ()
        self._backward = _backward if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- graph walk ---------------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise GradientError(
                f"backward() requires a scalar, got shape {self.data.shape}"
            )
        order = []
        seen = set()
        stack = [(self, False)]
        # iterative DFS; recursion would overflow on long training graphs
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))

        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_tensor(other)
        out_data = self.data + other.data

        def bwd(g):
            self._accumulate(_unbroadcast(g, self.data.shape))
            other._accumulate(_unbroadcast(g, other.data.shape))

        return Tensor(out_data, _parents=(self, other), _backward=bwd)

    __radd__ = __add__

    def __neg__(self):
        def bwd(g):
            self._accumulate(-g)

        return Tensor(-self.data, _parents=(self,), _backward=bwd)

    def __sub__(self, other):
        return self + (-_as_tensor(other))

    def __rsub__(self, other):
        return _as_tensor(other) + (-self)

    def __mul__(self, other):
        other = _as_tensor(other)
        out_data = self.data * other.data

        def bwd(g):
            self._accumulate(_unbroadcast(g * other.data, self.data.shape))
            other._accumulate(_unbroadcast(g * self.data, other.data.shape))

        return Tensor(out_data, _parents=(self, other), _backward=bwd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_tensor(other)
        out_data = self.data / other.data

        def bwd(g):
            self._accumulate(_unbroadcast(g / other.data, self.data.shape))
            other._accumulate(
                _unbroadcast(-g * self.data / other.data**2, other.data.shape)
            )

        return Tensor(out_data, _parents=(self, other), _backward=bwd)

    def __matmul__(self, other):
        other = _as_tensor(other)
        out_data = self.data @ other.data

        def bwd(g):
            a, b = self.data, other.data
            if a.ndim == 1 and b.ndim == 2:
                self._accumulate(g @ b.T)
                other._accumulate(np.outer(a, g))
            elif a.ndim == 2 and b.ndim == 2:
                self._accumulate(g @ b.T)
                other._accumulate(a.T @ g)
            elif a.ndim == 2 and b.ndim == 1:
                self._accumulate(np.outer(g, b))
                other._accumulate(a.T @ g)
            else:
                self._accumulate(g * b)
                other._accumulate(g * a)

        return Tensor(out_data, _parents=(self, other), _backward=bwd)

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise TypeError("only scalar exponents supported")
        out_data = self.data**p

        def bwd(g):
            self._accumulate(g * p * self.data ** (p - 1))

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    # -- reductions / shaping -------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out_data = self.data.sum(axis=axis, keepdims=keepdims)

        def bwd(g):
            if axis is None:
                self._accumulate(np.broadcast_to(g, self.data.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                self._accumulate(np.broadcast_to(gg, self.data.shape).copy())

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def mean(self, axis=None, keepdims=False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        old_shape = self.data.shape
        out_data = self.data.reshape(*shape)

        def bwd(g):
            self._accumulate(g.reshape(old_shape))

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def __getitem__(self, key):
        out_data = self.data[key]

        def bwd(g):
            full = np.zeros_like(self.data)
            np.add.at(full, key, g)
            self._accumulate(full)

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    # -- elementwise nonlinearities -------------------------------------------

    def tanh(self):
        out_data = np.tanh(self.data)

        def bwd(g):
            self._accumulate(g * (1.0 - out_data**2))

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def relu(self):
        out_data = np.maximum(self.data, 0.0)

        def bwd(g):
            self._accumulate(g * (self.data > 0.0))

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def exp(self):
        out_data = np.exp(self.data)

        def bwd(g):
            self._accumulate(g * out_data)

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def log(self):
        out_data = np.log(self.data)

        def bwd(g):
            self._accumulate(g / self.data)

        return Tensor(out_data, _parents=(self,), _backward=bwd)

    def sqrt(self):
        out_data = np.sqrt(self.data)

        def bwd(g):
            # subgradient 0 at the origin keeps ||x||_2 losses usable at x == 0
            denom = np.where(out_data > 0.0, 2.0 * out_data, np.inf)
            self._accumulate(g / denom)

        return Tensor(out_data, _parents=(self,), _backward=bwd)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    """Sum gradient ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, dim in enumerate(shape):
        if dim == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g.reshape(shape)


def stop_gradient(x):
    """Identity in the forward pass; blocks all adjoint flow through it.

    The returned tensor shares the input's values bit-for-bit but is detached
    from the graph, so ``sg(sg(x))`` is the same as ``sg(x)``.
    """
    if isinstance(x, Tensor):
        return Tensor(x.data)
    return Tensor(x)


def gather_rows(table, indices):
    """Differentiable row lookup ``table[indices]`` (gradients scatter-add)."""
    idx = np.asarray(indices, dtype=np.intp)
    out_data = table.data[idx]

    def bwd(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        table._accumulate(full)

    return Tensor(out_data, _parents=(table,), _backward=bwd)


def concat(tensors, axis=0):
    """Concatenate tensors along ``axis`` with gradient splitting."""
    tensors = [_as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t._accumulate(g[tuple(sl)])

    return Tensor(out_data, _parents=tuple(tensors), _backward=bwd)


def smooth_l1(pred, target, delta=1.0):
    """Elementwise Huber penalty between ``pred`` and a constant target.

    Quadratic inside ``|e| <= delta``, linear outside; returns the mean.
    """
    pred = _as_tensor(pred)
    tgt = np.asarray(target.data if isinstance(target, Tensor) else target)
    err = pred.data - tgt
    small = np.abs(err) <= delta
    vals = np.where(small, 0.5 * err**2 / delta, np.abs(err) - 0.5 * delta)
    out_data = np.asarray(vals.mean())

    def bwd(g):
        d = np.where(small, err / delta, np.sign(err)) / err.size
        pred._accumulate(g * d)

    return Tensor(out_data, _parents=(pred,), _backward=bwd)


def l2_norm(x):
    """Euclidean norm ``sqrt(sum(x**2))`` of all elements."""
    return (_as_tensor(x) ** 2).sum().sqrt()


def grad(loss_fn, params):
    """Evaluate ``loss_fn()`` and return d(loss)/d(p) for each param tensor.

    ``loss_fn`` must return a scalar Tensor built from registered ops.
    Existing ``.grad`` buffers on the params are cleared first.
    """
    for p in params:
        p.grad = None
    loss = loss_fn()
    if not isinstance(loss, Tensor):
        raise GradientError("loss_fn must return a Tensor")
    loss.backward()
    return [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
