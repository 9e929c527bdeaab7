"""Minimal dense-network engine.

Matrices are plain 2-D numpy arrays. Parameters and activations are float32
during training; every layer computes in the dtype of its own parameters, so a
network cast with :meth:`ConditionedMLP.astype` to float64 doubles as a
high-precision reference for gradient checks.

Each layer caches what its backward pass needs only when ``forward`` is called
with ``record=True``. Unrecorded forward passes are pure and may run
concurrently on a frozen network.
"""

import numpy as np

from .exceptions import ConfigError, InvalidLabelError, ShapeError, StateError, TrainingDivergenceError

__all__ = [
    "Parameter",
    "Dense",
    "LeakyReLU",
    "Tanh",
    "Embedding",
    "ConditionedMLP",
    "dense_forward",
    "leaky_relu",
    "tanh_activation",
    "embedding_lookup",
    "hadamard",
    "check_labels",
    "rmsprop_step",
    "clip_parameters",
    "init_dense",
    "init_embedding",
]

LEAKY_SLOPE = 0.2


class Parameter:
    """A trainable matrix with its gradient and RMSprop cache."""

    __slots__ = ("value", "grad", "rms_cache")

    def __init__(self, value, dtype=None):
        value = np.asarray(value)
        if dtype is None:
            dtype = value.dtype if np.issubdtype(value.dtype, np.floating) else np.float32
        value = np.array(value, dtype=dtype, ndmin=2)
        if value.ndim != 2:
            raise ShapeError(f"parameter must be 2-D, got shape {value.shape}")
        self.value = value
        self.grad = np.zeros_like(value)
        self.rms_cache = np.zeros_like(value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad.fill(0)

    def astype(self, dtype):
        p = Parameter(self.value, dtype=dtype)
        p.grad[...] = self.grad
        p.rms_cache[...] = self.rms_cache
        return p

    def __repr__(self):
        return f"Parameter(shape={self.shape}, dtype={self.value.dtype})"


def check_labels(labels, n=None):
    """Return ``labels`` as an int64 vector, raising if any label is not 0 or 1."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InvalidLabelError(f"labels must be integers in {{0, 1}}, got {arr[:5]!r}...")
    arr = arr.astype(np.int64)
    bad = (arr != 0) & (arr != 1)
    if np.any(bad):
        raise InvalidLabelError(f"label {arr[bad][0]} is not in {{0, 1}}")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"got {arr.shape[0]} labels for {n} rows")
    return arr


# ---------------------------------------------------------------------------
# layers


class Dense:
    """Affine map ``x @ W + b`` with ``W`` of shape (in, out) and ``b`` of shape (1, out)."""

    def __init__(self, weights, bias):
        self.weights = weights if isinstance(weights, Parameter) else Parameter(weights)
        self.bias = bias if isinstance(bias, Parameter) else Parameter(bias)
        if self.bias.shape != (1, self.weights.shape[1]):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match weights shape {self.weights.shape}"
            )
        self._input = None

    @property
    def in_features(self):
        return self.weights.shape[0]

    @property
    def out_features(self):
        return self.weights.shape[1]

    def parameters(self):
        return [self.weights, self.bias]

    def forward(self, x, record=False):
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(
                f"input shape {x.shape} incompatible with weights shape {self.weights.shape}"
            )
        x = x.astype(self.weights.value.dtype, copy=False)
        if record:
            self._input = x
        return x @ self.weights.value + self.bias.value

    def backward(self, grad_out, param_grads=True):
        if self._input is None:
            raise StateError("Dense.backward called without a recorded forward pass")
        x, self._input = self._input, None
        if param_grads:
            self.weights.grad += x.T @ grad_out
            self.bias.grad += grad_out.sum(axis=0, keepdims=True)
        return grad_out @ self.weights.value.T


class LeakyReLU:
    def __init__(self, alpha=LEAKY_SLOPE):
        if not 0 < alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
        self.alpha = alpha
        self._mask = None

    def parameters(self):
        return []

    def forward(self, x, record=False):
        mask = x >= 0
        if record:
            self._mask = mask
        return np.where(mask, x, x * x.dtype.type(self.alpha))

    def backward(self, grad_out, param_grads=True):
        if self._mask is None:
            raise StateError("LeakyReLU.backward called without a recorded forward pass")
        mask, self._mask = self._mask, None
        return np.where(mask, grad_out, grad_out * grad_out.dtype.type(self.alpha))


class Tanh:
    def __init__(self):
        self._out = None

    def parameters(self):
        return []

    def forward(self, x, record=False):
        out = np.tanh(x)
        if record:
            self._out = out
        return out

    def backward(self, grad_out, param_grads=True):
        if self._out is None:
            raise StateError("Tanh.backward called without a recorded forward pass")
        out, self._out = self._out, None
        return grad_out * (1 - out * out)


class Embedding:
    """Lookup table with one row per class label."""

    def __init__(self, table):
        self.table = table if isinstance(table, Parameter) else Parameter(table)
        if self.table.shape[0] != 2:
            raise ShapeError(f"embedding table needs exactly 2 rows, got {self.table.shape[0]}")
        self._labels = None

    @property
    def dim(self):
        return self.table.shape[1]

    def parameters(self):
        return [self.table]

    def forward(self, labels, record=False):
        labels = check_labels(labels)
        if record:
            self._labels = labels
        return self.table.value[labels]

    def backward(self, grad_out, param_grads=True):
        if self._labels is None:
            raise StateError("Embedding.backward called without a recorded forward pass")
        labels, self._labels = self._labels, None
        if param_grads:
            for c in (0, 1):
                self.table.grad[c] += grad_out[labels == c].sum(axis=0)


# ---------------------------------------------------------------------------
# functional forms


def dense_forward(x, layer):
    return layer.forward(x)


def leaky_relu(x, alpha=LEAKY_SLOPE):
    return LeakyReLU(alpha).forward(np.asarray(x))


def tanh_activation(x):
    return np.tanh(np.asarray(x))


def embedding_lookup(labels, table):
    if not isinstance(table, Embedding):
        table = Embedding(table)
    return table.forward(labels)


def hadamard(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"hadamard operands differ in shape: {a.shape} vs {b.shape}")
    return a * b


# ---------------------------------------------------------------------------
# conditioned network


class ConditionedMLP:
    """Label-conditioned multilayer perceptron.

    The primary input is multiplied elementwise by the embedding of its label,
    then passed through ``hidden`` dense layers with LeakyReLU activations and
    a final dense layer followed by ``out_activation`` (``"tanh"`` or
    ``"linear"``).
    """

    def __init__(self, embedding, hidden, out, out_activation="linear", alpha=LEAKY_SLOPE):
        if out_activation not in ("tanh", "linear"):
            raise ConfigError(f"unknown output activation {out_activation!r}")
        self.embedding = embedding
        self.hidden = list(hidden)
        self.out = out
        self.out_activation = out_activation
        self.alpha = alpha
        dims = [embedding.dim] + [layer.out_features for layer in self.hidden]
        for layer, fan_in in zip(self.hidden + [out], dims):
            if layer.in_features != fan_in:
                raise ShapeError(
                    f"layer with weights {layer.weights.shape} cannot follow width {fan_in}"
                )
        self._stack = []
        for layer in self.hidden:
            self._stack += [layer, LeakyReLU(alpha)]
        self._stack.append(out)
        if out_activation == "tanh":
            self._stack.append(Tanh())
        self._input = None

    @property
    def input_dim(self):
        return self.embedding.dim

    @property
    def output_dim(self):
        return self.out.out_features

    @property
    def dtype(self):
        return self.out.weights.value.dtype

    def named_parameters(self):
        named = [("label_embed", self.embedding.table)]
        for i, layer in enumerate(self.hidden):
            named += [(f"dense{i}.weight", layer.weights), (f"dense{i}.bias", layer.bias)]
        named += [("out.weight", self.out.weights), ("out.bias", self.out.bias)]
        return named

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x, labels, record=False):
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeError(f"input shape {x.shape} does not match input width {self.input_dim}")
        labels = check_labels(labels, n=x.shape[0])
        x = x.astype(self.dtype, copy=False)
        e = self.embedding.forward(labels, record=record)
        h = hadamard(x, e)
        if record:
            self._input = (x, e)
        for layer in self._stack:
            h = layer.forward(h, record=record)
        return h

    def backward(self, grad_out, param_grads=True):
        """Backpropagate ``grad_out`` (same shape as the output).

        Accumulates into each ``Parameter.grad`` unless ``param_grads`` is
        False, and returns the gradient with respect to the primary input.
        """
        if self._input is None:
            raise StateError("backward called without a recorded forward pass")
        x, e = self._input
        self._input = None
        g = np.asarray(grad_out, dtype=self.dtype)
        for layer in reversed(self._stack):
            g = layer.backward(g, param_grads=param_grads)
        self.embedding.backward(g * x, param_grads=param_grads)
        return g * e

    def astype(self, dtype):
        """Deep copy with every parameter cast to ``dtype``."""
        return self.__class__(
            Embedding(self.embedding.table.astype(dtype)),
            [Dense(l.weights.astype(dtype), l.bias.astype(dtype)) for l in self.hidden],
            Dense(self.out.weights.astype(dtype), self.out.bias.astype(dtype)),
            out_activation=self.out_activation,
            alpha=self.alpha,
        )

    def copy(self):
        return self.astype(self.dtype)


# ---------------------------------------------------------------------------
# optimisation


def rmsprop_step(param, lr, rho=0.9, eps=1e-8):
    """One in-place RMSprop update of ``param``; its gradient is zeroed afterwards."""
    if not np.all(np.isfinite(param.grad)):
        raise TrainingDivergenceError("non-finite gradient passed to rmsprop_step")
    g = param.grad
    cache = param.rms_cache
    dt = cache.dtype.type
    cache *= dt(rho)
    cache += dt(1 - rho) * g * g
    param.value -= dt(lr) * g / (np.sqrt(cache) + dt(eps))
    param.zero_grad()
    return param


def clip_parameters(params, c):
    """Clamp every entry of every parameter value into ``[-c, c]`` in place."""
    if c <= 0:
        raise ConfigError(f"clip bound must be positive, got {c}")
    for p in params:
        np.clip(p.value, -c, c, out=p.value)
    return params


def init_dense(fan_in, fan_out, rng, dtype=np.float32):
    """He-normal weights, zero bias."""
    if fan_in < 1 or fan_out < 1:
        raise ConfigError(f"zero-sized dense layer {fan_in}x{fan_out}")
    w = rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)
    return Dense(Parameter(w, dtype=dtype), Parameter(np.zeros((1, fan_out)), dtype=dtype))


def init_embedding(dim, rng, scale=0.05, dtype=np.float32):
    if dim < 1:
        raise ConfigError(f"zero-sized embedding of width {dim}")
    return Embedding(Parameter(rng.uniform(-scale, scale, size=(2, dim)), dtype=dtype))


def build_conditioned_mlp(input_dim, widths, out_dim, out_activation, rng, dtype=np.float32):
    """Randomly initialise a :class:`ConditionedMLP` with the given layer widths."""
    dims = [input_dim] + list(widths)
    if any(d < 1 for d in dims + [out_dim]):
        raise ConfigError(f"zero-sized layer in {dims + [out_dim]}")
    embedding = init_embedding(input_dim, rng, dtype=dtype)
    hidden = [init_dense(a, b, rng, dtype) for a, b in zip(dims[:-1], dims[1:])]
    out = init_dense(dims[-1], out_dim, rng, dtype)
    return ConditionedMLP(embedding, hidden, out, out_activation=out_activation)
