"""Feed-forward network: affine layers, batch norm, and activation blocks.

Forward and backward passes are explicit; each layer caches what its own
backward needs when run in training mode. Parameter layout, initialization,
and the save format are all deterministic for a given seed.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import ensemble, tensor
from .ensemble import EnsembleSpec, parse_spec

_MAGIC = b"LGNET1"


@dataclass(frozen=True)
class Affine:
    n_in: int
    n_out: int


@dataclass(frozen=True)
class BatchNorm:
    channels: int
    momentum: float = 0.1
    epsilon: float = 1e-5


@dataclass(frozen=True)
class ActBlock:
    spec: EnsembleSpec


LayerSpec = Affine | BatchNorm | ActBlock


class _AffineLayer:
    def __init__(self, spec: Affine, rng: np.random.Generator):
        self.spec = spec
        bound = np.sqrt(1.0 / spec.n_in)
        self.weight = rng.uniform(-bound, bound, size=(spec.n_in, spec.n_out))
        self.bias = np.zeros(spec.n_out)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._x = None

    def forward(self, x, training):
        self._x = x if training else None
        return tensor.row_broadcast_add(tensor.matmul(x, self.weight), self.bias)

    def backward(self, dout):
        self.grad_weight = tensor.matmul(tensor.transpose(self._x), dout)
        self.grad_bias = tensor.sum_rows(dout)
        return tensor.matmul(dout, tensor.transpose(self.weight))

    def params(self):
        return [("weight", True), ("bias", False)]


class _BatchNormLayer:
    def __init__(self, spec: BatchNorm, rng: np.random.Generator):
        self.spec = spec
        c = spec.channels
        self.gamma = np.ones(c)
        self.beta = np.zeros(c)
        self.grad_gamma = np.zeros(c)
        self.grad_beta = np.zeros(c)
        self.running_mean = np.zeros(c)
        self.running_var = np.ones(c)
        self._xhat = None
        self._inv_std = None

    def forward(self, x, training):
        if training:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            n = x.shape[0]
            m = self.spec.momentum
            self.running_mean = (1 - m) * self.running_mean + m * mean
            # Running variance keeps the unbiased estimate, like the batch
            # statistics conventions everywhere else.
            unbiased = var * (n / (n - 1)) if n > 1 else var
            self.running_var = (1 - m) * self.running_var + m * unbiased
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.spec.epsilon)
        xhat = (x - mean) * inv_std
        if training:
            self._xhat = xhat
            self._inv_std = inv_std
        return self.gamma * xhat + self.beta

    def backward(self, dout):
        xhat = self._xhat
        n = dout.shape[0]
        self.grad_gamma = (dout * xhat).sum(axis=0)
        self.grad_beta = dout.sum(axis=0)
        dxhat = dout * self.gamma
        # Backprop through the batch statistics themselves.
        return (self._inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )

    def params(self):
        return [("gamma", False), ("beta", False)]


class _ActLayer:
    def __init__(self, spec: ActBlock, rng: np.random.Generator):
        self.spec = spec
        self._z = None

    def forward(self, z, training):
        self._z = z if training else None
        return ensemble.forward(self.spec.spec, z)

    def backward(self, dout):
        return ensemble.backward(self.spec.spec, self._z, dout)

    def params(self):
        return []


_LAYER_TYPES = {Affine: _AffineLayer, BatchNorm: _BatchNormLayer, ActBlock: _ActLayer}


def _chain_widths(specs, input_width=None):
    """Walk the layer chain, validating that channel counts line up."""
    widths = []
    current = input_width
    for i, spec in enumerate(specs):
        if isinstance(spec, Affine):
            if current is not None and spec.n_in != current:
                raise ValueError(f"layer {i}: affine expects {spec.n_in} channels, gets {current}")
            current = spec.n_out
        elif isinstance(spec, BatchNorm):
            if current is not None and spec.channels != current:
                raise ValueError(f"layer {i}: batch norm over {spec.channels} channels, gets {current}")
        elif isinstance(spec, ActBlock):
            if current is None:
                raise ValueError("activation block cannot be the first layer")
            current = spec.spec.out_channels(current)
        else:
            raise TypeError(f"unknown layer spec {spec!r}")
        widths.append(current)
    return widths


class Network:
    """Layer stack with explicit forward/backward and seeded initialization."""

    def __init__(self, specs, seed: int = 0):
        self.specs = list(specs)
        self.seed = int(seed)
        if not self.specs:
            raise ValueError("network needs at least one layer")
        first = self.specs[0]
        if not isinstance(first, Affine):
            raise ValueError("first layer must be affine (it fixes the input width)")
        self.input_width = first.n_in
        self.output_width = _chain_widths(self.specs, first.n_in)[-1]
        rng = np.random.default_rng(self.seed)
        self.layers = [_LAYER_TYPES[type(s)](s, rng) for s in self.specs]
        self._training_cache = False

    def forward(self, x, training: bool = False):
        x = tensor.as_matrix(x)
        if x.shape[1] != self.input_width:
            raise ValueError(f"input has {x.shape[1]} columns, network expects {self.input_width}")
        outs = []
        for layer in self.layers:
            x = layer.forward(x, training)
            outs.append(x)
        self._training_cache = training
        self.layer_outputs = outs
        return x

    def backward(self, dLdy):
        if not self._training_cache:
            raise RuntimeError("backward requires a preceding forward(training=True)")
        d = tensor.as_matrix(dLdy)
        if d.shape[1] != self.output_width:
            raise ValueError(f"upstream has {d.shape[1]} columns, output is {self.output_width}")
        for layer in reversed(self.layers):
            d = layer.backward(d)
        return d

    def parameters(self):
        """(name, param, grad, is_decayed_weight) for every trainable array."""
        out = []
        for i, layer in enumerate(self.layers):
            for attr, decay in layer.params():
                out.append((
                    f"layer{i}.{attr}",
                    getattr(layer, attr),
                    getattr(layer, "grad_" + attr),
                    decay,
                ))
        return out

    def set_param(self, name, value):
        idx, attr = name.split(".")
        setattr(self.layers[int(idx.removeprefix("layer"))], attr, value)

    def zero_grads(self):
        for layer in self.layers:
            for attr, _ in layer.params():
                getattr(layer, "grad_" + attr).fill(0.0)

    # -- serialization ------------------------------------------------------

    def _arrays(self):
        for layer in self.layers:
            if isinstance(layer, _AffineLayer):
                yield from (layer.weight, layer.bias)
            elif isinstance(layer, _BatchNormLayer):
                yield from (layer.gamma, layer.beta, layer.running_mean, layer.running_var)

    def save(self, path):
        header = json.dumps({"layers": [spec_to_dict(s) for s in self.specs],
                             "seed": self.seed}, sort_keys=True).encode()
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<I", len(header)))
            f.write(header)
            for arr in self._arrays():
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            if f.read(len(_MAGIC)) != _MAGIC:
                raise ValueError(f"{path}: not a network file (bad magic)")
            (hlen,) = struct.unpack("<I", f.read(4))
            meta = json.loads(f.read(hlen).decode())
            net = cls([spec_from_dict(d) for d in meta["layers"]], seed=meta["seed"])
            for arr in net._arrays():
                raw = f.read(arr.size * 8)
                if len(raw) != arr.size * 8:
                    raise ValueError(f"{path}: truncated parameter data")
                arr[...] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)
            if f.read(1):
                raise ValueError(f"{path}: trailing bytes after parameters")
        return net


def spec_to_dict(spec: LayerSpec) -> dict:
    if isinstance(spec, Affine):
        return {"type": "affine", "in": spec.n_in, "out": spec.n_out}
    if isinstance(spec, BatchNorm):
        return {"type": "batch_norm", "channels": spec.channels,
                "momentum": spec.momentum, "epsilon": spec.epsilon}
    if isinstance(spec, ActBlock):
        return {"type": "act", "spec": spec.spec.name}
    raise TypeError(f"unknown layer spec {spec!r}")


def spec_from_dict(d: dict) -> LayerSpec:
    t = d["type"]
    if t == "affine":
        return Affine(d["in"], d["out"])
    if t == "batch_norm":
        return BatchNorm(d["channels"], d.get("momentum", 0.1), d.get("epsilon", 1e-5))
    if t == "act":
        return ActBlock(parse_spec(d["spec"]))
    raise ValueError(f"unknown layer type {t!r}")
