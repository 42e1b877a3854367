"""Branch/trunk multilayer perceptrons trained with Adam on mean-square error.

Every DOF gets a branch: its PSD ordinates and frequencies feed one
16-node ReLU layer. Branch outputs, the per-DOF total powers and the vessel
speed are concatenated into the trunk, a stack of ReLU layers ending in a
single linear output node.

All parameters live in one flat float64 vector; per-layer weight matrices
and biases are views into it, so Adam updates are a single vector op.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import FeatureVector, K_HEADING, K_HEIGHT_PERIOD, feature_width, normalize_mask

TARGETS = ("hs", "t1", "mu")
TARGET_UNITS = {"hs": "m", "t1": "s", "mu": "deg"}

# Trunk node counts and batch sizes keyed by number of DOFs.
_HS_T1_TRUNK = {1: (16, 8), 2: (16, 8, 8), 3: (32, 32, 16)}
_HS_T1_BATCH = {1: 32, 2: 16, 3: 16}
_MU_TRUNK = {1: (32, 16), 2: (32, 32, 16), 3: (32, 32, 16)}
_MU_BATCH = {1: 16, 2: 32, 3: 32}

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

MAGIC = b"SAWB"
FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    """Raised when the loss stops being finite."""


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    dof_mask: tuple[str, ...]
    target: str
    k: int
    trunk_layers: tuple[int, ...]
    batch_size: int
    branch_nodes: int = 16
    epochs: int = 100
    learning_rate: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "dof_mask", normalize_mask(self.dof_mask))
        object.__setattr__(self, "trunk_layers", tuple(int(n) for n in self.trunk_layers))
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if min(self.trunk_layers, default=0) <= 0 or self.branch_nodes <= 0 or self.k <= 0:
            raise ValueError("layer widths and k must be positive")
        if self.batch_size <= 0 or self.epochs < 0:
            raise ValueError("batch size must be positive and epochs non-negative")

    @classmethod
    def for_cell(cls, dof_mask, target: str, **overrides) -> "NetworkSpec":
        """Configuration for one (DOF selection, target) pair."""
        n = len(normalize_mask(dof_mask))
        if target == "mu":
            kw = dict(k=K_HEADING, trunk_layers=_MU_TRUNK[n], batch_size=_MU_BATCH[n])
        elif target in ("hs", "t1"):
            kw = dict(k=K_HEIGHT_PERIOD, trunk_layers=_HS_T1_TRUNK[n], batch_size=_HS_T1_BATCH[n])
        else:
            raise ValueError(f"unknown target {target!r}")
        kw.update(overrides)
        return cls(dof_mask=dof_mask, target=target, **kw)

    @property
    def n_dofs(self) -> int:
        return len(self.dof_mask)

    @property
    def input_width(self) -> int:
        return feature_width(self.dof_mask, self.k)

    @property
    def branch_input_width(self) -> int:
        return 2 * self.k

    @property
    def trunk_input_width(self) -> int:
        return self.n_dofs * (self.branch_nodes + 1) + 1

    def layer_shapes(self) -> list[tuple[int, int]]:
        shapes = [(self.branch_input_width, self.branch_nodes)] * self.n_dofs
        widths = (self.trunk_input_width, *self.trunk_layers, 1)
        shapes += list(zip(widths[:-1], widths[1:]))
        return shapes

    @property
    def n_params(self) -> int:
        return sum(i * o + o for i, o in self.layer_shapes())

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["dof_mask"] = list(self.dof_mask)
        d["trunk_layers"] = list(self.trunk_layers)
        return d


def _layer_views(spec: NetworkSpec, flat: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    views, pos = [], 0
    for fan_in, fan_out in spec.layer_shapes():
        w = flat[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = flat[pos:pos + fan_out]
        pos += fan_out
        views.append((w, b))
    return views


@dataclass
class NetworkWeights:
    spec: NetworkSpec
    params: np.ndarray
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        if self.params.shape != (self.spec.n_params,):
            raise ValueError("parameter vector does not match the network spec")
        self.x_mean = np.asarray(self.x_mean, dtype=np.float64).reshape(self.spec.input_width)
        self.x_std = np.asarray(self.x_std, dtype=np.float64).reshape(self.spec.input_width)

    @property
    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return _layer_views(self.spec, self.params)

    def standardize(self, x) -> np.ndarray:
        return (as_matrix(x, self.spec) - self.x_mean) / self.x_std


def relu(z):
    return np.maximum(z, 0.0)


def perceptron(w, b, x, activation=relu):
    """Single node: activation(sum_j w_j x_j + b)."""
    return activation(np.dot(w, x) + b)


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_network(spec: NetworkSpec, seed) -> NetworkWeights:
    """Fan-in/fan-out scaled uniform weights, zero biases, identity scaling."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    params = np.zeros(spec.n_params)
    for w, _ in _layer_views(spec, params):
        bound = glorot_bound(*w.shape)
        w[...] = rng.uniform(-bound, bound, size=w.shape)
    width = spec.input_width
    return NetworkWeights(spec, params, np.zeros(width), np.ones(width),
                          meta={"seed": int(seed), "init": "glorot_uniform"})


def as_matrix(x, spec: NetworkSpec) -> np.ndarray:
    if isinstance(x, FeatureVector):
        if x.dof_mask != spec.dof_mask or x.k != spec.k:
            raise ValueError(f"feature vector ({x.dof_mask}, k={x.k}) does not match network "
                             f"({spec.dof_mask}, k={spec.k})")
        x = x.to_array()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_width:
        raise ValueError(f"expected feature width {spec.input_width}, got {x.shape[-1]}")
    return x


def _forward(spec: NetworkSpec, layers, x: np.ndarray):
    """Network output plus the per-layer (input, pre-activation) cache."""
    stride = 2 * spec.k + 1
    n_d = spec.n_dofs
    cache = []
    branch_out = []
    for i in range(n_d):
        xi = x[:, i * stride:i * stride + 2 * spec.k]
        w, b = layers[i]
        z = xi @ w + b
        cache.append((xi, z))
        branch_out.append(relu(z))
    scalars = x[:, [i * stride + 2 * spec.k for i in range(n_d)] + [x.shape[1] - 1]]
    h = np.concatenate(branch_out + [scalars], axis=1)
    for w, b in layers[n_d:-1]:
        z = h @ w + b
        cache.append((h, z))
        h = relu(z)
    w, b = layers[-1]
    out = h @ w + b
    cache.append((h, out))
    return out[:, 0], cache


def forward(weights: NetworkWeights, features) -> np.ndarray:
    """Raw network output for already-standardized features."""
    x = as_matrix(features, weights.spec)
    out, _ = _forward(weights.spec, weights.layers, x)
    return out


def hidden_activations(weights: NetworkWeights, features) -> list[np.ndarray]:
    x = as_matrix(features, weights.spec)
    _, cache = _forward(weights.spec, weights.layers, x)
    return [relu(z) for _, z in cache[:-1]]


def loss_and_grad(spec: NetworkSpec, params: np.ndarray, x: np.ndarray, y: np.ndarray,
                  grad: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Mean-square error and its gradient with respect to the flat parameters."""
    layers = _layer_views(spec, params)
    out, cache = _forward(spec, layers, x)
    n = x.shape[0]
    resid = out - y
    loss = float(np.mean(resid**2))
    if grad is None:
        grad = np.empty_like(params)
    glayers = _layer_views(spec, grad)
    n_d = spec.n_dofs

    delta = (2.0 / n) * resid[:, None]
    h, _ = cache[-1]
    gw, gb = glayers[-1]
    np.dot(h.T, delta, out=gw)
    gb[:] = delta.sum(axis=0)
    delta = delta @ layers[-1][0].T
    for li in range(len(layers) - 2, n_d - 1, -1):
        h, z = cache[li]
        delta = delta * (z > 0)
        gw, gb = glayers[li]
        np.dot(h.T, delta, out=gw)
        gb[:] = delta.sum(axis=0)
        delta = delta @ layers[li][0].T
    bn = spec.branch_nodes
    for i in range(n_d):
        xi, z = cache[i]
        d = delta[:, i * bn:(i + 1) * bn] * (z > 0)
        gw, gb = glayers[i]
        np.dot(xi.T, d, out=gw)
        gb[:] = d.sum(axis=0)
    return loss, grad


def _scaling(x: np.ndarray, y: np.ndarray):
    x_mean = x.mean(axis=0)
    x_std = x.std(axis=0)
    x_std[x_std == 0] = 1.0
    y_mean = float(y.mean())
    y_std = float(y.std()) or 1.0
    return x_mean, x_std, y_mean, y_std


def train(spec: NetworkSpec, train_set, val_set=None, seed: int = 0, epochs: int | None = None,
          standardize: bool = True) -> tuple[NetworkWeights, dict]:
    """Mini-batch Adam on mean-square error.

    ``train_set`` and ``val_set`` are ``(features, targets)`` pairs in
    physical units. Scaling constants come from the training set only.
    Losses in the returned history are in standardized target units.
    """
    x_raw, y_raw = np.asarray(train_set[0], dtype=np.float64), np.asarray(train_set[1], dtype=np.float64)
    x_raw = as_matrix(x_raw, spec)
    if x_raw.shape[0] == 0 or x_raw.shape[0] != y_raw.shape[0]:
        raise ValueError("training set must be non-empty with one target per record")
    epochs = spec.epochs if epochs is None else int(epochs)

    weights = init_network(spec, seed)
    if standardize:
        weights.x_mean, weights.x_std, weights.y_mean, weights.y_std = _scaling(x_raw, y_raw)
    x = weights.standardize(x_raw)
    y = (y_raw - weights.y_mean) / weights.y_std
    if val_set is not None:
        xv = weights.standardize(val_set[0])
        yv = (np.asarray(val_set[1], dtype=np.float64) - weights.y_mean) / weights.y_std

    params = weights.params
    grad = np.empty_like(params)
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    lr = spec.learning_rate
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    n = x.shape[0]
    bs = spec.batch_size
    step = 0
    history = {"train_loss": [], "val_loss": []}
    for epoch in range(epochs):
        order = rng.permutation(n)
        for bi, start in enumerate(range(0, n, bs)):
            idx = order[start:start + bs]
            loss, _ = loss_and_grad(spec, params, x[idx], y[idx], grad)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {bi}")
            step += 1
            m *= ADAM_BETA1
            m += (1 - ADAM_BETA1) * grad
            v *= ADAM_BETA2
            v += (1 - ADAM_BETA2) * grad * grad
            step_size = lr * np.sqrt(1 - ADAM_BETA2**step) / (1 - ADAM_BETA1**step)
            params -= step_size * m / (np.sqrt(v) + ADAM_EPS * np.sqrt(1 - ADAM_BETA2**step))
        out, _ = _forward(spec, weights.layers, x)
        history["train_loss"].append(float(np.mean((out - y) ** 2)))
        if val_set is not None:
            out, _ = _forward(spec, weights.layers, xv)
            history["val_loss"].append(float(np.mean((out - yv) ** 2)))
    weights.meta = {
        "seed": int(seed),
        "epochs": epochs,
        "final_loss": history["train_loss"][-1] if epochs else None,
        "init": "glorot_uniform",
        "optimizer": f"adam(lr={lr}, beta1={ADAM_BETA1}, beta2={ADAM_BETA2}, eps={ADAM_EPS})",
        "shuffle": "per-epoch permutation",
    }
    return weights, history


def predict(weights: NetworkWeights, features):
    """Estimate in physical units (m, s or degrees)."""
    out = forward(weights, weights.standardize(features)) * weights.y_std + weights.y_mean
    if isinstance(features, FeatureVector) or np.ndim(features) == 1:
        return float(out[0])
    return out


# -- persistence --------------------------------------------------------------

def to_bytes(weights: NetworkWeights) -> bytes:
    header = json.dumps({"spec": weights.spec.as_dict(), "meta": weights.meta},
                        sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(header)), header,
             weights.x_mean.astype("<f8").tobytes(), weights.x_std.astype("<f8").tobytes(),
             struct.pack("<dd", weights.y_mean, weights.y_std)]
    for w, b in weights.layers:
        parts.append(np.ascontiguousarray(w).astype("<f8").tobytes())
        parts.append(b.astype("<f8").tobytes())
    return b"".join(parts)


def from_bytes(data: bytes) -> NetworkWeights:
    if data[:4] != MAGIC:
        raise ModelFormatError("bad magic bytes (not a SAWB model file)")
    try:
        version, hlen = struct.unpack_from("<HI", data, 4)
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format version {version}")
        pos = 10
        header = json.loads(data[pos:pos + hlen].decode())
        pos += hlen
        spec = NetworkSpec(**{**header["spec"], "dof_mask": tuple(header["spec"]["dof_mask"]),
                              "trunk_layers": tuple(header["spec"]["trunk_layers"])})
        width = spec.input_width
        body = np.frombuffer(data, dtype="<f8", offset=pos)
        expected = 2 * width + 2 + spec.n_params
        if body.size != expected:
            raise ModelFormatError(f"model body has {body.size} values, expected {expected}")
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None
    x_mean, x_std = body[:width].copy(), body[width:2 * width].copy()
    y_mean, y_std = float(body[2 * width]), float(body[2 * width + 1])
    params = body[2 * width + 2:].astype(np.float64)
    return NetworkWeights(spec, params, x_mean, x_std, y_mean, y_std, header["meta"])


def save_model(weights: NetworkWeights, path) -> None:
    Path(path).write_bytes(to_bytes(weights))


def load_model(path) -> NetworkWeights:
    return from_bytes(Path(path).read_bytes())
