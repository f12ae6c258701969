"""Optimizers, learning-rate schedule, losses, and the training loop."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .network import Network
from .numerics import sigmoid, softplus


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int
    max_lr: float = 0.01
    optimizer: str = "adam"        # "adam" | "sgd"
    momentum: float = 0.9          # sgd only
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: str = "one-cycle"    # "one-cycle" | "constant"
    peak_fraction: float = 0.3
    weight_decay: float = 0.0
    seed: int = 0
    loss: str = "bce-with-logits"  # "bce-with-logits" | "cross-entropy" | "mse"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if min(self.max_lr, self.weight_decay) < 0:
            raise ValueError("rates must be >= 0")
        if self.schedule == "one-cycle" and not 0 < self.peak_fraction < 1:
            raise ValueError("peak_fraction must lie in (0, 1)")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in ("bce-with-logits", "cross-entropy", "mse"):
            raise ValueError(f"unknown loss {self.loss!r}")


class NaNLossError(RuntimeError):
    """Training hit a non-finite loss; carries the first offending location."""

    def __init__(self, epoch, batch, layer):
        self.epoch, self.batch, self.layer = epoch, batch, layer
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}, first NaN in {layer}")


# ---------------------------------------------------------------------------
# Schedule
# ---------------------------------------------------------------------------

ONE_CYCLE_START_DIV = 25.0
ONE_CYCLE_END_DIV = 1e4


def one_cycle_lr(step: int, total_steps: int, max_lr: float, peak_fraction: float = 0.3) -> float:
    """Linear warmup from max_lr/25 to max_lr, then cosine decay to max_lr/1e4."""
    if not 0 <= step < total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps})")
    start = max_lr / ONE_CYCLE_START_DIV
    end = max_lr / ONE_CYCLE_END_DIV
    peak = peak_fraction * total_steps
    if step <= peak:
        return start + (max_lr - start) * (step / peak if peak > 0 else 1.0)
    span = (total_steps - 1) - peak
    if span <= 0:
        return end
    t = (step - peak) / span
    return end + (max_lr - end) * 0.5 * (1.0 + math.cos(math.pi * t))


# ---------------------------------------------------------------------------
# Optimizers (coupled weight decay: added to the gradient, weights only)
# ---------------------------------------------------------------------------


class AdamState:
    def __init__(self):
        self.t = 0
        self.m = {}
        self.v = {}


def adam_step(net: Network, state: AdamState, lr, beta1=0.9, beta2=0.999,
              eps=1e-8, weight_decay=0.0):
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, param, grad, decayed in net.parameters():
        g = grad + weight_decay * param if (weight_decay and decayed) else grad
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        v = state.v[name]
        m *= beta1
        m += (1 - beta1) * g
        v *= beta2
        v += (1 - beta2) * g * g
        param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


class SgdState:
    def __init__(self):
        self.velocity = {}


def sgd_step(net: Network, state: SgdState, lr, momentum=0.9, weight_decay=0.0):
    for name, param, grad, decayed in net.parameters():
        g = grad + weight_decay * param if (weight_decay and decayed) else grad
        v = state.velocity.get(name)
        if v is None:
            v = state.velocity[name] = np.zeros_like(param)
        v *= momentum
        v += g
        param -= lr * v


# ---------------------------------------------------------------------------
# Losses: return (mean loss, gradient w.r.t. logits/outputs)
# ---------------------------------------------------------------------------


def bce_with_logits(z: np.ndarray, targets: np.ndarray):
    """Binary cross-entropy on logits, via softplus(-t*z) with t in {-1, +1}."""
    t = 2.0 * targets - 1.0
    loss = float(np.mean(softplus(-t * z)))
    grad = (-t * sigmoid(-t * z)) / z.size
    return loss, grad


def cross_entropy(z: np.ndarray, labels: np.ndarray):
    """Softmax cross-entropy with integer class labels."""
    labels = np.asarray(labels).astype(int).ravel()
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    n = z.shape[0]
    loss = float(-log_probs[np.arange(n), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def mse(z: np.ndarray, targets: np.ndarray):
    diff = z - targets
    loss = float(np.mean(diff * diff))
    return loss, (2.0 / z.size) * diff


_LOSSES = {"bce-with-logits": bce_with_logits, "cross-entropy": cross_entropy, "mse": mse}


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def evaluate(net: Network, ds: Dataset):
    """(loss, metric) on a dataset; metric is accuracy or RMSE by task."""
    z = net.forward(ds.inputs, training=False)
    if ds.task == "binary":
        loss, _ = bce_with_logits(z, ds.targets)
        metric = float(np.mean((z >= 0) == (ds.targets >= 0.5)))
    elif ds.task == "classification":
        loss, _ = cross_entropy(z, ds.targets)
        metric = float(np.mean(z.argmax(axis=1) == np.asarray(ds.targets).ravel()))
    else:
        loss, _ = mse(z, ds.targets)
        metric = math.sqrt(loss)
    return loss, metric


def metric_name(task: str) -> str:
    return "rmse" if task == "regression" else "accuracy"


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


@dataclass
class TrainReport:
    task: str
    config: dict
    epochs: list
    final: dict
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        if not self.epochs:
            return ""
        keys = list(self.epochs[0])
        lines = [",".join(keys)]
        lines += [",".join(repr(row[k]) for k in keys) for row in self.epochs]
        return "\n".join(lines) + "\n"


def _loss_targets(ds: Dataset):
    if ds.task == "classification":
        return np.asarray(ds.targets).astype(int).ravel()
    return ds.targets


def _first_nan_layer(net: Network) -> str:
    for i, out in enumerate(getattr(net, "layer_outputs", [])):
        if not np.all(np.isfinite(out)):
            return f"layer{i} ({type(net.specs[i]).__name__})"
    return "loss"


def fit(net: Network, train_ds: Dataset, config: TrainConfig, val_ds: Dataset | None = None) -> TrainReport:
    """Train the network; deterministic for fixed (net seed, config, data)."""
    if train_ds.inputs.shape[1] != net.input_width:
        raise ValueError("dataset width does not match network input width")
    loss_fn = _LOSSES[config.loss]
    targets = _loss_targets(train_ds)
    n = train_ds.inputs.shape[0]
    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = steps_per_epoch * config.epochs
    rng = np.random.default_rng(config.seed)
    opt_state = AdamState() if config.optimizer == "adam" else SgdState()

    epoch_rows = []
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for b in range(steps_per_epoch):
            idx = order[b * config.batch_size:(b + 1) * config.batch_size]
            z = net.forward(train_ds.inputs[idx], training=True)
            loss, dz = loss_fn(z, targets[idx])
            if not math.isfinite(loss):
                raise NaNLossError(epoch, b, _first_nan_layer(net))
            net.backward(dz)
            if config.schedule == "one-cycle":
                lr = one_cycle_lr(step, total_steps, config.max_lr, config.peak_fraction)
            else:
                lr = config.max_lr
            if config.optimizer == "adam":
                adam_step(net, opt_state, lr, config.beta1, config.beta2,
                          config.eps, config.weight_decay)
            else:
                sgd_step(net, opt_state, lr, config.momentum, config.weight_decay)
            step += 1
            batch_losses.append(loss)
        train_loss, train_metric = evaluate(net, train_ds)
        epoch_rows.append({
            "epoch": epoch,
            "mean_batch_loss": float(np.mean(batch_losses)),
            "train_loss": train_loss,
            f"train_{metric_name(train_ds.task)}": train_metric,
        })

    final = {"train_loss": train_loss,
             f"train_{metric_name(train_ds.task)}": train_metric}
    if val_ds is not None:
        val_loss, val_metric = evaluate(net, val_ds)
        final["val_loss"] = val_loss
        final[f"val_{metric_name(val_ds.task)}"] = val_metric
    return TrainReport(task=train_ds.task, config=asdict(config),
                       epochs=epoch_rows, final=final)
