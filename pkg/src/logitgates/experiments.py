"""Experiment configs: task registry, network builder, and the runner."""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data
from .data import Dataset
from .ensemble import parse_spec
from .network import ActBlock, Affine, BatchNorm, Network
from .train import TrainConfig, TrainReport, evaluate, fit

SEED_ENV_VAR = "LOGITGATES_SEED"
MNIST_DIR_ENV_VAR = "LOGITGATES_MNIST_DIR"

TASK_DIMS = {
    "parity4": (4, 1),
    "nested_xnor8": (8, 1),
    "xor2": (2, 1),
    "mnist": (784, 10),
}

DEFAULT_LOSS = {
    "parity4": "bce-with-logits",
    "nested_xnor8": "mse",
    "xor2": "bce-with-logits",
    "mnist": "cross-entropy",
}


@dataclass
class ExperimentConfig:
    task: str
    activation: str
    widths: list
    train: TrainConfig
    output_dir: str | None = None
    batch_norm: bool = False
    n_train: int = 1024
    n_val: int = 1024
    mnist_dir: str | None = None

    def __post_init__(self):
        if self.task not in TASK_DIMS:
            raise ValueError(f"unknown task {self.task!r}")
        parse_spec(self.activation)  # validates the text form


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    train_raw = dict(raw.pop("train", {}))
    task = raw.get("task")
    if task in DEFAULT_LOSS:
        train_raw.setdefault("loss", DEFAULT_LOSS[task])
    if "seed" not in train_raw and os.environ.get(SEED_ENV_VAR):
        train_raw["seed"] = int(os.environ[SEED_ENV_VAR])
    return ExperimentConfig(train=TrainConfig(**train_raw), **raw)


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return config_from_dict(json.load(f))


def bundled_config_path(name: str) -> Path:
    here = Path(__file__).parent / "configs"
    candidate = here / (name if name.endswith(".json") else name + ".json")
    if not candidate.exists():
        available = sorted(p.stem for p in here.glob("*.json"))
        raise FileNotFoundError(f"no bundled config {name!r}; available: {available}")
    return candidate


def resolve_config(path_or_name: str) -> ExperimentConfig:
    p = Path(path_or_name)
    if p.exists():
        return load_config(p)
    return load_config(bundled_config_path(path_or_name))


# ---------------------------------------------------------------------------
# Network construction
# ---------------------------------------------------------------------------


def build_network(task: str, widths, activation: str, seed: int,
                  batch_norm: bool = False) -> Network:
    """Affine -> [batch norm] -> activation block per width, then the head."""
    input_width, output_width = TASK_DIMS[task]
    spec = parse_spec(activation)
    layers = []
    current = input_width
    for w in widths:
        layers.append(Affine(current, int(w)))
        if batch_norm:
            layers.append(BatchNorm(int(w)))
        layers.append(ActBlock(spec))
        current = spec.out_channels(int(w))
    layers.append(Affine(current, output_width))
    return Network(layers, seed=seed)


def param_count(net: Network) -> int:
    return sum(p.size for _, p, _, _ in net.parameters())


def param_count_for(task: str, widths, activation: str, batch_norm: bool = False) -> int:
    """Trainable parameter count of build_network's output, without building it."""
    input_width, output_width = TASK_DIMS[task]
    spec = parse_spec(activation)
    total = 0
    current = input_width
    for w in widths:
        total += current * w + w          # affine
        if batch_norm:
            total += 2 * w                # gamma, beta
        current = spec.out_channels(int(w))
    return total + current * output_width + output_width


def equal_param_relu_widths(reference: Network, task: str, n_hidden: int,
                            batch_norm: bool = False) -> list:
    """Hidden width (repeated n_hidden times) matching a reference's parameters."""
    target = param_count(reference)
    best_w, best_gap = 1, float("inf")
    for w in range(1, 4097):
        n = param_count_for(task, [w] * n_hidden, "relu", batch_norm)
        gap = abs(n - target)
        if gap < best_gap:
            best_w, best_gap = w, gap
    return [best_w] * n_hidden


# ---------------------------------------------------------------------------
# Datasets per task
# ---------------------------------------------------------------------------


def _mnist_paths(mnist_dir: str | None):
    root = Path(mnist_dir or os.environ.get(MNIST_DIR_ENV_VAR) or "data/mnist")
    return {
        "train_images": root / "train-images-idx3-ubyte",
        "train_labels": root / "train-labels-idx1-ubyte",
        "test_images": root / "t10k-images-idx3-ubyte",
        "test_labels": root / "t10k-labels-idx1-ubyte",
    }


def mnist_available(mnist_dir: str | None = None) -> bool:
    return all(p.exists() for p in _mnist_paths(mnist_dir).values())


def task_datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """(train, validation/evaluation) pair for the configured task."""
    seed = cfg.train.seed
    if cfg.task == "parity4":
        return data.gen_parity4(cfg.n_train, seed), data.parity4_lattice()
    if cfg.task == "nested_xnor8":
        return (data.gen_nested_xnor8(cfg.n_train, seed),
                data.gen_nested_xnor8(cfg.n_val, seed + 1_000_003))
    if cfg.task == "xor2":
        ds = data.gen_xor2()
        return ds, ds
    paths = _mnist_paths(cfg.mnist_dir)
    missing = [str(p) for p in paths.values() if not p.exists()]
    if missing:
        raise FileNotFoundError(f"MNIST IDX files not found: {missing}")
    return (data.load_mnist_idx(paths["train_images"], paths["train_labels"]),
            data.load_mnist_idx(paths["test_images"], paths["test_labels"]))


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> tuple[TrainReport, Network]:
    train_ds, val_ds = task_datasets(cfg)
    net = build_network(cfg.task, cfg.widths, cfg.activation, cfg.train.seed,
                        cfg.batch_norm)
    report = fit(net, train_ds, cfg.train, val_ds)
    report.extras["task"] = cfg.task
    report.extras["activation"] = cfg.activation
    report.extras["widths"] = list(cfg.widths)
    report.extras["param_count"] = param_count(net)

    if cfg.task == "parity4":
        lattice = data.parity4_lattice()
        _, acc = evaluate(net, lattice)
        report.extras["lattice_accuracy"] = acc
        report.extras["lattice_correct"] = int(round(acc * lattice.n))
    elif cfg.task == "xor2":
        _, acc = evaluate(net, val_ds)
        report.extras["train_points_correct"] = int(round(acc * 4))

    out = Path(output_dir) if output_dir else (Path(cfg.output_dir) if cfg.output_dir else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json())
        (out / "curves.csv").write_text(report.to_csv())
        net.save(out / "model.bin")
        if cfg.task == "xor2":
            export_xor_surface(net, out / "surface.csv")
    return report, net


def export_xor_surface(net: Network, path, step: float = 0.05):
    """Decision surface over [-2, 2]^2: CSV of x, y, output probability."""
    from .numerics import sigmoid

    grid = data.xor2_grid(step)
    probs = sigmoid(net.forward(grid, training=False)).ravel()
    cols = np.column_stack([grid, probs])
    np.savetxt(path, cols, delimiter=",", header="x,y,prob", comments="", fmt="%.12g")
