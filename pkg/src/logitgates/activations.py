"""Two-input logit-space Boolean gates and baseline nonlinearities.

Exact gates (``*_il``) treat their inputs as logits of independent events and
return the logit of the combined event; they are evaluated through
log-probabilities so they stay accurate deep into the saturated regime.
Approximate gates (``*_ail``) are the piecewise-linear counterparts built
from comparisons and addition only. Each function has a hand-derived
analytical gradient; finite-difference agreement is enforced by the test
suite rather than assumed.

All functions are elementwise over floats or numpy arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import log1mexp, logit_from_logp, sigmoid, softplus

# ---------------------------------------------------------------------------
# Exact gates (via log-probabilities: log sigma(x) = -softplus(-x))
# ---------------------------------------------------------------------------


def and_il(x, y):
    """Logit of sigma(x)*sigma(y): the joint event for independent logits."""
    logp = -softplus(-np.asarray(x, dtype=np.float64)) - softplus(-y)
    return logit_from_logp(logp)


def or_il(x, y):
    """Logit of 1 - sigma(-x)*sigma(-y); De Morgan dual of and_il, bit-exact."""
    return -and_il(-np.asarray(x, dtype=np.float64), -np.asarray(y, dtype=np.float64))


def xnor_il(x, y):
    """Logit of sigma(x)sigma(y) + sigma(-x)sigma(-y) (both or neither)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    log_both = -softplus(-x) - softplus(-y)
    log_neither = -softplus(x) - softplus(y)
    return logit_from_logp(np.logaddexp(log_both, log_neither))


def and_il_grad(x, y):
    """Partials of and_il: d/dx = sigma(-x)/(1-p) with p = sigma(x)sigma(y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    logp = -softplus(-x) - softplus(-y)
    log1mp = log1mexp(logp)
    gx = np.exp(-softplus(x) - log1mp)
    gy = np.exp(-softplus(y) - log1mp)
    return gx, gy


def or_il_grad(x, y):
    """Partials of or_il; equal to the and_il partials at (-x, -y)."""
    return and_il_grad(-np.asarray(x, dtype=np.float64), -np.asarray(y, dtype=np.float64))


def xnor_il_grad(x, y):
    """Partials of xnor_il: d/dx = sigma(x)sigma(-x)tanh(y/2) / (p(1-p))."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    logp = np.logaddexp(-softplus(-x) - softplus(-y), -softplus(x) - softplus(y))
    neg_log_p1mp = -logp - log1mexp(logp)
    gx = np.exp(-softplus(x) - softplus(-x) + neg_log_p1mp) * np.tanh(y / 2.0)
    gy = np.exp(-softplus(y) - softplus(-y) + neg_log_p1mp) * np.tanh(x / 2.0)
    return gx, gy


# ---------------------------------------------------------------------------
# Approximate gates and baselines
# ---------------------------------------------------------------------------


def and_ail(x, y):
    """x + y in the both-negative quadrant, min(x, y) elsewhere."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.where((x < 0) & (y < 0), x + y, np.minimum(x, y))


def or_ail(x, y):
    """x + y in the both-positive quadrant, max(x, y) elsewhere."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.where((x > 0) & (y > 0), x + y, np.maximum(x, y))


def xnor_ail(x, y):
    """sign(x*y) * min(|x|, |y|); zero when either operand is zero."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.sign(x) * np.sign(y) * np.minimum(np.abs(x), np.abs(y))


def signed_geomean(x, y):
    """sign(x*y) * sqrt(|x*y|)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.sign(x) * np.sign(y) * np.sqrt(np.abs(x) * np.abs(y))


def max_pair(x, y):
    """Elementwise max over an operand pair (MaxOut with two pieces)."""
    return np.maximum(np.asarray(x, dtype=np.float64), y)


def min_pair(x, y):
    """Elementwise min over an operand pair."""
    return np.minimum(np.asarray(x, dtype=np.float64), y)


def relu(x):
    """max(0, x)."""
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


# Subgradient conventions on the measure-zero boundaries: the sum branch owns
# its closure (quadrant edges included), and min/max ties resolve to the
# x-partial. Any fixed deterministic choice works for SGD; this one keeps
# and/or duality consistent.


def and_ail_grad(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    in_sum = (x <= 0) & (y <= 0)
    x_branch = x <= y
    gx = np.where(in_sum, 1.0, np.where(x_branch, 1.0, 0.0))
    gy = np.where(in_sum, 1.0, np.where(x_branch, 0.0, 1.0))
    return gx, gy


def or_ail_grad(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    in_sum = (x >= 0) & (y >= 0)
    x_branch = x >= y
    gx = np.where(in_sum, 1.0, np.where(x_branch, 1.0, 0.0))
    gy = np.where(in_sum, 1.0, np.where(x_branch, 0.0, 1.0))
    return gx, gy


def xnor_ail_grad(x, y):
    # Zero operands get a (0, 0) subgradient, matching the function's odd
    # symmetry; elsewhere the smaller-magnitude operand carries the slope.
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dead = (x == 0) | (y == 0)
    x_branch = np.abs(x) <= np.abs(y)
    gx = np.where(dead, 0.0, np.where(x_branch, np.sign(y), 0.0))
    gy = np.where(dead, 0.0, np.where(x_branch, 0.0, np.sign(x)))
    return gx, gy


def signed_geomean_grad(x, y):
    # Diverges along the axes; pinned to (0, 0) there.
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dead = (x == 0) | (y == 0)
    ax = np.where(dead, 1.0, np.abs(x))
    ay = np.where(dead, 1.0, np.abs(y))
    gx = np.where(dead, 0.0, 0.5 * np.sign(y) * np.sqrt(ay / ax))
    gy = np.where(dead, 0.0, 0.5 * np.sign(x) * np.sqrt(ax / ay))
    return gx, gy


def max_pair_grad(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gx = np.where(x >= y, 1.0, 0.0)
    return gx, 1.0 - gx


def min_pair_grad(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gx = np.where(x <= y, 1.0, 0.0)
    return gx, 1.0 - gx


def relu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, 1.0, 0.0)


# ---------------------------------------------------------------------------
# Standardization constants under independent N(0, 1) operands
# ---------------------------------------------------------------------------

# Exact-gate rows are empirical reference constants (Monte Carlo, ~6e8
# samples); they are data, not formulas, and the verification suite re-checks
# them by independent sampling. Approximate-gate rows use the closed forms.
OR_AIL_MEAN = 1.0 / math.sqrt(2.0 * math.pi) + 1.0 / (2.0 * math.sqrt(math.pi))
OR_AIL_STD = math.sqrt(5.0 / 4.0 - 1.0 / (math.sqrt(2.0) * math.pi) - 1.0 / (4.0 * math.pi))
XNOR_AIL_STD = math.sqrt(1.0 - 2.0 / math.pi)

NORMALIZATION_TABLE = {
    ("or", "il"): (1.29895, 0.94834),
    ("and", "il"): (-1.29895, 0.94834),
    ("xnor", "il"): (0.0, 0.36641),
    ("or", "ail"): (OR_AIL_MEAN, OR_AIL_STD),
    ("and", "ail"): (-OR_AIL_MEAN, OR_AIL_STD),
    ("xnor", "ail"): (0.0, XNOR_AIL_STD),
}

GATE_KINDS = ("and", "or", "xnor")
RAW_2D_KINDS = ("signed_geomean", "max", "min")
RAW_1D_KINDS = ("relu",)
ALL_KINDS = GATE_KINDS + RAW_2D_KINDS + RAW_1D_KINDS

_VALUE = {
    ("and", "il"): and_il,
    ("or", "il"): or_il,
    ("xnor", "il"): xnor_il,
    ("and", "ail"): and_ail,
    ("or", "ail"): or_ail,
    ("xnor", "ail"): xnor_ail,
    ("signed_geomean", "raw"): signed_geomean,
    ("max", "raw"): max_pair,
    ("min", "raw"): min_pair,
}

_GRAD = {
    ("and", "il"): and_il_grad,
    ("or", "il"): or_il_grad,
    ("xnor", "il"): xnor_il_grad,
    ("and", "ail"): and_ail_grad,
    ("or", "ail"): or_ail_grad,
    ("xnor", "ail"): xnor_ail_grad,
    ("signed_geomean", "raw"): signed_geomean_grad,
    ("max", "raw"): max_pair_grad,
    ("min", "raw"): min_pair_grad,
}


@dataclass(frozen=True)
class Activation:
    """A gate or baseline nonlinearity plus its normalization mode.

    kind: one of and/or/xnor (families il or ail), or one of
    signed_geomean/max/min/relu (family raw). ``normalized`` standardizes the
    output by the table mean/std and is only valid for the gate kinds.
    """

    kind: str
    family: str = "raw"
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind in GATE_KINDS:
            if self.family not in ("il", "ail"):
                raise ValueError(f"{self.kind} requires family 'il' or 'ail'")
        else:
            if self.family != "raw":
                raise ValueError(f"{self.kind} only exists in family 'raw'")
            if self.normalized:
                raise ValueError(f"{self.kind} has no normalization constants")

    @property
    def arity(self) -> int:
        return 1 if self.kind in RAW_1D_KINDS else 2

    @property
    def name(self) -> str:
        if self.kind in GATE_KINDS:
            family = ("n" + self.family) if self.normalized else self.family
            return f"{self.kind}_{family}"
        return self.kind

    def __str__(self) -> str:
        return self.name


def parse_activation(name: str) -> Activation:
    """Inverse of Activation.name (e.g. 'or_ail', 'xnor_nil', 'relu')."""
    name = name.strip().lower()
    if name in RAW_2D_KINDS or name in RAW_1D_KINDS:
        return Activation(name, "raw")
    if "_" in name:
        kind, _, family = name.rpartition("_")
        normalized = family in ("nil", "nail")
        if normalized:
            family = family[1:]
        if kind in GATE_KINDS and family in ("il", "ail"):
            return Activation(kind, family, normalized)
    raise ValueError(f"cannot parse activation name {name!r}")


def apply(act: Activation, x, y=None):
    """Evaluate the activation; 2-input kinds require both operands."""
    if act.arity == 1:
        if y is not None:
            raise ValueError(f"{act.name} maps one input; got two operands")
        return relu(x)
    if y is None:
        raise ValueError(f"{act.name} maps an operand pair; y is missing")
    value = _VALUE[(act.kind, act.family)](x, y)
    if act.normalized:
        mean, std = NORMALIZATION_TABLE[(act.kind, act.family)]
        return (value - mean) / std
    return value


def gradient(act: Activation, x, y=None):
    """Analytical partials (d/dx, d/dy), or d/dx alone for 1-input kinds."""
    if act.arity == 1:
        if y is not None:
            raise ValueError(f"{act.name} maps one input; got two operands")
        return relu_grad(x)
    if y is None:
        raise ValueError(f"{act.name} maps an operand pair; y is missing")
    gx, gy = _GRAD[(act.kind, act.family)](x, y)
    if act.normalized:
        _, std = NORMALIZATION_TABLE[(act.kind, act.family)]
        return gx / std, gy / std
    return gx, gy
