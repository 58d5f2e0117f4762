"""7-Z-5 log-sigmoid feedforward network, online backprop with momentum.

Inference can run either with the exact logistic function or with a
precomputed lookup table, so that a deployed classifier needs only two
matrix-vector products and table reads.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .core import N_CHANNELS, N_CLASSES, Dataset, Scaler, encode_one_hot

INPUT_SIZE = N_CHANNELS
OUTPUT_SIZE = N_CLASSES
ACTIVATIONS = ("exact", "table")

MODEL_MAGIC = "ENOSE-MODEL v1"


class ModelFormatError(ValueError):
    pass


class VersionMismatchError(ModelFormatError):
    pass


class DimensionMismatchError(ModelFormatError):
    pass


class CorruptModelError(ModelFormatError):
    pass


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


# -- activation --------------------------------------------------------------


def log_sigmoid(x):
    """Logistic function 1/(1+e^-x), stable for large |x|; scalar or array."""
    x = np.asarray(x, dtype=float)
    z = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SigmoidTable:
    lower: float
    upper: float
    values: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.size - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.size)


def build_sigmoid_table(lower: float = -8.0, upper: float = 8.0, n: int = 2048) -> SigmoidTable:
    if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
        raise ValueError(f"invalid table bounds [{lower}, {upper}]")
    if int(n) != n or n < 2:
        raise ValueError(f"table needs at least 2 entries, got {n}")
    values = log_sigmoid(np.linspace(lower, upper, int(n)))
    values.setflags(write=False)
    return SigmoidTable(float(lower), float(upper), values)


def lookup_sigmoid(table: SigmoidTable, x):
    """Linearly interpolated table read; clamps outside [lower, upper]."""
    x = np.asarray(x, dtype=float)
    pos = (np.clip(x, table.lower, table.upper) - table.lower) / table.step
    i = np.minimum(np.floor(pos).astype(int), table.size - 2)
    frac = pos - i
    lo = table.values[i]
    hi = table.values[i + 1]
    out = lo + frac * (hi - lo)
    return float(out) if out.ndim == 0 else out


# -- network -----------------------------------------------------------------


@dataclass(frozen=True)
class NetworkConfig:
    hidden_size: int = 3
    activation: str = "exact"
    table_lower: float = -8.0
    table_upper: float = 8.0
    table_size: int = 2048

    input_size = INPUT_SIZE
    output_size = OUTPUT_SIZE

    def __post_init__(self):
        if int(self.hidden_size) != self.hidden_size or self.hidden_size < 1:
            raise ValueError(f"hidden size must be a positive integer, got {self.hidden_size}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        # validates the table parameters eagerly
        build_sigmoid_table(self.table_lower, self.table_upper, self.table_size)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    epochs: int = 1000
    seed: int = 0
    init_half_range: float = 0.5

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if self.init_half_range < 0:
            raise ValueError("init_half_range must be non-negative")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Network:
    w1: np.ndarray  # (Z, 7)
    b1: np.ndarray  # (Z,)
    w2: np.ndarray  # (5, Z)
    b2: np.ndarray  # (5,)
    config: NetworkConfig

    def __post_init__(self):
        z = self.config.hidden_size
        for name, shape in (("w1", (z, INPUT_SIZE)), ("b1", (z,)), ("w2", (OUTPUT_SIZE, z)), ("b2", (OUTPUT_SIZE,))):
            arr = _frozen(getattr(self, name))
            if arr.shape != shape:
                raise DimensionMismatchError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite weights")
            object.__setattr__(self, name, arr)
        table = build_sigmoid_table(self.config.table_lower, self.config.table_upper, self.config.table_size) \
            if self.config.activation == "table" else None
        object.__setattr__(self, "_table", table)

    @property
    def hidden_size(self) -> int:
        return self.config.hidden_size

    def params(self) -> tuple[np.ndarray, ...]:
        return self.w1, self.b1, self.w2, self.b2

    def with_activation(self, activation: str) -> "Network":
        return replace(self, config=replace(self.config, activation=activation))

    def activate(self, x):
        if self._table is None:
            return log_sigmoid(x)
        return lookup_sigmoid(self._table, x)

    def multiply_adds(self) -> int:
        return multiply_add_count(self.hidden_size)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.config == other.config and all(
            np.array_equal(a, b) for a, b in zip(self.params(), other.params())
        )


def multiply_add_count(hidden_size: int) -> int:
    """Weight multiply-adds per inference, 7Z + 5Z; bias adds are counted separately."""
    return INPUT_SIZE * hidden_size + OUTPUT_SIZE * hidden_size


def bias_add_count(hidden_size: int) -> int:
    return hidden_size + OUTPUT_SIZE


def init_weights(config: NetworkConfig, train_config: TrainConfig) -> Network:
    rng = np.random.default_rng(train_config.seed)
    r = train_config.init_half_range
    z = config.hidden_size
    w1 = rng.uniform(-r, r, size=(z, INPUT_SIZE))
    b1 = rng.uniform(-r, r, size=z)
    w2 = rng.uniform(-r, r, size=(OUTPUT_SIZE, z))
    b2 = rng.uniform(-r, r, size=OUTPUT_SIZE)
    # uniform(-0, 0) yields signed zeros; normalise them
    return Network(w1 + 0.0, b1 + 0.0, w2 + 0.0, b2 + 0.0, config)


def forward(network: Network, x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(output, hidden)`` for one input of length 7 or an (n, 7) batch."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (INPUT_SIZE,) or x.ndim > 2:
        raise DimensionMismatchError(f"expected input of length {INPUT_SIZE}, got shape {x.shape}")
    hidden = network.activate(x @ network.w1.T + network.b1)
    output = network.activate(hidden @ network.w2.T + network.b2)
    return output, hidden


@dataclass(frozen=True, eq=False)
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def as_tuple(self) -> tuple[np.ndarray, ...]:
        return self.w1, self.b1, self.w2, self.b2


def _backprop(w2, x, t, hidden, output):
    delta_out = (output - t) * output * (1.0 - output)
    delta_hid = (w2.T @ delta_out) * hidden * (1.0 - hidden)
    return np.outer(delta_hid, x), delta_hid, np.outer(delta_out, hidden), delta_out


def gradient(network: Network, x, target) -> Gradients:
    """Gradient of E = sum((o - t)^2) / 2 for one sample."""
    if network.config.activation != "exact":
        raise ValueError("gradients are only defined for exact-activation networks")
    x = np.asarray(x, dtype=float)
    t = np.asarray(target, dtype=float)
    if x.shape != (INPUT_SIZE,) or t.shape != (OUTPUT_SIZE,):
        raise DimensionMismatchError(f"bad sample shapes {x.shape}, {t.shape}")
    output, hidden = forward(network, x)
    return Gradients(*_backprop(network.w2, x, t, hidden, output))


def sample_error(network: Network, x, target) -> float:
    output, _ = forward(network, x)
    return 0.5 * float(np.sum((output - np.asarray(target, dtype=float)) ** 2))


def mean_squared_error(network: Network, inputs: np.ndarray, targets: np.ndarray) -> float:
    output, _ = forward(network, inputs)
    return float(np.mean((output - targets) ** 2))


# -- training ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainReport:
    history: tuple[float, ...]
    epochs: int

    @property
    def final_mse(self) -> float:
        return self.history[-1]


def momentum_step(params, velocities, grads, learning_rate: float, momentum: float) -> None:
    """In place: v <- momentum*v - lr*g, then p <- p + v."""
    for p, v, g in zip(params, velocities, grads):
        v *= momentum
        v -= learning_rate * g
        p += v


def shuffle_rng(seed: int) -> np.random.Generator:
    """Generator for per-epoch visiting order, independent of the init stream."""
    return np.random.default_rng([seed, 1])


def train(network: Network, dataset: Dataset, scaler: Scaler, config: TrainConfig) -> tuple[Network, TrainReport]:
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    if network.config.activation != "exact":
        raise ValueError("training requires an exact-activation network")
    inputs = scaler.transform(dataset.inputs())
    targets = np.array([encode_one_hot(s.label) for s in dataset.samples])
    return train_arrays(network, inputs, targets, config)


def train_arrays(network: Network, inputs, targets, config: TrainConfig) -> tuple[Network, TrainReport]:
    """Online training on already-normalized inputs and one-hot targets."""
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = len(inputs)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")

    w1, b1, w2, b2 = (p.copy() for p in network.params())
    params = (w1, b1, w2, b2)
    velocities = tuple(np.zeros_like(p) for p in params)
    lr, mom = config.learning_rate, config.momentum
    rng = shuffle_rng(config.seed)
    history = []

    for epoch in range(config.epochs):
        for i in rng.permutation(n):
            x, t = inputs[i], targets[i]
            hidden = log_sigmoid(w1 @ x + b1)
            output = log_sigmoid(w2 @ hidden + b2)
            grads = _backprop(w2, x, t, hidden, output)
            momentum_step(params, velocities, grads, lr, mom)
        out = log_sigmoid(log_sigmoid(inputs @ w1.T + b1) @ w2.T + b2)
        loss = float(np.mean((out - targets) ** 2))
        if not math.isfinite(loss) or not all(np.all(np.isfinite(p)) for p in params):
            raise DivergenceError(epoch, loss)
        history.append(loss)

    trained = Network(w1, b1, w2, b2, network.config)
    return trained, TrainReport(tuple(history), len(history))


# -- persistence -------------------------------------------------------------


def _row(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dumps_model(network: Network, scaler: Scaler) -> str:
    cfg = network.config
    lines = [
        MODEL_MAGIC,
        f"dims {INPUT_SIZE} {cfg.hidden_size} {OUTPUT_SIZE}",
        f"activation {cfg.activation} {_row([cfg.table_lower, cfg.table_upper])} {cfg.table_size}",
        "scaler " + _row(list(scaler.mins) + list(scaler.maxs)),
    ]
    lines += [_row(r) for r in network.w1]
    lines.append(_row(network.b1))
    lines += [_row(r) for r in network.w2]
    lines.append(_row(network.b2))
    return "\n".join(lines) + "\n"


def save_model(network: Network, scaler: Scaler, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_model(network, scaler))


def _floats(tokens, what: str) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise CorruptModelError(f"non-numeric value in {what}") from None


def loads_model(text: str) -> tuple[Network, Scaler]:
    if not text.endswith("\n"):
        raise CorruptModelError("model file is truncated (no final newline)")
    lines = text.split("\n")[:-1]
    if not lines or lines[0].strip() != MODEL_MAGIC:
        head = lines[0].strip() if lines else ""
        if head.startswith("ENOSE-MODEL"):
            raise VersionMismatchError(f"unsupported model version {head!r}, expected {MODEL_MAGIC!r}")
        raise CorruptModelError("missing model header")
    if len(lines) < 4:
        raise CorruptModelError("model header is incomplete")

    dims = lines[1].split()
    if len(dims) != 4 or dims[0] != "dims":
        raise CorruptModelError("malformed dims line")
    try:
        n_in, z, n_out = (int(d) for d in dims[1:])
    except ValueError:
        raise CorruptModelError("malformed dims line") from None
    if n_in != INPUT_SIZE or n_out != OUTPUT_SIZE or z < 1:
        raise DimensionMismatchError(f"unsupported dims {n_in}-{z}-{n_out}")

    act = lines[2].split()
    if len(act) != 5 or act[0] != "activation":
        raise CorruptModelError("malformed activation line")
    lower, upper = _floats(act[2:4], "activation line")
    try:
        config = NetworkConfig(z, act[1], lower, upper, int(act[4]))
    except ValueError as exc:
        raise CorruptModelError(f"bad activation line: {exc}") from None

    sc = lines[3].split()
    if not sc or sc[0] != "scaler" or len(sc) != 1 + 2 * INPUT_SIZE:
        raise CorruptModelError("malformed scaler line")
    sv = _floats(sc[1:], "scaler line")
    try:
        scaler = Scaler(tuple(sv[:INPUT_SIZE]), tuple(sv[INPUT_SIZE:]))
    except ValueError as exc:
        raise CorruptModelError(f"bad scaler: {exc}") from None

    body = [_floats(line.split(), f"line {k + 5}") for k, line in enumerate(lines[4:])]
    w1_rows = 0
    while w1_rows < len(body) and len(body[w1_rows]) == INPUT_SIZE and w1_rows <= z:
        w1_rows += 1
    # a b1 row of length 7 is only possible when z == 7
    if z == INPUT_SIZE:
        w1_rows = min(w1_rows, z)
    if w1_rows != z:
        raise DimensionMismatchError(f"dims declare Z={z} but file has {w1_rows} input-weight rows")
    expected = [INPUT_SIZE] * z + [z] + [z] * OUTPUT_SIZE + [OUTPUT_SIZE]
    if len(body) != len(expected):
        raise CorruptModelError(f"expected {len(expected)} weight rows, found {len(body)}")
    for k, (row, width) in enumerate(zip(body, expected)):
        if len(row) != width:
            raise DimensionMismatchError(f"weight row {k + 1} has {len(row)} values, expected {width}")
    w1 = np.array(body[:z])
    b1 = np.array(body[z])
    w2 = np.array(body[z + 1:z + 1 + OUTPUT_SIZE])
    b2 = np.array(body[-1])
    try:
        return Network(w1, b1, w2, b2, config), scaler
    except ValueError as exc:
        raise CorruptModelError(str(exc)) from None


def load_model(path: str | os.PathLike) -> tuple[Network, Scaler]:
    with open(path, encoding="ascii", errors="replace", newline="") as fh:
        return loads_model(fh.read())
