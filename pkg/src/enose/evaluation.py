"""Confusion matrices, false-positive rates and the Z=3 vs Z=10 comparison."""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .core import N_CLASSES, ChemicalClass, Dataset, fit_scaler, Scaler
from .nn import (
    Network,
    NetworkConfig,
    TrainConfig,
    bias_add_count,
    forward,
    init_weights,
    multiply_add_count,
    train,
)

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray  # rows: true class, columns: predicted class

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES) or np.any(counts < 0):
            raise ValueError("confusion matrix must be 5x5 with non-negative counts")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_labels(cls, true, predicted) -> "ConfusionMatrix":
        counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        np.add.at(counts, (np.asarray(true, dtype=int), np.asarray(predicted, dtype=int)), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    fp_activations: int
    fp_rate: float
    threshold: float
    per_class_fp: tuple[int, ...]  # false activations of each output unit

    @property
    def samples(self) -> int:
        return self.confusion.total


def _check_threshold(threshold: float) -> None:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {threshold}")


def report_from_outputs(outputs, labels, threshold: float = DEFAULT_THRESHOLD) -> EvalReport:
    """Build a report from raw network outputs (n, 5) and true labels (n,)."""
    _check_threshold(threshold)
    outputs = np.asarray(outputs, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(labels) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    predicted = np.argmax(outputs, axis=1)  # first maximum wins ties
    confusion = ConfusionMatrix.from_labels(labels, predicted)
    non_target = np.ones_like(outputs, dtype=bool)
    non_target[np.arange(len(labels)), labels] = False
    fired = (outputs > threshold) & non_target
    fp = int(fired.sum())
    return EvalReport(
        confusion=confusion,
        accuracy=confusion.correct / confusion.total,
        fp_activations=fp,
        fp_rate=fp / (len(labels) * (N_CLASSES - 1)),
        threshold=float(threshold),
        per_class_fp=tuple(int(v) for v in fired.sum(axis=0)),
    )


def evaluate(network: Network, scaler: Scaler, dataset: Dataset,
             threshold: float = DEFAULT_THRESHOLD) -> EvalReport:
    _check_threshold(threshold)
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    outputs, _ = forward(network, scaler.transform(dataset.inputs()))
    return report_from_outputs(outputs, dataset.labels(), threshold)


# -- splitting ---------------------------------------------------------------


def stratified_split(dataset: Dataset, seed: int, train_fraction: float = 0.7) -> tuple[list[int], list[int]]:
    """Seeded per-class shuffle; the first round(fraction*n) of each class go to training."""
    rng = np.random.default_rng([seed, 2])
    labels = dataset.labels()
    train_idx, test_idx = [], []
    for c in range(N_CLASSES):
        idx = np.flatnonzero(labels == c)
        if len(idx) == 0:
            continue
        idx = idx[rng.permutation(len(idx))]
        k = int(round(train_fraction * len(idx)))
        train_idx.extend(int(i) for i in idx[:k])
        test_idx.extend(int(i) for i in idx[k:])
    return sorted(train_idx), sorted(test_idx)


def split_fingerprint(indices) -> str:
    return hashlib.sha256(",".join(str(int(i)) for i in indices).encode()).hexdigest()[:16]


# -- architecture comparison -------------------------------------------------


@dataclass(frozen=True)
class ArchitectureResult:
    hidden_size: int
    report: EvalReport
    final_mse: float
    train_seconds: float
    split_fingerprint: str

    @property
    def weight_multiply_adds(self) -> int:
        return multiply_add_count(self.hidden_size)

    @property
    def bias_adds(self) -> int:
        return bias_add_count(self.hidden_size)

    @property
    def total_ops(self) -> int:
        return self.weight_multiply_adds + self.bias_adds


@dataclass(frozen=True)
class ComparisonReport:
    results: tuple[ArchitectureResult, ...]
    train_size: int
    test_size: int
    seed: int
    threshold: float

    def by_hidden(self, z: int) -> ArchitectureResult:
        for r in self.results:
            if r.hidden_size == z:
                return r
        raise KeyError(z)


def train_and_split(dataset: Dataset, train_config: TrainConfig, hidden_size: int,
                    train_idx, activation: str = "exact") -> tuple[Network, Scaler, float]:
    train_set = dataset.subset(train_idx)
    scaler = fit_scaler(train_set)
    net = init_weights(NetworkConfig(hidden_size), train_config)
    net, report = train(net, train_set, scaler, train_config)
    if activation != "exact":
        net = net.with_activation(activation)
    return net, scaler, report.final_mse


def compare_architectures(dataset: Dataset, train_config: TrainConfig, hidden_sizes=(3, 10),
                          threshold: float = DEFAULT_THRESHOLD, activation: str = "exact") -> ComparisonReport:
    _check_threshold(threshold)
    hidden_sizes = list(hidden_sizes)
    if len(hidden_sizes) < 2:
        raise ValueError("comparison needs at least two hidden sizes")
    train_idx, test_idx = stratified_split(dataset, train_config.seed)
    test_set = dataset.subset(test_idx)
    fingerprint = split_fingerprint(test_idx)
    results = []
    for z in hidden_sizes:
        start = time.perf_counter()
        net, scaler, mse = train_and_split(dataset, train_config, z, train_idx, activation)
        elapsed = time.perf_counter() - start
        results.append(ArchitectureResult(z, evaluate(net, scaler, test_set, threshold), mse, elapsed, fingerprint))
    return ComparisonReport(tuple(results), len(train_idx), len(test_idx), train_config.seed, float(threshold))


# -- formatting --------------------------------------------------------------


def _matrix_block(counts) -> list[str]:
    return [" ".join(str(int(v)) for v in row) for row in counts]


def eval_report_text(report: EvalReport, title: str = "evaluation") -> str:
    labels = [c.label for c in ChemicalClass]
    width = max(len(s) for s in labels) + 2
    lines = [f"{title}: {report.samples} samples, threshold {report.threshold:g}"]
    lines.append("true \\ pred".ljust(width + 2) + "".join(f"{i:>6d}" for i in range(N_CLASSES)))
    for c, row in zip(ChemicalClass, report.confusion.counts):
        lines.append(f"{int(c)} {c.label}".ljust(width + 2) + "".join(f"{int(v):>6d}" for v in row))
    lines.append(f"accuracy        {report.accuracy:.4f}")
    lines.append(f"fp activations  {report.fp_activations}")
    lines.append(f"fp rate         {report.fp_rate:.4f}")
    lines.append("fp per output   " + " ".join(str(v) for v in report.per_class_fp))
    return "\n".join(lines) + "\n"


def eval_report_kv(report: EvalReport, prefix: str = "") -> str:
    lines = [
        f"{prefix}samples = {report.samples}",
        f"{prefix}threshold = {report.threshold!r}",
        f"{prefix}accuracy = {report.accuracy!r}",
        f"{prefix}fp_activations = {report.fp_activations}",
        f"{prefix}fp_rate = {report.fp_rate!r}",
        f"{prefix}fp_per_output = " + " ".join(str(v) for v in report.per_class_fp),
        f"{prefix}confusion =",
    ]
    lines += ["  " + row for row in _matrix_block(report.confusion.counts)]
    return "\n".join(lines) + "\n"


def comparison_text(report: ComparisonReport, timings: bool = True) -> str:
    lines = [
        f"architecture comparison: train {report.train_size}, test {report.test_size}, "
        f"seed {report.seed}, threshold {report.threshold:g}",
        f"split fingerprint {report.results[0].split_fingerprint}",
        "",
        f"{'net':<10}{'accuracy':>10}{'fp_rate':>10}{'fp_act':>8}{'mac':>6}{'bias':>6}{'ops':>6}{'mse':>12}"
        + (f"{'train_s':>10}" if timings else ""),
    ]
    for r in report.results:
        line = (f"{f'7-{r.hidden_size}-5':<10}{r.report.accuracy:>10.4f}{r.report.fp_rate:>10.4f}"
                f"{r.report.fp_activations:>8d}{r.weight_multiply_adds:>6d}{r.bias_adds:>6d}"
                f"{r.total_ops:>6d}{r.final_mse:>12.6f}")
        if timings:
            line += f"{r.train_seconds:>10.2f}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def comparison_kv(report: ComparisonReport, timings: bool = True) -> str:
    lines = [
        f"seed = {report.seed}",
        f"train_size = {report.train_size}",
        f"test_size = {report.test_size}",
        f"hidden_sizes = " + " ".join(str(r.hidden_size) for r in report.results),
    ]
    out = "\n".join(lines) + "\n"
    for r in report.results:
        p = f"z{r.hidden_size}."
        out += (f"{p}split_fingerprint = {r.split_fingerprint}\n"
                f"{p}weight_multiply_adds = {r.weight_multiply_adds}\n"
                f"{p}bias_adds = {r.bias_adds}\n"
                f"{p}final_mse = {r.final_mse!r}\n")
        if timings:
            out += f"{p}train_seconds = {r.train_seconds:.3f}\n"
        out += eval_report_kv(r.report, prefix=p)
    return out
