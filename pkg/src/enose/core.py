"""Domain types shared by every stage of the e-nose pipeline.

A reading is seven numbers in a fixed order: five MOS gas-sensor responses
followed by relative humidity and temperature.  Labels are one of five
chemical classes, with ``NONE`` meaning clean air.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CHANNELS = ("mq2", "mq135", "mq3", "tgs2610", "tgs2611", "humidity", "temperature")
GAS_CHANNELS = CHANNELS[:5]
N_CHANNELS = len(CHANNELS)
N_CLASSES = 5

CSV_HEADER = CHANNELS + ("label",)


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset files."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ChemicalClass(enum.IntEnum):
    NONE = 0
    ACETONE = 1
    FLOOR_CLEANER = 2
    ISOPROPYL_ALCOHOL = 3
    LIGHTER_GAS = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ChemicalClass":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown label {label!r}") from None


@dataclass(frozen=True)
class SensorFrame:
    """One 7-channel reading, ordered as :data:`CHANNELS`."""

    channels: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.channels)
        if len(values) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channels, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite channel value in {values}")
        object.__setattr__(self, "channels", values)

    @classmethod
    def from_values(cls, *values: float) -> "SensorFrame":
        return cls(tuple(values))

    def as_array(self) -> np.ndarray:
        return np.array(self.channels, dtype=float)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.channels[CHANNELS.index(key)]
        return self.channels[key]


@dataclass(frozen=True)
class LabeledSample:
    frame: SensorFrame
    label: ChemicalClass

    def __post_init__(self):
        object.__setattr__(self, "label", ChemicalClass(self.label))


@dataclass(frozen=True)
class Dataset:
    samples: tuple[LabeledSample, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def inputs(self) -> np.ndarray:
        """Raw channel values as an (n, 7) array."""
        if not self.samples:
            return np.empty((0, N_CHANNELS))
        return np.array([s.frame.channels for s in self.samples], dtype=float)

    def labels(self) -> np.ndarray:
        return np.array([int(s.label) for s in self.samples], dtype=int)

    def subset(self, indices: Iterable[int], provenance: str | None = None) -> "Dataset":
        picked = tuple(self.samples[i] for i in indices)
        return Dataset(picked, self.provenance if provenance is None else provenance)

    def class_counts(self) -> dict[ChemicalClass, int]:
        counts = {c: 0 for c in ChemicalClass}
        for s in self.samples:
            counts[s.label] += 1
        return counts


@dataclass(frozen=True)
class Scaler:
    """Per-channel min-max normalization to [0, 1]."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        mins = tuple(float(v) for v in self.mins)
        maxs = tuple(float(v) for v in self.maxs)
        if len(mins) != N_CHANNELS or len(maxs) != N_CHANNELS:
            raise ValueError("scaler needs 7 min and 7 max values")
        if any(lo > hi for lo, hi in zip(mins, maxs)):
            raise ValueError("scaler min exceeds max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    def transform(self, x) -> np.ndarray:
        """Scale one frame-like vector or an (n, 7) array."""
        x = np.asarray(x, dtype=float)
        lo = np.array(self.mins)
        hi = np.array(self.maxs)
        span = hi - lo
        const = span == 0
        scaled = (x - lo) / np.where(const, 1.0, span)
        scaled = np.where(const, 0.5, scaled)
        return np.clip(scaled, 0.0, 1.0)


def encode_one_hot(label: ChemicalClass) -> np.ndarray:
    out = np.zeros(N_CLASSES)
    out[int(ChemicalClass(label))] = 1.0
    return out


def decode_argmax(outputs: Sequence[float]) -> tuple[ChemicalClass, float]:
    """Class with the largest output; ties go to the lowest index."""
    values = np.asarray(outputs, dtype=float)
    if values.shape != (N_CLASSES,):
        raise ValueError(f"expected {N_CLASSES} outputs, got shape {values.shape}")
    k = int(np.argmax(values))  # np.argmax returns the first maximum
    return ChemicalClass(k), float(values[k])


def fit_scaler(dataset: Dataset) -> Scaler:
    if len(dataset) == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    x = dataset.inputs()
    return Scaler(tuple(x.min(axis=0)), tuple(x.max(axis=0)))


def apply_scaler(scaler: Scaler, frame: SensorFrame) -> np.ndarray:
    return scaler.transform(frame.channels)


def _format_float(v: float) -> str:
    return repr(float(v))


def dumps_dataset(dataset: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in dataset.samples:
        writer.writerow([_format_float(v) for v in s.frame.channels] + [s.label.label])
    return buf.getvalue()


def save_dataset(dataset: Dataset, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_dataset(dataset))


def loads_dataset(text: str, provenance: str = "") -> Dataset:
    samples = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in next(csv.reader([line]))]
        if not header_seen:
            if tuple(fields) != CSV_HEADER:
                raise DatasetError(f"bad header {fields!r}, expected {','.join(CSV_HEADER)}", lineno)
            header_seen = True
            continue
        if len(fields) != len(CSV_HEADER):
            raise DatasetError(
                f"malformed row: expected {len(CSV_HEADER)} columns, got {len(fields)}", lineno
            )
        try:
            values = tuple(float(f) for f in fields[:N_CHANNELS])
        except ValueError:
            raise DatasetError(f"malformed row: non-numeric value in {fields[:N_CHANNELS]}", lineno) from None
        try:
            label = ChemicalClass.from_label(fields[-1])
        except ValueError as exc:
            raise DatasetError(str(exc), lineno) from None
        try:
            frame = SensorFrame(values)
        except ValueError as exc:
            raise DatasetError(f"malformed row: {exc}", lineno) from None
        samples.append(LabeledSample(frame, label))
    if not header_seen:
        raise DatasetError("missing header")
    return Dataset(tuple(samples), provenance)


def load_dataset(path: str | os.PathLike) -> Dataset:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise DatasetError(f"no such dataset file: {path}") from None
    return loads_dataset(text, provenance=str(path))
