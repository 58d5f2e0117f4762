"""Synthetic MOS sensor-array responses.

Each class has a signature: a mean response per gas sensor, Gaussian noise,
and linear cross-sensitivity to humidity (per %RH away from 50) and
temperature (per degree C away from 25).  Gas channels are rectified at 0.

The numbers in :func:`default_signatures` are hand-picked constants, not
measured data.  They are chosen so that every chemical has its own
dominant sensor, clean air sits on a low baseline, and lighter gas and
isopropyl alcohol overlap the most, with opposite-signed temperature
sensitivity on the TGS2611 channel.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .core import GAS_CHANNELS, ChemicalClass, Dataset, LabeledSample, SensorFrame

N_GAS = len(GAS_CHANNELS)
REFERENCE_HUMIDITY = 50.0
REFERENCE_TEMPERATURE = 25.0


def _vec(values, name: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if len(out) != N_GAS:
        raise ValueError(f"{name} needs {N_GAS} values, got {len(out)}")
    return out


@dataclass(frozen=True)
class ChemicalSignature:
    chemical: ChemicalClass
    mean_response: tuple[float, ...]
    noise_sigma: tuple[float, ...]
    humidity_coeff: tuple[float, ...] = (0.0,) * N_GAS
    temperature_coeff: tuple[float, ...] = (0.0,) * N_GAS

    def __post_init__(self):
        object.__setattr__(self, "chemical", ChemicalClass(self.chemical))
        for name in ("mean_response", "noise_sigma", "humidity_coeff", "temperature_coeff"):
            object.__setattr__(self, name, _vec(getattr(self, name), name))
        if min(self.noise_sigma) < 0:
            raise ValueError("noise_sigma must be non-negative")
        if min(self.mean_response) < 0:
            raise ValueError("mean_response must be non-negative")

    @property
    def dominant_sensor(self) -> int:
        return int(np.argmax(self.mean_response))


@dataclass(frozen=True)
class EnvProfile:
    humidity_mean: float = 50.0
    humidity_sigma: float = 8.0
    temperature_mean: float = 25.0
    temperature_sigma: float = 4.0

    def __post_init__(self):
        if self.humidity_sigma < 0 or self.temperature_sigma < 0:
            raise ValueError("environment sigmas must be non-negative")
        if not 0 <= self.humidity_mean <= 100:
            raise ValueError("humidity mean must lie in [0, 100]")


#                   mq2   mq135  mq3  tgs2610 tgs2611
_DEFAULTS = {
    ChemicalClass.NONE: dict(
        mean_response=(0.60, 0.50, 0.40, 0.50, 0.50),
        noise_sigma=(0.20, 0.20, 0.20, 0.20, 0.20),
        humidity_coeff=(0.005, 0.005, 0.005, 0.005, 0.005),
        temperature_coeff=(0.01, 0.01, 0.01, 0.01, 0.01),
    ),
    ChemicalClass.ACETONE: dict(
        mean_response=(2.0, 5.5, 3.0, 1.2, 1.0),
        noise_sigma=(0.50, 0.60, 0.50, 0.40, 0.40),
        humidity_coeff=(0.01, -0.02, 0.01, 0.0, 0.0),
        temperature_coeff=(0.02, -0.05, 0.02, 0.0, 0.0),
    ),
    ChemicalClass.FLOOR_CLEANER: dict(
        mean_response=(3.0, 2.5, 0.9, 1.5, 1.2),
        noise_sigma=(0.50, 0.50, 0.40, 0.40, 0.40),
        humidity_coeff=(-0.02, 0.01, 0.0, 0.0, 0.0),
        temperature_coeff=(-0.04, 0.02, 0.0, 0.0, 0.0),
    ),
    ChemicalClass.ISOPROPYL_ALCOHOL: dict(
        mean_response=(2.4, 2.24, 3.7, 2.9, 3.0),
        noise_sigma=(0.40, 0.40, 0.50, 0.50, 0.20),
        temperature_coeff=(0.0, 0.0, 0.0, 0.2, 0.5),
    ),
    ChemicalClass.LIGHTER_GAS: dict(
        mean_response=(2.4, 1.46, 2.9, 3.7, 3.0),
        noise_sigma=(0.40, 0.40, 0.50, 0.50, 0.20),
        temperature_coeff=(0.0, 0.0, 0.0, -0.2, -0.5),
    ),
}


def default_signatures() -> tuple[ChemicalSignature, ...]:
    return tuple(ChemicalSignature(c, **_DEFAULTS[c]) for c in ChemicalClass)


@dataclass(frozen=True)
class SimConfig:
    signatures: tuple[ChemicalSignature, ...] = field(default_factory=default_signatures)
    env: EnvProfile = field(default_factory=EnvProfile)
    samples_per_class: int = 40
    seed: int = 7
    overlap_factor: float = 1.0

    def __post_init__(self):
        sigs = tuple(self.signatures)
        if sorted(int(s.chemical) for s in sigs) != [int(c) for c in ChemicalClass]:
            raise ValueError("need exactly one signature per chemical class")
        object.__setattr__(self, "signatures", tuple(sorted(sigs, key=lambda s: int(s.chemical))))
        if int(self.samples_per_class) != self.samples_per_class or self.samples_per_class < 1:
            raise ValueError("samples_per_class must be a positive integer")
        if self.overlap_factor < 0:
            raise ValueError("overlap_factor must be non-negative")


def generate_sample(signature: ChemicalSignature, env: EnvProfile, rng: np.random.Generator,
                    overlap_factor: float = 1.0) -> SensorFrame:
    h = min(max(rng.normal(env.humidity_mean, env.humidity_sigma), 0.0), 100.0)
    t = rng.normal(env.temperature_mean, env.temperature_sigma)
    noise = rng.normal(0.0, 1.0, size=N_GAS) * (overlap_factor * np.array(signature.noise_sigma))
    gas = (np.array(signature.mean_response)
           + np.array(signature.humidity_coeff) * (h - REFERENCE_HUMIDITY)
           + np.array(signature.temperature_coeff) * (t - REFERENCE_TEMPERATURE)
           + noise)
    gas = np.maximum(gas, 0.0) + 0.0
    return SensorFrame(tuple(gas) + (h, t))


def generate_dataset(config: SimConfig) -> Dataset:
    rng = np.random.default_rng(config.seed)
    samples = []
    for sig in config.signatures:
        for _ in range(config.samples_per_class):
            frame = generate_sample(sig, config.env, rng, config.overlap_factor)
            samples.append(LabeledSample(frame, sig.chemical))
    tag = f"simulated seed={config.seed} overlap={config.overlap_factor!r} n={config.samples_per_class}/class"
    return Dataset(tuple(samples), tag)


def cluster_overlap(dataset: Dataset) -> float:
    """Fraction of samples closer (gas channels) to some foreign class centroid than to their own."""
    x = dataset.inputs()[:, :N_GAS]
    y = dataset.labels()
    classes = np.unique(y)
    centroids = np.array([x[y == c].mean(axis=0) for c in classes])
    d = np.linalg.norm(x[:, None, :] - centroids[None, :, :], axis=2)
    own = d[np.arange(len(y)), np.searchsorted(classes, y)]
    d[np.arange(len(y)), np.searchsorted(classes, y)] = np.inf
    return float(np.mean(d.min(axis=1) < own))


# -- key-value config files --------------------------------------------------

REQUIRED_KEYS = (
    "seed", "samples_per_class", "overlap_factor",
    "humidity_mean", "humidity_sigma", "temperature_mean", "temperature_sigma",
)
SIGNATURE_FIELDS = ("mean_response", "noise_sigma", "humidity_coeff", "temperature_coeff")


class ConfigError(ValueError):
    pass


def parse_key_values(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def sim_config_from_mapping(kv: dict[str, str]) -> SimConfig:
    """Build a SimConfig from string key-values.

    Required keys are listed in :data:`REQUIRED_KEYS`.  Signatures default to
    :func:`default_signatures` and can be overridden per field with keys like
    ``signature.acetone.mean_response = 2.0 5.5 3.0 1.2 1.0``.
    """
    for key in REQUIRED_KEYS:
        if key not in kv:
            raise ConfigError(f"missing config key: {key}")
    sigs = {s.chemical: s for s in default_signatures()}
    for key, value in kv.items():
        if key in REQUIRED_KEYS:
            continue
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "signature" or parts[2] not in SIGNATURE_FIELDS:
            raise ConfigError(f"unknown config key: {key}")
        try:
            chem = ChemicalClass.from_label(parts[1])
            values = [float(v) for v in value.replace(",", " ").split()]
            sigs[chem] = replace(sigs[chem], **{parts[2]: values})
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    try:
        env = EnvProfile(float(kv["humidity_mean"]), float(kv["humidity_sigma"]),
                         float(kv["temperature_mean"]), float(kv["temperature_sigma"]))
        return SimConfig(tuple(sigs.values()), env, int(kv["samples_per_class"]),
                         int(kv["seed"]), float(kv["overlap_factor"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_sim_config(path: str | os.PathLike) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigError(f"no such config file: {path}") from None
    return sim_config_from_mapping(parse_key_values(text))


def dumps_sim_config(config: SimConfig) -> str:
    env = config.env
    lines = [
        f"seed = {config.seed}",
        f"samples_per_class = {config.samples_per_class}",
        f"overlap_factor = {config.overlap_factor!r}",
        f"humidity_mean = {env.humidity_mean!r}",
        f"humidity_sigma = {env.humidity_sigma!r}",
        f"temperature_mean = {env.temperature_mean!r}",
        f"temperature_sigma = {env.temperature_sigma!r}",
    ]
    for sig in config.signatures:
        for name in SIGNATURE_FIELDS:
            values = " ".join(repr(v) for v in getattr(sig, name))
            lines.append(f"signature.{sig.chemical.label}.{name} = {values}")
    return "\n".join(lines) + "\n"
