"""Experiment configuration read from an INI file.

Sections and keys (all optional, unknown keys are rejected)::

    [channel]  num_antennas num_elements num_users p_t_dbm rician_k_db noise_dbm geometry
    [train]    learning_rate batch_size max_epochs iterations_per_epoch train_samples patience
               root_seed d_mlp layers test_samples scenario eve_index
    [ao]       outer_rounds wmmse_iterations bisection_iterations rcg_iterations
               ga_population ga_generations elitism samples
    [sweep]    variable values schemes output_dir

The output directory can be overridden with the IRS_SECRECY_OUT environment variable.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..baselines import AOConfig, WMMSEConfig
from ..channel import FadingConfig, db_to_linear, dbm_to_watt
from ..cognn import TrainConfig
from ..secrecy import Scenario

SCHEMES = ("cognn", "avg_power", "random_irs", "omni_beam", "ao")
SWEEP_VARIABLES = ("p_t_dbm", "num_elements", "num_antennas")
OUT_ENV = "IRS_SECRECY_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "external"
    eve_index: int | None = None
    sweep_variable: str = "p_t_dbm"
    sweep_values: tuple = (30.0,)
    num_antennas: int = 4
    num_elements: int = 16
    num_users: int = 2
    p_t_dbm: float = 30.0
    rician_k_db: float = 10.0
    noise_dbm: float = -100.0
    geometry: str = "random"
    schemes: tuple = ("cognn",)
    root_seed: int = 0
    train_samples: int = 10000
    test_samples: int = 300
    ao_samples: int = 20
    output_dir: str = "out"
    train: TrainConfig = field(default_factory=lambda: TrainConfig(
        learning_rate=3e-4, max_epochs=20, train_samples=10000, d_mlp=256))
    ao: AOConfig = field(default_factory=AOConfig)

    def validate(self) -> None:
        if self.scenario not in ("external", "internal"):
            raise ConfigError(f"scenario must be external or internal, got {self.scenario!r}")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if not self.sweep_values:
            raise ConfigError("sweep values must be nonempty")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigError(f"unknown schemes {bad}; choose from {SCHEMES}")
        if self.geometry not in ("random", "fixed"):
            raise ConfigError("geometry must be random or fixed")
        if min(self.num_antennas, self.num_elements, self.num_users) < 1:
            raise ConfigError("M, N, K must be >= 1")
        if min(self.train_samples, self.test_samples, self.ao_samples) < 1:
            raise ConfigError("sample counts must be >= 1")
        self.ao.validate()
        self.scenario_obj()

    @classmethod
    def paper_scale(cls, **kw) -> "ExperimentConfig":
        """Full-size simulation parameters and training budget."""
        base = dict(num_antennas=5, num_elements=100, num_users=2, p_t_dbm=30.0, rician_k_db=10.0,
                    noise_dbm=-100.0, train_samples=10000,
                    train=TrainConfig(learning_rate=1e-4, batch_size=32, max_epochs=100, iterations_per_epoch=100,
                                      train_samples=10000, patience=30, d_mlp=512, layers=2))
        base.update(kw)
        return cls(**base)

    def at(self, value) -> "ExperimentConfig":
        """Copy with the sweep variable set to ``value``."""
        cast = float if self.sweep_variable == "p_t_dbm" else int
        return replace(self, **{self.sweep_variable: cast(value)})

    @property
    def p_t(self) -> float:
        return dbm_to_watt(self.p_t_dbm)

    def fading(self) -> FadingConfig:
        return FadingConfig(num_antennas=self.num_antennas, num_elements=self.num_elements,
                            rician_k=db_to_linear(self.rician_k_db), noise_power=dbm_to_watt(self.noise_dbm))

    def scenario_obj(self) -> Scenario:
        if self.scenario == "external":
            return Scenario()
        idx = self.num_users - 1 if self.eve_index is None else self.eve_index
        if not 0 <= idx < self.num_users or self.num_users < 2:
            raise ConfigError("internal eavesdropping needs K >= 2 and a valid eavesdropper index")
        return Scenario.internal(idx)

    def out_dir(self) -> Path:
        return Path(os.environ.get(OUT_ENV) or self.output_dir)


_KEYS = {
    "channel": {"num_antennas": int, "num_elements": int, "num_users": int, "p_t_dbm": float,
                "rician_k_db": float, "noise_dbm": float, "geometry": str},
    "train": {"learning_rate": float, "batch_size": int, "max_epochs": int, "iterations_per_epoch": int,
              "train_samples": int, "patience": int, "root_seed": int, "d_mlp": int, "layers": int,
              "test_samples": int, "scenario": str, "eve_index": int},
    "ao": {"outer_rounds": int, "wmmse_iterations": int, "bisection_iterations": int, "rcg_iterations": int,
           "ga_population": int, "ga_generations": int, "elitism": int, "samples": int},
    "sweep": {"variable": str, "values": str, "schemes": str, "output_dir": str},
}


def _parse(parser: configparser.ConfigParser, source: str) -> dict:
    values = {}
    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            kind = _KEYS[section].get(key)
            if kind is None:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            try:
                values[(section, key)] = kind(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for {section}.{key}: {raw!r}") from exc
    return values


def load_config(path=None, text: str | None = None, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    parser = configparser.ConfigParser()
    source = "<text>"
    if path is not None:
        source = str(path)
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        parser.read(path)
    elif text is not None:
        parser.read_string(text)
    v = _parse(parser, source)

    top = {}
    for key in _KEYS["channel"]:
        if ("channel", key) in v:
            top[key] = v[("channel", key)]
    train_kw = {k: v[("train", k)] for k in ("learning_rate", "batch_size", "max_epochs", "iterations_per_epoch",
                                             "train_samples", "patience", "root_seed", "d_mlp", "layers")
                if ("train", k) in v}
    if "train_samples" in train_kw:
        top["train_samples"] = train_kw["train_samples"]
    if "root_seed" in train_kw:
        top["root_seed"] = train_kw["root_seed"]
    for key, dest in (("test_samples", "test_samples"), ("scenario", "scenario"), ("eve_index", "eve_index")):
        if ("train", key) in v:
            top[dest] = v[("train", key)]
    top["train"] = replace(cfg.train, **train_kw)

    ao = cfg.ao
    ao = replace(ao, outer_rounds=v.get(("ao", "outer_rounds"), ao.outer_rounds),
                 wmmse=WMMSEConfig(v.get(("ao", "wmmse_iterations"), ao.wmmse.inner_iterations),
                                   v.get(("ao", "bisection_iterations"), ao.wmmse.bisection_iterations),
                                   ao.wmmse.tolerance),
                 rcg=replace(ao.rcg, max_iterations=v.get(("ao", "rcg_iterations"), ao.rcg.max_iterations)),
                 ga=replace(ao.ga, population=v.get(("ao", "ga_population"), ao.ga.population),
                            generations=v.get(("ao", "ga_generations"), ao.ga.generations),
                            elitism=v.get(("ao", "elitism"), ao.ga.elitism)))
    top["ao"] = ao
    if ("ao", "samples") in v:
        top["ao_samples"] = v[("ao", "samples")]

    if ("sweep", "variable") in v:
        top["sweep_variable"] = v[("sweep", "variable")].strip()
    if ("sweep", "values") in v:
        try:
            top["sweep_values"] = tuple(float(x) for x in v[("sweep", "values")].split(",") if x.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}: sweep values must be comma-separated numbers") from exc
    if ("sweep", "schemes") in v:
        top["schemes"] = tuple(s.strip() for s in v[("sweep", "schemes")].split(",") if s.strip())
    if ("sweep", "output_dir") in v:
        top["output_dir"] = v[("sweep", "output_dir")]

    cfg = replace(cfg, **top)
    cfg.validate()
    return cfg


__all__ = ["ConfigError", "ExperimentConfig", "OUT_ENV", "SCHEMES", "SWEEP_VARIABLES", "load_config"]
