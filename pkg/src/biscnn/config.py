"""INI run configuration: model, loss, training and path settings in one place."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .model import HyperParams
from .trainer import TrainConfig

_SCHEMA = {
    "model": {
        "d": int, "s": int, "filter_width": int, "n": int, "m": int, "cs": int, "variant": str,
        "baseline_context": int, "baseline_hidden": int, "init_scale": float,
        "train_embeddings": bool, "min_count": int,
    },
    "loss": {"kind": str, "gamma": float, "m_plus": float, "m_minus": float, "l2_weight": float},
    "train": {"lr0": float, "epochs_total": int, "epochs_constant_lr": int, "seed": int, "shuffle": bool},
    "paths": {"data": str, "test": str, "out": str},
}

_BOOLS = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def default_text():
    return resources.files("biscnn").joinpath("default.ini").read_text(encoding="utf-8")


def _convert(section, key, raw):
    kind = _SCHEMA[section][key]
    try:
        if kind is bool:
            return _BOOLS[raw.strip().lower()]
        return kind(raw.strip())
    except (KeyError, ValueError):
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}") from None


@dataclass(frozen=True)
class RunConfig:
    hp: HyperParams
    train: TrainConfig
    data: str
    test: str
    out: str

    @classmethod
    def load(cls, path=None, overrides=None):
        """Defaults, then the file at ``path``, then ``overrides`` (``{"section.key": value}``)."""
        values = {sec: {} for sec in _SCHEMA}
        sources = [("<defaults>", default_text())]
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    sources.append((str(path), fh.read()))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
        for name, text in sources:
            cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=None)
            try:
                cp.read_string(text, source=name)
            except configparser.Error as exc:
                raise ConfigError(f"{name}: {exc}") from None
            for section in cp.sections():
                if section not in _SCHEMA:
                    raise ConfigError(f"{name}: unknown section [{section}]")
                for key, raw in cp.items(section):
                    if key not in _SCHEMA[section]:
                        raise ConfigError(f"{name}: unknown key {key!r} in [{section}]")
                    values[section][key] = _convert(section, key, raw)
        for dotted, value in (overrides or {}).items():
            section, _, key = dotted.partition(".")
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"unknown setting {dotted!r}")
            if value is None:
                continue
            values[section][key] = _convert(section, key, value) if isinstance(value, str) else value
        return cls.from_values(values)

    @classmethod
    def from_values(cls, values):
        model, loss, train, paths = (values[k] for k in ("model", "loss", "train", "paths"))
        try:
            hp = HyperParams(
                **model,
                gamma=loss["gamma"], m_plus=loss["m_plus"], m_minus=loss["m_minus"],
                l2_weight=loss["l2_weight"], lr0=train["lr0"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        tc = TrainConfig(
            epochs_total=train["epochs_total"], epochs_constant_lr=train["epochs_constant_lr"],
            seed=train["seed"], shuffle=train["shuffle"], loss=loss["kind"],
        )
        return cls(hp, tc, paths["data"], paths["test"], paths["out"])

    def to_ini(self):
        hp = self.hp.to_dict()
        cp = configparser.ConfigParser(interpolation=None)
        cp["model"] = {k: str(hp[k]).lower() if isinstance(hp[k], bool) else str(hp[k])
                       for k in _SCHEMA["model"]}
        cp["loss"] = {"kind": self.train.loss, "gamma": repr(self.hp.gamma), "m_plus": repr(self.hp.m_plus),
                      "m_minus": repr(self.hp.m_minus), "l2_weight": repr(self.hp.l2_weight)}
        cp["train"] = {"lr0": repr(self.hp.lr0), "epochs_total": str(self.train.epochs_total),
                       "epochs_constant_lr": str(self.train.epochs_constant_lr), "seed": str(self.train.seed),
                       "shuffle": str(self.train.shuffle).lower()}
        cp["paths"] = {"data": self.data, "test": self.test, "out": self.out}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()
