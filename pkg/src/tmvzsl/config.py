"""Flat ``key = value`` run configuration with # comments.

Values stay strings until a typed accessor pulls them out; unknown keys are
rejected at validation time so typos fail fast.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ConfigError

# keys the pipelines understand; per-view keys are matched by prefix
_KNOWN_KEYS = {
    "aux_features", "aux_labels", "aux_label_sets",
    "target_features", "target_labels", "target_label_sets",
    "semantic_views", "word_vectors", "label_vocab",
    "normalize", "ridge_lambda", "fit_bias",
    "cca_dim", "cca_reg", "weight_power",
    "knn_k", "sigma", "alpha", "tol", "max_iter",
    "metric", "synthesis_mode", "max_cardinality", "subset_cap",
    "method", "space", "self_train_rounds", "keep_fraction", "aug_weight",
    "keep_rule", "hamming_threshold",
    "seed", "output_dir", "figures",
    "synth_n_aux_classes", "synth_n_target_classes", "synth_per_class",
    "synth_feat_dim", "synth_sem_dim", "synth_shift_magnitude",
    "synth_shift_relative", "synth_cluster_std", "synth_min_separation",
}
_PREFIX_KEYS = ("aux_semantics_", "prototypes_")

_DEFAULTS = {
    "normalize": "zscore",
    "ridge_lambda": "1.0",
    "fit_bias": "true",
    "cca_dim": "0",
    "cca_reg": "0",
    "weight_power": "4.0",
    "knn_k": "10",
    "sigma": "auto",
    "alpha": "0.85",
    "tol": "1e-9",
    "max_iter": "1000",
    "metric": "cosine",
    "synthesis_mode": "mean",
    "max_cardinality": "0",
    "subset_cap": "1000000",
    "method": "dmp",
    "space": "word",
    "self_train_rounds": "0",
    "keep_fraction": "0.5",
    "aug_weight": "1.0",
    "keep_rule": "per_class",
    "hamming_threshold": "centered",
    "seed": "0",
    "figures": "true",
}


@dataclass
class RunConfig:
    values: dict[str, str] = field(default_factory=dict)
    base_dir: str = "."

    def get(self, key: str, default: str | None = None) -> str | None:
        if key in self.values:
            return self.values[key]
        if default is not None:
            return default
        return _DEFAULTS.get(key)

    def require(self, key: str) -> str:
        value = self.get(key)
        if value is None:
            raise ConfigError(f"missing required config key {key!r}")
        return value

    def get_float(self, key: str, default: str | None = None) -> float:
        raw = self.get(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"config key {key!r}: expected a number, got {raw!r}")

    def get_int(self, key: str, default: str | None = None) -> int:
        raw = self.get(key, default)
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"config key {key!r}: expected an integer, got {raw!r}")

    def get_bool(self, key: str) -> bool:
        raw = (self.get(key) or "false").lower()
        if raw in ("true", "1", "yes", "on"):
            return True
        if raw in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config key {key!r}: expected a boolean, got {raw!r}")

    def path(self, key: str) -> str:
        raw = self.require(key)
        if os.path.isabs(raw):
            return raw
        return os.path.normpath(os.path.join(self.base_dir, raw))

    def optional_path(self, key: str) -> str | None:
        if key not in self.values:
            return None
        return self.path(key)

    def semantic_view_names(self) -> list[str]:
        raw = self.get("semantic_views") or ""
        names = [t for t in raw.replace(",", " ").split() if t]
        return names

    def seed(self) -> int:
        return self.get_int("seed")


def _check_key(key: str) -> None:
    if key in _KNOWN_KEYS:
        return
    if any(key.startswith(p) for p in _PREFIX_KEYS):
        return
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str, base_dir: str = ".") -> RunConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        _check_key(key)
        values[key] = value
    return RunConfig(values=values, base_dir=base_dir)


def load_config(path, overrides=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config_text(text, base_dir=os.path.dirname(os.path.abspath(path)))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        _check_key(key)
        cfg.values[key] = value.strip()
    return cfg
