"""Run configuration: defaults, flat key=value files, CLI overrides.

Precedence is defaults < config file < command-line flags. Unknown keys
and out-of-range values are rejected so a run is fully described by one
small, serializable document.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError

MODEL_TYPE_ALIASES = {
    "rf": "random_forest",
    "sgd": "sgd_linear",
    "dt": "decision_tree",
    "lr": "logistic_regression",
    "random_forest": "random_forest",
    "sgd_linear": "sgd_linear",
    "decision_tree": "decision_tree",
    "logistic_regression": "logistic_regression",
}

POLICY_ALIASES = {
    "all": "all_positive",
    "greedy-1to1": "greedy_one_to_one",
    "all_positive": "all_positive",
    "greedy_one_to_one": "greedy_one_to_one",
}

THETA_MODES = ("inverse_max_depth",)

# Dotted keys tune the classifier family they are named after; only the
# selected model_type's overrides reach the estimator.
_HYPER_KEYS = {
    "lr.learning_rate": ("logistic_regression", "learning_rate", float, lambda v: v > 0),
    "lr.epochs": ("logistic_regression", "epochs", int, lambda v: v >= 1),
    "lr.l2": ("logistic_regression", "l2", float, lambda v: v >= 0),
    "sgd.learning_rate": ("sgd_linear", "learning_rate", float, lambda v: v > 0),
    "sgd.epochs": ("sgd_linear", "epochs", int, lambda v: v >= 1),
    "tree.max_depth": ("decision_tree", "max_depth", int, lambda v: v >= 1),
    "tree.min_leaf": ("decision_tree", "min_leaf", int, lambda v: v >= 1),
    "forest.n_trees": ("random_forest", "n_trees", int, lambda v: v >= 1),
    "forest.max_depth": ("random_forest", "max_depth", int, lambda v: v >= 1),
    "forest.min_leaf": ("random_forest", "min_leaf", int, lambda v: v >= 1),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one reproducible run."""

    lambda_: float = 0.1
    ngram_n: int = 2
    neg_cap_ratio: float = 2.0
    seed: int = 0
    threshold: float = 0.5
    include_inherited: bool = True
    property_match_threshold: float = 0.9
    theta_mode: str = "inverse_max_depth"
    model_type: str = "random_forest"
    extraction_policy: str = "all_positive"
    taxonomy: str | None = None
    embeddings: str | None = None
    hyper_overrides: dict = field(default_factory=dict)

    @property
    def classifier_hyperparams(self) -> dict:
        return dict(self.hyper_overrides.get(self.model_type, {}))


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _require(cond: bool, key: str, detail: str) -> None:
    if not cond:
        raise ConfigError(f"config key {key!r}: {detail}")


def _coerce(key: str, text: str) -> tuple[str, object]:
    """Map a raw key=value pair to a RunConfig field and typed value."""
    try:
        if key == "lambda":
            value = float(text)
            _require(value > 0, key, "must be > 0")
            return "lambda_", value
        if key == "ngram_n":
            value = int(text)
            _require(value >= 2, key, "must be an integer >= 2")
            return "ngram_n", value
        if key == "neg_cap_ratio":
            value = float(text)
            _require(value > 0, key, "must be > 0")
            return "neg_cap_ratio", value
        if key == "seed":
            return "seed", int(text)
        if key == "threshold":
            value = float(text)
            _require(0.0 <= value <= 1.0, key, "must be in [0, 1]")
            return "threshold", value
        if key == "include_inherited":
            return "include_inherited", _parse_bool(text)
        if key == "property_match_threshold":
            value = float(text)
            _require(0.0 <= value <= 1.0, key, "must be in [0, 1]")
            return "property_match_threshold", value
        if key == "theta_mode":
            _require(text in THETA_MODES, key, f"must be one of {THETA_MODES}")
            return "theta_mode", text
        if key == "model_type":
            _require(text in MODEL_TYPE_ALIASES, key, f"must be one of {sorted(MODEL_TYPE_ALIASES)}")
            return "model_type", MODEL_TYPE_ALIASES[text]
        if key == "extraction_policy":
            _require(text in POLICY_ALIASES, key, f"must be one of {sorted(POLICY_ALIASES)}")
            return "extraction_policy", POLICY_ALIASES[text]
        if key == "taxonomy":
            return "taxonomy", text or None
        if key == "embeddings":
            return "embeddings", text or None
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: invalid value {text!r} ({exc})") from exc
    raise ConfigError(f"unknown config key {key!r}")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines into RunConfig constructor kwargs."""
    fields: dict = {}
    hyper: dict[str, dict] = {}
    seen: set[str] = set()
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate config key {key!r}")
        seen.add(key)
        if key in _HYPER_KEYS:
            family, name, cast, check = _HYPER_KEYS[key]
            try:
                typed = cast(value)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: config key {key!r}: invalid value {value!r}") from exc
            _require(check(typed), key, "out of range")
            hyper.setdefault(family, {})[name] = typed
            continue
        try:
            field_name, typed = _coerce(key, value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        fields[field_name] = typed
    if hyper:
        fields["hyper_overrides"] = hyper
    return fields


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return RunConfig(**parse_config_text(text, source=str(path)))


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply command-line overrides; None values mean "not given"."""
    updates = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "model_type":
            if value not in MODEL_TYPE_ALIASES:
                raise ConfigError(f"unknown model type {value!r}")
            value = MODEL_TYPE_ALIASES[value]
        elif key == "extraction_policy":
            if value not in POLICY_ALIASES:
                raise ConfigError(f"unknown extraction policy {value!r}")
            value = POLICY_ALIASES[value]
        elif key == "threshold":
            if not 0.0 <= value <= 1.0:
                raise ConfigError("threshold must be in [0, 1]")
        updates[key] = value
    return replace(config, **updates) if updates else config
