"""Run configuration: a flat ``key = value`` text file plus flag overrides.

Values are typed by the field defaults below. ``dumps`` writes every key in
sorted order with ``repr`` floats, so ``dumps(loads(dumps(c))) == dumps(c)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .featuremaps import EmbedConfig

ABLATIONS = ("full", "aw", "rw-attr", "rw-degree")
CLASSIFIERS = ("logistic", "squared-hinge-svm")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # data
    dataset: str = ""
    synth: str = ""
    synth_seed: int = 0
    synth_noise: float = math.nan
    max_degree: int = -1
    degree_attributes: str = "auto"
    # embedding
    branch: str = "both"
    ablate: str = ""
    l_aw: int = 6
    m: int = 30
    l_rw: int = 3
    q_aw: int = 32
    q_walk: int = 32
    alpha: float = 1.5
    epsilon: float = 1e-7
    layers: int = 1
    stack_aw: bool = False
    aw_mode: str = "sample"
    walk_mode: str = "auto"
    enum_cap: int = 200_000
    seed: int = 0
    threads: int = 1
    # evaluation
    task: str = "graph"
    classifier: str = "logistic"
    reg: float = 0.0
    folds: int = 10
    cv_seed: int = 0
    train_fraction: float = 0.7
    runs: int = 10
    # output
    out: str = "out"
    node_embeddings: bool = False

    def validate(self) -> "RunConfig":
        if self.dataset and self.synth:
            raise ConfigError("give either dataset or synth, not both")
        if self.task not in ("graph", "node"):
            raise ConfigError(f"task must be graph or node, not {self.task!r}")
        if self.ablate and self.ablate not in ABLATIONS:
            raise ConfigError(f"ablate must be one of {', '.join(ABLATIONS)}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {', '.join(CLASSIFIERS)}")
        if self.degree_attributes not in ("auto", "on", "off"):
            raise ConfigError("degree_attributes must be auto, on or off")
        if self.folds < 2 or self.runs < 1 or not 0 < self.train_fraction < 1:
            raise ConfigError("need folds >= 2, runs >= 1 and 0 < train_fraction < 1")
        if self.reg < 0:
            raise ConfigError("reg must be >= 0 (0 selects it by inner cross-validation)")
        try:
            self.embed_config()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return self

    def effective_branch(self) -> str:
        if self.ablate in ("rw-attr", "rw-degree"):
            return "walk"
        if self.ablate == "aw":
            return "aw"
        if self.ablate == "full":
            return "both"
        return self.branch

    def embed_config(self) -> EmbedConfig:
        return EmbedConfig(branch=self.effective_branch(), l_aw=self.l_aw, m=self.m,
                           l_rw=self.l_rw, q_aw=self.q_aw, q_walk=self.q_walk,
                           alpha=self.alpha, epsilon=self.epsilon, layers=self.layers,
                           stack_aw=self.stack_aw, aw_mode=self.aw_mode,
                           walk_mode=self.walk_mode, enum_cap=self.enum_cap, seed=self.seed,
                           threads=self.threads)

    def use_degree_attributes(self, attribute_kind: str) -> bool:
        if self.ablate == "rw-degree" or self.degree_attributes == "on":
            return True
        if self.degree_attributes == "off":
            return False
        return attribute_kind == "none"

    def degree_cap(self) -> Optional[int]:
        return None if self.max_degree < 0 else self.max_degree

    def to_dict(self) -> dict:
        return asdict(self)


_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(key: str, text: str):
    t = _TYPES[key]
    text = text.strip()
    try:
        if t is bool:
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if t is int:
            return int(text)
        if t is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    return text


def dumps(cfg: RunConfig) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in sorted(cfg.to_dict().items()))


def loads(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    values = (base or RunConfig()).to_dict()
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        values[key] = _parse(key, val)
    return RunConfig(**values)


def load(path, base: Optional[RunConfig] = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), base)


def override(cfg: RunConfig, **kw) -> RunConfig:
    """Apply non-``None`` overrides (flags win over the file)."""
    values = cfg.to_dict()
    for k, v in kw.items():
        if v is None:
            continue
        if k not in _TYPES:
            raise ConfigError(f"unknown key {k!r}")
        values[k] = _parse(k, v) if isinstance(v, str) and _TYPES[k] is not str else v
    return RunConfig(**values)
