"""Experiment configuration: flat key-value text with typed sections.

Format, by example::

    n = 3
    k = 2
    seed = 20240601

    [params]
    [1,2]: 0.95
    [1,3]: 0.95
    [2,3]: 0.80

    [decay]
    radii = 4, 6, 8, 12, 16, 24, 32
    trials = 20000
    truncated = true
    outer_multiple = 4

Unknown keys and malformed lines are rejected with the offending line
number. Index sets are written as sorted integer lists.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .field import ParamVector
from .lattice import IndexSet, all_index_sets

_SECTION_RE = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")
_PARAM_RE = re.compile(r"^\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]\s*[:=]\s*(\S+)$")
_KV_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*[:=]\s*(.*)$")


@dataclass(frozen=True)
class DecaySettings:
    radii: tuple[int, ...] = (4, 6, 8, 12, 16, 24, 32)
    trials: int = 20000
    truncated: bool = True
    outer_multiple: int = 4


@dataclass(frozen=True)
class PhaseSettings:
    levels: tuple[float, ...] = (0.2, 0.5, 0.8, 0.999)
    probe_radius: int = 16
    trials: int = 400
    include_base: bool = True


@dataclass(frozen=True)
class RenormSettings:
    height_steps: int = 4
    side: int = 2
    width_factor: float = 3.0
    barrier_radius: int = 12
    trials: int = 200


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    k: int
    seed: int
    params: ParamVector
    decay: DecaySettings = field(default_factory=DecaySettings)
    phase: PhaseSettings = field(default_factory=PhaseSettings)
    renorm: RenormSettings = field(default_factory=RenormSettings)

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"need n >= 3, got n = {self.n}")
        if not 2 <= self.k <= self.n - 1:
            raise ConfigError(
                f"need 2 <= k <= n - 1, got k = {self.k} with n = {self.n}")
        if self.params.n != self.n or self.params.k != self.k:
            raise ConfigError("parameter vector disagrees with (n, k)")

    def canonical(self) -> str:
        lines = [f"n = {self.n}", f"k = {self.k}", f"seed = {self.seed}",
                 "[params]"]
        for s, p in zip(self.params.index_sets, self.params.values):
            lines.append(f"[{','.join(map(str, s.members))}]: {p!r}")
        d = self.decay
        lines += ["[decay]",
                  f"radii = {','.join(map(str, d.radii))}",
                  f"trials = {d.trials}",
                  f"truncated = {str(d.truncated).lower()}",
                  f"outer_multiple = {d.outer_multiple}"]
        p = self.phase
        lines += ["[phase]",
                  f"levels = {','.join(repr(x) for x in p.levels)}",
                  f"probe_radius = {p.probe_radius}",
                  f"trials = {p.trials}",
                  f"include_base = {str(p.include_base).lower()}"]
        r = self.renorm
        lines += ["[renorm]",
                  f"height_steps = {r.height_steps}",
                  f"side = {r.side}",
                  f"width_factor = {r.width_factor!r}",
                  f"barrier_radius = {r.barrier_radius}",
                  f"trials = {r.trials}"]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _parse_scalar(raw: str, line: int):
    low = raw.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r}", line) from None


def _parse_list(raw: str, line: int) -> list:
    return [_parse_scalar(tok, line) for tok in raw.split(",") if tok.strip()]


_TOP_KEYS = {"n", "k", "seed"}
_SECTION_KEYS = {
    "decay": {"radii", "trials", "truncated", "outer_multiple"},
    "phase": {"levels", "probe_radius", "trials", "include_base"},
    "renorm": {"height_steps", "side", "width_factor", "barrier_radius",
               "trials"},
}


def parse_config(text: str) -> ExperimentConfig:
    top: dict = {}
    raw_params: dict[tuple[int, ...], float] = {}
    sections: dict[str, dict] = {"decay": {}, "phase": {}, "renorm": {}}
    current: Optional[str] = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        stripped = raw_line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION_RE.match(stripped)
        if m:
            name = m.group(1)
            if name != "params" and name not in sections:
                raise ConfigError(f"unknown section [{name}]", lineno)
            current = name
            continue
        if current == "params":
            m = _PARAM_RE.match(stripped)
            if not m:
                raise ConfigError(
                    "expected an index-set probability like [1,2]: 0.95",
                    lineno)
            members = tuple(int(x) for x in m.group(1).split(","))
            if tuple(sorted(members)) != members or len(set(members)) \
                    != len(members):
                raise ConfigError(
                    f"index set {list(members)} must be sorted and "
                    "duplicate-free", lineno)
            value = _parse_scalar(m.group(2), lineno)
            if not isinstance(value, (int, float)) or not 0 <= value <= 1:
                raise ConfigError("probability must lie in [0, 1]", lineno)
            if members in raw_params:
                raise ConfigError(
                    f"duplicate index set {list(members)}", lineno)
            raw_params[members] = float(value)
            continue
        m = _KV_RE.match(stripped)
        if not m:
            raise ConfigError(f"cannot parse line {stripped!r}", lineno)
        key, raw_val = m.group(1), m.group(2).strip()
        if current is None:
            if key not in _TOP_KEYS:
                raise ConfigError(f"unknown top-level key {key!r}", lineno)
            value = _parse_scalar(raw_val, lineno)
            if not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer", lineno)
            top[key] = value
        else:
            allowed = _SECTION_KEYS[current]
            if key not in allowed:
                raise ConfigError(
                    f"unknown key {key!r} in section [{current}]", lineno)
            if key in ("radii", "levels"):
                sections[current][key] = _parse_list(raw_val, lineno)
            else:
                sections[current][key] = _parse_scalar(raw_val, lineno)

    for key in ("n", "k", "seed"):
        if key not in top:
            raise ConfigError(f"missing required top-level key {key!r}")
    n, k, seed = top["n"], top["k"], top["seed"]

    expected = all_index_sets(n, k)
    mapping = {}
    for members, p in raw_params.items():
        try:
            index_set = IndexSet(members)
        except Exception as exc:
            raise ConfigError(str(exc)) from None
        mapping[index_set] = p
    missing = [s.members for s in expected if s not in mapping]
    if missing:
        raise ConfigError(f"[params] missing index sets {missing}")
    extra = [m for m in raw_params if m not in {s.members for s in expected}]
    if extra:
        raise ConfigError(f"[params] has unexpected index sets {extra}")
    params = ParamVector.from_mapping(n, k, mapping)

    def build(cls, name):
        kwargs = dict(sections[name])
        for key in ("radii", "levels"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"[{name}]: {exc}") from None

    return ExperimentConfig(
        n=n, k=k, seed=seed, params=params,
        decay=build(DecaySettings, "decay"),
        phase=build(PhaseSettings, "phase"),
        renorm=build(RenormSettings, "renorm"),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
