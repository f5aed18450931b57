"""Experiment configuration and its INI file format.

Example::

    [system]
    N = 128
    C = 16
    v = 10
    P_BS = 1.0
    sigma2_nu_db = 0
    sigma2_fu_db = -3
    normalize_subblock_power = true
    interleaver_n = 4

    [near_user]
    n = 4
    k = 3
    M = 4

    [far_user]
    n = 4
    k = 1
    M = 4

    [simulation]
    config_id = fu41_nu43
    alpha = 0.3
    alpha_grid = 0, 0.5, 0.05
    snr_db = 0, 5, 10, 15, 20, 25, 30
    max_blocks = 200000
    min_errors = 100
    chunk_blocks = 250
    seed = 2020
    workers = 1
    theory_mode = folded

    [baseline]
    near_M = 4
    far_M = 2
    alpha = 0.3

Every key has a default (the values above, with the baseline section empty);
``[baseline]`` entries left out are derived by matching each user's bits per
subblock with all subcarriers active.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .codec import SubblockSpec
from .channel import db_to_linear


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    N: int = 128
    C: int = 16
    v: int = 10
    P_BS: float = 1.0
    sigma2_nu_db: float = 0.0
    sigma2_fu_db: float = -3.0
    normalize_subblock_power: bool = True
    interleaver_n: int | None = None

    @property
    def sigma2_nu(self) -> float:
        return db_to_linear(self.sigma2_nu_db)

    @property
    def sigma2_fu(self) -> float:
        return db_to_linear(self.sigma2_fu_db)


@dataclass(frozen=True)
class Stopping:
    max_blocks: int = 200_000
    min_errors: int = 100
    chunk_blocks: int = 250


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    near: SubblockSpec = field(default_factory=lambda: SubblockSpec(4, 3, 4))
    far: SubblockSpec = field(default_factory=lambda: SubblockSpec(4, 1, 4))
    alpha: float = 0.3
    alpha_grid: tuple[float, float, float] = (0.0, 0.5, 0.05)
    snr_grid: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    stopping: Stopping = field(default_factory=Stopping)
    seed: int = 2020
    workers: int = 1
    theory_mode: str = "folded"
    config_id: str = "default"
    baseline_near_M: int | None = None
    baseline_far_M: int | None = None
    baseline_alpha: float | None = None

    def __post_init__(self):
        validate(self)

    @property
    def interleaver_n(self) -> int:
        return self.system.interleaver_n or self.near.n

    def alphas(self) -> np.ndarray:
        start, stop, step = self.alpha_grid
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 10)

    def effective_powers(self, alpha: float) -> tuple[float, float]:
        """Power per active symbol ``(NU, FU)``.

        With subblock power normalisation active symbols are boosted by n/k so
        that each user's average power per subcarrier equals its allocation.
        """
        P_NU = alpha * self.system.P_BS
        P_FU = (1.0 - alpha) * self.system.P_BS
        if self.system.normalize_subblock_power:
            P_NU *= self.near.n / self.near.k
            P_FU *= self.far.n / self.far.k
        return P_NU, P_FU

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "max_blocks" in kw:
            kw["stopping"] = replace(self.stopping, max_blocks=kw.pop("max_blocks"))
        return replace(self, **kw)


def validate(cfg: ExperimentConfig) -> None:
    s = cfg.system
    if s.N < 1 or s.C < 0 or s.C >= s.N:
        raise ConfigError(f"need 0 <= C < N, got N={s.N}, C={s.C}")
    if s.v < 1 or s.v - 1 > s.C:
        raise ConfigError(f"CP of {s.C} samples cannot absorb {s.v} channel taps")
    if s.P_BS <= 0:
        raise ConfigError("P_BS must be positive")
    if s.sigma2_nu_db < s.sigma2_fu_db:
        raise ConfigError("near user must have the stronger channel (sigma2_nu >= sigma2_fu)")
    for role, spec in (("near", cfg.near), ("far", cfg.far)):
        if s.N % spec.n:
            raise ConfigError(f"{role} user subblock size {spec.n} does not divide N={s.N}")
    if s.N % cfg.interleaver_n:
        raise ConfigError(f"interleaver subblock size {cfg.interleaver_n} does not divide N={s.N}")
    if not 0.0 <= cfg.alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    start, stop, step = cfg.alpha_grid
    if step <= 0 or start < 0 or stop > 0.5 + 1e-12 or start > stop:
        raise ConfigError(f"alpha grid must be an increasing range inside [0, 0.5], got {cfg.alpha_grid}")
    if cfg.baseline_alpha is not None and not 0.0 <= cfg.baseline_alpha <= 1.0:
        raise ConfigError("baseline alpha must lie in [0, 1]")
    st = cfg.stopping
    if st.max_blocks < 1 or st.chunk_blocks < 1 or st.min_errors < 0:
        raise ConfigError("stopping rule needs max_blocks >= 1, chunk_blocks >= 1, min_errors >= 0")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.theory_mode not in ("folded", "literal"):
        raise ConfigError(f"theory_mode must be 'folded' or 'literal', got {cfg.theory_mode!r}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())


def _spec(parser, section, default: SubblockSpec) -> SubblockSpec:
    if not parser.has_section(section):
        return default
    sec = parser[section]
    try:
        return SubblockSpec(sec.getint("n", default.n), sec.getint("k", default.k), sec.getint("M", default.M))
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys such as M and N are case sensitive
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(parser, default_id=path.stem)


def loads_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return parse_config(parser)


def parse_config(parser: configparser.ConfigParser, default_id: str = "default") -> ExperimentConfig:
    base = SystemConfig()
    try:
        sys_sec = parser["system"] if parser.has_section("system") else {}
        get = _getter(sys_sec)
        system = SystemConfig(
            N=get("N", int, base.N),
            C=get("C", int, base.C),
            v=get("v", int, base.v),
            P_BS=get("P_BS", float, base.P_BS),
            sigma2_nu_db=get("sigma2_nu_db", float, base.sigma2_nu_db),
            sigma2_fu_db=get("sigma2_fu_db", float, base.sigma2_fu_db),
            normalize_subblock_power=get("normalize_subblock_power", _bool, base.normalize_subblock_power),
            interleaver_n=get("interleaver_n", int, None),
        )
        sim = _getter(parser["simulation"] if parser.has_section("simulation") else {})
        stop = Stopping(
            max_blocks=sim("max_blocks", int, Stopping.max_blocks),
            min_errors=sim("min_errors", int, Stopping.min_errors),
            chunk_blocks=sim("chunk_blocks", int, Stopping.chunk_blocks),
        )
        bl = _getter(parser["baseline"] if parser.has_section("baseline") else {})
        grid = sim("alpha_grid", _floats, (0.0, 0.5, 0.05))
        if len(grid) != 3:
            raise ConfigError("alpha_grid needs three values: start, stop, step")
        return ExperimentConfig(
            system=system,
            near=_spec(parser, "near_user", SubblockSpec(4, 3, 4)),
            far=_spec(parser, "far_user", SubblockSpec(4, 1, 4)),
            alpha=sim("alpha", float, 0.3),
            alpha_grid=grid,
            snr_grid=sim("snr_db", _floats, ExperimentConfig.snr_grid),
            stopping=stop,
            seed=sim("seed", int, 2020),
            workers=sim("workers", int, 1),
            theory_mode=sim("theory_mode", str, "folded"),
            config_id=sim("config_id", str, default_id),
            baseline_near_M=bl("near_M", int, None),
            baseline_far_M=bl("far_M", int, None),
            baseline_alpha=bl("alpha", float, None),
        )
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config: {exc}") from exc


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _getter(section):
    def get(key, conv, default):
        if key not in section:
            return default
        raw = section[key].strip()
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return get


def dumps_config(cfg: ExperimentConfig) -> str:
    s = cfg.system
    lines = [
        "[system]",
        f"N = {s.N}", f"C = {s.C}", f"v = {s.v}", f"P_BS = {s.P_BS}",
        f"sigma2_nu_db = {s.sigma2_nu_db}", f"sigma2_fu_db = {s.sigma2_fu_db}",
        f"normalize_subblock_power = {str(s.normalize_subblock_power).lower()}",
    ]
    if s.interleaver_n is not None:
        lines.append(f"interleaver_n = {s.interleaver_n}")
    lines += [
        "",
        "[near_user]", f"n = {cfg.near.n}", f"k = {cfg.near.k}", f"M = {cfg.near.M}", "",
        "[far_user]", f"n = {cfg.far.n}", f"k = {cfg.far.k}", f"M = {cfg.far.M}", "",
        "[simulation]",
        f"config_id = {cfg.config_id}",
        f"alpha = {cfg.alpha}",
        "alpha_grid = " + ", ".join(str(a) for a in cfg.alpha_grid),
        "snr_db = " + ", ".join(str(x) for x in cfg.snr_grid),
        f"max_blocks = {cfg.stopping.max_blocks}",
        f"min_errors = {cfg.stopping.min_errors}",
        f"chunk_blocks = {cfg.stopping.chunk_blocks}",
        f"seed = {cfg.seed}",
        f"workers = {cfg.workers}",
        f"theory_mode = {cfg.theory_mode}",
        "",
        "[baseline]",
    ]
    for key, val in (("near_M", cfg.baseline_near_M), ("far_M", cfg.baseline_far_M), ("alpha", cfg.baseline_alpha)):
        if val is not None:
            lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
