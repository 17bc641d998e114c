"""Scenario configuration: a YAML document mapped onto a frozen dataclass.

Numbers may be written as YAML numbers or as strings such as ``"1/24"`` or
``"4e-3"``; strings are parsed exactly with :class:`fractions.Fraction`
before conversion to float.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
import math

import numpy as np
import yaml

from .control import gate_message, lyapunov_drift


class ConfigError(ValueError):
    """Invalid scenario document."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


ATTITUDE_MODES = ("random", "trajectory", "fixed")
H_KINDS = ("cosine", "zero", "noise")


def _num(value, key):
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}", key)
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{key}: cannot parse number {value!r}", key) from None
    else:
        raise ConfigError(f"{key}: expected a number, got {value!r}", key)
    if not math.isfinite(out):
        raise ConfigError(f"{key}: must be finite", key)
    return out


def _vec(value, key, n=3):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(f"{key}: expected a list of {n} numbers", key)
    return tuple(_num(v, f"{key}[{i}]") for i, v in enumerate(value))


def _mat(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{key}: expected a 3x3 nested list", key)
    return tuple(_vec(row, f"{key}[{i}]") for i, row in enumerate(value))


def _int(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}", key)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}", key)
    return value


def _bool(value, key):
    if not isinstance(value, bool):
        raise ConfigError(f"{key}: expected true/false, got {value!r}", key)
    return value


def _check_keys(doc, allowed, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where or 'document'}: expected a mapping", where or None)
    for key in doc:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown key {name!r}", name)


IDENTITY = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class HSpec:
    """Vertical component of the reference direction.

    ``cosine``: ``amplitude * cos(frequency * k * pi)``; ``zero``; ``noise``:
    i.i.d. ``N(0, sigma^2)`` per step from the run's own stream.
    """
    kind: str = "cosine"
    amplitude: float = 0.5
    frequency: float = 1.0 / 6.0
    sigma: float = 0.0


@dataclass(frozen=True)
class InitialConditions:
    p: tuple = (0.0, 0.0, 0.0)
    v: tuple = (0.0, 0.0, 0.0)
    p_target: tuple = (1.0, 2.0, 2.0)
    v_target: tuple = (0.02, 0.1, 0.1)
    R: tuple = IDENTITY


PAPER_W = ((0.004, 0.0, 0.0), (0.0, 0.001, 0.0), (0.0, 0.0, 0.001))


@dataclass(frozen=True)
class ScenarioConfig:
    t: float = 0.5
    horizon: int = 600
    seed: int = 0
    W: tuple = PAPER_W
    # filter's model of W; None means same as the truth
    W_filter: tuple = None
    zero_target_accel: bool = False
    eta1: float = 0.01
    eta2: float = 0.01
    f: int = 10
    bq: tuple = (-1.0, 1.0, 0.0)
    bq_star: tuple = (-2.0, -2.0, 0.0)
    alpha: float = 1.2
    alpha_override: bool = False
    attitude_mode: str = "trajectory"
    rho: float = 1.0 / 24.0
    h_spec: HSpec = field(default_factory=HSpec)
    init: InitialConditions = field(default_factory=InitialConditions)
    xi0_scale: float = 10.0
    pe_window: int = 96

    @property
    def W_model(self):
        return self.W if self.W_filter is None else self.W_filter

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        d = asdict(self)
        for key in ("W", "W_filter"):
            if d[key] is not None:
                d[key] = [list(row) for row in d[key]]
        for key in ("bq", "bq_star"):
            d[key] = list(d[key])
        init = d["init"]
        for key in ("p", "v", "p_target", "v_target"):
            init[key] = list(init[key])
        init["R"] = [list(row) for row in init["R"]]
        return d


def _check_pd(mat, key):
    m = np.array(mat)
    if np.max(np.abs(m - m.T)) > 1e-12:
        raise ConfigError(f"{key}: must be symmetric", key)
    if np.linalg.eigvalsh(m)[0] <= 0:
        raise ConfigError(f"{key}: must be positive definite", key)


def from_dict(doc):
    """Validate a parsed document; omitted keys take the defaults."""
    if doc is None:
        doc = {}
    top = {f.name for f in fields(ScenarioConfig)}
    _check_keys(doc, top, "")
    d = ScenarioConfig()
    kw = {}
    for key in ("t", "eta1", "eta2", "alpha", "rho", "xi0_scale"):
        if key in doc:
            kw[key] = _num(doc[key], key)
    for key, lo in (("horizon", 1), ("seed", 0), ("f", 1), ("pe_window", 1)):
        if key in doc:
            kw[key] = _int(doc[key], key, lo)
    for key in ("zero_target_accel", "alpha_override"):
        if key in doc:
            kw[key] = _bool(doc[key], key)
    for key in ("bq", "bq_star"):
        if key in doc:
            kw[key] = _vec(doc[key], key)
    if "W" in doc:
        kw["W"] = _mat(doc["W"], "W")
    if doc.get("W_filter") is not None:
        kw["W_filter"] = _mat(doc["W_filter"], "W_filter")
    if "attitude_mode" in doc:
        mode = doc["attitude_mode"]
        if mode not in ATTITUDE_MODES:
            raise ConfigError(
                f"attitude_mode: expected one of {ATTITUDE_MODES}, got {mode!r}",
                "attitude_mode")
        kw["attitude_mode"] = mode
    if "h_spec" in doc:
        h = doc["h_spec"]
        _check_keys(h, {f.name for f in fields(HSpec)}, "h_spec")
        hk = {}
        if "kind" in h:
            if h["kind"] not in H_KINDS:
                raise ConfigError(f"h_spec.kind: expected one of {H_KINDS}", "h_spec.kind")
            hk["kind"] = h["kind"]
        for key in ("amplitude", "frequency", "sigma"):
            if key in h:
                hk[key] = _num(h[key], f"h_spec.{key}")
        kw["h_spec"] = HSpec(**hk)
    if "init" in doc:
        ini = doc["init"]
        _check_keys(ini, {f.name for f in fields(InitialConditions)}, "init")
        ik = {}
        for key in ("p", "v", "p_target", "v_target"):
            if key in ini:
                ik[key] = _vec(ini[key], f"init.{key}")
        if "R" in ini:
            ik["R"] = _mat(ini["R"], "init.R")
        kw["init"] = InitialConditions(**ik)

    cfg = replace(d, **kw)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not cfg.t > 0:
        raise ConfigError("t: sampling period must be positive", "t")
    for key in ("eta1", "eta2"):
        if getattr(cfg, key) < 0:
            raise ConfigError(f"{key}: variance must be >= 0", key)
    if cfg.h_spec.sigma < 0:
        raise ConfigError("h_spec.sigma: must be >= 0", "h_spec.sigma")
    if not cfg.xi0_scale > 0:
        raise ConfigError("xi0_scale: must be positive", "xi0_scale")
    if cfg.rho == 0:
        raise ConfigError("rho: must be nonzero", "rho")
    if np.linalg.norm(cfg.bq) == 0:
        raise ConfigError("bq: baseline must be nonzero", "bq")
    _check_pd(cfg.W, "W")
    if cfg.W_filter is not None:
        _check_pd(cfg.W_filter, "W_filter")
    r = np.array(cfg.init.R)
    if (np.linalg.norm(r.T @ r - np.eye(3)) > 1e-9
            or abs(np.linalg.det(r) - 1.0) > 1e-9):
        raise ConfigError("init.R: not a rotation matrix", "init.R")
    if not cfg.alpha_override and not lyapunov_drift(cfg.alpha)[1]:
        raise ConfigError(gate_message(cfg.alpha), "alpha")


def load_config(text):
    """Parse and validate a YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    return from_dict(doc)


def load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def dump_config(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def paper_scenario(**overrides):
    """Numerical-simulation scenario of the reference study."""
    return replace(ScenarioConfig(), **overrides)
