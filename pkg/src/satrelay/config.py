"""Scenario files: a YAML tree with explicit unit tags, resolved to linear SI-ish values.

Powers take ``"<x> dB"`` (dBW) or ``"<x> W"``; ratios and gains take ``"<x> dB"``
or ``"<x> linear"``; lengths are kilometres (``"5 km"`` or ``"5000 m"``); angles
take ``"60 deg"`` or ``"1.047 rad"``. Unit tags are mandatory for every power,
ratio and threshold. Conversion to linear units happens here and nowhere else.
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import channels as ch
from . import geometry as geo
from .analytic import QuadratureOrders
from .optimizer import LinkBudget


class ConfigError(ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


DEFAULTS = {
    "geometry": {
        "H1": "5 km",
        "L": "20 km",
        "T_I": "30 km",
        "R_E": "6371 km",
        "U1": "8371 km",
        "U2": "6531 km",
        "Psi": "60 deg",
        "density": 0.01,
        "H_max_R": None,
    },
    "channel": {
        "b": "10 dB",
        "m": 2,
        "Omega": "0 dB",
        "K": "-10 dB",
        "Omega_R": "25 dB",
        "lambda_I": "1 linear",
        "n1": 2,
        "n2": 2,
        "sigma2": "-30 dB",
    },
    "power": {"P_S": "30 dB", "P_R": "1 dB", "P_I": "1 dB"},
    "thresholds": {"gamma_th": "0 dB", "gamma_out": "0 dB", "z": "0 dB"},
    "quadrature": {"G": 50, "H": 50, "J": 50, "Q": 50},
    "mc": {"trials": 1_000_000, "seed": 0},
    "optimizer": {
        "D_SD": 1.0e6,
        "B_S": 1.0e6,
        "B_R": 1.0e6,
        "T_total": 1.0,
        "P_S_max": "50 W",
        "P_R_max": "10 W",
        "sigma2": "-64 dB",
        "d0": "1500 km",
        "L": "15 km",
        "gamma_SR": None,
        "gamma_RD": None,
        "gain_seed": 0,
        "step": "newton",
    },
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")

_KIND_UNITS = {
    "power": ("dB", "W"),
    "ratio": ("dB", "linear"),
    "length": ("km", "m"),
    "angle": ("deg", "rad"),
}

# field -> kind; everything else is a plain number
_KINDS = {
    "geometry": {k: "length" for k in ("H1", "L", "T_I", "R_E", "U1", "U2", "H_max_R")}
    | {"Psi": "angle"},
    "channel": {k: "ratio" for k in ("b", "Omega", "K", "Omega_R", "lambda_I", "sigma2")},
    "power": {k: "power" for k in ("P_S", "P_R", "P_I")},
    "thresholds": {k: "ratio" for k in ("gamma_th", "gamma_out", "z")},
    "optimizer": {
        "P_S_max": "power",
        "P_R_max": "power",
        "sigma2": "ratio",
        "d0": "length",
        "L": "length",
        "gamma_SR": "ratio",
        "gamma_RD": "ratio",
    },
}

_INTS = {("channel", "m"), ("channel", "n1"), ("channel", "n2"), ("mc", "trials"), ("mc", "seed"),
         ("optimizer", "gain_seed")} | {("quadrature", k) for k in "GHJQ"}


def parse_quantity(value, kind, field):
    """Convert a unit-tagged string to a linear float."""
    if isinstance(value, bool) or not isinstance(value, str):
        raise ConfigError(field, f"needs a unit tag ({' or '.join(_KIND_UNITS[kind])}), got {value!r}")
    m = _QTY.match(value)
    if not m:
        raise ConfigError(field, f"cannot parse {value!r} as '<number> <unit>'")
    x, unit = float(m.group(1)), m.group(2)
    if unit not in _KIND_UNITS[kind]:
        raise ConfigError(field, f"unit {unit!r} not allowed; use one of {_KIND_UNITS[kind]}")
    if unit == "dB":
        return float(10.0 ** (x / 10.0))
    if unit == "m":
        return x / 1000.0
    if unit == "deg":
        return math.radians(x)
    return x


def _plain(value, field, integer):
    if isinstance(value, str):
        # YAML 1.1 reads "1e6" as a string
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(field, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def merge(tree, updates, prefix=""):
    """Recursively overlay ``updates`` onto a copy of ``tree``; unknown keys are errors."""
    out = copy.deepcopy(tree)
    for key, val in (updates or {}).items():
        path = f"{prefix}{key}"
        if key not in out:
            raise ConfigError(path, "unknown field")
        if isinstance(out[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(path, "expected a mapping")
            out[key] = merge(out[key], val, path + ".")
        else:
            out[key] = val
    return out


def apply_override(tree, assignment):
    """Apply one ``section.field=value`` override; the value is read as YAML."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like section.field=value")
    path, raw = assignment.split("=", 1)
    keys = path.strip().split(".")
    value = yaml.safe_load(raw)
    update = value
    for k in reversed(keys):
        update = {k: update}
    return merge(tree, update)


def load_tree(path=None, overrides=()):
    tree = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError("--config", f"invalid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("--config", "top level must be a mapping")
        tree = merge(tree, data)
    for assignment in overrides:
        tree = apply_override(tree, assignment)
    return tree


def _resolve_section(tree, section):
    kinds = _KINDS.get(section, {})
    out = {}
    for key, val in tree[section].items():
        field = f"{section}.{key}"
        if val is None:
            out[key] = None
        elif key in kinds:
            out[key] = parse_quantity(val, kinds[key], field)
        elif key == "step":
            if val not in ("newton", "harmonic"):
                raise ConfigError(field, "must be 'newton' or 'harmonic'")
            out[key] = val
        else:
            out[key] = _plain(val, field, (section, key) in _INTS)
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario; every value linear (W, km, rad, bits, Hz, s)."""

    geometry: dict
    channel: dict
    power: dict
    thresholds: dict
    quadrature: dict
    mc: dict
    optimizer: dict
    tree: dict  # the tagged tree it was built from

    @classmethod
    def from_tree(cls, tree) -> ScenarioConfig:
        sections = {name: _resolve_section(tree, name) for name in DEFAULTS}
        cfg = cls(**sections, tree=copy.deepcopy(tree))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path=None, overrides=()) -> ScenarioConfig:
        return cls.from_tree(load_tree(path, overrides))

    # each builder re-raises the library's own invariant errors with a field name
    def validate(self):
        self.geometry_params()
        self.rician()
        self.interference()
        self.shadowed_rician()
        self.orders()
        c = self.channel
        for key in ("n1", "n2"):
            if c[key] < 1:
                raise ConfigError(f"channel.{key}", "path-loss exponent must be >= 1")
        for key, v in self.thresholds.items():
            if not v > 0:
                raise ConfigError(f"thresholds.{key}", "must be positive")
        if self.mc["trials"] < 1:
            raise ConfigError("mc.trials", "must be >= 1")
        if not 0 <= self.mc["seed"] < 2**64:
            raise ConfigError("mc.seed", "must fit in 64 bits")
        o = self.optimizer
        for key in ("D_SD", "B_S", "B_R", "T_total", "P_S_max", "P_R_max", "sigma2", "d0", "L"):
            if not (o[key] > 0 and math.isfinite(o[key])):
                raise ConfigError(f"optimizer.{key}", "must be positive and finite")
        for key in ("gamma_SR", "gamma_RD"):
            if o[key] is not None and not o[key] > 0:
                raise ConfigError(f"optimizer.{key}", "must be positive")

    def geometry_params(self, **changes) -> geo.GeometryParams:
        g = dict(self.geometry) | changes
        try:
            return geo.GeometryParams(**g)
        except geo.GeometryError as exc:
            raise ConfigError("geometry", str(exc)) from None

    def rician(self) -> ch.RicianParams:
        try:
            return ch.RicianParams(self.channel["K"], self.channel["Omega_R"])
        except ch.ChannelError as exc:
            raise ConfigError("channel.K/Omega_R", str(exc)) from None

    def interference(self) -> ch.InterferenceParams:
        """Rician relay link against a Rayleigh interferer.

        ``Omega_R`` is the mean received SNR, so the mean channel power is
        Omega_R * sigma2 / P_R.
        """
        c, p = self.channel, self.power
        try:
            return ch.InterferenceParams(
                c["K"], c["Omega_R"] * c["sigma2"] / p["P_R"], c["lambda_I"], p["P_R"], p["P_I"]
            )
        except ch.ChannelError as exc:
            raise ConfigError("channel/power", str(exc)) from None

    def shadowed_rician(self) -> ch.ShadowedRicianParams:
        c = self.channel
        try:
            return ch.ShadowedRicianParams(
                c["b"], c["m"], c["Omega"], self.power["P_S"] / c["sigma2"]
            )
        except ch.ChannelError as exc:
            raise ConfigError("channel.b/m/Omega", str(exc)) from None

    def orders(self) -> QuadratureOrders:
        try:
            return QuadratureOrders(**self.quadrature)
        except ValueError as exc:
            raise ConfigError("quadrature", str(exc)) from None

    def link_budget(self, scenario="ni") -> LinkBudget:
        """Optimizer instance; missing gains come from one seeded fading/position draw.

        gamma_SR = |h_SR|^2 / (sigma2 d0^2); gamma_RD = |h_RD|^2 / (sigma2 d^2) without
        interference, |h_RD|^2 u^2 / (P_I |h_ID|^2 d^2) with it. Distances in km.
        """
        o, c = self.optimizer, self.channel
        rng = np.random.default_rng(o["gain_seed"])
        sr_unit = ch.ShadowedRicianParams(c["b"], c["m"], c["Omega"], 1.0)
        h_sr = float(ch.sample_shadowed_rician(rng, sr_unit, 1)[0])
        g = self.geometry_params(L=o["L"])
        r_i, d = (float(v[0]) for v in geo.sample_receiver(rng, g, 1))
        h_rd = float(ch.sample_rician_power(rng, ch.RicianParams(c["K"], 1.0), 1)[0])
        r_I, theta = (float(v[0]) for v in geo.sample_interferer(rng, g, 1))
        h_id = float(ch.sample_rayleigh_power(rng, c["lambda_I"], 1)[0])

        gamma_sr = o["gamma_SR"]
        if gamma_sr is None:
            gamma_sr = h_sr / (o["sigma2"] * o["d0"] ** c["n1"])
        gamma_rd = o["gamma_RD"]
        if gamma_rd is None:
            if scenario == "ni":
                gamma_rd = h_rd / (o["sigma2"] * d ** c["n2"])
            else:
                u = geo.interferer_distance(r_i, r_I, theta)
                gamma_rd = h_rd * u ** c["n2"] / (self.power["P_I"] * h_id * d ** c["n2"])
        return LinkBudget(
            o["D_SD"], o["B_S"], o["B_R"], o["T_total"], o["P_S_max"], o["P_R_max"],
            float(gamma_sr), float(gamma_rd),
        )


def dump_tree(tree) -> str:
    return yaml.safe_dump(tree, sort_keys=False, default_flow_style=False)
