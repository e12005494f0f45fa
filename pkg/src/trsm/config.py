"""JSON design configuration.

Every key has a default reproducing the 20x10 low-complexity prototype, so
an empty document ``{}`` is a valid configuration. See ``docs/config.md``
for the schema.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

DEFAULTS = {
    "frequency": {
        "design_hz": 7.3e9,
        "sweep_hz": {"start": 6.5e9, "stop": 8.5e9, "step": 0.05e9},
        "operating_band_hz": [7.0e9, 8.0e9],
    },
    "aperture": {
        "rows": 10,
        "cols": 20,
        "cell_kind": "low_complexity",
        "pitch_x_m": 0.011,
        "pitch_y_m": 0.022,
        "design_width": "physical",
    },
    "feed": {
        "gain_dbi": 9.0,
        "q": None,
        "position_m": None,
        "focal_length_m": 0.1504,
        "taper_angle_deg": None,
        "f_over_d": 0.72,
        "phi0_deg": 0.0,
        "polarization": "y",
    },
    "table": {
        "source": "surrogate",
        "path": None,
        "n_ul_samples": 401,
        "frequencies_hz": {"start": 6.0e9, "stop": 9.0e9, "step": 0.05e9},
        "surrogate": {},
    },
    "grid": {"dtheta_deg": 0.5, "dphi_deg": 1.0, "element_exponent": 1.0},
    "output_dir": "out",
}


def _merge(base: dict, over: dict, path="") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "surrogate" and not _is_range(base[key]):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def _is_range(d) -> bool:
    return isinstance(d, dict) and set(d) == {"start", "stop", "step"}


def frequency_list(spec, name: str) -> np.ndarray:
    if isinstance(spec, dict):
        try:
            start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name} range needs numeric start/stop/step") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"{name} range is empty or has a non-positive step")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = start + step * np.arange(n)
    elif isinstance(spec, (list, tuple)):
        vals = np.asarray(spec, dtype=float)
    elif isinstance(spec, (int, float)):
        vals = np.array([float(spec)])
    else:
        raise ConfigError(f"{name} must be a list, a number or a start/stop/step range")
    vals = np.round(vals, 3)
    if vals.size == 0 or np.any(vals <= 0):
        raise ConfigError(f"{name} must be non-empty and positive")
    return vals


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` strings; values are parsed as JSON when possible."""
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = raw
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} does not address an object")
        node[parts[-1]] = _parse_value(text)
    return raw


@dataclass(frozen=True)
class DesignConfig:
    data: dict
    base_dir: str = "."

    def __getitem__(self, key):
        return self.data[key]

    @property
    def design_frequency(self) -> float:
        return float(self.data["frequency"]["design_hz"])

    @property
    def sweep_frequencies(self) -> np.ndarray:
        return frequency_list(self.data["frequency"]["sweep_hz"], "frequency.sweep_hz")

    @property
    def table_frequencies(self) -> np.ndarray:
        return frequency_list(self.data["table"]["frequencies_hz"], "table.frequencies_hz")

    @property
    def operating_band(self):
        band = self.data["frequency"]["operating_band_hz"]
        return None if band is None else (float(band[0]), float(band[1]))

    @property
    def output_dir(self) -> str:
        return self.data["output_dir"]

    def table_path(self):
        path = self.data["table"]["path"]
        if path is None:
            return None
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def validate(data: dict) -> None:
    fr = data["frequency"]
    if not isinstance(fr["design_hz"], (int, float)) or fr["design_hz"] <= 0:
        raise ConfigError("frequency.design_hz must be positive")
    ap = data["aperture"]
    for key in ("rows", "cols"):
        if not isinstance(ap[key], int) or isinstance(ap[key], bool) or ap[key] < 1:
            raise ConfigError(f"aperture.{key} must be an integer >= 1")
    for key in ("pitch_x_m", "pitch_y_m"):
        if not isinstance(ap[key], (int, float)) or ap[key] <= 0:
            raise ConfigError(f"aperture.{key} must be positive")
    if ap["cell_kind"] not in ("basic", "low_complexity"):
        raise ConfigError("aperture.cell_kind must be 'basic' or 'low_complexity'")
    if ap["design_width"] not in ("physical", "f_over_d"):
        raise ConfigError("aperture.design_width must be 'physical' or 'f_over_d'")
    feed = data["feed"]
    if feed["position_m"] is not None and len(feed["position_m"]) != 3:
        raise ConfigError("feed.position_m must have three coordinates")
    if (feed["position_m"] is None and feed["focal_length_m"] is None
            and feed["taper_angle_deg"] is None):
        raise ConfigError("feed needs position_m, focal_length_m or taper_angle_deg")
    if feed["q"] is None and feed["gain_dbi"] is None:
        raise ConfigError("feed needs gain_dbi or q")
    tb = data["table"]
    if tb["source"] not in ("surrogate", "file"):
        raise ConfigError("table.source must be 'surrogate' or 'file'")
    if tb["source"] == "file" and not tb["path"]:
        raise ConfigError("table.source 'file' needs table.path")
    if not isinstance(tb["surrogate"], dict):
        raise ConfigError("table.surrogate must be an object")
    g = data["grid"]
    if g["dtheta_deg"] <= 0 or g["dphi_deg"] <= 0:
        raise ConfigError("grid steps must be positive")


def load_config(path=None, overrides=None) -> DesignConfig:
    raw, base = {}, "."
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        base = os.path.dirname(os.path.abspath(path))
    raw = apply_overrides(raw, overrides)
    data = _merge(DEFAULTS, raw)
    validate(data)
    cfg = DesignConfig(data, base)
    cfg.sweep_frequencies
    cfg.table_frequencies
    tp = cfg.table_path()
    if data["table"]["source"] == "file" and not os.path.isfile(tp):
        raise DataError(f"table file {tp} does not exist")
    return cfg
