"""Run configuration: an INI file with sections model, field, state, integration, experiment.

Numbers are echoed with 17 significant digits so a canonical config parses
back to exactly the same values.
"""
import configparser
import copy
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fields
from .evolution_space import EvolutionPoint, ModelCoefficients
from .minkowski import LabFrameState, skew_from_parts
from .presymplectic import TwoFormModel

SCHEMA = {
    "model": {"preset": str, "m": float, "s": float, "q": float, "g": float, "k": float, "l": float},
    "field": {"kind": str, "profile": str, "kappa": float, "r_min": float, "table_path": str,
              "E": "vec3", "B": "vec3", "gauge_origin": "vec3", "slope_scale": float},
    "state": {"r": "vec3", "t": float, "v": "vec3", "u": "vec3"},
    "integration": {"h": float, "n_steps": int, "project_every": int, "horizon": float},
    "experiment": {"eps_list": "floats", "family_size": int, "seed": int, "n_points": int,
                   "drift_bound": float, "r_range": "floats", "v_max": float},
    "output": {"directory": str, "format": str},
}

BASE = {
    "model": {"preset": "stora", "m": 1.0, "s": 1.0, "q": 1.0, "g": 2.0},
    "field": {"kind": "central_electric", "profile": "coulomb", "kappa": 0.05, "r_min": 1e-6},
    "state": {"r": [1.0, 0.0, 0.0], "t": 0.0, "v": [0.0, 0.22, 0.02],
              "u": [0.3, 0.2, 0.9]},
    "integration": {"h": 0.05, "n_steps": 10000, "project_every": 1},
    "experiment": {"eps_list": [1e-2, 3e-3, 1e-3, 3e-4], "family_size": 40, "seed": 0,
                   "n_points": 20, "drift_bound": 1e-8, "r_range": [1.0, 3.0], "v_max": 0.3},
    "output": {"directory": "out", "format": "csv"},
}

# per-command overrides applied when no config file is given
COMMAND_DEFAULTS = {
    "audit": {},
    "bmt": {
        "model": {"g": 2.5},
        "field": {"kind": "uniform", "E": [0.3, -0.5, 0.8], "B": [0.6, 0.2, -0.4]},
        "state": {"r": [1.0, 0.5, 1.2], "v": [0.2, -0.1, 0.3], "u": [0.3, 0.5, -0.8]},
    },
    "conserve": {},
    "spinorbit": {"experiment": {"eps_list": [4e-3, 2e-3, 1e-3]}},
}


class ConfigError(ValueError):
    pass


def fmt(x):
    """17-significant-digit decimal text for a float."""
    return format(float(x), ".17g")


def _parse_value(kind, text, where):
    text = text.strip()
    try:
        if kind is str:
            return text
        if kind is float:
            return float(text)
        if kind is int:
            return int(text)
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {text!r}") from exc
    if kind == "vec3" and len(vals) != 3:
        raise ConfigError(f"{where}: expected three numbers, got {len(vals)}")
    return vals


def _format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(fmt(v) for v in value)
    return fmt(value)


def _merge(dst, src):
    for sec, items in src.items():
        dst.setdefault(sec, {}).update(copy.deepcopy(items))
    return dst


@dataclass
class RunConfig:
    data: dict

    @classmethod
    def defaults(cls, command=None):
        data = _merge(copy.deepcopy(BASE), COMMAND_DEFAULTS.get(command, {}))
        return cls(data)

    @classmethod
    def from_text(cls, text, command=None, base_dir=None):
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        parser.optionxform = str
        parser.read_string(text)
        data = cls.defaults(command).data
        for sec in parser.sections():
            if sec not in SCHEMA:
                raise ConfigError(f"unknown section [{sec}]")
            for key, raw in parser.items(sec):
                if key not in SCHEMA[sec]:
                    raise ConfigError(f"unknown key {key!r} in [{sec}]")
                val = _parse_value(SCHEMA[sec][key], raw, f"[{sec}] {key}")
                if key == "table_path" and val and base_dir is not None and not Path(val).is_absolute():
                    val = str(Path(base_dir) / val)
                data[sec][key] = val
        return cls(data)

    @classmethod
    def load(cls, path, command=None):
        path = Path(path)
        return cls.from_text(path.read_text(), command, base_dir=path.parent)

    def canonical(self):
        """INI text with sections and keys in schema order."""
        lines = []
        for sec, keys in SCHEMA.items():
            items = self.data.get(sec, {})
            lines.append(f"[{sec}]")
            for key in keys:
                if key in items and items[key] is not None:
                    lines.append(f"{key} = {_format_value(items[key])}")
            lines.append("")
        return "\n".join(lines)

    def flat(self):
        """``section.key -> value`` map for JSON summaries."""
        out = {}
        for sec, keys in SCHEMA.items():
            for key in keys:
                if key in self.data.get(sec, {}):
                    out[f"{sec}.{key}"] = self.data[sec][key]
        return out

    def __getitem__(self, sec):
        return self.data[sec]

    # builders ---------------------------------------------------------

    def coefficients(self, preset=None):
        m = self["model"]
        return ModelCoefficients.from_preset(preset or m["preset"], m["m"], m["s"], m["q"], m["g"],
                                             m.get("k") if (preset or m["preset"]) == "custom" else None,
                                             m.get("l") if (preset or m["preset"]) == "custom" else None)

    def field_model(self):
        f = self["field"]
        kind = f["kind"]
        if kind == "uniform":
            F0 = skew_from_parts(f.get("B", [0.0, 0.0, 0.0]), f.get("E", [0.0, 0.0, 0.0]))
            return fields.uniform(F0, gauge_origin=f.get("gauge_origin"))
        if kind == "central_electric":
            profile = f.get("profile", "coulomb")
            kappa, r_min = f.get("kappa", 1.0), f.get("r_min", 1e-6)
            if profile == "tabulated":
                if not f.get("table_path"):
                    raise ConfigError("[field] tabulated profile needs table_path")
                r, phi = fields.load_profile_table(f["table_path"])
                return fields.tabulated(r, phi, kappa=kappa, r_min=r_min)
            if profile not in ("coulomb", "harmonic"):
                raise ConfigError(f"[field] unknown profile {profile!r}")
            return fields.CentralField(fields.RadialProfile(profile, kappa), r_min=r_min)
        if kind == "linear":
            # deliberately non-Maxwell: E_z grows along x
            scale = f.get("slope_scale", 1.0)
            slopes = np.zeros((4, 4, 4))
            slopes[0] = skew_from_parts([0.0, 0.0, 0.0], [0.0, 0.0, scale])
            F0 = skew_from_parts(f.get("B", [0.0, 0.0, 0.0]), f.get("E", [0.0, 0.0, 0.0]))
            return fields.LinearField(F0, slopes)
        raise ConfigError(f"[field] unknown kind {kind!r}")

    def two_form_model(self, preset=None):
        coeffs = self.coefficients(preset)
        variant = {"free": "free", "souriau": "souriau"}.get(coeffs.preset, "stora")
        return TwoFormModel(variant, coeffs, self.field_model())

    def start_point(self):
        st = self["state"]
        u = np.asarray(st["u"], dtype=float)
        lab = LabFrameState(r=st["r"], t=st.get("t", 0.0), v=st["v"], u=u / np.linalg.norm(u))
        return EvolutionPoint.from_lab(lab)


def to_json(obj):
    """Deterministic JSON with 17-significant-digit floats; non-finite values become null."""
    buf = io.StringIO()
    _write_json(obj, buf, 0)
    buf.write("\n")
    return buf.getvalue()


def _write_json(obj, buf, depth):
    pad = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            buf.write("{}")
            return
        buf.write("{\n")
        for i, (k, v) in enumerate(obj.items()):
            buf.write(pad + json.dumps(str(k)) + ": ")
            _write_json(v, buf, depth + 1)
            buf.write(",\n" if i < len(obj) - 1 else "\n")
        buf.write("  " * depth + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        buf.write("[" + ", ".join(_scalar_json(v) if not isinstance(v, (list, tuple, dict, np.ndarray))
                                  else _nested_json(v, depth + 1) for v in obj) + "]")
    else:
        buf.write(_scalar_json(obj))


def _nested_json(obj, depth):
    buf = io.StringIO()
    _write_json(obj, buf, depth)
    return buf.getvalue()


def _scalar_json(v):
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v) if math.isfinite(v) else "null"
    return json.dumps(str(v))
