"""Scenario configuration: JSON in, validated physical objects out.

Units live in the key names (``_per_cm``, ``_cm``, ``_khz``, ``_mhz``, ``_us``).
Every problem is reported as a :class:`ConfigError` naming the dotted path of
the offending entry.  :func:`parse_config` also returns the fully resolved
block (defaults filled in) that goes into the run manifest.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .echoes import optimal_finesse
from .errors import ConfigError, LightstoreError
from .protocol import Direction, ProtocolTimeline, Scheme
from .response import MediumParams, PulseEnvelope
from .spectra import MHZ, TWO_PI, SpectralProfile

KHZ = TWO_PI * 1e3
US = 1e-6

_PROFILE_KEYS = {
    "flat": {"level"},
    "bleached": set(),
    "hole": {"delta0_mhz"},
    "lorentzian_comb": {"period_us", "gamma_peak_mhz", "finesse"},
    "cosine_grating": {"period_us"},
    "sampled": {"csv", "period_us", "background"},
}
_TOP_KEYS = {"medium", "profile", "pulse", "protocol", "sweep", "seed"}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    resolved: dict
    medium: MediumParams
    profile: SpectralProfile
    pulse: PulseEnvelope
    protocol: dict | None
    sweep: SweepSpec | None
    seed: int

    def timeline(self, group_delay: float = 0.0) -> ProtocolTimeline | None:
        """Protocol timeline in seconds; ``group_delay`` is used by SHBSL runs without Raman pulses."""
        p = self.protocol
        if p is None:
            return None

        def s(key):
            return None if p.get(key) is None else p[key] * US

        scheme = Scheme(p["scheme"])
        period = self.profile.period_T if scheme is Scheme.AFC else None
        return ProtocolTimeline(
            scheme=scheme,
            signal_in_time=p["signal_in_us"] * US,
            raman1_time=s("raman1_us"),
            raman2_time=s("raman2_us"),
            comb_period_T=period,
            spin_lifetime=math.inf if p["spin_lifetime_us"] is None else p["spin_lifetime_us"] * US,
            retrieval_direction=Direction(p["direction"]),
            transfer_efficiency=p["transfer_efficiency"],
            group_delay=group_delay,
        )


def _block(cfg: dict, name: str, required: bool = True) -> dict | None:
    b = cfg.get(name)
    if b is None:
        if required:
            raise ConfigError(name, "missing block")
        return None
    if not isinstance(b, dict):
        raise ConfigError(name, "must be an object")
    return b


def _unknown(block: dict, allowed: set, prefix: str):
    for k in block:
        if k not in allowed:
            raise ConfigError(f"{prefix}.{k}" if prefix else k, "unknown key")


def _num(block: dict, key: str, prefix: str, *, default=None, positive=False, nonneg=False, integer=False):
    name = f"{prefix}.{key}" if prefix else key
    v = block.get(key, default)
    if v is None:
        raise ConfigError(name, "is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"must be a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(name, f"must be an integer, got {v!r}")
        v = int(v)
    else:
        v = float(v)
    if not math.isfinite(v):
        raise ConfigError(name, "must be finite")
    if positive and not v > 0:
        raise ConfigError(name, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(name, f"must be >= 0, got {v}")
    return v


def _opt_num(block, key, prefix, **kw):
    return None if block.get(key) is None else _num(block, key, prefix, **kw)


def _medium(cfg):
    b = _block(cfg, "medium")
    _unknown(b, {"alpha_per_cm", "length_cm", "gamma_khz"}, "medium")
    r = {
        "alpha_per_cm": _num(b, "alpha_per_cm", "medium", nonneg=True),
        "length_cm": _num(b, "length_cm", "medium", positive=True),
        "gamma_khz": _num(b, "gamma_khz", "medium", default=10.0, positive=True),
    }
    medium = MediumParams(r["alpha_per_cm"] * 100.0, r["length_cm"] * 1e-2, r["gamma_khz"] * KHZ)
    return r, medium


def _profile(cfg, base_dir: Path, alphaL: float):
    b = _block(cfg, "profile")
    kind = b.get("kind")
    if kind not in _PROFILE_KEYS:
        raise ConfigError("profile.kind", f"must be one of {sorted(_PROFILE_KEYS)}, got {kind!r}")
    _unknown(b, _PROFILE_KEYS[kind] | {"kind"}, "profile")
    r: dict[str, Any] = {"kind": kind}
    if kind == "flat":
        r["level"] = _num(b, "level", "profile", default=1.0, nonneg=True)
        prof = SpectralProfile.flat(r["level"])
    elif kind == "bleached":
        prof = SpectralProfile.bleached()
    elif kind == "hole":
        r["delta0_mhz"] = _num(b, "delta0_mhz", "profile", positive=True)
        prof = SpectralProfile.hole(r["delta0_mhz"] * MHZ)
    elif kind == "cosine_grating":
        r["period_us"] = _num(b, "period_us", "profile", positive=True)
        prof = SpectralProfile.cosine_grating(r["period_us"] * US)
    elif kind == "lorentzian_comb":
        r["period_us"] = T = _num(b, "period_us", "profile", positive=True)
        has_g, has_f = b.get("gamma_peak_mhz") is not None, b.get("finesse") is not None
        if has_g == has_f:
            raise ConfigError("profile.finesse", "give exactly one of finesse or gamma_peak_mhz")
        if has_g:
            r["gamma_peak_mhz"] = _num(b, "gamma_peak_mhz", "profile", positive=True)
            gamma_peak = r["gamma_peak_mhz"] * MHZ
        else:
            if b["finesse"] == "optimal":
                F = optimal_finesse(alphaL).finesse if alphaL > 0 else math.pi
                r["finesse"] = "optimal"
            else:
                F = _num(b, "finesse", "profile")
                if F < 1:
                    raise ConfigError("profile.finesse", f"must be >= 1 or \"optimal\", got {F}")
                r["finesse"] = F
            gamma_peak = math.pi / (F * T * US)
        try:
            prof = SpectralProfile.lorentzian_comb(gamma_peak, T * US)
        except LightstoreError as exc:
            raise ConfigError("profile.gamma_peak_mhz", str(exc)) from None
    else:
        path = b.get("csv")
        if not isinstance(path, str):
            raise ConfigError("profile.csv", "must be a path to a 'delta_mhz,g' CSV file")
        p = Path(path)
        if not p.is_absolute():
            p = (base_dir / p).resolve()
        if not p.is_file():
            raise ConfigError("profile.csv", f"file not found: {p}")
        r["csv"] = str(p)
        r["period_us"] = _opt_num(b, "period_us", "profile", positive=True)
        r["background"] = _opt_num(b, "background", "profile", nonneg=True)
        try:
            prof = SpectralProfile.from_csv(
                p,
                period_T=None if r["period_us"] is None else r["period_us"] * US,
                background=r["background"],
            )
        except (LightstoreError, ValueError, IndexError) as exc:
            raise ConfigError("profile.csv", str(exc)) from None
    return r, prof


def _pulse(cfg):
    b = _block(cfg, "pulse")
    _unknown(b, {"shape", "rms_us", "center_us", "grid", "t0_us", "amplitude"}, "pulse")
    shape = b.get("shape", "gaussian")
    if shape != "gaussian":
        raise ConfigError("pulse.shape", f"only 'gaussian' is supported, got {shape!r}")
    g = b.get("grid")
    if not isinstance(g, dict):
        raise ConfigError("pulse.grid", "missing block with n_points and dt_us")
    _unknown(g, {"n_points", "dt_us"}, "pulse.grid")
    n = _num(g, "n_points", "pulse.grid", integer=True, positive=True)
    if n < 4 or n & (n - 1):
        raise ConfigError("pulse.grid.n_points", f"must be a power of two >= 4, got {n}")
    r = {
        "shape": "gaussian",
        "rms_us": _num(b, "rms_us", "pulse", positive=True),
        "center_us": _num(b, "center_us", "pulse"),
        "t0_us": _num(b, "t0_us", "pulse", default=0.0),
        "amplitude": _num(b, "amplitude", "pulse", default=1.0, positive=True),
        "grid": {"n_points": n, "dt_us": _num(g, "dt_us", "pulse.grid", positive=True)},
    }
    pulse = PulseEnvelope.gaussian(
        r["rms_us"] * US, r["center_us"] * US, n, r["grid"]["dt_us"] * US, r["t0_us"] * US, r["amplitude"]
    )
    return r, pulse


def _protocol(cfg, pulse_r, profile_kind):
    b = _block(cfg, "protocol", required=False)
    if b is None:
        return None
    keys = {"scheme", "signal_in_us", "raman1_us", "raman2_us", "spin_lifetime_us", "direction", "transfer_efficiency"}
    _unknown(b, keys, "protocol")
    try:
        scheme = Scheme(b.get("scheme"))
    except ValueError:
        raise ConfigError("protocol.scheme", f"must be 'AFC' or 'SHBSL', got {b.get('scheme')!r}") from None
    if scheme is Scheme.AFC and profile_kind not in ("lorentzian_comb", "cosine_grating", "sampled"):
        raise ConfigError("protocol.scheme", "AFC timelines need a periodic profile")
    try:
        direction = Direction(b.get("direction", "Forward"))
    except ValueError:
        raise ConfigError("protocol.direction", "must be 'Forward' or 'Backward'") from None
    r = {
        "scheme": scheme.value,
        "signal_in_us": _num(b, "signal_in_us", "protocol", default=pulse_r["center_us"]),
        "raman1_us": _opt_num(b, "raman1_us", "protocol"),
        "raman2_us": _opt_num(b, "raman2_us", "protocol"),
        "spin_lifetime_us": _opt_num(b, "spin_lifetime_us", "protocol", positive=True),
        "direction": direction.value,
        "transfer_efficiency": _num(b, "transfer_efficiency", "protocol", default=1.0, positive=True),
    }
    if r["transfer_efficiency"] > 1:
        raise ConfigError("protocol.transfer_efficiency", "must be in (0, 1]")
    if r["raman1_us"] is not None and r["raman2_us"] is not None and r["raman2_us"] < r["raman1_us"]:
        raise ConfigError("protocol.raman2_us", "must not precede raman1_us")
    return r


def _sweep(cfg):
    b = _block(cfg, "sweep", required=False)
    if b is None:
        return None, None
    _unknown(b, {"parameter", "values", "start", "stop", "steps"}, "sweep")
    param = b.get("parameter")
    if not isinstance(param, str) or param.split(".")[0] not in ("medium", "profile", "pulse", "protocol"):
        raise ConfigError("sweep.parameter", f"must be a dotted path such as 'medium.alpha_per_cm', got {param!r}")
    if b.get("values") is not None:
        vals = b["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep.values", "must be a non-empty list")
        out = []
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"sweep.values[{i}]", f"must be a finite number, got {v!r}")
            out.append(float(v))
        return {"parameter": param, "values": out}, SweepSpec(param, tuple(out))
    start = _num(b, "start", "sweep")
    stop = _num(b, "stop", "sweep")
    steps = _num(b, "steps", "sweep", integer=True, positive=True)
    vals = tuple(float(v) for v in np.linspace(start, stop, steps))
    return {"parameter": param, "start": start, "stop": stop, "steps": steps}, SweepSpec(param, vals)


def parse_config(cfg: dict, base_dir: Path | str = ".") -> ScenarioConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    _unknown(cfg, _TOP_KEYS, "")
    base_dir = Path(base_dir)
    medium_r, medium = _medium(cfg)
    profile_r, profile = _profile(cfg, base_dir, medium.optical_depth)
    pulse_r, pulse = _pulse(cfg)
    protocol_r = _protocol(cfg, pulse_r, profile_r["kind"])
    sweep_r, sweep = _sweep(cfg)
    seed = _num(cfg, "seed", "", default=0, integer=True, nonneg=True) if "seed" in cfg else 0
    resolved = {"medium": medium_r, "profile": profile_r, "pulse": pulse_r}
    if protocol_r is not None:
        resolved["protocol"] = protocol_r
    if sweep_r is not None:
        resolved["sweep"] = sweep_r
    resolved["seed"] = seed
    return ScenarioConfig(resolved, medium, profile, pulse, protocol_r, sweep, seed)


def load_config(path: Path | str) -> tuple[dict, Path]:
    """Read a config file, or the ``config`` block of a run manifest."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if isinstance(data, dict) and "manifest_version" in data:
        data = data.get("config")
    return data, path.resolve().parent


def with_parameter(cfg: dict, dotted: str, value: float) -> dict:
    """Copy of ``cfg`` with the entry at ``dotted`` replaced by ``value``; drops the sweep block."""
    out = copy.deepcopy(cfg)
    out.pop("sweep", None)
    node = out
    parts = dotted.split(".")
    for p in parts[:-1]:
        nxt = node.get(p) if isinstance(node, dict) else None
        if not isinstance(nxt, dict):
            raise ConfigError("sweep.parameter", f"no block {p!r} in {dotted!r}")
        node = nxt
    node[parts[-1]] = value
    return out
