"""Plain-text configuration: defaults, file loading, overrides, hashing.

Config files are YAML with nested sections; any value can be overridden from
the command line with dotted keys (``trial.noise_sigma_n=0.2``).  The hash of
the canonical dump identifies the effective configuration in output headers.
"""

from __future__ import annotations

import copy
import hashlib
from pathlib import Path
from typing import Any, Mapping

import yaml

from .actuation import ActuatorSpec, CouplingSpec, LoadCellSpec, coupling_for_magnet
from .hand import (
    DEFAULT_FLEXION_RANGES_DEG,
    Digit,
    HandModel,
    default_hand,
    spastic_rest_pose,
)
from .spasticity import (
    BANK_PARAMS,
    MasLevel,
    SubjectBank,
    SubjectProfile,
    bank_stiffness_n_per_mm,
)
from .tendons import NetworkKind, TendonNetwork, config1_extension, config2_pinch

TOOL_VERSION = "0.1.0"

# Bench-wide default for synthetic sensor noise; library-level TrialConfig
# stays noiseless unless asked.
DEFAULT_NOISE_SIGMA_N = 0.4


def default_config() -> dict:
    """The complete default configuration as a plain nested dict."""
    subjects: dict[str, Any] = {}
    for sid, params in BANK_PARAMS.items():
        fraction = params["fraction"]
        if isinstance(fraction, Mapping):
            fraction_cfg: Any = {
                (k.value if isinstance(k, Digit) else k): float(v)
                for k, v in fraction.items()
            }
        else:
            fraction_cfg = float(fraction)
        band = params["band"]
        subjects[sid] = {
            "mas": params["mas"].value,
            "stiffness_n_per_mm": bank_stiffness_n_per_mm(params),
            "rest_flexion_fraction": fraction_cfg,
            "engage_slack_mm": 0.0,
            "magnet": params["magnet"],
            "peak_band_n": [band[0], band[1]],
            "notes": params["notes"],
        }
    return {
        "hand": {
            "joint_center_depth_mm": 9.215,
            "flexion_ranges_deg": {
                k: [v[0], v[1]] for k, v in sorted(DEFAULT_FLEXION_RANGES_DEG.items())
            },
        },
        "network": {
            "kind": "extension",
            "branch_slack_mm": 2.0,
            "extension": {
                "mcp_guide_mm": 8.5,
                "pip_guide_mm": 7.5,
                "ring_protrusion_mm": 1.5,
            },
            "pinch": {
                "pip_guide_mm": 7.5,
                "dip_guide_mm": 7.5,
                "thumb_mcp_guide_mm": 8.5,
                "thumb_ip_guide_mm": 7.5,
            },
        },
        "actuator": {"stroke_mm": 50.0, "max_speed_mm_s": 5.0, "peak_force_n": 50.0},
        "coupling": {"magnet": "standard"},
        "load_cell": {"resolution_n": 0.196, "range_max_n": 50.0},
        "trial": {
            "sample_rate_hz": 100.0,
            "noise_sigma_n": DEFAULT_NOISE_SIGMA_N,
            "functional_flexion_deg": 110.0,
        },
        "calibration": {
            "excursion_target_mm": 57.0,
            "effective_travel_mm": 48.0,
            "depth_tolerance_mm": 0.01,
        },
        "analysis": {
            "trim_threshold_n": 3.0,
            "drop_threshold_n": 10.0,
            "drop_floor_n": 1.0,
        },
        "subjects": subjects,
    }


def _deep_merge(base: dict, override: Mapping) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None = None) -> dict:
    """Defaults deep-merged with an optional YAML file."""
    cfg = default_config()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        loaded = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from err
    if not isinstance(loaded, Mapping):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return _deep_merge(cfg, loaded)


def apply_overrides(cfg: dict, overrides: Mapping[str, str]) -> dict:
    """Apply dotted-key overrides; values are parsed as YAML scalars."""
    merged = copy.deepcopy(cfg)
    for dotted, raw in overrides.items():
        keys = dotted.split(".")
        node = merged
        for key in keys[:-1]:
            nxt = node.get(key)
            if not isinstance(nxt, dict):
                nxt = {}
                node[key] = nxt
            node = nxt
        node[keys[-1]] = yaml.safe_load(raw) if isinstance(raw, str) else raw
    return merged


def canonical_yaml(cfg: Mapping) -> str:
    return yaml.safe_dump(dict(cfg), sort_keys=True, default_flow_style=False)


def config_hash(cfg: Mapping) -> str:
    return hashlib.sha256(canonical_yaml(cfg).encode()).hexdigest()[:12]


def hand_from_config(cfg: Mapping) -> HandModel:
    section = cfg["hand"]
    ranges = {
        k: (float(v[0]), float(v[1]))
        for k, v in section.get("flexion_ranges_deg", {}).items()
    }
    return default_hand(float(section["joint_center_depth_mm"]), ranges)


def network_from_config(
    cfg: Mapping, hand: HandModel, kind: str | None = None
) -> TendonNetwork:
    section = cfg["network"]
    kind_value = kind or section.get("kind", "extension")
    try:
        nk = NetworkKind(kind_value)
    except ValueError:
        raise ConfigError(
            f"unknown network kind {kind_value!r}; choose extension or pinch"
        ) from None
    slack = float(section.get("branch_slack_mm", 2.0))
    if nk is NetworkKind.EXTENSION:
        p = section.get("extension", {})
        return config1_extension(
            hand,
            mcp_guide_mm=float(p.get("mcp_guide_mm", 8.5)),
            pip_guide_mm=float(p.get("pip_guide_mm", 7.5)),
            ring_protrusion_mm=float(p.get("ring_protrusion_mm", 1.5)),
            slack_mm=slack,
        )
    p = section.get("pinch", {})
    return config2_pinch(
        hand,
        pip_guide_mm=float(p.get("pip_guide_mm", 7.5)),
        dip_guide_mm=float(p.get("dip_guide_mm", 7.5)),
        thumb_mcp_guide_mm=float(p.get("thumb_mcp_guide_mm", 8.5)),
        thumb_ip_guide_mm=float(p.get("thumb_ip_guide_mm", 7.5)),
        slack_mm=slack,
    )


def actuator_from_config(cfg: Mapping) -> ActuatorSpec:
    a = cfg["actuator"]
    return ActuatorSpec(
        stroke_mm=float(a["stroke_mm"]),
        max_speed_mm_s=float(a["max_speed_mm_s"]),
        peak_force_n=float(a["peak_force_n"]),
    )


def load_cell_from_config(cfg: Mapping) -> LoadCellSpec:
    c = cfg["load_cell"]
    return LoadCellSpec(
        resolution_n=float(c["resolution_n"]), range_max_n=float(c["range_max_n"])
    )


def coupling_from_config(cfg: Mapping, magnet: str | None = None) -> CouplingSpec:
    return coupling_for_magnet(magnet or cfg["coupling"]["magnet"])


def _fraction_from_config(raw: Any):
    if isinstance(raw, Mapping):
        out: dict = {}
        for k, v in raw.items():
            key = Digit(k) if k != "default" else "default"
            out[key] = float(v)
        return out
    return float(raw)


def subject_bank_from_config(cfg: Mapping, hand: HandModel) -> SubjectBank:
    profiles = []
    for sid, s in cfg["subjects"].items():
        band_raw = s.get("peak_band_n")
        band = None
        if band_raw is not None:
            lo, hi = band_raw
            band = (float(lo), None if hi is None else float(hi))
        profiles.append(
            SubjectProfile(
                subject_id=sid,
                mas=MasLevel(str(s["mas"])),
                stiffness_n_per_mm=float(s["stiffness_n_per_mm"]),
                rest_pose=spastic_rest_pose(
                    hand, _fraction_from_config(s["rest_flexion_fraction"])
                ),
                engage_slack_mm=float(s.get("engage_slack_mm", 0.0)),
                peak_band_n=band,
                magnet=s.get("magnet", "standard"),
                notes=s.get("notes", ""),
            )
        )
    return SubjectBank(tuple(profiles))


def write_config(cfg: Mapping, path: str | Path, provenance: list[str] | None = None) -> None:
    """Write a config file with optional leading comment lines."""
    from .traceio import write_text_atomic

    header = "".join(f"# {line}\n" for line in provenance or [])
    write_text_atomic(Path(path), header + canonical_yaml(cfg))
