"""Command-line front end.

Four commands: ``simulate`` writes trial traces, ``analyze`` runs the
force-position pipeline over recorded CSVs, ``calibrate`` solves model
parameters and writes a derived config, ``reproduce`` reruns the whole
campaign with self-checks.  Every flag overrides the corresponding config
key; the config file comes from ``--config`` or the EXOSIM_CONFIG
environment variable, with built-in defaults underneath.

Exit codes: 0 success, 1 validation or input error, 2 reproduction checks
failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import config as cfgmod
from .actuation import coupling_for_magnet
from .analysis import analyze, batch_report
from .config import ConfigError, TOOL_VERSION
from .hand import Digit, JointKind
from .reproduce import run_reproduction
from .spasticity import calibrate_stiffness
from .tendons import (
    DepthCalibrationError,
    calibrate_depth,
    config1_extension,
    full_flexion_excursion_mm,
    index_branch,
)
from .traceio import (
    read_trace,
    render_fit_csv,
    render_report_yaml,
    write_text_atomic,
    write_trace,
)
from .trial import TrialConfig, derive_seed, run_trial

ENV_CONFIG = "EXOSIM_CONFIG"


@dataclass(frozen=True)
class RunManifest:
    """What one invocation is about to do, resolved from flags and env."""

    command: str
    config_path: Path | None
    output_dir: Path
    seed: int
    overrides: dict[str, str] = field(default_factory=dict)


class CliError(Exception):
    pass


def _parse_subjects(spec: str | None, available: tuple[str, ...]) -> list[str]:
    if spec is None or spec == "all":
        return list(available)
    chosen: list[str] = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo, hi = token.split("..", 1)
            try:
                start, stop = available.index(lo), available.index(hi)
            except ValueError:
                raise CliError(f"unknown subject in range {token!r}") from None
            if stop < start:
                raise CliError(f"empty subject range {token!r}")
            chosen.extend(available[start : stop + 1])
        else:
            if token not in available:
                raise CliError(
                    f"unknown subject {token!r}; available: {', '.join(available)}"
                )
            chosen.append(token)
    if not chosen:
        raise CliError("no subjects selected")
    return chosen


def _parse_seed_spec(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        start, stop = int(lo), int(hi)
        if stop < start:
            raise CliError(f"empty seed range {spec!r}")
        return list(range(start, stop + 1))
    return [int(spec)]


def _resolve_config_path(arg: str | None) -> Path | None:
    if arg:
        return Path(arg)
    env = os.environ.get(ENV_CONFIG)
    return Path(env) if env else None


def _effective_config(args) -> dict:
    cfg = cfgmod.load_config(_resolve_config_path(args.config))
    overrides: dict[str, str] = {}
    for item in args.set or []:
        if "=" not in item:
            raise CliError(f"override must look like section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "noise_sigma", None) is not None:
        overrides["trial.noise_sigma_n"] = str(args.noise_sigma)
    if getattr(args, "magnet", None) is not None:
        overrides["coupling.magnet"] = args.magnet
    if getattr(args, "tendon_config", None) is not None:
        overrides["network.kind"] = args.tendon_config
    return cfgmod.apply_overrides(cfg, overrides)


def _cmd_simulate(args) -> int:
    cfg = _effective_config(args)
    chash = cfgmod.config_hash(cfg)
    hand = cfgmod.hand_from_config(cfg)
    network = cfgmod.network_from_config(cfg, hand)
    actuator = cfgmod.actuator_from_config(cfg)
    cell = cfgmod.load_cell_from_config(cfg)
    bank = cfgmod.subject_bank_from_config(cfg, hand)
    subjects = _parse_subjects(args.subjects, bank.ids())
    if args.trials < 1:
        raise CliError("--trials must be >= 1")

    # Resolve everything before the first write so an invalid request
    # leaves no files behind.
    magnet_override = args.magnet
    plans = []
    for sid in subjects:
        profile = bank.by_id(sid)
        plans.append(
            TrialConfig(
                hand=hand,
                network=network,
                subject=profile,
                actuator=actuator,
                coupling=coupling_for_magnet(magnet_override or profile.magnet),
                cell=cell,
                sample_rate_hz=float(cfg["trial"]["sample_rate_hz"]),
                noise_sigma_n=float(cfg["trial"]["noise_sigma_n"]),
                functional_flexion_deg=float(cfg["trial"]["functional_flexion_deg"]),
            )
        )

    out = Path(args.out)
    written = []
    for trial_cfg in plans:
        s_idx = bank.ids().index(trial_cfg.subject.subject_id)
        for t_idx in range(args.trials):
            trace = run_trial(trial_cfg, derive_seed(args.seed, s_idx, t_idx))
            name = f"{trial_cfg.subject.subject_id}_{trace.network}_t{t_idx:02d}.csv"
            written.append(write_trace(trace, out / name, config_hash=chash))
    for path in written:
        print(path)
    return 0


def _cmd_analyze(args) -> int:
    paths: list[Path] = []
    for raw in args.inputs:
        p = Path(raw)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.csv")))
        elif p.exists():
            paths.append(p)
        else:
            raise CliError(f"no such trace file or directory: {p}")
    paths = [p for p in paths if not p.name.endswith("_fit.csv")]
    if not paths:
        raise CliError("no trace CSVs to analyze")
    cfg = _effective_config(args)
    out = Path(args.out)
    reports = []
    for p in paths:
        trace, warnings = read_trace(p)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        report = analyze(
            trace,
            label=p.stem,
            trim_threshold_n=float(cfg["analysis"]["trim_threshold_n"]),
            drop_threshold_n=float(cfg["analysis"]["drop_threshold_n"]),
            drop_floor_n=float(cfg["analysis"]["drop_floor_n"]),
        )
        write_text_atomic(out / f"{p.stem}.report.yaml", render_report_yaml(report))
        write_text_atomic(out / f"{p.stem}_fit.csv", render_fit_csv(report))
        reports.append(report)
    summary = batch_report(reports)
    write_text_atomic(out / "summary.txt", summary.render())
    print(summary.render(), end="")
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _effective_config(args)
    target = float(cfg["calibration"]["excursion_target_mm"])
    tol = float(cfg["calibration"].get("depth_tolerance_mm", 0.01))
    travel = float(cfg["calibration"]["effective_travel_mm"])
    hand0 = cfgmod.hand_from_config(cfg)
    try:
        hand = calibrate_depth(hand0, target, tol_mm=tol)
    except DepthCalibrationError as err:
        lo, hi = err.bracket_mm
        raise CliError(f"{err} (achievable excursion {lo:.3f}..{hi:.3f} mm)") from err
    depth = hand.depth((Digit.INDEX, JointKind.MCP))
    excursion = full_flexion_excursion_mm(hand, index_branch(config1_extension(hand)))

    derived = dict(cfg)
    derived["hand"] = dict(cfg["hand"])
    derived["hand"]["joint_center_depth_mm"] = depth
    derived["subjects"] = {}
    provenance = [
        f"exosim calibrate {TOOL_VERSION}",
        f"config: {cfgmod.config_hash(cfg)}",
        f"joint_center_depth_mm = {depth:.6f} "
        f"(index extension excursion {excursion:.4f} mm, target {target} mm)",
    ]
    for sid, s in cfg["subjects"].items():
        entry = dict(s)
        band = s.get("peak_band_n")
        if band and band[1] is not None:
            midpoint = 0.5 * (float(band[0]) + float(band[1]))
            entry["stiffness_n_per_mm"] = calibrate_stiffness(
                midpoint, travel, float(s.get("engage_slack_mm", 0.0))
            )
            provenance.append(
                f"subject {sid}: stiffness for a {midpoint:g} N peak over "
                f"{travel:g} mm of effective travel"
            )
        else:
            provenance.append(f"subject {sid}: stiffness kept as configured")
        derived["subjects"][sid] = entry

    out = Path(args.out) / "calibrated_config.yaml"
    cfgmod.write_config(derived, out, provenance)
    print(out)
    return 0


def _cmd_reproduce(args) -> int:
    cfg = _effective_config(args)
    seeds = _parse_seed_spec(str(args.seed))
    out = Path(args.out)
    all_passed = True
    for seed in seeds:
        run_dir = out if len(seeds) == 1 else out / f"seed_{seed}"
        checks, manifest = run_reproduction(
            run_dir,
            base_seed=seed,
            cfg=cfg,
            magnet=args.magnet,
            trials_per_subject=args.trials,
        )
        prefix = f"[seed {seed}] " if len(seeds) > 1 else ""
        for c in checks:
            print(prefix + c.line())
        if not all(c.passed for c in checks):
            all_passed = False
        print(prefix + f"manifest: {manifest}")
    return 0 if all_passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exosim",
        description="Simulator and analysis bench for a tendon-driven hand orthosis.",
    )
    parser.add_argument("--version", action="version", version=f"exosim {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, default_out: str) -> None:
        p.add_argument("--config", help=f"config file (default: ${ENV_CONFIG} or built-ins)")
        p.add_argument("--out", default=default_out, help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, e.g. trial.noise_sigma_n=0.2")

    p_sim = sub.add_parser("simulate", help="run trials and write trace CSVs")
    common(p_sim, "exosim_out/traces")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--subjects", default="all",
                       help="comma list and/or ranges, e.g. S1,S3 or S1..S5")
    p_sim.add_argument("--trials", type=int, default=1, help="trials per subject")
    p_sim.add_argument("--magnet", choices=["standard", "strong"],
                       help="force one coupling for all subjects")
    p_sim.add_argument("--noise-sigma", type=float, help="sensor noise sigma, N")
    p_sim.add_argument("--tendon-config", choices=["extension", "pinch"],
                       help="which tendon network to drive")

    p_an = sub.add_parser("analyze", help="force-position analysis of trace CSVs")
    common(p_an, "exosim_out/analysis")
    p_an.add_argument("inputs", nargs="+", help="trace CSV files or directories")

    p_cal = sub.add_parser("calibrate", help="solve model parameters, write derived config")
    common(p_cal, "exosim_out/calibration")

    p_rep = sub.add_parser("reproduce", help="rerun the campaign with self-checks")
    common(p_rep, "exosim_out/reproduction")
    p_rep.add_argument("--seed", default="0", help="base seed or range, e.g. 1..20")
    p_rep.add_argument("--trials", type=int, default=1, help="trials per subject")
    p_rep.add_argument("--magnet", choices=["standard", "strong"],
                       help="force one coupling for all subjects")
    p_rep.add_argument("--noise-sigma", type=float, help="sensor noise sigma, N")

    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "calibrate": _cmd_calibrate,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors; fold
        # usage errors into the validation-error code.
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ConfigError, DepthCalibrationError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
