"""Command-line entry point.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, io
from .config import US, ScenarioConfig, load_config, parse_config, with_parameter
from .echoes import detect_echoes, efficiency_routes, optimal_finesse
from .errors import ConfigError, LightstoreError
from .protocol import compose_efficiency, predict_retrieval
from .response import MediumParams, PulseEnvelope, propagate_through, transfer_function_for
from .slowlight import delay_report
from .spectra import MHZ, ProfileKind, SpectralProfile, spectrum_grid

OUT_ENV = "LIGHTSTORE_OUT"
DEFAULT_OUT = "lightstore-out"
ECHO_HEADER = ("order", "time_us", "energy_ratio")
TRANSMISSION_HEADER = ("parameter", "value", "alphaL", "transmission")


class UsageError(Exception):
    pass


class SweepPointError(LightstoreError):
    """Numerical failure at one sweep point."""

    def __init__(self, index: int, parameter: str, value: float, cause: LightstoreError):
        super().__init__(f"sweep point {index} ({parameter} = {value:.9g}): {type(cause).__name__}: {cause}")


def _say(args, *lines):
    if not args.quiet:
        for line in lines:
            print(line)


def _out_dir(args, required=True) -> Path | None:
    out = args.out if args.out is not None else os.environ.get(OUT_ENV)
    if out is None:
        if not required:
            return None
        out = DEFAULT_OUT
    path = Path(out)
    if path.exists():
        if not path.is_dir():
            raise UsageError(f"output path {path} exists and is not a directory")
        if any(path.iterdir()) and not args.force:
            raise UsageError(f"output directory {path} is not empty; pass --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, command: str, cfg: ScenarioConfig | dict, outputs: list[str]):
    resolved = cfg.resolved if isinstance(cfg, ScenarioConfig) else cfg
    manifest = {
        "manifest_version": 1,
        "tool": "lightstore",
        "version": __version__,
        "command": command,
        "config": resolved,
        "outputs": sorted(outputs),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# scenario evaluation
# ---------------------------------------------------------------------------


def _finesse_value(profile: SpectralProfile) -> float:
    return profile.finesse if profile.kind is ProfileKind.LORENTZIAN_COMB else math.nan


def run_scenario(cfg: ScenarioConfig, out: Path) -> list[str]:
    """Propagate the configured pulse and write traces, spectrum and reports into ``out``."""
    pulse, profile, medium = cfg.pulse, cfg.profile, cfg.medium
    aL = medium.optical_depth
    tf = transfer_function_for(pulse, profile, medium)
    output = propagate_through(pulse, profile, medium)
    written = []

    def put(name, writer, *a):
        writer(out / name, *a)
        written.append(name)

    put("input_trace.csv", io.write_trace, pulse)
    put("output_trace.csv", io.write_trace, output)
    put("transfer.csv", io.write_transfer, tf)
    put("spectrum.csv", io.write_spectrum, profile, aL, spectrum_grid(profile))

    base_eta = output.energy() / pulse.energy()
    group_delay = 0.0
    if profile.kind is ProfileKind.HOLE:
        rep = delay_report(pulse, profile, medium)
        group_delay = rep.delay_measured
        row = (profile.delta0 / MHZ, aL, rep.delay_expected / US, rep.delay_measured / US,
               rep.transmission, rep.distortion)
        put("delay.csv", io.write_rows, io.DELAY_SWEEP_HEADER, [row])
    elif profile.is_periodic:
        echoes = detect_echoes(output, pulse, profile.period_T)
        rows = [(p, t / US, e) for p, (t, e) in enumerate(zip(echoes.echo_times, echoes.echo_energies))]
        put("echoes.csv", io.write_rows, ECHO_HEADER, rows)
        routes = efficiency_routes(profile, medium, pulse)
        row = (aL, _finesse_value(profile), routes.eta_recursion, routes.eta_closed, routes.eta_detected)
        put("efficiency.csv", io.write_rows, io.EFFICIENCY_SWEEP_HEADER, [row])
        base_eta = routes.eta_detected
    else:
        put("transmission.csv", io.write_rows, ("alphaL", "transmission"), [(aL, base_eta)])

    timeline = cfg.timeline(group_delay)
    if timeline is not None:
        pred = predict_retrieval(timeline)
        row = (timeline.scheme.value, pred.retrieval_time / US, pred.direction.value, pred.amplitude_factor,
               compose_efficiency(min(base_eta, 1.0), pred))
        put("protocol.csv", io.write_rows, io.PROTOCOL_HEADER, [row])
    return written


def sweep_row(cfg: ScenarioConfig, parameter: str, value: float) -> tuple:
    pulse, profile, medium = cfg.pulse, cfg.profile, cfg.medium
    aL = medium.optical_depth
    if profile.kind is ProfileKind.HOLE:
        rep = delay_report(pulse, profile, medium)
        return (profile.delta0 / MHZ, aL, rep.delay_expected / US, rep.delay_measured / US,
                rep.transmission, rep.distortion)
    if profile.is_periodic:
        r = efficiency_routes(profile, medium, pulse)
        return (aL, _finesse_value(profile), r.eta_recursion, r.eta_closed, r.eta_detected)
    out = propagate_through(pulse, profile, medium)
    return (parameter, value, aL, out.energy() / pulse.energy())


def sweep_header(cfg: ScenarioConfig) -> tuple:
    if cfg.profile.kind is ProfileKind.HOLE:
        return io.DELAY_SWEEP_HEADER
    if cfg.profile.is_periodic:
        return io.EFFICIENCY_SWEEP_HEADER
    return TRANSMISSION_HEADER


def run_sweep(raw: dict, base_dir: Path, threads: int = 1) -> tuple[ScenarioConfig, tuple, list[tuple]]:
    cfg = parse_config(raw, base_dir)
    if cfg.sweep is None:
        raise ConfigError("sweep", "missing block")
    param = cfg.sweep.parameter
    points = []
    for i, v in enumerate(cfg.sweep.values):
        try:
            points.append(parse_config(with_parameter(cfg.resolved, param, v), base_dir))
        except ConfigError as exc:
            raise ConfigError(exc.field, f"{exc} (sweep point {i}, {param} = {v:.9g})") from None
    header = sweep_header(points[0])

    def one(item):
        i, pcfg, v = item
        try:
            return sweep_row(pcfg, param, v)
        except LightstoreError as exc:
            raise SweepPointError(i, param, v, exc) from exc

    items = [(i, p, v) for i, (p, v) in enumerate(zip(points, cfg.sweep.values))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(it) for it in items]
    return cfg, header, rows


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    raw, base = load_config(args.config)
    cfg = parse_config(raw, base)
    out = _out_dir(args)
    written = run_scenario(cfg, out)
    _write_manifest(out, "simulate", cfg, written)
    _say(args, f"wrote {len(written) + 1} files to {out}")
    return 0


def cmd_sweep(args) -> int:
    raw, base = load_config(args.config)
    cfg, header, rows = run_sweep(raw, base, args.threads)
    out = _out_dir(args)
    io.write_rows(out / "sweep.csv", header, rows)
    _write_manifest(out, "sweep", cfg, ["sweep.csv"])
    _say(args, f"wrote {len(rows)} sweep points to {out / 'sweep.csv'}")
    return 0


def cmd_afc_design(args) -> int:
    period = None if args.period_us is None else args.period_us * US
    d = optimal_finesse(args.alphaL, period)
    print(f"alphaL = {d.alphaL:.4f}")
    print(f"F = {d.finesse:.4f}")
    print(f"Gamma*T = {d.gamma_T:.4f}")
    if d.period_T is not None:
        print(f"Gamma = {d.gamma_peak / MHZ:.6g} MHz")
    print(f"eta = {d.predicted_eta:.4f}")
    return 0


def slowlight_pulse(rms: float, delay: float) -> PulseEnvelope:
    """Gaussian on a grid long enough for ``delay`` plus generous margins on both sides."""
    dt = rms / 8.0
    need = (28.0 * rms + 2.0 * delay) / dt
    n = max(256, 1 << int(math.ceil(math.log2(need))))
    center = 10.0 * rms + n * dt / 64.0
    return PulseEnvelope.gaussian(rms, center, n, dt)


def cmd_slowlight(args) -> int:
    for name in ("alphaL", "delta0_mhz", "rms_us", "gamma_khz", "length_cm"):
        v = getattr(args, name)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(name, f"must be positive, got {v}")
    medium = MediumParams.from_optical_depth(args.alphaL, args.length_cm * 1e-2, args.gamma_khz * 2e3 * math.pi)
    profile = SpectralProfile.hole(args.delta0_mhz * MHZ)
    pulse = slowlight_pulse(args.rms_us * US, medium.optical_depth / profile.delta0)
    rep = delay_report(pulse, profile, medium)
    row = (args.delta0_mhz, args.alphaL, rep.delay_expected / US, rep.delay_measured / US,
           rep.transmission, rep.distortion)
    for k, v in zip(io.DELAY_SWEEP_HEADER, row):
        print(f"{k} = {io.fmt(v)}")
    out = _out_dir(args, required=False)
    if out is not None:
        io.write_rows(out / "delay.csv", io.DELAY_SWEEP_HEADER, [row])
        io.write_trace(out / "input_trace.csv", pulse)
        io.write_trace(out / "output_trace.csv", propagate_through(pulse, profile, medium))
        _say(args, f"wrote delay report to {out}")
    return 0


def cmd_validate(args) -> int:
    raw, base = load_config(args.config)
    cfg = parse_config(raw, base)
    points = [("base", cfg, math.nan)]
    if cfg.sweep is not None:
        param = cfg.sweep.parameter
        points = [(i, parse_config(with_parameter(cfg.resolved, param, v), base), v)
                  for i, v in enumerate(cfg.sweep.values)]
    # numerical dry run of every point: grid resolution and echo windows, nothing written
    for i, pcfg, v in points:
        try:
            out = propagate_through(pcfg.pulse, pcfg.profile, pcfg.medium)
            if pcfg.profile.is_periodic:
                detect_echoes(out, pcfg.pulse, pcfg.profile.period_T)
            if pcfg.protocol is not None:
                predict_retrieval(pcfg.timeline())
        except LightstoreError as exc:
            if cfg.sweep is None:
                raise
            raise SweepPointError(i, cfg.sweep.parameter, v, exc) from exc
    n = 1 if cfg.sweep is None else len(cfg.sweep.values)
    _say(args, f"config ok: {cfg.profile.kind.value} profile, alphaL = {cfg.medium.optical_depth:.4g}, "
               f"{n} point{'s' if n != 1 else ''}")
    return 0


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--out", metavar="DIR", default=d(None), help=f"output directory (else ${OUT_ENV})")
    p.add_argument("--force", action="store_true", default=d(False), help="write into a non-empty output directory")
    p.add_argument("--threads", type=_positive_int, default=d(1), metavar="N", help="concurrent sweep points")
    p.add_argument("-q", "--quiet", action="store_true", default=d(False), help="suppress progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lightstore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lightstore {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[common], help="run one scenario (config or manifest)")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="run the sweep block of a config into one CSV")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("afc-design", parents=[common], help="optimal comb finesse for an optical depth")
    p.add_argument("--alphaL", type=float, required=True)
    p.add_argument("--period-us", type=float, default=None)
    p.set_defaults(func=cmd_afc_design)

    p = sub.add_parser("slowlight", parents=[common], help="delay report for a Gaussian through a hole")
    p.add_argument("--alphaL", type=float, required=True)
    p.add_argument("--delta0-mhz", type=float, required=True)
    p.add_argument("--rms-us", type=float, required=True)
    p.add_argument("--gamma-khz", type=float, default=10.0)
    p.add_argument("--length-cm", type=float, default=1.0)
    p.set_defaults(func=cmd_slowlight)

    p = sub.add_parser("validate", parents=[common], help="check a config without writing output")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"lightstore: config error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"lightstore: {exc}", file=sys.stderr)
        return 2
    except LightstoreError as exc:
        print(f"lightstore: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"lightstore: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
