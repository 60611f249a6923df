"""Command-line scenario runner.

Every subcommand resolves a flat configuration (preset, then ``--config``
JSON, then explicit flags), computes everything in memory and only then
writes its CSV/JSON outputs together with ``manifest.json``.  A failure
therefore leaves no partial files behind.

Exit codes: 0 success, 2 configuration error, 3 numerical or validation
failure.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import (AtomOPOError, ChannelUnavailable, ConfigError, GridMismatch, InsufficientGrid)
from .params import SystemParams
from .presets import PRESETS, get_preset, spectral_drive
from .spectra import default_omega_grid, fluorescent_spectrum, squeezing_identity_check, \
    transmitted_spectrum
from .trajectories import (conditioned_after_emission, default_trajectory_n_max, ensemble_average,
                           run_trajectory)
from .validation import validate
from .weakfield import verify_scalings

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

CONFIG_KEYS = {
    "preset", "channel", "g", "kappa", "gamma", "F", "n_max", "omega_max", "omega_points",
    "seed", "n_traj", "t_max", "sample_dt", "t_post", "f_grid",
}
CHANNELS = ("transmitted", "fluorescent")
TRAJECTORY_TASKS = ("trajectory", "conditioned")


@dataclass
class ScenarioConfig:
    task: str
    params: SystemParams
    preset: str | None = None
    channel: str = "transmitted"
    omega_max: float | None = None
    omega_points: int | None = None
    seed: int = 0
    n_traj: int = 1
    t_max: float = 20.0
    sample_dt: float = 0.01
    t_post: float = 2.0
    f_grid: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        return d


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in data.items():
        if isinstance(value, (dict, list)) and key != "f_grid":
            raise ConfigError(f"config key {key!r} must be a scalar")
    return data


def resolve_config(task: str, args: argparse.Namespace) -> ScenarioConfig:
    """Merge preset, config file and command-line flags (later wins)."""
    raw = _load_config(getattr(args, "config", None))
    flags = {k: getattr(args, k, None) for k in CONFIG_KEYS}
    merged = dict(raw)
    merged.update({k: v for k, v in flags.items() if v is not None})
    name = merged.get("preset")
    values: dict = {}
    if name is not None:
        try:
            preset = get_preset(name)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        values.update(g=preset.g, kappa=preset.kappa, gamma=preset.gamma)
        if preset.task in CHANNELS:
            values["channel"] = preset.task
        for key in ("t_max", "sample_dt", "n_traj"):
            if getattr(preset, key) is not None:
                values[key] = getattr(preset, key)
        if preset.F is not None:
            values["F"] = preset.F
    values.update({k: v for k, v in merged.items() if k != "preset"})
    for key in ("g", "kappa"):
        if key not in values:
            raise ConfigError(f"missing {key!r}: give a preset, a config file or --{key}")
    gamma = float(values.get("gamma", 1.0))
    kappa = float(values["kappa"])
    if "F" not in values:
        if task in TRAJECTORY_TASKS:
            raise ConfigError("trajectory tasks need an explicit drive F")
        values["F"] = spectral_drive(kappa, gamma)
    try:
        params = SystemParams(g=float(values["g"]), kappa=kappa, gamma=gamma, F=float(values["F"]))
        if "n_max" in values:
            n_max = values["n_max"]
        elif task in TRAJECTORY_TASKS:
            n_max = default_trajectory_n_max(params)
        else:
            n_max = 2
        params = params.replace(n_max=n_max)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    channel = values.get("channel", "transmitted")
    if channel not in CHANNELS:
        raise ConfigError(f"channel must be one of {CHANNELS}")
    cfg = ScenarioConfig(task=task, params=params, preset=name, channel=channel)
    try:
        for key, cast in (("omega_max", float), ("omega_points", int), ("seed", int),
                          ("n_traj", int), ("t_max", float), ("sample_dt", float),
                          ("t_post", float)):
            if values.get(key) is not None:
                setattr(cfg, key, cast(values[key]))
        if values.get("f_grid") is not None:
            cfg.f_grid = [float(v) for v in values["f_grid"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.n_traj < 1 or cfg.t_max <= 0 or cfg.sample_dt <= 0 or cfg.t_post <= 0:
        raise ConfigError("n_traj, t_max, sample_dt and t_post must be positive")
    if cfg.omega_points is not None and cfg.omega_points < 3:
        raise ConfigError("omega_points must be at least 3")
    return cfg


# ---------------------------------------------------------------- task bodies

Writer = Callable[[Path], None]


def _write_text(text: str) -> Writer:
    def write(path: Path) -> None:
        path.write_text(text)
    return write


def _spectrum_outputs(cfg: ScenarioConfig, squeeze: bool) -> tuple[dict[str, Writer], dict]:
    fn = transmitted_spectrum if cfg.channel == "transmitted" else fluorescent_spectrum
    omega = default_omega_grid(cfg.params, cfg.omega_max, cfg.omega_points)
    table = fn(cfg.params, omega)
    outputs: dict[str, Writer] = {"spectrum.csv": table.to_csv}
    summary: dict = {"points": int(omega.size)}
    if squeeze:
        report = squeezing_identity_check(table)
        outputs["squeezing_identity.json"] = _write_text(
            json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
        summary["identity"] = report.as_dict()
    return outputs, summary


def _scaling_outputs(cfg: ScenarioConfig) -> tuple[dict[str, Writer], dict]:
    unit = cfg.params.gamma if cfg.params.gamma > 0 else cfg.params.kappa
    grid = cfg.f_grid or list(np.logspace(-4, -2, 5) * unit)
    report = verify_scalings(cfg.params, grid)
    return {"scaling.json": _write_text(report.to_json() + "\n")}, {"all_passed": report.all_passed}


def _trajectory_outputs(cfg: ScenarioConfig) -> tuple[dict[str, Writer], dict]:
    rec = run_trajectory(cfg.params, cfg.t_max, cfg.seed, cfg.sample_dt)
    outputs: dict[str, Writer] = {"trajectory.csv": lambda p: rec.to_csv(p, p.parent / "jumps.csv")}
    summary = {"jumps": rec.jump_counts(), "peak_photon_number": rec.peak_photon_number}
    if cfg.n_traj > 1:
        ens = ensemble_average(cfg.params, cfg.n_traj, cfg.t_max, cfg.seed, cfg.sample_dt)
        outputs["ensemble.csv"] = ens.to_csv
        summary["ensemble_jumps"] = ens.jump_counts
    return outputs, summary


def _conditioned_outputs(cfg: ScenarioConfig) -> tuple[dict[str, Writer], dict]:
    rec = conditioned_after_emission(cfg.params, cfg.t_post, cfg.sample_dt)
    return {"conditioned.csv": rec.to_csv}, {"peak_photon_number": rec.peak_photon_number}


def _corruption_hook(entry):
    if not entry:
        return None
    row, col, value = int(entry[0]), int(entry[1]), float(entry[2])

    def hook(M):
        M[row - 1, col - 1] += value
        return M
    return hook


def _validate_outputs(cfg: ScenarioConfig, corrupt) -> tuple[dict[str, Writer], dict]:
    points = cfg.omega_points or 401
    report = validate(cfg.params, omega_points=points, matrix_hook=_corruption_hook(corrupt))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    summary = {"passed": report.passed, "failing": report.failing(), "warnings": report.warnings}
    return {"validation.json": _write_text(report.to_json() + "\n")}, summary


def _commit(outputs: dict[str, Writer], out_dir: Path, manifest: dict, gnuplot: str | None) -> None:
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir.parent, prefix=".atomopo-") as tmp:
        tmp_path = Path(tmp)
        for name, writer in outputs.items():
            writer(tmp_path / name)
        if gnuplot:
            (tmp_path / "plot.gp").write_text(gnuplot)
        written = sorted(p.name for p in tmp_path.iterdir())
        manifest["outputs"] = written + ["manifest.json"]
        (tmp_path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in manifest["outputs"]:
            shutil.move(str(tmp_path / name), str(out_dir / name))


def _gnuplot_for(task: str) -> str:
    head = "set datafile separator ','\nset key autotitle columnhead\n"
    if task in ("spectrum", "squeeze"):
        return head + ("set xlabel 'omega'\nplot 'spectrum.csv' using 1:5 with lines, \\\n"
                       "     '' using 1:3 with lines dt 2, '' using 1:4 with lines dt 3\n")
    if task == "trajectory":
        return head + "set xlabel 't'\nplot 'trajectory.csv' using 1:2 with lines\n"
    if task == "conditioned":
        return head + "set xlabel 't'\nplot 'conditioned.csv' using 1:2 with lines\n"
    return ""


def run_scenario(cfg: ScenarioConfig, out_dir: Path, gnuplot: bool = False, corrupt=None) -> int:
    start = time.perf_counter()
    if cfg.task in ("spectrum", "squeeze"):
        outputs, summary = _spectrum_outputs(cfg, squeeze=cfg.task == "squeeze")
    elif cfg.task == "scaling":
        outputs, summary = _scaling_outputs(cfg)
    elif cfg.task == "trajectory":
        outputs, summary = _trajectory_outputs(cfg)
    elif cfg.task == "conditioned":
        outputs, summary = _conditioned_outputs(cfg)
    elif cfg.task == "validate":
        outputs, summary = _validate_outputs(cfg, corrupt)
    else:
        raise ConfigError(f"unknown task {cfg.task!r}")
    manifest = {
        "task": cfg.task,
        "config": cfg.as_dict(),
        "version": __version__,
        "summary": summary,
        "wall_time_s": time.perf_counter() - start,
    }
    _commit(outputs, out_dir, manifest, _gnuplot_for(cfg.task) if gnuplot else None)
    if cfg.task == "validate" and not summary["passed"]:
        print(f"validation failed: {', '.join(summary['failing'])}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _print_presets() -> int:
    cols = ("name", "task", "g", "kappa", "gamma", "F", "n_max", "note")
    print("\t".join(cols))
    for name, preset in PRESETS.items():
        d = preset.as_dict()
        print("\t".join(f"{d[c]:g}" if isinstance(d[c], float) else str(d[c]) for c in cols))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atomopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset")
    common.add_argument("--config", help="flat JSON file of overrides")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--omega-max", dest="omega_max", type=float)
    common.add_argument("--omega-points", dest="omega_points", type=int)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--g", type=float)
    common.add_argument("--kappa", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--F", type=float)
    common.add_argument("--channel", choices=CHANNELS)
    common.add_argument("--n-traj", dest="n_traj", type=int)
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--sample-dt", dest="sample_dt", type=float)
    common.add_argument("--t-post", dest="t_post", type=float)
    common.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    helps = {
        "spectrum": "incoherent spectrum (transmitted or fluorescent)",
        "squeeze": "squeezing spectra and the incoherent/squeezing identity",
        "scaling": "weak-drive scaling exponents of the steady state",
        "trajectory": "quantum trajectory record (and optional ensemble)",
        "conditioned": "conditioned photon number after a cavity emission",
        "validate": "dual-path cross-checks for one parameter set",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "validate":
            p.add_argument("--corrupt-entry", nargs=3, metavar=("ROW", "COL", "DELTA"),
                           help=argparse.SUPPRESS)
    sub.add_parser("presets", help="list the built-in parameter presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "presets":
        return _print_presets()
    try:
        cfg = resolve_config(args.command, args)
        return run_scenario(cfg, Path(args.out), args.gnuplot, getattr(args, "corrupt_entry", None))
    except (ConfigError, InsufficientGrid, GridMismatch, ChannelUnavailable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AtomOPOError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
