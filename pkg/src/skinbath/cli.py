"""Command-line entry point.

    skinbath simulate   --config cfg.json [--out DIR] [--format csv|json]
    skinbath spectrum   --config cfg.json ...
    skinbath selfenergy --config cfg.json ...
    skinbath boundstate --config cfg.json ...
    skinbath dfi        --config cfg.json ...
    skinbath hyperbolic --config cfg.json ...
    skinbath sweep      --config base.json --overrides ov.json [--parallel N]
    skinbath reproduce  <preset-id> [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
The default output directory is ./skinbath_out/<command>, overridable by the
SKINBATH_OUT environment variable, the config's outputs.directory, or --out
(highest precedence last to first).  The tool uses no randomness anywhere;
--seedless is accepted for compatibility and takes no value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, IntegrationError, SingularOperatorError, SkinbathError
from .presets import preset_ids
from . import runner

_CONFIG_COMMANDS = ("simulate", "spectrum", "selfenergy", "boundstate", "dfi", "hyperbolic")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skinbath",
        description="Emitters coupled to an asymmetric-hopping (Hatano-Nelson) lattice: "
        "dynamics, self-energies, spectra, bound states and curved-space duals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="scenario config (JSON)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--format",
            choices=("csv", "json"),
            action="append",
            default=None,
            help="output format (repeatable; default from config, else csv)",
        )
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
        p.add_argument(
            "--seedless",
            action="store_true",
            help="reserved flag: the tool is deterministic and uses no RNG",
        )

    for name in _CONFIG_COMMANDS:
        common(sub.add_parser(name, help=f"run the {name} command"))

    p_sweep = sub.add_parser("sweep", help="run a family of simulations from overrides")
    common(p_sweep)
    p_sweep.add_argument(
        "--overrides", required=True, help="JSON list of {dotted.path: value} objects"
    )
    p_sweep.add_argument("--parallel", type=int, default=1, help="worker processes")

    p_rep = sub.add_parser("reproduce", help="run a self-contained figure preset")
    p_rep.add_argument("preset", choices=preset_ids(), metavar="PRESET",
                       help=f"one of: {', '.join(preset_ids())}")
    common(p_rep, needs_config=False)
    return parser


def _output_dir(args, cfg=None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.out_directory:
        return Path(cfg.out_directory)
    env = os.environ.get("SKINBATH_OUT")
    base = Path(env) if env else Path("skinbath_out")
    name = args.command if args.command != "reproduce" else f"reproduce-{args.preset}"
    return base / name


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"skinbath: configuration error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, SingularOperatorError) as exc:
        print(f"skinbath: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SkinbathError as exc:
        print(f"skinbath: numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    formats = tuple(args.format) if args.format else None
    plots = not args.no_plots

    if args.command == "reproduce":
        out_dir = _output_dir(args)
        out_dir.mkdir(parents=True, exist_ok=True)
        runner.run_reproduce(args.preset, out_dir, formats=formats or ("csv",), plots=plots)
        print(f"wrote {out_dir}/manifest.json")
        return 0

    cfg = load_config(args.config)
    fmts = formats or cfg.formats
    out_dir = _output_dir(args, cfg)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "sweep":
        try:
            overrides = json.loads(Path(args.overrides).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read overrides file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"overrides file is not valid JSON: {exc}") from exc
        if not isinstance(overrides, list) or not all(isinstance(o, dict) for o in overrides):
            raise ConfigError("overrides must be a JSON list of objects")
        _, code = runner.run_sweep(
            cfg.raw, overrides, out_dir, parallel=args.parallel, formats=fmts, plots=plots
        )
        print(f"wrote {out_dir}/index.json")
        return code

    command_fn = {
        "simulate": runner.run_simulate,
        "spectrum": runner.run_spectrum,
        "selfenergy": runner.run_selfenergy,
        "boundstate": runner.run_boundstate,
        "dfi": runner.run_dfi,
        "hyperbolic": runner.run_hyperbolic,
    }[args.command]
    command_fn(cfg, out_dir, formats=fmts, plots=plots)
    print(f"wrote {out_dir}/manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
