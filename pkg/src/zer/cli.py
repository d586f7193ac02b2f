"""Command line entry point: ``zer run`` and ``zer validate``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import ARTIFACTS, PRESETS, ConfigError, RunConfig, load_preset, parse_config
from .errors import ZERError
from .output import check_output_dir, write_artifacts
from .rg import reconstruct, run_zer

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("zer")


def _artifact_list(text):
    items = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in items if a not in ARTIFACTS]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown artifact(s) {', '.join(bad)}; choose from {', '.join(ARTIFACTS)}"
        )
    return items


def build_parser():
    p = argparse.ArgumentParser(prog="zer", description="Entanglement renormalization of 1D free-fermion ground states.")
    p.add_argument("-v", "--verbose", action="store_true", help="log every RG step")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the RG and write artifacts")
    run.add_argument("config", nargs="?", help="YAML run configuration")
    run.add_argument("--preset", choices=PRESETS, help="use a bundled configuration")
    run.add_argument("--out", help="output directory (overrides outputs.directory)")
    run.add_argument("--artifacts", type=_artifact_list,
                     help=f"comma-separated subset of: {','.join(ARTIFACTS)}")

    val = sub.add_parser("validate", help="check a configuration without running it")
    val.add_argument("config")
    return p


def _load(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of a config file or --preset")
    return parse_config(args.config) if args.config else load_preset(args.preset)


def _report_config_error(err: ConfigError):
    print(f"zer: configuration error: {err}", file=sys.stderr)


def cmd_validate(args):
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        _report_config_error(err)
        return EXIT_CONFIG
    spec = cfg.model.to_spec()
    print(f"ok: {spec.name or 'model'} with {spec.n_modes} modes, "
          f"{spec.n_filled} particles, epsilon schedule {cfg.rg.epsilon_schedule}")
    return EXIT_OK


def cmd_run(args):
    try:
        cfg = _load(args)
        updates = {}
        if args.out:
            updates["directory"] = args.out
        if args.artifacts is not None:
            updates["artifacts"] = args.artifacts
        if updates:
            cfg = cfg.model_copy(update={"outputs": cfg.outputs.model_copy(update=updates)})
        out = check_output_dir(cfg.outputs.directory)
    except ConfigError as err:
        _report_config_error(err)
        return EXIT_CONFIG
    except OSError as err:
        print(f"zer: invalid output directory: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        trace = run_zer(cfg.model.to_spec(), cfg.rg.to_rg())
        files = write_artifacts(trace, cfg, out, cfg.outputs.artifacts)
    except ZERError as err:
        where = f"step {err.step}, " if err.step is not None else ""
        print(f"zer: numerical failure ({where}module {err.module}): {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as err:
        print(f"zer: numerical failure (linear algebra): {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"zer: could not write artifacts: {err}", file=sys.stderr)
        return EXIT_CONFIG

    diff = np.abs(reconstruct(trace).data - trace.exact.data).max()
    print(f"{trace.termination_reason}: {trace.core_modes} core modes after "
          f"{trace.nontrivial_steps} nontrivial of {len(trace.steps)} steps; "
          f"max |C - C_zer| = {diff:.3e}")
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    return cmd_validate(args) if args.command == "validate" else cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
