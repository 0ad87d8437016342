"""
Command line entry point: larr <subcommand> --config FILE | --preset NAME [--workers N] [--out DIR]
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from ..config.logging_config import setup_logging
from ..config.preset_loader import job_from_dict, list_presets, load_job, load_preset
from ..models.job_models import JobConfig, JobKind
from ..utils.exceptions import ConfigError
from .commands import emit_plot_from_sidecar, run
from .error_handlers import CLIErrorHandler

logger = logging.getLogger(__name__)

# sysexits EX_USAGE; keeps argparse failures apart from numerical failures (2)
USAGE_EXIT_CODE = 64

JOB_COMMANDS = {
    JobKind.SPECTRUM: "Energy distribution over a photon-energy grid",
    JobKind.ANGULAR_MAP: "Energy distribution over polar angle and photon energy",
    JobKind.SPECTROGRAM: "Spectrum, its spectrogram and the saddle-point overlay",
    JobKind.SADDLE: "Saddle-point emission law and cutoff table",
    JobKind.CLASSICAL_CHECK: "Newton-Lorentz trajectory against the first-order analytic momentum",
    JobKind.PULSE_PREVIEW: "Sampled field and vector potential of the pulse",
    JobKind.VALIDATE_KERNELS: "Analytic kernels against independent oracles",
}


def _add_job_options(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", help="Job configuration file (JSON)")
    source.add_argument("--preset", help="Name of a shipped or LARR_PRESET_DIR preset")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes for grid sweeps")
    parser.add_argument("--out", default=None, help="Output directory (default LARR_OUTPUT_DIR)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="larr",
        description="Laser-assisted radiative recombination spectra with leading-order nondipole corrections.",
    )
    parser.add_argument("--log-level", default=None, help="Overrides LARR_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for kind, help_text in JOB_COMMANDS.items():
        _add_job_options(subparsers.add_parser(kind.value, help=help_text))

    subparsers.add_parser("presets", help="List available presets")

    plot = subparsers.add_parser("plot", help="Re-emit plot scripts recorded in a run's metadata sidecar")
    plot.add_argument("sidecar", help="Path to a *_meta.json file")
    return parser


def resolve_job(args: argparse.Namespace) -> JobConfig:
    """Build the JobConfig for a run subcommand; the subcommand always sets the run kind"""
    overrides: Dict[str, Any] = {"kind": args.command}
    if args.workers is not None:
        overrides["workers"] = args.workers

    if args.preset:
        return load_preset(args.preset, overrides)
    if args.config:
        return load_job(args.config, overrides)
    if args.command == JobKind.VALIDATE_KERNELS.value:
        return job_from_dict(overrides, "<command line>")
    raise ConfigError(f"{args.command} needs --config or --preset", field="config")


def _print_presets():
    for name, description in list_presets():
        print(f"{name:20s} {description}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        # --help exits cleanly, anything else is a usage error
        return 0 if exit_request.code in (0, None) else USAGE_EXIT_CODE
    setup_logging(args.log_level)
    command = " ".join(["larr"] + list(argv if argv is not None else sys.argv[1:]))

    try:
        if args.command == "presets":
            _print_presets()
            return 0
        if args.command == "plot":
            for script in emit_plot_from_sidecar(args.sidecar):
                print(script)
            return 0

        job = resolve_job(args)
        report = run(job, args.out)
        print(json.dumps({
            "job": job.name,
            "kind": job.kind.value,
            "exit_code": report.exit_code,
            "directory": str(report.directory),
            "artifacts": [path.name for path in report.artifacts],
            "summary": report.summary,
        }, indent=2, default=str))
        return report.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130
    except Exception as e:
        return CLIErrorHandler.handle(e, command)


def run_cli():
    sys.exit(main())


if __name__ == "__main__":
    run_cli()
