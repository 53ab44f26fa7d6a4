import argparse
import asyncio
import logging
import sys

from pulsecool.cli.cli_command import PulseCoolCommand
from pulsecool.model.config_types import CrossectionMode, WaistMode

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class PulseCoolArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _add_global_flags(parser, suppress=False):
    # Flags are accepted before or after the subcommand; the subcommand
    # copies do not overwrite values given earlier.
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="configuration file")
    parser.add_argument("--seed", type=int, default=default, help="master seed (u64)")
    parser.add_argument("--out", default=default, help="output file (default stdout)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker processes for scans")
    parser.add_argument("--plot-data", dest="plot_data", default=default,
                        help="directory for fig3a.csv (temperature) and fig3b.csv (lineshape)")
    parser.add_argument("--grid", default=default, help="detuning grid start:stop:n in GHz of delta/2pi")
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def join_grid_values(argv):
    """Attach the value after --grid so negative grids are not read as flags."""
    argv = list(argv)
    joined = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token == "--grid" and i + 1 < len(argv):
            joined.append(f"--grid={argv[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def build_parser() -> argparse.ArgumentParser:
    parser = PulseCoolArgumentParser(prog="pulsecool", description="Pulsed-laser Doppler cooling of a trapped ion")
    _add_global_flags(parser)
    common = PulseCoolArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=PulseCoolArgumentParser)

    p = sub.add_parser("theory", parents=[common], help="closed-form quantities over the detuning grid")
    p.add_argument("--summary", action="store_true", help="print scalar quantities instead of the grid table")

    p = sub.add_parser("cool", parents=[common], help="single trajectory statistics")
    p.add_argument("--pulses", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--trajectory", help="write sampled trajectory CSV here")
    p.add_argument("--stride", type=int, help="trajectory sampling stride in pulses")

    for name, text in (("scan-temp", "equilibrium temperature against detuning"),
                       ("scan-line", "cold-ion scatter rate against detuning")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--trials", type=int)
        p.add_argument("--pulses", type=int, help="pulses per trial")

    p = sub.add_parser("image", parents=[common], help="synthesize or analyze an ion image")
    p.add_argument("--synthesize", action="store_true")
    p.add_argument("--temperature", type=float)
    p.add_argument("--analyze", metavar="IMAGE")
    p.add_argument("--profile", help="write the analyzed crossection as CSV")
    p.add_argument("--mode", choices=[m.value for m in CrossectionMode])
    p.add_argument("--waist-mode", dest="waist_mode", choices=[m.value for m in WaistMode])

    p = sub.add_parser("fit-line", parents=[common], help="fit a sech^2 lineshape to CSV points")
    p.add_argument("points", help="CSV with delta_rad_s and a rate column")
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(join_grid_values(argv))
    _configure_logging(args.verbose)

    command = PulseCoolCommand()
    result = asyncio.run(command.command(args))

    if 'error' in result:
        print(f"pulsecool: {result['error']}", file=sys.stderr)
        return EXIT_VALIDATION if result.get('kind') == 'validation' else EXIT_RUNTIME

    output = result.get('output', "")
    if output:
        if args.out and 'written' not in result:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                f.write(output)
        else:
            sys.stdout.write(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
