"""Command-line entry point.

Verbs::

    qdslow sweep --config scenario.yaml [--set key=value]... [--format csv|json] [--out path]
    qdslow preset --name fig3 [--emit-config] [--format csv|json] [--out path]
    qdslow rates --config scenario.yaml [--set key=value]...

Exit codes: 0 success, 1 configuration error, 2 numerical error.
"""

import argparse
import logging
import sys

from . import __version__
from .errors import ConfigError, NumericalError, QDSlowError
from .scenario import PRESET_NAMES, apply_overrides, load_config, parse_config, preset_dict
from .sweep import FORMATS, emit_table, point_rates, run_sweep
from .units import OMEGA0

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _build_parser():
    parser = argparse.ArgumentParser(prog="qdslow", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a dotted config key (repeatable)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = sub.add_parser("preset", help="run or print a figure preset")
    p.add_argument("--name", required=True, help=f"one of {', '.join(PRESET_NAMES)}")
    p.add_argument("--emit-config", action="store_true", help="print the preset config as YAML and exit")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", default="-")

    p = sub.add_parser("rates", help="print the rates at the configured operating point")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _write(result, fmt, out):
    if out == "-":
        emit_table(result, fmt, sys.stdout)
    else:
        emit_table(result, fmt, out)


def _print_rates(config):
    print(f"# rates in Omega0 = {OMEGA0:.9g} ps^-1; operating point of '{config.name}'")
    print("branch,gamma2_re,gamma2_im,gamma3_re,gamma3_im,nu2_re,nu2_im,nu3_re,nu3_im,delta_s,delta_p")
    for branch in config.branches:
        r = point_rates(config, branch, config.drive)
        vals = [r.gamma2.real, r.gamma2.imag, r.gamma3.real, r.gamma3.imag,
                r.nu2.real, r.nu2.imag, r.nu3.real, r.nu3.imag, r.delta_s, r.delta_p]
        print(",".join([branch.label] + [format(v / OMEGA0, ".10g") for v in vals]))


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.verb == "preset":
            data = apply_overrides(preset_dict(args.name), args.set)
            config = parse_config(data)
            if args.emit_config:
                sys.stdout.write(config.to_yaml())
                return EXIT_OK
            _write(run_sweep(config), args.format, args.out)
        elif args.verb == "sweep":
            _write(run_sweep(load_config(args.config, args.set)), args.format, args.out)
        else:
            _print_rates(load_config(args.config, args.set))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QDSlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
