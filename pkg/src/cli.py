#!/usr/bin/env python3
"""
Command-line front end.

Subcommands: jacobi, gaussian, mc, sweep, selftest. Results go to stdout
(or --out) as CSV or JSON; logs go to stderr as JSON lines.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure
(convergence or resource limit).
"""

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from typing import IO, Iterator, List, Optional

from channel import SnrScaling, snr_db_to_linear  # noqa: F401  (part of the CLI surface)
from config import Config, thread_cap
from errors import ConvergenceError, DomainError, ResourceLimitError
from logger import setup_logger
from metrics import track_error, write_metrics
from report import OutputRow, render
from selftest import get_selftest_report
from sweep import (CHANNELS, DEFAULT_METHODS, Request, SweepRunner, SweepSpec, build_requests,
                   evaluate, parse_range, preset_points)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scaling", choices=[s.value for s in SnrScaling], default="per_mode",
                        help="rho per mode, or total power split over m_t (default: per_mode)")
    common.add_argument("--units", choices=["nats", "bits"], default="nats",
                        help="capacity units (default: nats)")
    common.add_argument("--rtol", type=float, default=Config.RTOL,
                        help=f"quadrature doubling tolerance (default: {Config.RTOL:g})")
    common.add_argument("--format", choices=["csv", "json"], default="csv", dest="fmt",
                        help="output format (default: csv)")
    common.add_argument("--out", default=None, help="write results to FILE instead of stdout")
    common.add_argument("--metrics-file", default=None, dest="metrics_file",
                        help="write Prometheus metrics to FILE after the run")
    common.add_argument("--log-level", default=Config.LOG_LEVEL, dest="log_level",
                        help=f"log level on stderr (default: {Config.LOG_LEVEL})")
    return common


def _dims_options(parser: argparse.ArgumentParser, need_m: bool) -> None:
    parser.add_argument("--m", type=int, required=need_m, default=None, help="fiber modes")
    parser.add_argument("--mt", type=int, required=True, help="transmit modes / antennas")
    parser.add_argument("--mr", type=int, required=True, help="receive modes / antennas")
    parser.add_argument("--snr-db", type=float, required=True, dest="snr_db", help="SNR in dB")


def _mc_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, default=Config.SAMPLES,
                        help=f"Monte Carlo samples (default: {Config.SAMPLES})")
    parser.add_argument("--seed", type=int, default=Config.SEED,
                        help=f"Monte Carlo seed (default: {Config.SEED})")
    parser.add_argument("--chunk-size", type=int, default=Config.CHUNK_SIZE, dest="chunk_size",
                        help=f"samples per parallel chunk (default: {Config.CHUNK_SIZE})")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="ergocap",
        description="Ergodic capacity of Jacobi (optical fiber) and Gaussian MIMO channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    jac = sub.add_parser("jacobi", parents=[common], help="analytic Jacobi-channel capacity")
    _dims_options(jac, need_m=True)
    jac.add_argument("--method", default="theorem1",
                     choices=["theorem1", "cd", "cd_reference", "moment", "moment_series",
                              "regrouped", "regrouped_series"])
    jac.add_argument("--terms", type=int, default=Config.MOMENT_TERMS,
                     help=f"series terms K (default: {Config.MOMENT_TERMS})")

    gau = sub.add_parser("gaussian", parents=[common], help="analytic Gaussian-channel capacity")
    _dims_options(gau, need_m=False)
    gau.add_argument("--method", default="theorem2",
                     choices=["theorem2", "laguerre", "laguerre_reference"])

    mc = sub.add_parser("mc", parents=[common], help="Monte Carlo capacity estimate")
    mc.add_argument("--channel", choices=CHANNELS, required=True)
    mc.add_argument("--ensemble", choices=["haar", "wishart"], default="haar",
                    help="jacobi sampler: Haar corner or Wishart ratio (default: haar)")
    _dims_options(mc, need_m=False)
    _mc_options(mc)

    sw = sub.add_parser("sweep", parents=[common], help="sweep one parameter over several methods")
    sw.add_argument("--channel", choices=CHANNELS, default=None)
    sw.add_argument("--preset", choices=["fig1", "fig2", "fig3", "fig4"], default=None)
    sw.add_argument("--m", type=int, default=None)
    sw.add_argument("--mt", type=int, default=None)
    sw.add_argument("--mr", type=int, default=None)
    sw.add_argument("--snr-db", type=float, default=None, dest="snr_db")
    sw.add_argument("--axis", choices=["snr_db", "m_r", "m_t"], default=None)
    sw.add_argument("--range", default=None, dest="range_", metavar="START:STOP:STEP")
    sw.add_argument("--methods", default=None,
                    help="comma-separated methods (default: both analytic routes and mc)")
    sw.add_argument("--terms", type=int, default=Config.MOMENT_TERMS)
    _mc_options(sw)

    st = sub.add_parser("selftest", help="run the invariant self-test suite")
    st.add_argument("--quick", action="store_true", help="skip Monte Carlo and the slowest limit")
    st.add_argument("--out", default=None)
    st.add_argument("--metrics-file", default=None, dest="metrics_file")
    st.add_argument("--log-level", default=Config.LOG_LEVEL, dest="log_level")
    return parser


def _request_options(args: argparse.Namespace) -> dict:
    options = {"scaling": SnrScaling(args.scaling), "units": args.units, "rtol": args.rtol}
    for name in ("terms", "samples", "seed", "chunk_size"):
        if getattr(args, name, None) is not None:
            options[name] = getattr(args, name)
    return options


def _single(args: argparse.Namespace, channel: str, method: str) -> List[OutputRow]:
    req = Request(channel=channel, method=method, m=args.m, mt=args.mt, mr=args.mr,
                  snr_db=args.snr_db, **_request_options(args))
    return [evaluate(req)]


def _mc(args: argparse.Namespace) -> List[OutputRow]:
    if args.channel == "gaussian" and args.ensemble != "haar":
        raise DomainError("--ensemble wishart applies to the jacobi channel only")
    method = "mc_wishart" if args.ensemble == "wishart" else "mc"
    return _single(args, args.channel, method)


_AXIS_KEY = {"snr_db": "snr_db", "m_r": "mr", "m_t": "mt"}


def _sweep(args: argparse.Namespace) -> List[OutputRow]:
    if args.preset:
        channel, points = preset_points(args.preset)
        if args.channel and args.channel != channel:
            raise DomainError(f"preset {args.preset} is a {channel} sweep, not {args.channel}")
    else:
        channel = args.channel
        if channel is None or args.axis is None or args.range_ is None:
            raise DomainError("sweep needs --preset or all of --channel, --axis and --range")
        start, stop, step = parse_range(args.range_)
        fixed = {"m": args.m, "mt": args.mt, "mr": args.mr, "snr_db": args.snr_db}
        fixed.pop(_AXIS_KEY[args.axis])
        if channel == "gaussian":
            fixed.pop("m")
        missing = [f"--{k.replace('_', '-')}" for k, v in fixed.items() if v is None]
        if missing:
            raise DomainError(f"sweep over {args.axis} needs {', '.join(missing)}")
        points = SweepSpec(args.axis, start, stop, step, fixed).points()

    methods = args.methods.split(",") if args.methods else list(DEFAULT_METHODS[channel])
    requests = build_requests(channel, points, [m.strip() for m in methods if m.strip()],
                              **_request_options(args))
    return SweepRunner().run(requests)


@contextmanager
def _output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _selftest(args: argparse.Namespace) -> int:
    report = get_selftest_report(quick=args.quick)
    with _output(args.out) as stream:
        json.dump(report, stream, indent=2)
        stream.write("\n")
    if report["status"] != "healthy":
        failed = [name for name, check in report["checks"].items() if check["status"] != "pass"]
        logger.error(f"Self-test failed: {', '.join(failed)}")
        return EXIT_NUMERICAL
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        return _selftest(args)
    if args.command == "jacobi":
        rows = _single(args, "jacobi", args.method)
    elif args.command == "gaussian":
        rows = _single(args, "gaussian", args.method)
    elif args.command == "mc":
        rows = _mc(args)
    else:
        rows = _sweep(args)
    with _output(args.out) as stream:
        render(rows, args.fmt, stream)
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        setup_logger(args.log_level)
        thread_cap()
        return _dispatch(args)
    except (DomainError, ValueError) as e:
        track_error(type(e).__name__)
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except ConvergenceError as e:
        track_error(type(e).__name__)
        logger.error(f"Convergence failure: {e}", extra={"diagnostics": e.to_dict()})
        return EXIT_NUMERICAL
    except ResourceLimitError as e:
        track_error(type(e).__name__)
        logger.error(f"Resource limit: {e}")
        return EXIT_NUMERICAL
    finally:
        if getattr(args, "metrics_file", None):
            write_metrics(args.metrics_file)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
