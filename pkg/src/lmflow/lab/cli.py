"""Command line entry point: ``lmflow {run,converge,fig1} ...``.

Exit codes: 0 on success, 1 on configuration or I/O errors (including unknown
flags), 2 when a run stops because the multiplier equation has no admissible
root or a field turns non-finite.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from ..multiplier import MultiplierError
from ..potential import FLOWS, FlowSpec
from ..schemes import SCHEMES, NonFiniteField, RunConfig, run
from .convergence import convergence_study
from .initial import initial_field
from .io import DirectorySink, default_out_dir, write_snapshot


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_flags(p, preset=False, **defaults):
    d = dict(
        scheme="modified-lm",
        nx=128,
        ny=128,
        lx=2 * math.pi,
        ly=2 * math.pi,
        eps2=0.06,
        dt=1e-3,
        tfinal=0.05,
        mean=0.3,
        amp=0.01,
        init="random",
    )
    d.update(defaults)
    p.add_argument("--scheme", choices=SCHEMES, default=d["scheme"])
    p.add_argument("--flow", choices=FLOWS, default="cahn-hilliard")
    p.add_argument("--nx", type=int, default=d["nx"])
    p.add_argument("--ny", type=int, default=d["ny"])
    p.add_argument("--lx", type=float, default=d["lx"])
    p.add_argument("--ly", type=float, default=d["ly"])
    p.add_argument("--dt", type=float, default=d["dt"])
    p.add_argument("--tfinal", type=float, default=d["tfinal"])
    p.add_argument("--seed", type=int, default=0)
    if preset:
        p.set_defaults(eps2=0.06, gamma=None, mean=0.3, amp=0.01, init="random")
    else:
        p.add_argument("--eps2", type=float, default=d["eps2"])
        p.add_argument("--gamma", type=float, default=None, help="gate tolerance (default: dt)")
        p.add_argument("--mean", type=float, default=d["mean"])
        p.add_argument("--amp", type=float, default=d["amp"])
        p.add_argument(
            "--init",
            default=d["init"],
            help="random | modes:<mx:my,...> | file:<path>",
        )
    p.add_argument("--eta-tol", type=float, default=1e-12)
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--snapshot-format", choices=("csv", "bin"), default="csv")
    p.add_argument("--sav-c0", type=float, default=0.0)
    p.add_argument("--dealias", action="store_true", help="2/3-rule truncation of F'(phi*)")
    p.add_argument("--out-dir", default=None, help="output directory (default: $LMFLOW_OUT_DIR or .)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="lmflow", description="Lagrange multiplier schemes for phase-field gradient flows")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration")
    _add_run_flags(p)

    p = sub.add_parser("converge", help="temporal self-convergence study")
    _add_run_flags(
        p,
        scheme="original-lm",
        nx=64,
        ny=64,
        tfinal=0.0104,
        amp=1e-3,
        init="modes:1:0,0:2",
    )
    p.add_argument("--dts", required=True, help="comma separated step sizes")
    p.add_argument("--ref-factor", type=int, default=8)

    p = sub.add_parser("fig1", help="spinodal decomposition preset (eps2=0.06, 0.3 + 0.01 U[-1,1], gamma=dt)")
    _add_run_flags(p, preset=True)
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        flow=FlowSpec(args.flow, args.eps2, args.dealias),
        nx=args.nx,
        ny=args.ny,
        lx=args.lx,
        ly=args.ly,
        dt=args.dt,
        t_final=args.tfinal,
        gamma=args.gamma,
        scheme=args.scheme,
        seed=args.seed,
        eta_tol=args.eta_tol,
        snapshot_every=args.snapshot_every,
        sav_c0=args.sav_c0,
        init=args.init,
        mean=args.mean,
        amp=args.amp,
    )


def _parse_dts(text):
    try:
        dts = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValueError(f"bad --dts list {text!r}") from exc
    return dts


def _cmd_run(cfg, out_dir, ext):
    phi0 = initial_field(cfg)
    with DirectorySink(out_dir, ext) as sink:
        try:
            state = run(cfg, phi0, sink)
        finally:
            print(f"wrote {sink.count} records to {sink.series_path}")
    write_snapshot(state.phi_n, Path(out_dir) / f"final{ext}")
    last = sink.last
    print(f"t={state.t:.6g} steps={state.step} energy={last.energy:.12g} modified_energy={last.modified_energy:.12g}")
    return 0


def _cmd_converge(cfg, dts, args, out_dir):
    report = convergence_study(cfg, dts, cfg.t_final, ref_factor=args.ref_factor)
    text = report.format()
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / "convergence.csv").write_text(text + "\n")
    print(text)
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    out_dir = args.out_dir or default_out_dir()
    ext = "." + args.snapshot_format
    try:
        if args.command == "converge":
            dts = _parse_dts(args.dts)
            if not dts:
                raise ValueError("--dts is empty")
            args.dt = max(dts)
            return _cmd_converge(config_from_args(args), dts, args, out_dir)
        cfg = config_from_args(args)
        return _cmd_run(cfg, out_dir, ext)
    except (MultiplierError, NonFiniteField) as exc:
        print(f"lmflow: run stopped: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"lmflow: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())
