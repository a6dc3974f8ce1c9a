"""
Command-line interface.

Frequencies are offsets from the cavity frequency omega_c; with the default
``--kappa 1`` they are already in units of kappa (``--omega-p -0.5`` means
omega_p = omega_c - kappa/2). Any other ``--kappa`` rescales all rates.

Exit codes: 0 success, 1 usage error, 2 physics/domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from . import hilbert as hb
from .cavity import (
    Branch,
    CavityParams,
    GateMode,
    faraday_phases,
    reflect_coupled,
    reflect_empty,
    reflection_spectrum,
)
from .resources import LossModel, expected_time, figure2_csv, figure2_table, monte_carlo, success_probability
from .tables import builtin_table, verify_tables
from .teleport import (
    InputState,
    Outcome,
    bob_atoms,
    channel_branches,
    fidelity_sweep,
    make_channel,
    run_protocol,
)

DEFAULT_SEED = 20090
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _cavity_args() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("cavity")
    g.add_argument("--omega-p", type=float, default=-0.5, help="probe offset omega_p - omega_c (default -0.5)")
    g.add_argument("--detuning0", type=float, default=0.0, help="atomic offset omega_0 - omega_c (default 0)")
    g.add_argument("--g", type=float, default=0.5, help="atom-cavity coupling (default 0.5)")
    g.add_argument("--gamma", type=float, default=0.0, help="atomic spontaneous emission rate (default 0)")
    g.add_argument("--kappa", type=float, default=1.0, help="cavity damping rate; other values are divided by it")
    return p


def _common_args() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"rng seed (default {DEFAULT_SEED})")
    p.add_argument("--output", "-o", help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    return p


def _loss_args() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("loss model")
    g.add_argument("--atomic-failure", type=float, default=0.02)
    g.add_argument("--eta", type=float, default=1e-4, help="per-photon detection probability")
    g.add_argument("--other-loss", type=float, default=0.06)
    g.add_argument("--source-rate", type=float, default=1e4, help="photons per second")
    g.add_argument("--parallel-sources", type=int, default=1)
    return p


def build_parser() -> argparse.ArgumentParser:
    cav, com, loss = _cavity_args(), _common_args(), _loss_args()
    parser = _Parser(prog="faraday-teleport", description="Faraday-rotation teleportation simulator")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("reflection", parents=[cav, com], help="reflection coefficients and Faraday phases")
    p.add_argument("--sweep", action="store_true", help="emit a CSV spectrum over omega_p")
    p.add_argument("--sweep-min", type=float, default=-3.0)
    p.add_argument("--sweep-max", type=float, default=3.0)
    p.add_argument("--sweep-points", type=int, default=121)

    sub.add_parser("channel", parents=[cav, com], help="atom-photon channel state and its entanglement")

    p = sub.add_parser("teleport", parents=[cav, com], help="run the protocol once")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--state", default="random", help="'random', 'ghz3', or amplitudes 're:im,re:im,...' (use --state=... when the first is negative)")
    p.add_argument("--outcome", help="force Alice's record, e.g. RR:11")
    p.add_argument("--mode", choices=("ideal", "lossy"), default="ideal")

    p = sub.add_parser("tables", parents=[cav, com], help="published tables and their verification")
    p.add_argument("--n-inputs", type=int, default=50)

    p = sub.add_parser("sweep", parents=[cav, com], help="lossy-mode fidelity over a parameter grid (CSV)")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--state", default="random")
    p.add_argument(
        "--param", action="append", default=[], metavar="NAME=START:STOP:COUNT",
        help="grid axis over omega_p, detuning0, g or gamma (repeatable)",
    )
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("timing", parents=[loss, com], help="success probability and implementation time")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--figure2", action="store_true", help="emit the n x eta grid as CSV")
    p.add_argument("--n-range", default="1:6", help="inclusive range for --figure2, e.g. 1:6")
    p.add_argument("--etas", default="1e-4,1e-3,1e-2,1e-1,1", help="comma-separated detection efficiencies")

    p = sub.add_parser("montecarlo", parents=[loss, cav, com], help="heralded Monte Carlo of losses")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--max-fidelity-runs", type=int, default=None)
    return parser


def params_from_args(args) -> CavityParams:
    return CavityParams.from_physical(0.0, args.detuning0, args.omega_p, args.kappa, args.gamma, args.g)


def loss_from_args(args) -> LossModel:
    return LossModel(args.atomic_failure, args.eta, args.other_loss, args.source_rate, args.parallel_sources)


def parse_state(text: str, n: int, rng: np.random.Generator) -> InputState:
    text = text.strip()
    if text == "random":
        return InputState.random(n, rng)
    if text.startswith("ghz"):
        k = int(text[3:] or 3)
        return InputState.ghz(k)
    amps = []
    for tok in text.split(","):
        re_, _, im = tok.strip().partition(":")
        try:
            amps.append(complex(float(re_), float(im) if im else 0.0))
        except ValueError:
            raise UsageError(f"bad amplitude {tok!r}; expected re:im") from None
    if len(amps) != 2**n:
        raise UsageError(f"--n {n} needs {2 ** n} amplitudes, got {len(amps)}")
    return InputState.from_amplitudes(amps)


def format_amplitude(z: complex) -> str:
    return f"{float(z.real)!r}:{float(z.imag)!r}"


def _params_dict(p: CavityParams) -> dict:
    return {"omega_c": p.omega_c, "omega_0": p.omega_0, "omega_p": p.omega_p, "kappa": p.kappa, "gamma": p.gamma, "g": p.g}


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def cmd_reflection(args) -> str:
    p = params_from_args(args)
    if args.sweep:
        if args.sweep_points < 2:
            raise UsageError("--sweep-points must be at least 2")
        omegas = np.linspace(args.sweep_min, args.sweep_max, args.sweep_points) / args.kappa
        rc = reflection_spectrum(p, omegas, Branch.COUPLED)
        re = reflection_spectrum(p, omegas, Branch.EMPTY)
        rows = [
            (float(w), z.real, z.imag, float(np.angle(z)), abs(z), e.real, e.imag, float(np.angle(e)), abs(e))
            for w, z, e in zip(omegas, rc, re)
        ]
        header = ["omega_p", "coupled_re", "coupled_im", "coupled_phase", "coupled_magnitude",
                  "empty_re", "empty_im", "empty_phase", "empty_magnitude"]
        return _csv(header, rows)
    ph = faraday_phases(p)
    return _json({
        "params": _params_dict(p),
        "coupled": reflect_coupled(p).as_dict(),
        "empty": reflect_empty(p).as_dict(),
        "phi": ph.phi,
        "phi0": ph.phi0,
        "theta_minus": ph.theta_minus,
        "theta_plus": ph.theta_plus,
    })


def cmd_channel(args) -> str:
    p = params_from_args(args)
    ch = make_channel(p)
    minus, plus = channel_branches(p)
    return _json({
        "params": _params_dict(p),
        "register": [str(q) for q in ch.register],
        "amplitudes": [format_amplitude(z) for z in ch.amps],
        "entropy": hb.entanglement_entropy(ch, [ch.register.qubits[0]]),
        "branch_overlap": abs(np.vdot(plus, minus)),
        "phi_minus_phi0": faraday_phases(p).phi - faraday_phases(p).phi0,
    })


def cmd_teleport(args) -> str:
    rng = np.random.default_rng(args.seed)
    inp = parse_state(args.state, args.n, rng)
    forced = Outcome.parse(args.outcome) if args.outcome else None
    mode = GateMode(args.mode)
    rep = run_protocol(inp, params_from_args(args), forced=forced, seed=args.seed, mode=mode)
    out = rep.as_dict()
    out["n"] = inp.n
    out["state"] = ",".join(format_amplitude(z) for z in inp.coeffs)
    out["bob_state"] = [format_amplitude(z) for z in rep.bob_state.amps]
    out["mode"] = mode.value
    return _json(out)


def cmd_tables(args) -> str:
    tables = {}
    for n in (2, 3):
        t = builtin_table(n)
        tables[f"n{n}"] = [
            {"key": r.key, "outcomes": [str(o) for o in r.outcomes()], "listed_state": r.listed_state,
             "correction": str(r.correction)}
            for r in t.rows
        ]
    report = verify_tables(params_from_args(args), n_inputs=args.n_inputs, seed=args.seed)
    return _json({"tables": tables, "verification": report.as_dict(), "seed": args.seed})


_SWEEP_FIELDS = {"omega_p": "omega_p", "detuning0": "omega_0", "omega_0": "omega_0", "g": "g", "gamma": "gamma"}


def _parse_axis(spec: str) -> tuple[str, list[float]]:
    name, _, rng = spec.partition("=")
    if name not in _SWEEP_FIELDS or rng.count(":") != 2:
        raise UsageError(f"bad --param {spec!r}; expected NAME=START:STOP:COUNT with NAME in {sorted(_SWEEP_FIELDS)}")
    start, stop, count = rng.split(":")
    return _SWEEP_FIELDS[name], [float(v) for v in np.linspace(float(start), float(stop), int(count))]


def cmd_sweep(args) -> str:
    rng = np.random.default_rng(args.seed)
    inp = parse_state(args.state, args.n, rng)
    axes = dict(_parse_axis(s) for s in args.param) or {"gamma": [0.0]}
    base = params_from_args(args)
    axes = {k: [v / args.kappa for v in vals] for k, vals in axes.items()}
    points = fidelity_sweep(inp, axes, samples=args.samples, seed=args.seed, base=base)
    names = list(axes)
    rows = [[getattr(pt.params, k) for k in names] + [pt.mean_fidelity, pt.success_probability] for pt in points]
    return _csv(names + ["mean_fidelity", "success_probability"], rows)


def _int_range(text: str) -> range:
    try:
        lo, _, hi = text.partition(":")
        return range(int(lo), int(hi or lo) + 1)
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None


def cmd_timing(args) -> str:
    m = loss_from_args(args)
    if args.figure2 or args.format == "csv":
        try:
            etas = [float(e) for e in args.etas.split(",")]
        except ValueError:
            raise UsageError(f"bad --etas {args.etas!r}") from None
        return figure2_csv(figure2_table(_int_range(args.n_range), etas, m))
    sec = expected_time(args.n, m)
    return _json({
        "n": args.n,
        "success_probability": success_probability(args.n, m),
        "seconds": sec,
        "hours": sec / 3600.0,
    })


def cmd_montecarlo(args) -> str:
    rep = monte_carlo(args.n, loss_from_args(args), args.trials, args.seed, params_from_args(args), args.max_fidelity_runs)
    out = rep.as_dict()
    out["analytic_rate"] = success_probability(args.n, loss_from_args(args))
    return _json(out)


COMMANDS = {
    "reflection": cmd_reflection,
    "channel": cmd_channel,
    "teleport": cmd_teleport,
    "tables": cmd_tables,
    "sweep": cmd_sweep,
    "timing": cmd_timing,
    "montecarlo": cmd_montecarlo,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (ValueError, LookupError, ArithmeticError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
