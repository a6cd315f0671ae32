"""Command-line front end.

Exit codes: 0 success, 1 reproduction failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import boxes, info, io, models, repro, rsp, states
from .optimize import WITNESSES, witness_max
from .qmath import DensityMatrix, partial_trace

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _vec3(values, name):
    if values is None:
        return np.zeros(3)
    if len(values) != 3:
        raise UsageError(f"{name} needs three numbers")
    return np.asarray(values, dtype=float)


def _need_p(args, name):
    if args.p is None:
        raise UsageError(f"builder {name!r} needs --p")
    return args.p


BUILDERS = {
    "werner": lambda a: states.werner(_need_p(a, "werner")),
    "giorgi": lambda a: states.giorgi_state(),
    "trine-qc": lambda a: states.trine_qc(),
    "phi-plus": lambda a: states.phi_plus(),
    "cc-example": lambda a: states.cc_example(),
    "local-coherent": lambda a: states.local_coherent_example(),
    "maximally-mixed": lambda a: states.maximally_mixed(2, 2),
    "bell-diagonal": lambda a: states.bell_diagonal(_vec3(a.c, "--c")),
    "product": lambda a: states.product_state(
        states.qubit_state(_vec3(a.bloch_a, "--bloch-a")), states.qubit_state(_vec3(a.bloch_b, "--bloch-b"))
    ),
}


# helpers

def _load_state(path) -> DensityMatrix:
    return io.state_from_json(io.load(path))


def _families(args, need=True):
    """Measurements from --measurements FILE or --alice/--bob axis labels."""
    if getattr(args, "measurements", None):
        return io.measurements_from_json(io.load(args.measurements))
    if getattr(args, "alice", None) and getattr(args, "bob", None):
        try:
            return boxes.pauli_family(*args.alice.split(",")), boxes.pauli_family(*args.bob.split(","))
        except KeyError as exc:
            raise UsageError(f"unknown axis label {exc}; use x, y, z with optional sign") from exc
    if need:
        raise UsageError("give --measurements FILE or both --alice and --bob axis lists")
    return None


def _emit(args, payload: dict) -> None:
    if args.pretty:
        for k, v in io.round_sig(payload).items():
            print(f"{k:>28}: {v}")
    else:
        print(io.dumps(payload))


def _write_or_print(args, payload):
    text = io.dumps(payload, pretty=args.pretty)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


# commands

def cmd_state(args) -> int:
    rho = BUILDERS[args.builder](args)
    _write_or_print(args, io.state_to_json(rho))
    return EXIT_OK


def cmd_box(args) -> int:
    rho = _load_state(args.state)
    alice, bob = _families(args)
    _write_or_print(args, io.box_to_json(boxes.born_box(rho, alice, bob)))
    return EXIT_OK


def cmd_witness(args) -> int:
    names = sorted(WITNESSES) if args.witness == "all" else [args.witness]
    if args.optimize:
        if not args.state:
            raise UsageError("--optimize needs --state")
        rho = _load_state(args.state)
        out = {}
        for name in names:
            rep = witness_max(rho, name, args.family, restarts=args.restarts, seed=args.seed)
            out[name] = {
                "value": rep.value,
                "measurements": io.measurements_to_json(rep.alice, rep.bob),
                "search": rep.search,
            }
        _emit(args, out if len(names) > 1 else {"witness": names[0], **out[names[0]]})
        return EXIT_OK
    if args.box:
        box = io.box_from_json(io.load(args.box))
        meas = None
    else:
        if not args.state:
            raise UsageError("give --box FILE, or --state FILE with measurements")
        alice, bob = _families(args)
        box = boxes.born_box(_load_state(args.state), alice, bob)
        meas = io.measurements_to_json(alice, bob)
    values = {}
    for n in names:
        try:
            values[n] = float(WITNESSES[n](box))
        except ZeroDivisionError:
            # Q needs every Alice outcome to occur
            values[n] = None
    record = {"witness": names[0], "value": values[names[0]]} if len(names) == 1 else dict(values)
    if "Q" in names and values["Q"] is not None:
        record["Q_determinant"] = boxes.q_determinant(box)
    if meas is not None:
        record["measurements"] = meas
    _emit(args, record)
    return EXIT_OK


def cmd_info(args) -> int:
    rho = _load_state(args.state)
    search = {"seed": args.seed}
    if args.what == "mi":
        out = {"mutual_information": info.mutual_information(rho)}
    elif args.what == "discord":
        out = info.discord(rho, args.direction, **search).as_dict()
    elif args.what == "rank":
        out = info.correlation_rank(rho).as_dict()
    elif args.what == "coherence":
        out = {"coherence": info.coherence_rel_entropy(rho)}
    else:
        out = info.classify(rho, threshold=args.tol if args.tol is not None else info.DISCORD_ZERO, **search).as_dict()
    _emit(args, out)
    return EXIT_OK


def cmd_classify(args) -> int:
    rho = _load_state(args.state)
    thr = args.tol if args.tol is not None else info.DISCORD_ZERO
    out = info.classify(rho, threshold=thr, seed=args.seed).as_dict()
    if (rho.dimA, rho.dimB) == (2, 2) and _families(args, need=False):
        alice, bob = _families(args)
        out["verdict"] = models.verdict(rho, alice, bob, budget=min(args.restarts, 16), seed=args.seed).as_dict()
    _emit(args, out)
    return EXIT_OK


def cmd_fit(args) -> int:
    rho = _load_state(args.state) if args.state else None
    fams = _families(args, need=False)
    if args.box:
        box = io.box_from_json(io.load(args.box))
    elif rho is not None and fams:
        box = boxes.born_box(rho, *fams)
    else:
        raise UsageError("give --box FILE, or --state with measurements")
    if args.model == "lhv":
        res = models.lhv_fit(box, args.dlambda, budget=args.restarts, seed=args.seed)
    else:
        if rho is None or fams is None:
            raise UsageError("lhvlhs fitting needs --state (for rho_B) and Bob's measurements")
        res = models.lhvlhs_fit(box, args.dlambda, fams[1], partial_trace(rho, "B"), budget=args.restarts, seed=args.seed)
    out = res.as_dict()
    if args.tol is not None:
        out["representable"] = res.residual <= args.tol
    _emit(args, out)
    return EXIT_OK


def cmd_rsp(args) -> int:
    rho = _load_state(args.state)
    cf = rsp.canonical_form(rho)
    out = {"canonical_form": cf.as_dict(), "rsp_fidelity": rsp.rsp_fidelity(rho)}
    try:
        out["SS2"] = rsp.schrodinger_strength_bd(rho, 2)
        out["SS3"] = rsp.schrodinger_strength_bd(rho, 3)
    except ValueError:
        out["SS2"] = out["SS3"] = None
    psi = io.pure_from_json(io.load(args.psi_e)) if args.psi_e else None
    try:
        dec = rsp.max_entangled_fraction(rho, psi, args.check_gamma, restarts=args.restarts, seed=args.seed)
        out["decomposition"] = dec.as_dict()
    except ValueError as exc:
        out["decomposition"] = {"error": str(exc)}
    _emit(args, out)
    return EXIT_OK


def cmd_repro(args) -> int:
    ids = args.only or None
    report = repro.run_claims(ids, seed=args.seed, perturb=args.inject_failure or ())
    if args.json:
        print(io.dumps(report.as_dict(), pretty=args.pretty))
    else:
        print(report.table())
        n_ok = sum(r.passed for r in report.rows)
        print(f"{n_ok}/{len(report.rows)} claims passed")
    return EXIT_OK if report.all_passed else EXIT_FAIL


# parser

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="base seed for every search")
    p.add_argument("--restarts", type=int, default=d(64), help="restart budget for searches and fits")
    p.add_argument("--tol", type=float, default=d(None), help="decision threshold (discord zero, fit representability)")
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--pretty", action="store_true", default=d(False), help="human-readable output")


def _measurement_flags(p):
    p.add_argument("--measurements", help="JSON file {alice: [...], bob: [...]}")
    p.add_argument("--alice", help="comma-separated axes for Alice, e.g. x,y")
    p.add_argument("--bob", help="comma-separated axes for Bob, e.g. x,-y")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discordnl", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("state", cmd_state, "build a named state")
    p.add_argument("builder", choices=sorted(BUILDERS))
    p.add_argument("--p", type=float)
    p.add_argument("--c", type=float, nargs=3)
    p.add_argument("--bloch-a", type=float, nargs=3)
    p.add_argument("--bloch-b", type=float, nargs=3)
    p.add_argument("-o", "--output")

    p = add("box", cmd_box, "Born-rule box of a state under measurements")
    p.add_argument("--state", required=True)
    _measurement_flags(p)
    p.add_argument("-o", "--output")

    p = add("witness", cmd_witness, "evaluate or maximise a box witness")
    p.add_argument("--state")
    p.add_argument("--box")
    p.add_argument("--witness", choices=sorted(WITNESSES) + ["all"], default="all")
    _measurement_flags(p)
    p.add_argument("--optimize", action="store_true", help="maximise over measurements")
    p.add_argument("--family", choices=["projective", "povm"], default="projective")

    p = add("info", cmd_info, "entropic and rank quantities")
    p.add_argument("--state", required=True)
    p.add_argument("--what", choices=["mi", "discord", "rank", "coherence", "classify"], default="discord")
    p.add_argument("--direction", choices=["A->B", "B->A"], default="A->B")

    p = add("fit", cmd_fit, "fit a bounded hidden-variable model to a box")
    p.add_argument("--model", choices=["lhv", "lhvlhs"], default="lhv")
    p.add_argument("--dlambda", type=int, required=True)
    p.add_argument("--box")
    p.add_argument("--state")
    _measurement_flags(p)

    p = add("rsp", cmd_rsp, "canonical form, RSP-fidelity and entangled fraction")
    p.add_argument("--state", required=True)
    p.add_argument("--psi-e")
    p.add_argument("--check-gamma", action="store_true")

    p = add("classify", cmd_classify, "place a state in the correlation hierarchy")
    p.add_argument("--state", required=True)
    _measurement_flags(p)

    p = add("repro", cmd_repro, "reproduce every numerical claim")
    p.add_argument("--only", nargs="+", choices=repro.CLAIM_IDS, metavar="CLAIM")
    p.add_argument("--inject-failure", nargs="+", choices=repro.CLAIM_IDS, metavar="CLAIM", help="self-test: force these claims to fail")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, io.SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
