"""Command-line front end.

Commands:
  example  <kind> [params] [-o file]     emit a game file
  analyze  <game>                        structure classification
  solve    <game> --formulation F ...    build + globally solve the MPEC
  verify   <game> --point <pt> --mode M  certify a point

Reports are text with an embedded machine-readable JSON block (floats are
emitted with shortest-round-trip repr, so the block parses back losslessly).
Exit codes: 0 ok (and, for verify --expect, the claim matched), 3 parse or
semantic error, 4 missing structure / capability, 5 infeasible point or bad
precondition, 6 --expect mismatch, 1 internal error. EPEC_SEED fixes the
multistart seed (default 0).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .certify import (
    check_b_stationary,
    check_second_order_ss,
    check_strong_stationary,
    verify_global,
    verify_local,
)
from .defaults import DEFAULT_EPS, MAX_ITERS, MULTISTART, TAU_STAT
from .errors import (
    CapabilityError,
    ContractViolation,
    EpecError,
    ParseError,
    PreconditionError,
    SemanticError,
)
from .generators import PF_VARIANTS, cournot, pang_fukushima
from .kernels import backend_name
from .lcp import is_single_valued
from .model import Game, membership_F, parse_game, parse_point, serialize_game
from .mpec import (
    SolveOptions,
    build_ae,
    build_imp,
    build_quasi,
    expand_point,
    solve_global,
    solve_pieces,
)
from .structure import (
    detect_implicit_potential,
    detect_potential,
    detect_quasi_potential,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_STRUCTURE = 4
EXIT_PRECONDITION = 5
EXIT_EXPECT = 6


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, float) and (obj != obj):  # NaN
        return None
    return obj


def _poly_dict(poly, names):
    return {"monomials": poly.to_spec(), "pretty": poly.pretty(names)}


def _structure_dict(game, rep, names):
    out = {"kind": rep.kind, "sampled": rep.sampled}
    if rep.pi is not None:
        pnames = names[: rep.pi.arity] if rep.pi.arity <= len(names) else None
        out["pi"] = _poly_dict(rep.pi, pnames)
    if rep.h is not None:
        wnames = names[: game.layout.mtot] + (
            ["w"] if game.layout.p == 1 else
            [f"w_{j+1}" for j in range(game.layout.p)]
        )
        out["h"] = _poly_dict(rep.h, wnames)
    if rep.witness is not None:
        out["witness"] = _jsonable(dataclasses.asdict(rep.witness))
    if rep.pieces:
        out["pieces"] = [
            {"alpha": list(piece.alpha), "pi": _poly_dict(pik, None)}
            for piece, pik in rep.pieces
        ]
    return out


def _solve_dict(res):
    return {
        "status": res.status,
        "value": None if res.value is None else float(res.value),
        "point": None if res.point is None else res.point.tolist(),
        "piece": None if res.piece is None else [list(a) for a in res.piece],
        "stationarity_residual": float(res.stationarity_residual),
        "pieces_examined": len(res.solver_log),
    }


def _cert_dict(cert):
    out = {
        "claim": cert.claim,
        "gaps": _jsonable(cert.gaps),
        "deviations": _jsonable(cert.deviations),
        "branches_checked": cert.branches_checked,
        "tolerance": cert.tolerance,
        "flags": _jsonable(cert.flags),
    }
    if cert.multipliers is not None:
        out["multipliers"] = {
            "eta": _jsonable(cert.multipliers.eta),
            "mu": _jsonable(cert.multipliers.mu),
            "lam": _jsonable(cert.multipliers.lam),
            "beta": _jsonable(cert.multipliers.beta),
            "beta_matrix": _jsonable(cert.multipliers.beta_matrix),
        }
    return out


def _game_digest(game):
    return {
        "leaders": game.layout.nleaders,
        "m": list(game.layout.m),
        "p": game.layout.p,
        "formulation": game.formulation,
    }


def _emit_report(title, body_lines, machine, out=sys.stdout):
    print(title, file=out)
    print("=" * len(title), file=out)
    for line in body_lines:
        print(line, file=out)
    print("", file=out)
    print("```json", file=out)
    print(json.dumps(_jsonable(machine), indent=1, sort_keys=True), file=out)
    print("```", file=out)


def _load_game(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_game(fh.read())


def _options(args):
    seed = int(os.environ.get("EPEC_SEED", "0"))
    return SolveOptions(
        multistart=getattr(args, "multistart", MULTISTART),
        tol=getattr(args, "tol", TAU_STAT),
        max_iters=getattr(args, "max_iters", MAX_ITERS),
        threads=getattr(args, "threads", 1),
        seed=seed,
    )


# ----------------------------------------------------------------------------


def cmd_example(args):
    if args.kind == "cournot":
        game = cournot(args.a, args.b, args.c, args.leaders, args.followers,
                       full_followers=args.full_followers)
    else:
        game = pang_fukushima(args.variant)
    text = serialize_game(game)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_analyze(args):
    t0 = time.perf_counter()
    game = _load_game(args.game)
    names = game.layout.names()
    timings = {"parse": time.perf_counter() - t0}
    t0 = time.perf_counter()
    pot = detect_potential(game)
    quasi = detect_quasi_potential(game)
    sv = is_single_valued(game.follower)
    imp = None
    if sv:
        imp = detect_implicit_potential(game)
    timings["detect"] = time.perf_counter() - t0
    body = [
        f"game: N={game.layout.nleaders} m={list(game.layout.m)} p={game.layout.p} "
        f"formulation={game.formulation}",
        f"potential: {'yes' if pot.detected else 'no'}",
    ]
    if pot.detected:
        body.append(f"  pi = {pot.pi.pretty(names)}")
    elif pot.witness is not None:
        body.append(f"  witness: {pot.witness.detail}")
    body.append(f"quasi-potential: {'yes' if quasi.detected else 'no'}")
    if quasi.detected:
        body.append(f"  pi = {quasi.pi.pretty(names[:game.layout.mtot])}")
        wn = names[: game.layout.mtot] + (
            ["w"] if game.layout.p == 1 else
            [f"w_{j+1}" for j in range(game.layout.p)]
        )
        body.append(f"  h  = {quasi.h.pretty(wn)}")
    elif quasi.witness is not None:
        body.append(f"  witness: {quasi.witness.detail}")
    body.append(f"solution map single-valued (P-matrix): {'yes' if sv else 'no'}")
    if imp is not None:
        body.append(f"implicit potential: {'yes' if imp.detected else 'no'} (sampled check)")
        if not imp.detected and imp.witness is not None:
            body.append(f"  witness: {imp.witness.detail}")
    machine = {
        "command": "analyze",
        "version": __version__,
        "backend": backend_name(),
        "game": _game_digest(game),
        "potential": _structure_dict(game, pot, names),
        "quasi_potential": _structure_dict(game, quasi, names),
        "single_valued": bool(sv),
        "implicit_potential": None if imp is None else _structure_dict(game, imp, names),
        "timings": timings,
    }
    _emit_report(f"epeckit analyze {args.game}", body, machine)
    return EXIT_OK


def _build_for(game, formulation, options):
    """(instances, structure report, game-form for verification)."""
    if formulation == "quasi":
        rep = detect_quasi_potential(game)
        if not rep.detected:
            raise ContractViolation(
                "quasi-potential detection failed: "
                + (rep.witness.detail if rep.witness else "no structure")
            )
        return [build_quasi(game, rep)], rep, "original"
    if formulation == "ae":
        rep = detect_potential(game)
        if not rep.detected:
            raise ContractViolation(
                "potential detection failed: "
                + (rep.witness.detail if rep.witness else "no structure")
            )
        return [build_ae(game, rep)], rep, "ae"
    if formulation == "imp":
        rep = detect_implicit_potential(game)
        if not rep.detected:
            raise ContractViolation(
                "implicit-potential detection failed: "
                + (rep.witness.detail if rep.witness else "no structure")
            )
        return build_imp(game, rep), rep, "original"
    raise SemanticError(f"unknown formulation {formulation!r}")


def cmd_solve(args):
    t0 = time.perf_counter()
    game = _load_game(args.game)
    names = game.layout.names()
    options = _options(args)
    timings = {"parse": time.perf_counter() - t0}
    t0 = time.perf_counter()
    instances, rep, verify_form = _build_for(game, args.formulation, options)
    timings["build"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    if len(instances) == 1:
        res = solve_global(instances[0], options)
        win_inst = instances[0]
    else:
        res, win_inst = solve_pieces(instances, options)
    timings["solve"] = time.perf_counter() - t0
    body = [
        f"formulation: {args.formulation}",
        f"status: {res.status}",
        f"value: {res.value!r}",
    ]
    machine = {
        "command": "solve",
        "version": __version__,
        "backend": backend_name(),
        "game": _game_digest(game),
        "options": dataclasses.asdict(options),
        "formulation": args.formulation,
        "structure": _structure_dict(game, rep, names),
        "solve": _solve_dict(res),
    }
    cert = None
    if res.status in ("optimal", "incomplete") and res.point is not None:
        xs, ys = expand_point(win_inst, res.point)
        machine["expanded_point"] = {"x": [v.tolist() for v in xs],
                                     "y": [v.tolist() for v in ys]}
        body.append("point (game space): x=" + repr([v.tolist() for v in xs])
                    + " y=" + repr([v.tolist() for v in ys]))
        vgame = dataclasses.replace(game, formulation=verify_form)
        t0 = time.perf_counter()
        cert = verify_global(vgame, xs, ys, eps=args.eps, options=options)
        timings["verify"] = time.perf_counter() - t0
        body.append(f"verify_global on formulation={verify_form}: {cert.claim} "
                    f"(max gap {max(cert.gaps):.3e})")
        machine["certificate"] = _cert_dict(cert)
    machine["timings"] = timings
    _emit_report(f"epeckit solve {args.game}", body, machine)
    return EXIT_OK


def cmd_verify(args):
    t0 = time.perf_counter()
    game = _load_game(args.game)
    if args.game_form:
        game = dataclasses.replace(game, formulation=args.game_form)
    with open(args.point, "r", encoding="utf-8") as fh:
        xs, ys = parse_point(fh.read(), game)
    options = _options(args)
    timings = {"parse": time.perf_counter() - t0}
    t0 = time.perf_counter()
    body = [f"mode: {args.mode}", f"game-form: {game.formulation}"]
    machine = {
        "command": "verify",
        "version": __version__,
        "backend": backend_name(),
        "game": _game_digest(game),
        "options": dataclasses.asdict(options),
        "mode": args.mode,
        "point": {"x": [v.tolist() for v in xs], "y": [v.tolist() for v in ys]},
    }
    certs = []
    if args.mode == "global":
        cert = verify_global(game, xs, ys, eps=args.eps, options=options)
        certs.append(cert)
    elif args.mode == "local":
        cert = verify_local(game, xs, ys, radius=args.radius, options=options)
        certs.append(cert)
    elif args.mode == "bstat":
        cert = check_b_stationary(game, (xs, ys), options=options)
        certs.append(cert)
    elif args.mode in ("strong", "second-order"):
        rep = detect_potential(game)
        if not rep.detected:
            raise ContractViolation("potential detection failed; strong "
                                    "stationarity runs on the shared-constraint MPEC")
        inst = build_ae(game, rep)
        z = game.pack_point(xs, ys)
        cert = check_strong_stationary(inst, z)
        certs.append(cert)
        if args.mode == "second-order":
            if cert.claim != "strong_stationary":
                body.append("second-order check skipped: not strong stationary")
            else:
                certs.append(check_second_order_ss(inst, z, cert))
    timings["certify"] = time.perf_counter() - t0
    for cert in certs:
        body.append(f"claim: {cert.claim}")
        if cert.gaps:
            body.append(f"  gaps: {cert.gaps!r}")
        for dev in cert.deviations:
            body.append(f"  deviation: leader {dev['leader'] + 1} -> x={dev['x']} "
                        f"y={dev['y']} value={dev['value']!r}")
    machine["certificates"] = [_cert_dict(c) for c in certs]
    machine["timings"] = timings
    _emit_report(f"epeckit verify {args.game}", body, machine)
    if args.expect is not None:
        claims = [c.claim for c in certs]
        if args.expect not in claims:
            print(f"expectation failed: wanted {args.expect!r}, got {claims!r}",
                  file=sys.stderr)
            return EXIT_EXPECT
    return EXIT_OK


# ----------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="epeckit", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", help="emit a built-in example game file")
    ex.add_argument("kind", choices=["cournot", "pang-fukushima"])
    ex.add_argument("--variant", choices=list(PF_VARIANTS), default="original")
    ex.add_argument("--a", type=float, default=10.0)
    ex.add_argument("--b", type=float, default=1.0)
    ex.add_argument("--c", type=float, default=1.0)
    ex.add_argument("--leaders", type=int, default=3)
    ex.add_argument("--followers", type=int, default=2)
    ex.add_argument("--full-followers", action="store_true")
    ex.add_argument("-o", "--output")
    ex.set_defaults(func=cmd_example)

    an = sub.add_parser("analyze", help="classify the game's structure")
    an.add_argument("game")
    an.set_defaults(func=cmd_analyze)

    so = sub.add_parser("solve", help="solve a potential-based reformulation")
    so.add_argument("game")
    so.add_argument("--formulation", choices=["quasi", "ae", "imp"], required=True)
    so.add_argument("--multistart", type=int, default=MULTISTART)
    so.add_argument("--tol", type=float, default=TAU_STAT)
    so.add_argument("--max-iters", type=int, default=MAX_ITERS)
    so.add_argument("--threads", type=int, default=1)
    so.add_argument("--eps", type=float, default=DEFAULT_EPS)
    so.set_defaults(func=cmd_solve)

    ve = sub.add_parser("verify", help="certify a point")
    ve.add_argument("game")
    ve.add_argument("--point", required=True)
    ve.add_argument("--mode", choices=["global", "local", "bstat", "strong",
                                       "second-order"], default="global")
    ve.add_argument("--game-form", choices=["original", "ae", "bl", "ind"])
    ve.add_argument("--eps", type=float, default=DEFAULT_EPS)
    ve.add_argument("--radius", type=float, default=0.1)
    ve.add_argument("--multistart", type=int, default=MULTISTART)
    ve.add_argument("--tol", type=float, default=TAU_STAT)
    ve.add_argument("--max-iters", type=int, default=MAX_ITERS)
    ve.add_argument("--threads", type=int, default=1)
    ve.add_argument("--expect")
    ve.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SemanticError as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ContractViolation, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EpecError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
