"""Command-line front end.

Exit codes: 0 success, 1 the checked condition fails, 2 input error,
3 numerical error (including failed --verify).
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import market_tree as mt
from ._rational import fmt, to_fraction
from .errors import (
    BudgetExhausted,
    CapExceeded,
    DimensionError,
    InfeasibleHedge,
    InvariantError,
    MismatchError,
    NumericalBreakdown,
    ParamError,
    SchemaError,
    UnsupportedCone,
)
from .reports import dumps
from .superhedge import (
    HedgeQuery,
    brute_force_american,
    localize_sweep,
    price_american,
    price_european,
)
from .superhedge.search import SearchParams, search_local_viability_gap
from .superhedge.sweep import credit_sensitivity, elmd_dual_value, sensitivity_csv, stopped_query
from .viability import check_local_na, check_na, verify_pricing_system

log = logging.getLogger("viabhedge")

INPUT_ERRORS = (SchemaError, InvariantError, ParamError, DimensionError, CapExceeded, UnsupportedCone,
                InfeasibleHedge, OSError, ValueError)
NUMERIC_ERRORS = (NumericalBreakdown, MismatchError)


class CommandError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _load(path):
    return mt.parse_document(Path(path).read_bytes())


def _cone(args, model, doc=None):
    spec = args.cone
    if spec is None:
        return doc.cone if doc is not None and doc.cone is not None else mt.Cone.unconstrained(model.d)
    if spec.startswith("polyhedral:"):
        rows = json.loads(Path(spec.split(":", 1)[1]).read_text())
        if isinstance(rows, dict):
            rows = rows.get("polyhedral", rows.get("rows"))
        return mt.parse_cone({"polyhedral": rows}, model.d)
    return mt.parse_cone(spec, model.d)


def _theta(args):
    if args.theta in (None, "all"):
        return None
    try:
        return tuple(int(t) for t in args.theta.split(","))
    except ValueError:
        raise ParamError(f"bad --theta {args.theta!r}") from None


def _seq(doc, args):
    seq = doc.localizing or mt.LocalizingSequence.trivial(doc.model)
    if args.k_max is not None:
        if not (1 <= args.k_max <= len(seq.times)):
            raise ParamError(f"--k-max must lie in 1..{len(seq.times)}")
        times = seq.times[: args.k_max]
        seq = mt.LocalizingSequence(times, seq.exhaustive and args.k_max == len(seq.times))
    return seq


def _query(doc, args):
    if doc.payoff is None:
        raise SchemaError("model file has no payoff")
    return HedgeQuery(
        doc.model,
        doc.payoff,
        to_fraction(args.x),
        _cone(args, doc.model, doc),
        _seq(doc, args),
        _theta(args),
        args.mode,
        args.tol,
        getattr(args, "horizon", None),
    )


def _price(q):
    if q.payoff.kind == "european":
        return price_european(q)
    return price_american(q)


def _finish_price(report, args):
    out = report.to_json()
    if args.verify:
        v = report.verification
        if report.pricing_system is None:
            raise CommandError(3, "no pricing system to verify (the dual LP is not optimal)")
        if not v.ok:
            raise CommandError(3, f"pricing system fails verification at {len(v.violations)} checks")
        if report.gap is None or abs(report.gap) > (0 if args.mode == "exact" else (args.tol or 1e-7)):
            raise CommandError(3, f"duality gap {report.gap}")
    return out, 0


# --------------------------------------------------------------------------
# commands


def cmd_validate(args):
    doc = _load(args.input)
    m = doc.model
    out = {"valid": True, "d": m.d, "T": m.T, "nodes": len(m.nodes), "leaves": len(m.leaves),
           "localizing": doc.localizing is not None, "payoff": doc.payoff.kind if doc.payoff else None}
    return out, 0


def cmd_check_na(args):
    doc = _load(args.input)
    v = check_na(doc.model, _cone(args, doc.model, doc), args.mode, args.experimental)
    return v.to_json(), 0 if v.holds else 1


def cmd_check_local(args):
    doc = _load(args.input)
    v = check_local_na(doc.model, _seq(doc, args), _cone(args, doc.model, doc), args.mode, args.experimental)
    return v.to_json(), 0 if v.holds else 1


def cmd_price_eur(args):
    q = _query(_load(args.input), args)
    if q.payoff.kind != "european":
        raise ParamError("price-eur needs a European payoff")
    return _finish_price(price_european(q), args)


def cmd_price_am(args):
    q = _query(_load(args.input), args)
    return _finish_price(price_american(q), args)


def cmd_sweep(args):
    q = _query(_load(args.input), args)
    if args.xs:
        pairs = credit_sensitivity(q, [x for x in args.xs.split(",")])
        if args.format == "csv":
            return sensitivity_csv(pairs), 0
        return {"sensitivity": [{"x": fmt(x), "pi": fmt(p)} for x, p in pairs]}, 0
    if args.k is not None:
        if not (1 <= args.k <= len(q.seq.times)):
            raise ParamError(f"--k must lie in 1..{len(q.seq.times)}")
        pi = price_european(stopped_query(q, args.k), verify=False).price
        return {"k": args.k, "pi_k": fmt(pi), "elmd": fmt(elmd_dual_value(q, args.k))}, 0
    rep = localize_sweep(q)
    if args.format == "csv":
        return rep.to_csv(), 0
    out = rep.to_json()
    out.update({"x": fmt(q.x), "cone": q.cone.label(), "mode": q.mode})
    return out, 0


def cmd_dual_verify(args):
    q = _query(_load(args.input), args)
    report = _price(q)
    if report.pricing_system is None:
        raise CommandError(1, "no pricing system exists for this model and sequence")
    tol = 0 if args.mode == "exact" else (args.tol if args.tol is not None else 1e-7)
    v = verify_pricing_system(q.model, q.seq, report.pricing_system, q.cone, tol)
    out = v.to_json()
    out.update({"price": fmt(report.price), "dual_value": fmt(report.dual_value), "gap": fmt(report.gap)})
    if not v.ok:
        raise CommandError(3, dumps(out))
    return out, 0


def cmd_brute(args):
    doc = _load(args.input)
    if doc.payoff is None:
        raise SchemaError("model file has no payoff")
    price = brute_force_american(doc.model, doc.payoff, to_fraction(args.x), _cone(args, doc.model, doc),
                                 args.cap, args.mode)
    return {"price": fmt(price), "mode": args.mode, "x": fmt(to_fraction(args.x)), "cap": args.cap}, 0


def cmd_gen(args):
    kind = args.input
    rng_seed = args.seed
    if kind == "binomial":
        model = mt.generate_binomial(to_fraction(args.s0), to_fraction(args.up), to_fraction(args.down),
                                     to_fraction(args.p), args.periods)
        doc = mt.ModelFile(model)
    elif kind == "demo":
        doc = mt.ModelFile(mt.generate_arbitrage_demo())
    elif kind == "put":
        doc = mt.put_fixture()
    elif kind == "drift":
        doc = mt.drift_fixture()
    elif kind == "random":
        rng = random.Random(rng_seed)
        model = mt.generate_random(rng, args.periods, args.branch, args.d, args.leaves,
                                   arbitrage_free=not args.arbitrage)
        seq = mt.random_localizing_sequence(model, rng, 2)
        doc = mt.ModelFile(model, seq, mt.random_payoff(model, rng, args.payoff), mt.Cone.unconstrained(model.d))
    else:
        raise ParamError(f"unknown generator {kind!r} (binomial, demo, put, drift, random)")
    return mt.serialize_document(doc), 0


def cmd_search(args):
    params = SearchParams(family=args.family)
    try:
        rep = search_local_viability_gap(params, args.budget, args.seed,
                                         None if args.target is None else to_fraction(args.target))
    except BudgetExhausted as exc:
        return exc.best.to_json(), 1
    return rep.to_json(), 0


COMMANDS = {
    "validate": cmd_validate,
    "check-na": cmd_check_na,
    "check-local": cmd_check_local,
    "price-eur": cmd_price_eur,
    "price-am": cmd_price_am,
    "sweep": cmd_sweep,
    "dual-verify": cmd_dual_verify,
    "brute": cmd_brute,
    "gen": cmd_gen,
    "search": cmd_search,
}


def build_parser():
    p = argparse.ArgumentParser(prog="viabhedge", description="Superhedging LPs on finite scenario trees.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("input", nargs="?", help="model file (generator name for gen)")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.add_argument("--x", default="0", help="credit constraint")
    p.add_argument("--cone", help="unconstrained | no-short:<n> | polyhedral:<file>")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--tol", type=float)
    p.add_argument("--theta", help="all | comma list of exercise dates")
    p.add_argument("--k", type=int)
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=64)
    p.add_argument("--horizon", type=int, help="trading horizon for European claims")
    p.add_argument("--xs", help="comma list of credit constraints (sweep: x-sensitivity curve)")
    p.add_argument("--experimental", action="store_true", help="allow polyhedral cones in NA checks")
    g = p.add_argument_group("generators")
    g.add_argument("--s0", default="1")
    g.add_argument("--up", default="2")
    g.add_argument("--down", default="1/2")
    g.add_argument("--p", default="1/2")
    g.add_argument("--periods", type=int, default=2)
    g.add_argument("--branch", type=int, default=3)
    g.add_argument("--d", type=int, default=1)
    g.add_argument("--leaves", type=int, default=12)
    g.add_argument("--payoff", choices=("european", "american", "bermudan"), default="european")
    g.add_argument("--arbitrage", action="store_true", help="random trees without the martingale construction")
    s = p.add_argument_group("search")
    s.add_argument("--budget", type=int, default=20)
    s.add_argument("--family", choices=("random", "binomial"), default="random")
    s.add_argument("--target", help="required gap; exit 1 if not reached")
    return p


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    logging.basicConfig(level=os.environ.get("VIABHEDGE_LOG", "error").upper(), stream=stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command != "search" and args.input is None:
        print(f"viabhedge: {args.command} needs an input", file=stderr)
        return 2
    if args.format == "csv" and args.command != "sweep":
        print("viabhedge: --format csv is only available for sweep", file=stderr)
        return 2
    try:
        out, code = COMMANDS[args.command](args)
    except CommandError as exc:
        print(f"viabhedge: {exc}", file=stderr)
        return exc.code
    except NUMERIC_ERRORS as exc:
        print(f"viabhedge: numerical error: {exc}", file=stderr)
        return 3
    except INPUT_ERRORS as exc:
        if args.command == "validate":
            _emit({"valid": False, "error": str(exc)}, args, stdout)
        print(f"viabhedge: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    _emit(out, args, stdout)
    return code


def _emit(out, args, stdout):
    text = out if isinstance(out, str) else dumps(out)
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
