"""Brute-force American price: one continuation leg per stopping time."""
from __future__ import annotations

from .. import lp
from .._rational import to_fraction
from ..errors import InfeasibleHedge, ParamError
from ..market_tree import Cone, enumerate_stopping_times


def _admissible_times(model, payoff, cap):
    taus = enumerate_stopping_times(model, cap)
    if payoff.kind == "bermudan":
        allowed = set(payoff.exercise_dates)
        taus = [t for t in taus if all(model.time(s) in allowed for s in t.stop_set)]
    elif payoff.kind != "american":
        raise ParamError("brute force needs an American or Bermudan payoff")
    return taus


def brute_force_american(model, payoff, x=0, cone=None, cap=64, mode="exact"):
    """min z s.t. z + pasted wealth(tau) >= Phi_tau on every atom, for every stopping time tau.

    Each tau gets its own continuation leg on the nodes at or below its stop
    nodes; admissibility z + wealth >= -x holds on the pre leg and on every
    continuation.  Returns the optimal z.
    """
    cone = cone or Cone.unconstrained(model.d)
    payoff.validate(model)
    x = to_fraction(x)
    taus = _admissible_times(model, payoff, cap)
    if min(payoff.values[s] for t in taus for s in t.stop_set) < -x:
        raise InfeasibleHedge("payoff below -x")
    p = lp.LPProblem("min")
    z = p.add_var("z", lb=None, obj=1)

    def add_pos(tag, v):
        js = []
        for i in range(model.d):
            lo = 0 if (cone.variant == "no_short" and i < cone.n) else None
            js.append(p.add_var(f"h[{tag},{v},{i}]", lb=lo))
        if cone.variant == "polyhedral":
            for r, row in enumerate(cone.rows):
                p.add_row(f"cone[{tag},{v},{r}]", {js[i]: a for i, a in enumerate(row)}, ">=", 0)
        return js

    pre = {v: add_pos("pre", v) for v in model.nonterminal}
    rows = {}

    def put(expr, rhs):
        lhs = {z: 1, **{j: a for j, a in expr.items() if a != 0}}
        key = frozenset(lhs.items())
        if key not in rows or rows[key][0] < rhs:
            rows[key] = (rhs, lhs)

    def walk(position_of):
        out = {model.root: {}}
        for v in model.order:
            sv = model.prices(v)
            for c in model.children[v]:
                e = dict(out[v])
                js = position_of(v)
                for i, (a, b) in enumerate(zip(model.prices(c), sv)):
                    if a != b:
                        e[js[i]] = e.get(js[i], 0) + (a - b)
                out[c] = e
        return out

    w_pre = walk(lambda v: pre[v])
    for v in model.order:
        put(w_pre[v], -x)
    for n, tau in enumerate(taus):
        after = {}
        for v in model.order:
            par = model.by_id[v].parent
            if v in tau.stop_set:
                after[v] = v
            elif par is not None and par in after:
                after[v] = after[par]
        leg = {v: add_pos(f"tau{n}", v) for v in model.nonterminal if v in after}
        w = walk(lambda v: leg[v] if v in after else pre[v])
        for v, s in after.items():
            if model.children[v]:
                continue
            put(w[v], payoff.values[s])
        for v, s in after.items():
            if v != s:
                put(w[v], -x)
    for i, (rhs, lhs) in enumerate(rows.values()):
        p.add_row(f"r{i}", lhs, ">=", rhs)
    sol = lp.solve(p, mode)
    if not sol.optimal:
        raise InfeasibleHedge(f"brute-force LP is {sol.status}")
    return sol.objective
