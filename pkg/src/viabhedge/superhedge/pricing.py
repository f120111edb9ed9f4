"""Superhedging LPs for European, American and Bermudan claims."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .. import lp
from .._rational import fmt, to_fraction
from ..errors import InfeasibleHedge, NumericalBreakdown, ParamError
from ..market_tree import Cone, LocalizingSequence, truncate
from ..strategy import GeneralizedStrategy, check_admissible, wealth
from ..viability import PricingLP, PricingSystem, verify_pricing_system

log = logging.getLogger(__name__)

FLOAT_TOL = 1e-7


@dataclass(frozen=True)
class HedgeQuery:
    model: object
    payoff: object
    x: object = 0
    cone: Optional[Cone] = None
    seq: Optional[LocalizingSequence] = None
    theta: Optional[tuple] = None
    mode: str = "exact"
    tol: Optional[float] = None
    horizon: Optional[int] = None  # European only: trading stops here

    def __post_init__(self):
        x = self.x if isinstance(self.x, float) else to_fraction(self.x)
        if x < 0:
            raise ParamError("credit constraint x must be nonnegative")
        object.__setattr__(self, "x", x)
        if self.cone is None:
            object.__setattr__(self, "cone", Cone.unconstrained(self.model.d))
        if self.seq is None:
            object.__setattr__(self, "seq", LocalizingSequence.trivial(self.model))
        if self.mode not in ("exact", "float"):
            raise ParamError(f"unknown mode {self.mode!r}")
        self.payoff.validate(self.model)
        self.seq.validate(self.model)

    @property
    def tolerance(self):
        if self.tol is not None:
            return self.tol
        return 0 if self.mode == "exact" else FLOAT_TOL

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class PriceReport:
    price: object
    strategy: GeneralizedStrategy
    pricing_system: Optional[PricingSystem]
    gap: object
    mode: str
    x: object
    cone: str
    dual_value: object = None
    dual_status: str = "optimal"
    verification: object = None
    binding: list = field(default_factory=list)
    sweep: Optional[list] = None
    theta: tuple = ()

    def to_json(self):
        out = {
            "price": fmt(self.price),
            "gap": fmt(self.gap),
            "mode": self.mode,
            "x": fmt(self.x),
            "cone": self.cone,
            "theta": list(self.theta),
            "strategy": self.strategy.to_json(),
            "pricing_system": self.pricing_system.to_json() if self.pricing_system else None,
            "dual_value": fmt(self.dual_value),
            "dual_status": self.dual_status,
            "binding": list(self.binding),
        }
        if self.verification is not None:
            out["verification"] = self.verification.to_json()
        if self.sweep is not None:
            out["sweep"] = [fmt(v) for v in self.sweep]
        return out


class HedgeLP:
    """min z over (z, pre leg, one post leg per theta) with superhedge and admissibility rows.

    Superhedge row per (k, theta, stop node s of T_k): z plus the pasted wealth
    at s is at least Phi_theta when s is a leaf, and at least -x otherwise.
    Admissibility: z plus unstopped wealth is at least -x on every leg.  Rows
    with identical left-hand sides are merged keeping the largest right-hand
    side; an admissibility row is therefore absorbed by a superhedge twin.
    """

    def __init__(self, model, seq, thetas, phi, x, cone, admissibility=True):
        self.model, self.seq, self.thetas, self.x, self.cone = model, seq, tuple(thetas), x, cone
        p = self.prob = lp.LPProblem("min")
        self.z = p.add_var("z", lb=None, obj=1)
        self.pos = {}
        legs = [None] + [th for th in self.thetas if th < model.T]
        for leg in legs:
            for v in model.nonterminal:
                if leg is not None and model.time(v) < leg:
                    continue
                for i in range(model.d):
                    lo = 0 if (cone.variant == "no_short" and i < cone.n) else None
                    self.pos[leg, v, i] = p.add_var(f"h[{'pre' if leg is None else leg},{v},{i}]", lb=lo)
                if cone.variant == "polyhedral":
                    for r, row in enumerate(cone.rows):
                        p.add_row(
                            f"cone[{'pre' if leg is None else leg},{v},{r}]",
                            {self.pos[leg, v, i]: a for i, a in enumerate(row)},
                            ">=",
                            0,
                        )
        self.legs = legs
        self._expr = {}
        rows = {}  # frozenset(lhs) -> [rhs, lhs, owners]

        def put(lhs, rhs, owner):
            key = frozenset(lhs.items())
            cur = rows.get(key)
            if cur is None:
                rows[key] = [rhs, lhs, [owner]]
            else:
                cur[0] = max(cur[0], rhs)
                cur[2].append(owner)

        for k in range(1, len(seq.times) + 1):
            tau = seq.times[k - 1]
            for th in self.thetas:
                expr = self.expressions(th)
                for s in (v for v in model.order if v in tau.stop_set):
                    rhs = phi(th, s) if not model.children[s] else -x
                    put(self._lhs(expr[s]), rhs, ("hedge", k, th, s))
        if admissibility:
            for leg in legs:
                expr = self.expressions(leg)
                for v in model.order:
                    if leg is not None and model.time(v) <= leg:
                        continue
                    put(self._lhs(expr[v]), -x, ("adm", leg, v))
        self.row_owners = []
        for rhs, lhs, owners in rows.values():
            name = "|".join(_owner_name(o) for o in owners)
            p.add_row(name, lhs, ">=", rhs)
            self.row_owners.append(owners)

    def _lhs(self, expr):
        lhs = {self.z: 1}
        lhs.update({j: a for j, a in expr.items() if a != 0})
        return lhs

    def expressions(self, leg):
        """Pasted wealth at every node as a sparse linear form in the position variables."""
        if leg in self._expr:
            return self._expr[leg]
        model = self.model
        out = {model.root: {}}
        for v in model.order:
            ch = model.children[v]
            if not ch:
                continue
            use = None if (leg is None or model.time(v) < leg or leg >= model.T) else leg
            sv = model.prices(v)
            for c in ch:
                e = dict(out[v])
                for i, (a, b) in enumerate(zip(model.prices(c), sv)):
                    if a != b:
                        j = self.pos[use, v, i]
                        e[j] = e.get(j, 0) + (a - b)
                out[c] = e
        self._expr[leg] = out
        return out

    def strategy(self, x):
        pre, post = {}, {}
        for (leg, v, i), j in self.pos.items():
            tgt = pre if leg is None else post.setdefault(leg, {})
            h = tgt.setdefault(v, [0] * self.model.d)
            h[i] = x[j]
        post = {th: {v: tuple(h) for v, h in legs.items()} for th, legs in post.items()}
        return GeneralizedStrategy(self.model.d, {v: tuple(h) for v, h in pre.items()}, post, self.thetas)


def _owner_name(o):
    if o[0] == "hedge":
        return f"hedge[{o[1]},{o[2]},{o[3]}]"
    return f"adm[{'pre' if o[1] is None else o[1]},{o[2]}]"


def _exercise_phi(model, payoff, european_maturity=None):
    if european_maturity is not None:
        return lambda th, s: payoff.values[model.ancestor(s, european_maturity)]
    return lambda th, s: payoff.values[model.ancestor(s, th)]


def _solve_pair(q, model, thetas, phi):
    """Primal hedge LP plus the pricing-system LP over the same (k, theta) grid."""
    mode = q.mode
    x = float(q.x) if mode == "float" else q.x
    hedge = HedgeLP(model, q.seq, thetas, phi, x, q.cone)
    primal = lp.solve(hedge.prob, mode)
    if primal.status != "optimal":
        # z >= -x and the zero-position rows keep the primal bounded; infeasibility means bad input
        raise InfeasibleHedge(f"superhedging LP is {primal.status}")
    if mode == "float":
        lp.check_certificate(hedge.prob, primal, q.tolerance)
    price = primal.objective
    strategy = hedge.strategy(primal.x)
    binding = sorted(
        r.name for r, yi in zip(hedge.prob.rows, primal.y) if yi != 0
    )

    D = tuple(range(1, len(q.seq.times) + 1))
    plp = PricingLP(model, q.seq, D, thetas, q.cone, require_T=False)

    def phit(k, th, s):
        return phi(th, s) if not model.children[s] else -x

    plp.payoff_objective(phit)
    dual = lp.solve(plp.prob, mode)
    report = PriceReport(price, strategy, None, None, mode, q.x, q.cone.label(), theta=tuple(thetas),
                         binding=binding)
    report.dual_status = dual.status
    if dual.optimal:
        system = plp.system(dual.x)
        if model.T not in system.Gamma:
            system = _embed_T(model, system)
        report.pricing_system = system
        report.dual_value = dual.objective
        report.gap = price - dual.objective
        if mode == "float" and abs(report.gap) > q.tolerance:
            raise NumericalBreakdown(f"float duality gap {report.gap:.3g}")
    else:
        log.info("pricing-system LP is %s: no local pricing system on this grid", dual.status)
    return report


def _embed_T(model, system):
    dens = dict(system.densities)
    for k in system.D:
        dens[k, model.T] = {leaf: Fraction(0) for leaf in model.leaves}
    return PricingSystem(system.D, tuple(sorted(set(system.Gamma) | {model.T})), dens)


def _check_payoff_floor(q, thetas, maturity=None):
    low = min(
        q.payoff.values[v]
        for t in ((maturity,) if maturity is not None else thetas)
        for v in q.model.layers[t]
    )
    if low < -q.x:
        raise InfeasibleHedge(f"payoff minimum {low} is below -x = {-q.x}")


def price_european(q, verify=True):
    """Minimal superhedging price of a European claim under the credit constraint.

    Trading runs to ``q.horizon`` (default T), possibly past the maturity.
    """
    if q.payoff.kind != "european":
        raise ParamError("price_european needs a European payoff")
    model = q.model
    m = q.payoff.maturity
    seq = q.seq
    if q.horizon is not None and q.horizon != model.T:
        if not (m <= q.horizon <= model.T):
            raise ParamError("trading horizon must lie between maturity and T")
        model = truncate(model, q.horizon)
        seq = LocalizingSequence.trivial(model)
        q = replace(q, model=model, seq=seq, payoff=q.payoff)
    _check_payoff_floor(q, (), m)
    report = _solve_pair(q, model, (model.T,), _exercise_phi(model, q.payoff, m))
    if verify and report.pricing_system is not None:
        report.verification = verify_pricing_system(model, q.seq, report.pricing_system, q.cone, q.tolerance)
    return report


def exercise_grid(q):
    if q.payoff.kind == "bermudan":
        grid = q.payoff.exercise_dates
        if q.theta is not None and set(q.theta) != set(grid):
            raise ParamError("Bermudan grid is fixed by the payoff's exercise times")
        return tuple(grid)
    if q.payoff.kind == "american":
        grid = tuple(range(q.model.T + 1)) if q.theta is None else tuple(sorted(set(q.theta)))
        if any(not (0 <= t <= q.model.T) for t in grid) or not grid:
            raise ParamError("exercise grid must be a nonempty subset of 0..T")
        return grid
    raise ParamError("price_american needs an American or Bermudan payoff")


def price_american(q, verify=True):
    """Superhedging price over generalized strategies on the exercise grid."""
    thetas = exercise_grid(q)
    _check_payoff_floor(q, thetas)
    report = _solve_pair(q, q.model, thetas, _exercise_phi(q.model, q.payoff))
    if verify and report.pricing_system is not None:
        report.verification = verify_pricing_system(q.model, q.seq, report.pricing_system, q.cone, q.tolerance)
    return report


def recheck(q, report):
    """Independent superhedge and admissibility check of a report's primal (wealth sums only)."""
    model = q.model
    if q.payoff.kind == "european" and q.horizon not in (None, model.T):
        model = truncate(model, q.horizon)
    seq = q.seq if model is q.model else LocalizingSequence.trivial(model)
    z, x, H = report.price, q.x, report.strategy
    problems = []
    adm = check_admissible(model, H, x + z, q.cone)
    if not adm:
        problems.append(("admissibility", adm.node, adm.reason))
    if q.payoff.kind == "european":
        thetas = (model.T,)
        phi = _exercise_phi(model, q.payoff, q.payoff.maturity)
    else:
        thetas = report.theta
        phi = _exercise_phi(model, q.payoff)
    tol = q.tolerance
    for th in thetas:
        w = wealth(model, H, th, z)
        for tau in seq.times:
            for s in tau.stop_set:
                need = phi(th, s) if not model.children[s] else -x
                if w[s] < need - tol:
                    problems.append(("superhedge", s, f"theta={th}: {w[s]} < {need}"))
    return problems
