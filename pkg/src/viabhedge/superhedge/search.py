"""Randomized probe for a gap between the unstopped price and the localized prices."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .._rational import fmt
from ..errors import BudgetExhausted, ParamError
from ..market_tree import (
    Cone,
    ModelFile,
    generate_binomial,
    generate_random,
    random_localizing_sequence,
    random_payoff,
    serialize_document,
)
from ..viability import check_local_na
from .pricing import HedgeQuery
from .sweep import localize_sweep


@dataclass(frozen=True)
class SearchParams:
    family: str = "random"  # random | binomial
    periods: tuple = (2, 3)
    max_branch: int = 3
    max_leaves: int = 10
    d: int = 1
    seq_length: int = 2
    xs: tuple = (0, 1)
    arbitrage_rate: float = 0.3


@dataclass
class SearchReport:
    evaluated: int = 0
    admissible: int = 0
    best: Optional[ModelFile] = None
    best_gap: object = None
    best_x: object = None
    best_sweep: object = None
    history: list = field(default_factory=list)

    def to_json(self):
        out = {"evaluated": self.evaluated, "admissible": self.admissible, "best_gap": fmt(self.best_gap)}
        if self.best is not None:
            out["fixture"] = serialize_document(self.best)
            out["x"] = fmt(self.best_x)
            out["sweep"] = self.best_sweep.to_json()
            # P(T_K >= T): a large gap with small reach only reflects early stopping
            out["reach"] = fmt(self.best.localizing.times[-1].reaches_horizon(self.best.model))
        return out


def _candidate(params, rng):
    T = rng.randint(*params.periods)
    if params.family == "binomial":
        up = Fraction(rng.randint(11, 30), 10)
        down = Fraction(rng.randint(3, 9), 10)
        p = Fraction(rng.randint(1, 9), 10)
        model = generate_binomial(rng.randint(1, 10), up, down, p, T)
        seq = random_localizing_sequence(model, rng, params.seq_length, exhaustive=True)
    elif params.family == "random":
        model = generate_random(rng, T, params.max_branch, params.d, params.max_leaves, arbitrage_free=False,
                                arbitrage_rate=params.arbitrage_rate)
        seq = random_localizing_sequence(model, rng, params.seq_length, exhaustive=False)
    else:
        raise ParamError(f"unknown family {params.family!r}")
    payoff = random_payoff(model, rng, "european")
    return model, seq, payoff


def evaluate(model, seq, payoff, x, cone=None):
    """Gap pi_full - max_k pi_k, or None when some stopped market admits arbitrage."""
    cone = cone or Cone.unconstrained(model.d)
    if not check_local_na(model, seq, cone).holds:
        return None, None
    sweep = localize_sweep(HedgeQuery(model, payoff, x, cone, seq), with_duals=False)
    return sweep.full - max(sweep.values), sweep


def search_local_viability_gap(params=None, budget=20, seed=0, target_gap=None):
    """Random search over (model, sequence, claim, x) maximizing the localization gap.

    Only fixtures whose stopped markets all pass the NA check count.  With
    ``target_gap`` set, BudgetExhausted carries the best report when the target
    is not reached.
    """
    params = params or SearchParams()
    rng = random.Random(seed)
    rep = SearchReport()
    for _ in range(budget):
        model, seq, payoff = _candidate(params, rng)
        x = Fraction(rng.choice(params.xs))
        rep.evaluated += 1
        gap, sweep = evaluate(model, seq, payoff, x)
        if gap is None:
            continue
        rep.admissible += 1
        rep.history.append(gap)
        if rep.best_gap is None or gap > rep.best_gap:
            rep.best = ModelFile(model, seq, payoff, Cone.unconstrained(model.d))
            rep.best_gap, rep.best_x, rep.best_sweep = gap, x, sweep
    if target_gap is not None and (rep.best_gap is None or rep.best_gap < target_gap):
        raise BudgetExhausted(rep)
    return rep


def reverify(report):
    """Recompute the best fixture's gap from scratch; returns (gap, all stopped markets NA)."""
    doc = report.best
    na = check_local_na(doc.model, doc.localizing, doc.cone).holds
    gap, _ = evaluate(doc.model, doc.localizing, doc.payoff, report.best_x, doc.cone)
    return gap, na
