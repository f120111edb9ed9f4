"""Localization sweeps, the ELMD dual value and parameter sensitivities."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace

from .. import lp
from .._rational import fmt, to_fraction
from ..errors import ParamError
from ..market_tree import LocalizingSequence, stopped_prices
from ..viability import PricingLP
from .pricing import price_american, price_european

log = logging.getLogger(__name__)


@dataclass
class SweepReport:
    values: list  # pi_1 .. pi_K
    full: object  # price on the unstopped tree
    duals: list  # ELMD dual value per k (None when no pricing system exists)
    exhaustive: bool
    monotone: bool
    limit_matches: bool

    def to_json(self):
        return {
            "sweep": [fmt(v) for v in self.values],
            "full": fmt(self.full),
            "duals": [fmt(v) for v in self.duals],
            "exhaustive": self.exhaustive,
            "monotone": self.monotone,
            "limit_matches": self.limit_matches,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "pi_k"])
        for k, v in enumerate(self.values, start=1):
            w.writerow([k, fmt(v)])
        return buf.getvalue()


def stopped_query(q, k):
    """The query for the k-th stopped market: prices frozen at T_k, trading halted there."""
    tau = q.seq.times[k - 1]
    model_k = stopped_prices(q.model, tau)
    seq_k = LocalizingSequence((tau,), tau.is_terminal(q.model))
    return replace(q, model=model_k, seq=seq_k)


def _require_european(q):
    if q.payoff.kind != "european":
        raise ParamError("the localization sweep prices European claims")


def elmd_dual_value(q, k):
    """max E[Z (G 1{T_k >= T} - x 1{T_k < T})] over state-price densities of the k-th stopped tree."""
    _require_european(q)
    qk = stopped_query(q, k)
    model = qk.model
    m = q.payoff.maturity
    x = float(q.x) if q.mode == "float" else q.x
    plp = PricingLP(model, qk.seq, (1,), (model.T,), q.cone)
    plp.payoff_objective(
        lambda kk, th, s: q.payoff.values[model.ancestor(s, m)] if not model.children[s] else -x
    )
    sol = lp.solve(plp.prob, q.mode)
    return sol.objective if sol.optimal else None


def localize_sweep(q, with_duals=True):
    """pi_k for every element of the localizing sequence, plus the unstopped price."""
    _require_european(q)
    K = len(q.seq.times)
    values = [price_european(stopped_query(q, k), verify=False).price for k in range(1, K + 1)]
    full = price_european(replace(q, seq=LocalizingSequence.trivial(q.model)), verify=False).price
    duals = [elmd_dual_value(q, k) for k in range(1, K + 1)] if with_duals else []
    tol = q.tolerance
    monotone = all(b >= a - tol for a, b in zip(values, values[1:]))
    limit = abs(values[-1] - full) <= tol if q.seq.exhaustive else None
    if not monotone:
        log.warning("sweep is not monotone: %s", values)
    if limit is False:
        log.warning("exhaustive sweep ends at %s but the unstopped price is %s", values[-1], full)
    return SweepReport(values, full, duals, q.seq.exhaustive, monotone, limit)


def _price(q):
    if q.payoff.kind == "european":
        return price_european(q, verify=False).price
    return price_american(q, verify=False).price


def credit_sensitivity(q, xs):
    """(x, price) pairs for every credit constraint in ``xs``."""
    out = []
    for x in xs:
        x = to_fraction(x)
        if x < -q.payoff.min_value(q.model):
            raise ParamError(f"x = {x} leaves the payoff below -x")
        out.append((x, _price(replace(q, x=x))))
    return out


def sensitivity_csv(pairs):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "pi"])
    for x, v in pairs:
        w.writerow([fmt(x), fmt(v)])
    return buf.getvalue()


def truncation_diagnostic(q, levels=None):
    """Prices of the truncated claims min(Phi, n); constant once n reaches the payoff maximum."""
    top = q.payoff.max_value(q.model)
    if levels is None:
        hi = int(top) + 2
        levels = range(max(0, hi - 4), hi + 1)
    out = []
    for n in levels:
        n = to_fraction(n)
        capped = q.payoff.map_values(lambda v, n=n: min(v, n))
        out.append((n, _price(replace(q, payoff=capped))))
    stable = all(v == out[-1][1] for n, v in out if n >= top)
    return out, stable
