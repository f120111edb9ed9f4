"""Arbitrage checks, pricing-system LPs and their independent verification."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lp
from ._rational import fmt
from .errors import DimensionError, InvariantError, ParamError, UnsupportedCone
from .market_tree import Cone, LocalizingSequence, node_expectations, stopped_prices
from .strategy import GeneralizedStrategy, wealth

log = logging.getLogger(__name__)

NUPBR_NOTE = (
    "finite stopped trees carry bounded wealth sets, so NUPBR holds automatically "
    "and NFLVR coincides with NA; only NA is computed"
)


# --------------------------------------------------------------------------
# ray bookkeeping


def ray_rows(cone):
    """Rays grouped for constraint emission: (u, '=') for +/- pairs, (u, '<=') otherwise."""
    rays = list(cone.generating_rays)
    out, used = [], set()
    for i, u in enumerate(rays):
        if i in used:
            continue
        neg = tuple(-a for a in u)
        j = next((j for j in range(i + 1, len(rays)) if j not in used and rays[j] == neg), None)
        if j is not None:
            used.add(j)
            out.append((u, "="))
        else:
            out.append((u, "<="))
    return out


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _diff(a, b):
    return tuple(x - y for x, y in zip(a, b))


# --------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    condition: str
    holds: bool
    witness: Optional[object] = None
    certificate: Optional[object] = None
    per_k: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    experimental: bool = False
    epsilon: object = None

    def to_json(self):
        out = {"condition": self.condition, "holds": self.holds, "per_k": [v.to_json() for v in self.per_k]}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.certificate is not None:
            cert = self.certificate
            out["certificate"] = cert.to_json() if hasattr(cert, "to_json") else {
                "state_prices": {k: fmt(v) for k, v in sorted(cert.items())}
            }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.experimental:
            out["experimental"] = True
        if self.epsilon is not None:
            out["epsilon"] = fmt(self.epsilon)
        return out


def _martingale_rows(model, cone, leaf_var):
    """Rows sum_c u.(S(c)-S(v)) * Q(c) (<= or =) 0 with Q(c) the leaf-weight mass below c."""
    below = model.subtree_leaves
    rows = []
    for v in model.nonterminal:
        sv = model.prices(v)
        for r, (u, sense) in enumerate(ray_rows(cone)):
            coeffs = {}
            for c in model.children[v]:
                a = _dot(u, _diff(model.prices(c), sv))
                if a != 0:
                    for leaf in below[c]:
                        coeffs[leaf_var[leaf]] = coeffs.get(leaf_var[leaf], 0) + a
            if coeffs:
                rows.append((f"mart[{v},{r}]", coeffs, sense, (v, u)))
    return rows


def _strategy_from_row_weights(model, weights):
    """Positions h(v) = sum over rows at v of weight * u."""
    pre = {}
    for (v, u), w in weights.items():
        if w == 0:
            continue
        h = pre.get(v, tuple(Fraction(0) for _ in range(model.d)))
        pre[v] = tuple(a + w * b for a, b in zip(h, u))
    return GeneralizedStrategy(model.d, pre)


def terminal_wealth(model, H):
    w = wealth(model, H)
    return {leaf: w[leaf] for leaf in model.leaves}


def is_arbitrage(model, H, cone):
    """Cone positions, terminal wealth >= 0 everywhere and > 0 somewhere."""
    if any(not cone.contains(h) for h in H.pre.values()):
        return False
    w = terminal_wealth(model, H)
    return all(x >= 0 for x in w.values()) and any(x > 0 for x in w.values())


def dual_witness(model, cone, mode="exact"):
    """Arbitrage strategy rebuilt from the multipliers of the state-price LP.

    Returns None when the model admits strictly positive state prices.
    """
    sol, rows, _ = _epsilon_lp(model, cone, mode)
    if sol.status == "optimal":
        if sol.objective > 0:
            return None
        weights = {meta: sol.y[i] for i, meta in rows}
    else:
        # Farkas ray: y <= 0 on the martingale rows, so -y is a conic weight
        weights = {meta: -sol.certificate["farkas"][i] for i, meta in rows}
    return _strategy_from_row_weights(model, weights)


def _epsilon_lp(model, cone, mode):
    prob = lp.LPProblem("max")
    leaf_var = {leaf: prob.add_var(f"q[{leaf}]") for leaf in model.leaves}
    eps = prob.add_var("eps", lb=None, obj=1)
    prob.add_row("sum", {j: 1 for j in leaf_var.values()}, "=", 1)
    meta_rows = []
    for name, coeffs, sense, meta in _martingale_rows(model, cone, leaf_var):
        meta_rows.append((prob.add_row(name, coeffs, sense, 0), meta))
    for leaf, j in leaf_var.items():
        prob.add_row(f"pos[{leaf}]", {j: 1, eps: -1}, ">=", 0)
    sol = lp.solve(prob, mode)
    return sol, meta_rows, leaf_var


def canonical_witness(model, cone, mode="exact"):
    """Arbitrage maximizing E[terminal wealth] over positions in [-1, 1]^d, or None."""
    prob = lp.LPProblem("max")
    hv = {}
    for v in model.nonterminal:
        for i in range(model.d):
            lo = 0 if (cone.variant == "no_short" and i < cone.n) else -1
            hv[v, i] = prob.add_var(f"h[{v},{i}]", lb=lo, ub=1)
    if cone.variant == "polyhedral":
        for v in model.nonterminal:
            for r, row in enumerate(cone.rows):
                prob.add_row(f"cone[{v},{r}]", {hv[v, i]: a for i, a in enumerate(row)}, ">=", 0)
    obj = {}
    for leaf, path in model.paths.items():
        coeffs = {}
        for v, c in zip(path, path[1:]):
            for i, dlt in enumerate(_diff(model.prices(c), model.prices(v))):
                if dlt != 0:
                    coeffs[hv[v, i]] = coeffs.get(hv[v, i], 0) + dlt
        prob.add_row(f"w[{leaf}]", coeffs, ">=", 0)
        for j, a in coeffs.items():
            obj[j] = obj.get(j, 0) + model.atom_prob[leaf] * a
    prob.set_objective(obj)
    sol = lp.solve(prob, mode)
    if not sol.optimal or sol.objective <= 0:
        return None
    pre = {}
    for v in model.nonterminal:
        h = tuple(sol.x[hv[v, i]] for i in range(model.d))
        if any(a != 0 for a in h):
            pre[v] = h
    return GeneralizedStrategy(model.d, pre)


def check_na(model, cone=None, mode="exact", allow_experimental=False):
    """NA under the cone via max eps s.t. state prices q >= eps make S a (super)martingale."""
    cone = cone or Cone.unconstrained(model.d)
    if cone.d != model.d:
        raise DimensionError("cone dimension differs from model dimension")
    if cone.variant == "polyhedral" and not allow_experimental:
        raise UnsupportedCone("polyhedral cones are only supported with allow_experimental")
    sol, _, leaf_var = _epsilon_lp(model, cone, mode)
    notes = [NUPBR_NOTE]
    experimental = cone.variant == "polyhedral"
    if sol.optimal and sol.objective > 0:
        q = {leaf: sol.x[j] for leaf, j in leaf_var.items()}
        return Verdict("NA", True, certificate=q, notes=notes, experimental=experimental, epsilon=sol.objective)
    witness = canonical_witness(model, cone, mode)
    eps = sol.objective if sol.optimal else None
    if witness is None and not experimental:
        raise InvariantError("state-price LP reports arbitrage but no witness was found")
    return Verdict("NA", False, witness=witness, notes=notes, experimental=experimental, epsilon=eps)


def verify_state_prices(model, q, cone, tol=0):
    """Violations of positivity, normalization and the (super)martingale property of S under q."""
    viol = []
    if any(q[leaf] <= 0 for leaf in model.leaves):
        viol.append(("positivity", None, None))
    total = sum(q[leaf] for leaf in model.leaves)
    if abs(total - 1) > tol:
        viol.append(("normalization", None, total - 1))
    mass = node_expectations(model, {leaf: q[leaf] / model.atom_prob[leaf] for leaf in model.leaves})
    for v in model.nonterminal:
        sv = model.prices(v)
        for u in cone.generating_rays:
            val = sum(
                model.atom_prob[c] * mass[c] * _dot(u, _diff(model.prices(c), sv)) for c in model.children[v]
            )
            if val > tol:
                viol.append(("martingale", v, u))
    return viol


def check_local_na(model, seq, cone=None, mode="exact", allow_experimental=False):
    """NA for every stopped market S^{T_k}; holds iff all k hold."""
    seq.validate(model)
    per_k = []
    for tau in seq.times:
        v = check_na(stopped_prices(model, tau), cone, mode, allow_experimental)
        v.condition = "NA"
        per_k.append(v)
    holds = all(v.holds for v in per_k)
    out = Verdict("local-NA", holds, per_k=per_k, notes=[NUPBR_NOTE])
    out.experimental = any(v.experimental for v in per_k)
    if holds:
        out.certificate = _PerK([v.certificate for v in per_k])
    else:
        first = next(v for v in per_k if not v.holds)
        out.witness = first.witness
    return out


class _PerK(list):
    def to_json(self):
        return {"state_prices": [{leaf: fmt(q) for leaf, q in sorted(c.items())} for c in self]}


# --------------------------------------------------------------------------
# pricing systems


@dataclass(frozen=True)
class PricingSystem:
    """Terminal densities Z^{k,theta} per leaf for (k, theta) in D x Gamma."""

    D: tuple
    Gamma: tuple
    densities: dict  # (k, theta) -> {leaf: value}

    @property
    def index_set(self):
        return tuple((k, th) for k in self.D for th in self.Gamma)

    def mass(self, model, pair):
        z = self.densities[pair]
        return sum(model.atom_prob[leaf] * z[leaf] for leaf in model.leaves)

    def state_prices(self, model, pair):
        """Atom weights P(w) Z(w) for one index pair."""
        z = self.densities[pair]
        return {leaf: model.atom_prob[leaf] * z[leaf] for leaf in model.leaves}

    def total_mass(self, model):
        return sum(self.mass(model, p) for p in self.index_set)

    def scaled(self, c):
        return PricingSystem(
            self.D, self.Gamma, {p: {leaf: c * v for leaf, v in z.items()} for p, z in self.densities.items()}
        )

    def normalized(self, model):
        return self.scaled(1 / self.total_mass(model))

    def to_json(self):
        return {
            "D": list(self.D),
            "Gamma": list(self.Gamma),
            "densities": {
                f"{k},{th}": {leaf: fmt(v) for leaf, v in sorted(z.items())}
                for (k, th), z in sorted(self.densities.items())
            },
        }


def _check_index(model, seq, D, Gamma, require_T=True):
    D = tuple(sorted(set(D)))
    Gamma = tuple(sorted(set(Gamma)))
    if not D or any(not (1 <= k <= len(seq.times)) for k in D):
        raise ParamError("D must be a nonempty subset of 1..K")
    if not Gamma or any(not (0 <= t <= model.T) for t in Gamma):
        raise ParamError("Gamma must be a nonempty subset of the time grid")
    if require_T and model.T not in Gamma:
        raise ParamError("Gamma must contain the horizon T")
    return D, Gamma


class PricingLP:
    """Masses mu^{k,theta}(s) >= 0 on the stop nodes s of T_k, with Z = mu / P(s).

    The rows are the node-wise forms of the pre-exercise window condition and
    the post-exercise condition, projected on every generating ray of the cone.
    The same matrix, transposed, is the superhedging LP without admissibility
    rows, so the two are an LP primal/dual pair.
    """

    def __init__(self, model, seq, D, Gamma, cone, sense="max", require_T=True):
        self.model, self.seq, self.cone = model, seq, cone
        self.D, self.Gamma = _check_index(model, seq, D, Gamma, require_T)
        self.prob = lp.LPProblem(sense)
        self.stops = {}
        self.below = {}
        for k in self.D:
            tau = seq.times[k - 1]
            tau.validate(model)
            S = tau.stop_set
            self.stops[k] = tuple(v for v in model.order if v in S)
            below = {}
            for v in reversed(model.order):
                below[v] = (v,) if v in S else tuple(s for c in model.children[v] for s in below[c])
            self.below[k] = below
        self.var = {}
        for k in self.D:
            for th in self.Gamma:
                for s in self.stops[k]:
                    self.var[k, th, s] = self.prob.add_var(f"mu[{k},{th},{s}]")
        self.prob.add_row("norm", {j: 1 for j in self.var.values()}, "=", 1)
        self._add_conditions()

    def _add_conditions(self):
        model = self.model
        rays = ray_rows(self.cone)
        for v in model.nonterminal:
            t = model.time(v) + 1
            groups = []
            pre = [th for th in self.Gamma if th >= t]
            if pre:
                groups.append(("pre", pre))
            groups += [(f"post{th}", [th]) for th in self.Gamma if th < t]
            sv = model.prices(v)
            for tag, thetas in groups:
                terms = []
                for k in self.D:
                    for c in model.children[v]:
                        dS = _diff(model.prices(c), sv)
                        for s in self.below[k][c]:
                            for th in thetas:
                                terms.append((self.var[k, th, s], dS))
                if not terms:
                    continue
                for r, (u, sense) in enumerate(rays):
                    coeffs = {}
                    for j, dS in terms:
                        a = _dot(u, dS)
                        if a != 0:
                            coeffs[j] = coeffs.get(j, 0) + a
                    if coeffs:
                        self.prob.add_row(f"{tag}[{v},{r}]", coeffs, sense, 0)

    def payoff_objective(self, phi):
        """Objective sum mu * phi(k, theta, s)."""
        self.prob.set_objective({j: phi(k, th, s) for (k, th, s), j in self.var.items()})

    def solve(self, mode="exact"):
        return lp.solve(self.prob, mode)

    def system(self, x):
        dens = {}
        model = self.model
        for k in self.D:
            for th in self.Gamma:
                z = {}
                for s in self.stops[k]:
                    val = x[self.var[k, th, s]] / model.atom_prob[s]
                    for leaf in model.subtree_leaves[s]:
                        z[leaf] = val
                dens[k, th] = z
        return PricingSystem(self.D, self.Gamma, dens)


@dataclass
class FindResult:
    objective: object
    system: Optional[PricingSystem]
    status: str

    @property
    def positive(self):
        return self.system is not None and self.objective > 0


def find_pricing_system(model, seq, D, Gamma, atom, target, cone=None, mode="exact"):
    """Pricing system maximizing E[Z^{k,theta} 1_atom] for ``target`` = (k, theta)."""
    cone = cone or Cone.unconstrained(model.d)
    if atom not in model.leaves:
        raise ParamError(f"unknown atom {atom!r}")
    plp = PricingLP(model, seq, D, Gamma, cone)
    k, th = target
    if k not in plp.D or th not in plp.Gamma:
        raise ParamError("target pair outside D x Gamma")
    s = next(v for v in model.paths[atom] if v in seq.times[k - 1].stop_set)
    plp.prob.set_objective({plp.var[k, th, s]: model.atom_prob[atom] / model.atom_prob[s]})
    sol = plp.solve(mode)
    if not sol.optimal:
        return FindResult(Fraction(0) if mode == "exact" else 0.0, None, sol.status)
    return FindResult(sol.objective, plp.system(sol.x), "optimal")


@dataclass
class VerificationReport:
    ok: bool
    violations: list
    checked: int

    def to_json(self):
        return {
            "ok": self.ok,
            "checked": self.checked,
            "violations": [
                {"ray": [fmt(a) for a in u] if u else None, "window": w, "node": v, "value": fmt(val)}
                for u, w, v, val in self.violations
            ],
        }


def _windows(Gamma):
    anchors = (0, *Gamma) if Gamma[0] != 0 else Gamma
    return list(zip(anchors, anchors[1:]))


def verify_pricing_system(model, seq, Z, cone=None, tol=0):
    """Re-check a pricing system from its terminal densities alone.

    Z_t is the martingale closure E[Z_T | F_t]; every one-step condition is
    evaluated as a conditional expectation at its decision node.
    """
    cone = cone or Cone.unconstrained(model.d)
    D, Gamma = _check_index(model, seq, Z.D, Z.Gamma)
    viol = []
    checked = 0
    for pair in Z.index_set:
        if pair not in Z.densities or set(Z.densities[pair]) != set(model.leaves):
            raise DimensionError(f"density for {pair} must cover every leaf")
    for (k, th), z in Z.densities.items():
        if any(v < -tol for v in z.values()):
            viol.append((None, "nonnegativity", f"{k},{th}", min(z.values())))
        stops = seq.times[k - 1].stop_map(model)
        for leaf, s in stops.items():
            first = model.subtree_leaves[s][0]
            if abs(z[leaf] - z[first]) > tol:
                viol.append((None, "measurability", leaf, z[leaf] - z[first]))
    total = Z.total_mass(model)
    if abs(total - 1) > tol:
        viol.append((None, "normalization", None, total - 1))

    stopped = {k: stopped_prices(model, seq.times[k - 1]) for k in D}
    closure = {p: node_expectations(model, z) for p, z in Z.densities.items()}
    rays = cone.generating_rays

    def step_value(v, pairs, u):
        val = 0
        for k, th in pairs:
            Sk, Zp = stopped[k], closure[k, th]
            val += sum(model.by_id[c].prob * Zp[c] * _dot(u, Sk.prices(c)) for c in model.children[v])
            val -= Zp[v] * _dot(u, Sk.prices(v))
        return val

    for lo, hi in _windows(Gamma):
        pairs = [(k, th) for k in D for th in Gamma if th >= hi]
        for t in range(lo + 1, hi + 1):
            for v in model.layers[t - 1]:
                for u in rays:
                    checked += 1
                    val = step_value(v, pairs, u)
                    if val > tol:
                        viol.append((u, f"({lo},{hi}]", v, val))
    for th in Gamma:
        pairs = [(k, th) for k in D]
        for t in range(th + 1, model.T + 1):
            for v in model.layers[t - 1]:
                for u in rays:
                    checked += 1
                    val = step_value(v, pairs, u)
                    if val > tol:
                        viol.append((u, f"post {th}", v, val))
    return VerificationReport(not viol, viol, checked)


def deflated_value(model, seq, Z, H):
    """E[sum over (k, theta) of Z^{k,theta}_T times the stopped pasted wealth]."""
    if H.d != model.d:
        raise DimensionError("strategy dimension differs from model dimension")
    total = 0
    for (k, th), z in Z.densities.items():
        if not (1 <= k <= len(seq.times)):
            raise DimensionError(f"pricing system index k={k} outside the sequence")
        if set(z) != set(model.leaves):
            raise DimensionError(f"density for {(k, th)} must cover every leaf")
        w = wealth(model, H, th, 0)
        for leaf, s in seq.times[k - 1].stop_map(model).items():
            total += model.atom_prob[leaf] * z[leaf] * w[s]
    return total


def constant_system(model, k, theta=None):
    """Z = 1 on the single pair (k, theta)."""
    theta = model.T if theta is None else theta
    return PricingSystem((k,), (theta,) if theta == model.T else (theta, model.T),
                         _constant_dens(model, k, theta))


def _constant_dens(model, k, theta):
    one = {leaf: Fraction(1) for leaf in model.leaves}
    zero = {leaf: Fraction(0) for leaf in model.leaves}
    out = {(k, theta): one}
    if theta != model.T:
        out[k, model.T] = zero
    return out


def trivial_sequence(model):
    return LocalizingSequence.trivial(model)
