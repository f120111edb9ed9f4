"""Finite scenario trees, stopping times, localizing sequences, cones and payoffs.

Everything here is exact: probabilities and prices are ``Fraction`` and all
objects are immutable after construction.  The filtration is the tree itself,
so a random variable is F_t-measurable iff it is constant below each time-t
node.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Optional

from ._rational import fmt, to_fraction
from .errors import (
    CapExceeded,
    DimensionError,
    InvalidStoppingTime,
    InvariantError,
    ParamError,
    SchemaError,
)


# --------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class NodeRecord:
    id: str
    parent: Optional[str]
    t: int
    prob: Fraction
    prices: tuple
    label: Optional[str] = None


@dataclass(frozen=True)
class TreeModel:
    d: int
    T: int
    nodes: tuple
    root: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "root", _validate_tree(self.d, self.T, self.nodes))

    @cached_property
    def by_id(self):
        return {n.id: n for n in self.nodes}

    @cached_property
    def children(self):
        ch = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                ch[n.parent].append(n.id)
        return {k: tuple(v) for k, v in ch.items()}

    @cached_property
    def order(self):
        """Node ids in depth-first order, children in input order."""
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(out)

    @cached_property
    def leaves(self):
        return tuple(v for v in self.order if not self.children[v])

    @cached_property
    def layers(self):
        lay = [[] for _ in range(self.T + 1)]
        for v in self.order:
            lay[self.by_id[v].t].append(v)
        return tuple(tuple(x) for x in lay)

    @cached_property
    def nonterminal(self):
        return tuple(v for v in self.order if self.children[v])

    @cached_property
    def atom_prob(self):
        """Unconditional probability of every node (product of branch probabilities)."""
        p = {self.root: Fraction(1)}
        for v in self.order:
            for c in self.children[v]:
                p[c] = p[v] * self.by_id[c].prob
        return p

    @cached_property
    def paths(self):
        out = {}
        for leaf in self.leaves:
            path, v = [], leaf
            while v is not None:
                path.append(v)
                v = self.by_id[v].parent
            out[leaf] = tuple(reversed(path))
        return out

    @cached_property
    def subtree_leaves(self):
        out = {}
        for v in reversed(self.order):
            ch = self.children[v]
            out[v] = (v,) if not ch else tuple(itertools.chain.from_iterable(out[c] for c in ch))
        return out

    def time(self, v):
        return self.by_id[v].t

    def prices(self, v):
        return self.by_id[v].prices

    def ancestor(self, v, t):
        """The ancestor of ``v`` at time ``t`` (``v`` itself when t equals its time)."""
        node = self.by_id[v]
        if t > node.t:
            raise ValueError(f"time {t} is after node {v!r}")
        while node.t > t:
            node = self.by_id[node.parent]
        return node.id

    def with_prices(self, new_prices):
        return TreeModel(
            self.d,
            self.T,
            [
                NodeRecord(n.id, n.parent, n.t, n.prob, tuple(new_prices[n.id]), n.label)
                for n in self.nodes
            ],
        )


def _validate_tree(d, T, nodes):
    if not isinstance(d, int) or d < 1:
        raise InvariantError("num_assets must be a positive integer")
    if not isinstance(T, int) or T < 1:
        raise InvariantError("num_periods must be a positive integer")
    ids = {}
    roots = []
    for n in nodes:
        if n.id in ids:
            raise InvariantError("duplicate node id", n.id)
        ids[n.id] = n
        if n.parent is None:
            roots.append(n)
        if len(n.prices) != d:
            raise InvariantError("price vector length", n.id, f"expected {d}")
        for p in n.prices:
            if not isinstance(p, Fraction):
                raise InvariantError("prices must be rationals", n.id)
            if p < 0:
                raise InvariantError("negative price", n.id)
        if not isinstance(n.prob, Fraction) or not (0 < n.prob <= 1):
            raise InvariantError("branch probability outside (0,1]", n.id)
    if len(roots) != 1:
        raise InvariantError("tree must have exactly one root", detail=f"found {len(roots)}")
    root = roots[0]
    if root.t != 0:
        raise InvariantError("root must sit at time 0", root.id)
    if root.prob != 1:
        raise InvariantError("root probability must be 1", root.id)
    sums = {}
    for n in nodes:
        if n.parent is None:
            continue
        if n.parent not in ids:
            raise InvariantError("unknown parent", n.id, repr(n.parent))
        if n.t != ids[n.parent].t + 1:
            raise InvariantError("time index must be parent time + 1", n.id)
        if n.t > T:
            raise InvariantError("node after horizon", n.id)
        sums[n.parent] = sums.get(n.parent, Fraction(0)) + n.prob
    for v, s in sums.items():
        if s != 1:
            raise InvariantError("probability sum", v, f"children sum to {s}")
    for n in nodes:
        if n.id not in sums and n.t != T:
            raise InvariantError("leaf before horizon", n.id)
    # reachability (rules out cycles through the parent pointers)
    seen, stack = set(), [root.id]
    kids = {}
    for n in nodes:
        if n.parent is not None:
            kids.setdefault(n.parent, []).append(n.id)
    while stack:
        v = stack.pop()
        seen.add(v)
        stack.extend(kids.get(v, ()))
    if len(seen) != len(ids):
        raise InvariantError("nodes unreachable from root")
    return root.id


# --------------------------------------------------------------------------
# stopping times


@dataclass(frozen=True)
class StoppingTime:
    stop_set: frozenset

    def __post_init__(self):
        object.__setattr__(self, "stop_set", frozenset(self.stop_set))

    @classmethod
    def constant(cls, model, t):
        return cls(frozenset(model.layers[t]))

    @classmethod
    def terminal(cls, model):
        return cls(frozenset(model.leaves))

    def stop_map(self, model):
        """Map every leaf to the stop node on its path."""
        unknown = self.stop_set - model.by_id.keys()
        if unknown:
            raise InvalidStoppingTime("unknown node", sorted(unknown)[0])
        out = {}
        for leaf, path in model.paths.items():
            hits = [v for v in path if v in self.stop_set]
            if len(hits) != 1:
                raise InvalidStoppingTime(
                    "not an antichain cover", leaf, f"{len(hits)} stop nodes on path"
                )
            out[leaf] = hits[0]
        return out

    def validate(self, model):
        self.stop_map(model)
        return self

    def times(self, model):
        """Stopping time value per leaf."""
        return {leaf: model.time(s) for leaf, s in self.stop_map(model).items()}

    def reaches_horizon(self, model):
        """P(tau >= T)."""
        return sum(
            (model.atom_prob[s] for s in self.stop_set if model.time(s) == model.T),
            Fraction(0),
        )

    def is_terminal(self, model):
        return self.stop_set == frozenset(model.leaves)

    def sorted_ids(self):
        return tuple(sorted(self.stop_set))


@dataclass(frozen=True)
class LocalizingSequence:
    times: tuple
    exhaustive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(self.times))

    @classmethod
    def trivial(cls, model):
        return cls((StoppingTime.terminal(model),), True)

    def __len__(self):
        return len(self.times)

    def validate(self, model):
        if not self.times:
            raise InvariantError("localizing sequence is empty")
        prev = None
        for k, tau in enumerate(self.times, start=1):
            cur = tau.times(model)
            if prev is not None:
                for leaf in model.leaves:
                    if cur[leaf] < prev[leaf]:
                        raise InvariantError(
                            "localizing sequence not pathwise nondecreasing", leaf, f"k={k}"
                        )
            prev = cur
        if self.exhaustive and not self.times[-1].is_terminal(model):
            raise InvariantError("sequence flagged exhaustive but last element is not T")
        return self


# --------------------------------------------------------------------------
# cones


def _nullspace(rows, d):
    """Basis of {h : rows . h = 0} over the rationals."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(d):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * d
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f]
        basis.append(tuple(v))
    return basis


def _normalize_ray(v):
    g = max(abs(x) for x in v)
    return tuple(x / g for x in v)


@dataclass(frozen=True)
class Cone:
    """Closed convex polyhedral trading cone in R^d.

    ``variant`` is ``"unconstrained"``, ``"no_short"`` (first ``n`` coordinates
    nonnegative) or ``"polyhedral"`` (``rows . h >= 0``).
    """

    d: int
    variant: str = "unconstrained"
    n: int = 0
    rows: tuple = ()

    def __post_init__(self):
        if self.variant not in ("unconstrained", "no_short", "polyhedral"):
            raise ParamError(f"unknown cone variant {self.variant!r}")
        if self.variant == "no_short" and not (1 <= self.n <= self.d):
            raise ParamError(f"no-short count must be in 1..{self.d}")
        if self.variant == "polyhedral":
            rows = tuple(tuple(to_fraction(a) for a in r) for r in self.rows)
            if any(len(r) != self.d for r in rows):
                raise DimensionError("polyhedral row length must equal d")
            object.__setattr__(self, "rows", rows)

    @classmethod
    def unconstrained(cls, d):
        return cls(d)

    @classmethod
    def no_short(cls, d, n):
        return cls(d, "no_short", n)

    @classmethod
    def polyhedral(cls, rows):
        rows = tuple(tuple(r) for r in rows)
        if not rows:
            raise ParamError("polyhedral cone needs at least one row")
        return cls(len(rows[0]), "polyhedral", 0, rows)

    def label(self):
        if self.variant == "no_short":
            return f"no-short:{self.n}"
        return self.variant

    def free_coords(self):
        if self.variant == "unconstrained":
            return tuple(range(self.d))
        if self.variant == "no_short":
            return tuple(range(self.n, self.d))
        return ()

    def contains(self, h):
        h = tuple(h)
        if self.variant == "unconstrained":
            return True
        if self.variant == "no_short":
            return all(h[i] >= 0 for i in range(self.n))
        return all(sum(a * x for a, x in zip(r, h)) >= 0 for r in self.rows)

    @cached_property
    def generating_rays(self):
        one, zero = Fraction(1), Fraction(0)

        def e(i, s=one):
            return tuple(s if j == i else zero for j in range(self.d))

        if self.variant == "unconstrained":
            return tuple(r for i in range(self.d) for r in (e(i), e(i, -one)))
        if self.variant == "no_short":
            rays = [e(i) for i in range(self.n)]
            rays += [r for j in range(self.n, self.d) for r in (e(j), e(j, -one))]
            return tuple(rays)
        return self._polyhedral_rays()

    def _polyhedral_rays(self):
        A = [list(r) for r in self.rows]
        lin = _nullspace(A, self.d)
        rays = []
        for b in lin:
            rays += [_normalize_ray(b), _normalize_ray(tuple(-x for x in b))]
        r = self.d - len(lin)
        if r == 0:
            return tuple(rays)
        found = []
        for subset in itertools.combinations(range(len(A)), r - 1):
            ns = _nullspace([A[i] for i in subset] + [list(b) for b in lin], self.d)
            if len(ns) != 1:
                continue
            for s in (1, -1):
                v = tuple(s * x for x in ns[0])
                if all(sum(a * x for a, x in zip(row, v)) >= 0 for row in A):
                    v = _normalize_ray(v)
                    if v not in found:
                        found.append(v)
        return tuple(rays + found)

    def to_json(self):
        if self.variant == "unconstrained":
            return "unconstrained"
        if self.variant == "no_short":
            return {"no_short": self.n}
        return {"polyhedral": [[fmt(a) for a in r] for r in self.rows]}


def parse_cone(spec, d):
    """Cone from its JSON form or a CLI string (``no-short:1``)."""
    if isinstance(spec, Cone):
        return spec
    if spec is None or spec == "unconstrained":
        return Cone.unconstrained(d)
    if isinstance(spec, str):
        if spec.startswith(("no-short:", "no_short:")):
            return Cone.no_short(d, int(spec.split(":", 1)[1]))
        raise SchemaError(f"unknown cone {spec!r}")
    if isinstance(spec, dict) and "no_short" in spec:
        return Cone.no_short(d, int(spec["no_short"]))
    if isinstance(spec, dict) and "polyhedral" in spec:
        cone = Cone.polyhedral([[to_fraction(a) for a in r] for r in spec["polyhedral"]])
        if cone.d != d:
            raise DimensionError("polyhedral cone dimension differs from model")
        return cone
    raise SchemaError(f"unknown cone {spec!r}")


# --------------------------------------------------------------------------
# payoffs


@dataclass(frozen=True)
class Payoff:
    """Claim values per node.

    European: values at the maturity layer.  American: values at every node.
    Bermudan: values at the nodes of the listed exercise times.
    """

    kind: str
    values: Mapping
    maturity: Optional[int] = None
    exercise_dates: tuple = ()

    def __post_init__(self):
        if self.kind not in ("european", "american", "bermudan"):
            raise SchemaError(f"unknown payoff kind {self.kind!r}")
        object.__setattr__(
            self, "values", MappingProxyType({str(k): to_fraction(v) for k, v in self.values.items()})
        )
        object.__setattr__(self, "exercise_dates", tuple(sorted(set(self.exercise_dates))))

    @classmethod
    def european(cls, model, fn, maturity=None):
        """European claim ``fn(prices)`` at ``maturity`` (default T)."""
        m = model.T if maturity is None else maturity
        return cls("european", {v: fn(model.prices(v)) for v in model.layers[m]}, m)

    @classmethod
    def american(cls, model, fn):
        return cls("american", {v: fn(model.prices(v)) for v in model.order})

    def exercise_times(self, model):
        if self.kind == "european":
            return (self.maturity,)
        if self.kind == "american":
            return tuple(range(model.T + 1))
        return self.exercise_dates

    def validate(self, model):
        if self.kind == "european":
            if self.maturity is None or not (0 <= self.maturity <= model.T):
                raise InvariantError("European maturity outside the time grid")
        if self.kind == "bermudan":
            if not self.exercise_dates:
                raise InvariantError("Bermudan payoff needs exercise_times")
            if any(not (0 <= t <= model.T) for t in self.exercise_dates):
                raise InvariantError("Bermudan exercise time outside the time grid")
        for t in self.exercise_times(model):
            for v in model.layers[t]:
                if v not in self.values:
                    raise InvariantError("payoff value missing", v)
        unknown = set(self.values) - model.by_id.keys()
        if unknown:
            raise InvariantError("payoff value for unknown node", sorted(unknown)[0])
        return self

    def at(self, model, theta, leaf):
        """Payoff for exercise at time ``theta`` on the path of ``leaf``."""
        return self.values[model.ancestor(leaf, theta)]

    def min_value(self, model):
        return min(self.values[v] for t in self.exercise_times(model) for v in model.layers[t])

    def max_value(self, model):
        return max(self.values[v] for t in self.exercise_times(model) for v in model.layers[t])

    def map_values(self, fn):
        return Payoff(self.kind, {k: fn(v) for k, v in self.values.items()}, self.maturity, self.exercise_dates)

    def to_json(self):
        out = {"kind": self.kind, "values": {k: fmt(v) for k, v in sorted(self.values.items())}}
        if self.maturity is not None:
            out["maturity"] = self.maturity
        if self.exercise_dates:
            out["exercise_times"] = list(self.exercise_dates)
        return out


# --------------------------------------------------------------------------
# documents


@dataclass(frozen=True)
class ModelFile:
    model: TreeModel
    localizing: Optional[LocalizingSequence] = None
    payoff: Optional[Payoff] = None
    cone: Optional[Cone] = None


def _req(obj, key, types, where):
    if key not in obj:
        raise SchemaError(f"missing field {key!r} in {where}")
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise SchemaError(f"field {key!r} in {where} has type {type(val).__name__}")
    return val


def _rational(val, where):
    if isinstance(val, bool) or not isinstance(val, (str, int, float)):
        raise SchemaError(f"{where}: expected a rational, got {val!r}")
    try:
        return to_fraction(val)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _load(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("model document must be a JSON object")
    return data


def parse_model(data):
    """Parse and validate the tree part of a model document (bytes, str or dict)."""
    data = _load(data)
    d = _req(data, "d", int, "document")
    T = _req(data, "T", int, "document")
    raw = _req(data, "nodes", list, "document")
    nodes = []
    for i, rec in enumerate(raw):
        where = f"nodes[{i}]"
        if not isinstance(rec, dict):
            raise SchemaError(f"{where} must be an object")
        nid = rec.get("id")
        if not isinstance(nid, (str, int)) or isinstance(nid, bool):
            raise SchemaError(f"{where}: missing or invalid id")
        parent = rec.get("parent")
        if parent is not None and (not isinstance(parent, (str, int)) or isinstance(parent, bool)):
            raise SchemaError(f"{where}: invalid parent")
        t = _req(rec, "t", int, where)
        prob = _rational(rec.get("prob", "1"), f"{where}.prob")
        prices = _req(rec, "prices", list, where)
        label = rec.get("label")
        if label is not None and not isinstance(label, str):
            raise SchemaError(f"{where}: label must be a string")
        nodes.append(
            NodeRecord(
                str(nid),
                None if parent is None else str(parent),
                t,
                prob,
                tuple(_rational(p, f"{where}.prices") for p in prices),
                label,
            )
        )
    return TreeModel(d, T, nodes)


def parse_document(data):
    """Parse a full model file: tree plus optional localizing/payoff/cone blocks."""
    data = _load(data)
    model = parse_model(data)
    seq = None
    if data.get("localizing") is not None:
        loc = data["localizing"]
        exhaustive = False
        if isinstance(loc, dict):
            exhaustive = bool(loc.get("exhaustive", False))
            loc = _req(loc, "times", list, "localizing")
        if not isinstance(loc, list) or not all(isinstance(x, list) for x in loc):
            raise SchemaError("localizing must be an array of node-id arrays")
        seq = LocalizingSequence(
            tuple(StoppingTime(frozenset(str(v) for v in x)) for x in loc), exhaustive
        ).validate(model)
    payoff = None
    if data.get("payoff") is not None:
        pd = data["payoff"]
        if not isinstance(pd, dict):
            raise SchemaError("payoff must be an object")
        kind = _req(pd, "kind", str, "payoff")
        vals = _req(pd, "values", dict, "payoff")
        payoff = Payoff(
            kind,
            {str(k): _rational(v, f"payoff.values[{k}]") for k, v in vals.items()},
            pd.get("maturity", model.T if kind == "european" else None),
            tuple(pd.get("exercise_times", ())),
        ).validate(model)
    cone = parse_cone(data["cone"], model.d) if data.get("cone") is not None else None
    return ModelFile(model, seq, payoff, cone)


def serialize_model(model):
    return {
        "d": model.d,
        "T": model.T,
        "nodes": [
            {
                "id": n.id,
                "parent": n.parent,
                "t": n.t,
                "prob": fmt(n.prob),
                "prices": [fmt(p) for p in n.prices],
                **({"label": n.label} if n.label is not None else {}),
            }
            for n in model.nodes
        ],
    }


def serialize_document(doc):
    out = serialize_model(doc.model)
    if doc.localizing is not None:
        out["localizing"] = {
            "times": [list(t.sorted_ids()) for t in doc.localizing.times],
            "exhaustive": doc.localizing.exhaustive,
        }
    if doc.payoff is not None:
        out["payoff"] = doc.payoff.to_json()
    if doc.cone is not None:
        out["cone"] = doc.cone.to_json()
    return out


# --------------------------------------------------------------------------
# operations


def stopped_prices(model, tau):
    """Prices frozen below each stop node of ``tau``."""
    stops = tau.stop_map(model)
    frozen = {}
    for leaf, s in stops.items():
        path = model.paths[leaf]
        i = path.index(s)
        for v in path[:i + 1]:
            frozen[v] = model.prices(v)
        for v in path[i + 1:]:
            frozen[v] = model.prices(s)
    return model.with_prices(frozen)


def truncate(model, horizon):
    """The tree cut at ``horizon`` (trading stops there)."""
    if not (1 <= horizon <= model.T):
        raise ParamError("horizon must lie in 1..T")
    if horizon == model.T:
        return model
    return TreeModel(model.d, horizon, [n for n in model.nodes if n.t <= horizon])


def condexp(model, leaf_values, t):
    """E[X | F_t] as a value per time-t node, by backward weighted averaging."""
    if not isinstance(leaf_values, Mapping):
        leaf_values = list(leaf_values)
        if len(leaf_values) != len(model.leaves):
            raise DimensionError(f"expected {len(model.leaves)} leaf values, got {len(leaf_values)}")
        leaf_values = dict(zip(model.leaves, leaf_values))
    if set(leaf_values) != set(model.leaves):
        raise DimensionError("leaf values must cover exactly the leaves")
    if not (0 <= t <= model.T):
        raise DimensionError("time index outside 0..T")
    vals = dict(leaf_values)
    for s in range(model.T - 1, t - 1, -1):
        for v in model.layers[s]:
            vals[v] = sum(model.by_id[c].prob * vals[c] for c in model.children[v])
    return {v: vals[v] for v in model.layers[t]}


def node_expectations(model, leaf_values):
    """E[X | F_t] at every node at once (the martingale closure of X)."""
    vals = dict(leaf_values)
    for v in reversed(model.order):
        ch = model.children[v]
        if ch:
            vals[v] = sum(model.by_id[c].prob * vals[c] for c in ch)
    return vals


def count_stopping_times(model):
    n = {}
    for v in reversed(model.order):
        ch = model.children[v]
        n[v] = 1 if not ch else 1 + math.prod(n[c] for c in ch)
    return n[model.root]


def enumerate_stopping_times(model, cap):
    """All antichain covers of the tree, sorted by their sorted id tuples."""
    count = count_stopping_times(model)
    if count > cap:
        raise CapExceeded(count, cap)
    opts = {}
    for v in reversed(model.order):
        ch = model.children[v]
        mine = [frozenset((v,))]
        if ch:
            for combo in itertools.product(*(opts[c] for c in ch)):
                mine.append(frozenset().union(*combo))
        opts[v] = mine
    out = [StoppingTime(s) for s in opts[model.root]]
    out.sort(key=StoppingTime.sorted_ids)
    return out


# --------------------------------------------------------------------------
# generators


def _vec(x):
    if isinstance(x, (list, tuple)):
        return tuple(to_fraction(a) for a in x)
    return (to_fraction(x),)


def generate_binomial(S0, up, down, p, periods):
    """Binomial tree with non-recombining node set; node ids spell the path."""
    S0 = _vec(S0)
    up, down, p = to_fraction(up), to_fraction(down), to_fraction(p)
    if len(S0) != 1:
        raise ParamError("binomial generator is one-dimensional")
    if up <= 1:
        raise ParamError("up factor must exceed 1")
    if not (0 < down < 1):
        raise ParamError("down factor must lie in (0,1)")
    if not (0 < p < 1):
        raise ParamError("probability must lie in (0,1)")
    if not isinstance(periods, int) or periods < 1:
        raise ParamError("periods must be a positive integer")
    nodes = [NodeRecord("r", None, 0, Fraction(1), S0)]
    frontier = [("r", S0[0])]
    for t in range(1, periods + 1):
        nxt = []
        for nid, s in frontier:
            for tag, f, q in (("u", up, p), ("d", down, 1 - p)):
                cid = nid + tag
                nodes.append(NodeRecord(cid, nid, t, q, (s * f,)))
                nxt.append((cid, s * f))
        frontier = nxt
    return TreeModel(1, periods, nodes)


def generate_arbitrage_demo():
    """Single path with prices 1, 2, 3: buy-and-hold is an arbitrage."""
    one = Fraction(1)
    return TreeModel(
        1,
        2,
        [
            NodeRecord("n0", None, 0, one, (Fraction(1),)),
            NodeRecord("n1", "n0", 1, one, (Fraction(2),)),
            NodeRecord("n2", "n1", 2, one, (Fraction(3),)),
        ],
    )


def generate_random(rng=None, periods=3, max_branch=3, d=1, max_leaves=12,
                    arbitrage_free=True, s0=10, arbitrage_rate=1.0):
    """Random tree with small-denominator rational data.

    With ``arbitrage_free`` every one-step market is a martingale under a
    strictly positive measure built alongside the prices, so the model
    satisfies NA for every cone.  Otherwise each node, with probability
    ``arbitrage_rate``, gets independently perturbed child prices, which
    often open a one-step arbitrage there.
    """
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    nodes = [NodeRecord("r", None, 0, Fraction(1), tuple(Fraction(s0) for _ in range(d)))]
    frontier = [nodes[0]]
    for t in range(1, periods + 1):
        nxt = []
        budget = max_leaves
        for i, par in enumerate(frontier):
            # keep the final layer within max_leaves
            remaining = len(frontier) - i - 1
            hi = max(1, min(max_branch, budget - remaining))
            m = rng.randint(1, hi)
            budget -= m
            af = arbitrage_free or rng.random() >= arbitrage_rate
            for j, (prob, price) in enumerate(_random_children(rng, par.prices, m, af)):
                nid = f"{par.id}{j}"
                rec = NodeRecord(nid, par.id, t, prob, price)
                nodes.append(rec)
                nxt.append(rec)
        frontier = nxt
    return TreeModel(d, periods, nodes)


def _random_children(rng, parent, m, arbitrage_free):
    weights = [rng.randint(1, 3) for _ in range(m)]
    total = sum(weights)
    probs = [Fraction(w, total) for w in weights]
    if m == 1:
        if arbitrage_free:
            return [(Fraction(1), parent)]
        return [(Fraction(1), tuple(max(Fraction(0), s + rng.randint(-1, 1)) for s in parent))]
    d = len(parent)
    moves = []
    if arbitrage_free:
        q = [Fraction(rng.randint(1, 3)) for _ in range(m)]
        for _ in range(d):
            dev = [Fraction(rng.randint(-2, 2)) for _ in range(m - 1)]
            dev.append(-sum(a * b for a, b in zip(q, dev)) / q[-1])
            moves.append(dev)
    else:
        moves = [[Fraction(rng.randint(-2, 2), rng.choice((1, 2))) for _ in range(m)] for _ in range(d)]
    for _ in range(64):
        kids = [tuple(parent[i] + moves[i][j] for i in range(d)) for j in range(m)]
        if all(x >= 0 for kid in kids for x in kid):
            return list(zip(probs, kids))
        moves = [[x / 2 for x in row] for row in moves]
    # a zero parent price cannot move both ways; freeze that coordinate
    kids = [tuple(parent[i] if parent[i] == 0 else parent[i] + moves[i][j] for i in range(d)) for j in range(m)]
    return list(zip(probs, kids))


def random_stopping_time(model, rng, after=None, stop_prob=0.5):
    """Random stopping time, pathwise >= ``after`` when given."""
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    out = set()

    def descend(v):
        if not model.children[v] or rng.random() < stop_prob:
            out.add(v)
        else:
            for c in model.children[v]:
                descend(c)

    starts = sorted(after.stop_set) if after is not None else [model.root]
    for s in starts:
        descend(s)
    return StoppingTime(frozenset(out))


def random_localizing_sequence(model, rng, length=3, exhaustive=None, stop_prob=0.5):
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    if exhaustive is None:
        exhaustive = rng.random() < 0.5
    times = []
    prev = None
    for k in range(length):
        if exhaustive and k == length - 1:
            tau = StoppingTime.terminal(model)
        else:
            tau = random_stopping_time(model, rng, prev, stop_prob)
        times.append(tau)
        prev = tau
    return LocalizingSequence(tuple(times), exhaustive or times[-1].is_terminal(model))


def random_payoff(model, rng, kind="american", low=0, high=6, maturity=None):
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)

    def draw():
        return Fraction(rng.randint(low * 2, high * 2), 2)

    if kind == "european":
        m = model.T if maturity is None else maturity
        return Payoff("european", {v: draw() for v in model.layers[m]}, m)
    if kind == "american":
        return Payoff("american", {v: draw() for v in model.order})
    times = sorted(rng.sample(range(model.T + 1), rng.randint(1, model.T + 1)))
    return Payoff("bermudan", {v: draw() for t in times for v in model.layers[t]}, None, tuple(times))


def put_fixture():
    """Two-period binomial S0=4, u=2, d=1/2 with an American put struck at 6."""
    model = generate_binomial(4, 2, Fraction(1, 2), Fraction(1, 2), 2)
    payoff = Payoff.american(model, lambda s: max(Fraction(6) - s[0], Fraction(0)))
    return ModelFile(model, None, payoff, Cone.unconstrained(1))


def drift_fixture():
    """One binomial step 1 -> {2, 1/2}, then a deterministic +1 drift; call struck at 1 maturing at time 1.

    The drift after maturity is an arbitrage the seller may exploit.
    """
    half, one = Fraction(1, 2), Fraction(1)
    model = TreeModel(
        1,
        2,
        [
            NodeRecord("r", None, 0, one, (one,)),
            NodeRecord("ru", "r", 1, half, (Fraction(2),)),
            NodeRecord("rd", "r", 1, half, (half,)),
            NodeRecord("ru+", "ru", 2, one, (Fraction(3),)),
            NodeRecord("rd+", "rd", 2, one, (Fraction(3, 2),)),
        ],
    )
    payoff = Payoff.european(model, lambda s: max(s[0] - 1, Fraction(0)), maturity=1)
    return ModelFile(model, None, payoff, Cone.unconstrained(1))
