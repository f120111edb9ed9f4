"""Generalized strategies: a pre-exercise strategy plus one continuation leg per exercise date."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Optional

from ._rational import fmt
from .errors import DimensionError


def _freeze(positions, d):
    out = {}
    for v, h in positions.items():
        h = tuple(h)
        if len(h) != d:
            raise DimensionError(f"position at {v!r} has {len(h)} entries, expected {d}")
        out[v] = h
    return MappingProxyType(out)


@dataclass(frozen=True)
class GeneralizedStrategy:
    """Positions indexed by decision node (held over the outgoing period).

    ``pre`` covers the run up to exercise; ``post[theta]`` covers nodes at
    time >= theta.  Missing nodes hold nothing.
    """

    d: int
    pre: object = field(default_factory=dict)
    post: object = field(default_factory=dict)
    theta_grid: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pre", _freeze(self.pre, self.d))
        object.__setattr__(
            self, "post", MappingProxyType({int(th): _freeze(p, self.d) for th, p in self.post.items()})
        )
        grid = tuple(sorted(set(self.theta_grid) | set(self.post)))
        object.__setattr__(self, "theta_grid", grid)

    def zero(self):
        return tuple(Fraction(0) for _ in range(self.d))

    def position(self, model, v, theta=None):
        """Pasted position at decision node ``v`` for exercise date ``theta``."""
        if theta is None or model.time(v) < theta:
            return self.pre.get(v, self.zero())
        return self.post.get(theta, {}).get(v, self.zero())

    def positions(self):
        yield None, self.pre
        for th in self.theta_grid:
            yield th, self.post.get(th, {})

    def to_json(self):
        def leg(p):
            return {v: [fmt(a) for a in h] for v, h in sorted(p.items())}

        return {"pre": leg(self.pre), "post": {str(th): leg(p) for th, p in sorted(self.post.items())}}


@dataclass(frozen=True)
class WealthProcess:
    values: dict
    theta: Optional[int]
    z: object

    def __getitem__(self, v):
        return self.values[v]


def wealth(model, H, theta=None, z=0):
    """Node-indexed wealth z + sum of position . price increment along the path."""
    if H.d != model.d:
        raise DimensionError(f"strategy dimension {H.d} differs from model dimension {model.d}")
    vals = {model.root: z}
    for v in model.order:
        ch = model.children[v]
        if not ch:
            continue
        h = H.position(model, v, theta)
        sv = model.prices(v)
        for c in ch:
            sc = model.prices(c)
            vals[c] = vals[v] + sum(a * (p - q) for a, p, q in zip(h, sc, sv))
    return WealthProcess(vals, theta, z)


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    node: Optional[str] = None
    leg: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_admissible(model, H, bound, cone):
    """Every leg's wealth stays >= -bound and every position lies in the cone.

    Post legs are checked only after their exercise date; before it they
    coincide with the pre-exercise leg.
    """
    for theta, leg in H.positions():
        for v in model.order:
            if v in leg and not cone.contains(leg[v]):
                return Admissibility(False, v, theta, "position outside cone")
    for theta in (None, *H.theta_grid):
        w = wealth(model, H, theta, 0)
        for v in model.order:
            if theta is not None and model.time(v) <= theta:
                continue
            if w[v] < -bound:
                return Admissibility(False, v, theta, f"wealth {w[v]} below {-bound}")
    return Admissibility(True)
