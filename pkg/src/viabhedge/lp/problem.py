"""LP model builder with named variables and sparse rows."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .._rational import to_fraction
from ..errors import DimensionError, ParamError

SENSES = ("<=", "=", ">=")


@dataclass
class Row:
    name: str
    coeffs: dict  # var index -> coefficient
    sense: str
    rhs: object


class LPProblem:
    """min/max c.x  s.t.  rows,  lb <= x <= ub  (None means infinite)."""

    def __init__(self, sense="min"):
        if sense not in ("min", "max"):
            raise ParamError(f"objective sense {sense!r}")
        self.sense = sense
        self.var_names = []
        self.lb = []
        self.ub = []
        self.c = []
        self.rows = []
        self._var_index = {}
        self._row_names = set()

    # -- building

    def add_var(self, name, lb=0, ub=None, obj=0):
        if name in self._var_index:
            raise ParamError(f"duplicate variable name {name!r}")
        self._var_index[name] = len(self.var_names)
        self.var_names.append(name)
        self.lb.append(None if lb is None else _num(lb))
        self.ub.append(None if ub is None else _num(ub))
        self.c.append(_num(obj))
        return len(self.var_names) - 1

    def var(self, name):
        return self._var_index[name]

    def has_var(self, name):
        return name in self._var_index

    def add_row(self, name, coeffs, sense, rhs):
        if sense not in SENSES:
            raise ParamError(f"row sense {sense!r}")
        if name in self._row_names:
            raise ParamError(f"duplicate row name {name!r}")
        clean = {}
        for j, a in coeffs.items():
            if isinstance(j, str):
                j = self._var_index[j]
            if not (0 <= j < len(self.var_names)):
                raise DimensionError(f"row {name!r} references unknown variable {j}")
            a = _num(a)
            if a != 0:
                clean[j] = clean.get(j, 0) + a
        self._row_names.add(name)
        self.rows.append(Row(name, {j: a for j, a in clean.items() if a != 0}, sense, _num(rhs)))
        return len(self.rows) - 1

    def set_objective(self, coeffs):
        self.c = [0] * len(self.var_names)
        for j, a in coeffs.items():
            if isinstance(j, str):
                j = self._var_index[j]
            self.c[j] = _num(a)

    @classmethod
    def from_dense(cls, c, A, senses, b, bounds=None, sense="min", var_names=None, row_names=None):
        p = cls(sense)
        n = len(c)
        bounds = bounds or [(0, None)] * n
        if len(bounds) != n or len(A) != len(senses) or len(A) != len(b):
            raise DimensionError("inconsistent LP dimensions")
        for j in range(n):
            p.add_var(var_names[j] if var_names else f"x{j}", bounds[j][0], bounds[j][1], c[j])
        for i, row in enumerate(A):
            if len(row) != n:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {n}")
            p.add_row(row_names[i] if row_names else f"r{i}", dict(enumerate(row)), senses[i], b[i])
        return p

    # -- queries

    @property
    def num_vars(self):
        return len(self.var_names)

    @property
    def row_names(self):
        return [r.name for r in self.rows]

    def objective_value(self, x):
        return sum((self.c[j] * x[j] for j in range(self.num_vars) if self.c[j] != 0), 0)

    def activity(self, row, x):
        return sum((a * x[j] for j, a in row.coeffs.items()), 0)

    def is_rational(self):
        vals = [*self.c, *(r.rhs for r in self.rows)]
        vals += [b for b in self.lb + self.ub if b is not None]
        vals += [a for r in self.rows for a in r.coeffs.values()]
        return all(isinstance(v, (int, Fraction)) for v in vals)

    def dump(self):
        """Plain-text, row-oriented listing for debugging."""

        def term(a, j):
            return f"{'+' if a >= 0 else '-'} {abs(a)} {self.var_names[j]}"

        lines = [f"{self.sense} " + " ".join(term(a, j) for j, a in enumerate(self.c) if a != 0)]
        for r in self.rows:
            body = " ".join(term(a, j) for j, a in sorted(r.coeffs.items()))
            lines.append(f"{r.name}: {body or '0'} {r.sense} {r.rhs}")
        for j, name in enumerate(self.var_names):
            lo = "-inf" if self.lb[j] is None else self.lb[j]
            hi = "+inf" if self.ub[j] is None else self.ub[j]
            lines.append(f"bound {name}: {lo} .. {hi}")
        return "\n".join(lines) + "\n"


def _num(v):
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ParamError("LP coefficients must be finite")
        return v
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return v
    return to_fraction(v)


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    mode: str
    x: Optional[list] = None
    y: Optional[list] = None
    objective: object = None
    certificate: Optional[dict] = None
    pivots: tuple = field(default=(), repr=False)

    @property
    def optimal(self):
        return self.status == "optimal"
