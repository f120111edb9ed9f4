"""Conversion to equality form  A x = b, b >= 0, with an identity starting basis.

Bounds are handled by substitution: a finite lower bound shifts the variable,
an upper-only bound reflects it, a second finite bound becomes an extra row.
Free variables stay free (the simplex codes never let them leave the basis).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class StandardForm:
    rows: list  # list of dict col -> coeff
    b: list
    c: list  # min-form costs per column
    free: list
    art: list
    init_basis: list
    flip: list  # +1/-1 per std row
    row_origin: list  # original row index, or ("ub", j)
    var_map: list  # per original var: (kind, col, offset)
    obj_sign: int
    obj_const: object
    n_struct: int

    @property
    def ncols(self):
        return len(self.c)


def to_standard(problem, conv):
    """``conv`` maps problem numbers into the backend number type."""
    s = 1 if problem.sense == "min" else -1
    zero = conv(0)
    var_map = []
    cols_c = []
    free = []
    obj_const = zero
    for j in range(problem.num_vars):
        lo, hi, cj = problem.lb[j], problem.ub[j], conv(problem.c[j]) * s
        col = len(cols_c)
        if lo is not None:
            var_map.append(("lower", col, conv(lo)))
            cols_c.append(cj)
            free.append(False)
            obj_const += cj * conv(lo)
        elif hi is not None:
            var_map.append(("upper", col, conv(hi)))
            cols_c.append(-cj)
            free.append(False)
            obj_const += cj * conv(hi)
        else:
            var_map.append(("free", col, zero))
            cols_c.append(cj)
            free.append(True)
    n_struct = len(cols_c)

    raw = []  # (coeffs, sense, rhs, origin)
    for i, row in enumerate(problem.rows):
        coeffs = {}
        rhs = conv(row.rhs)
        for j, a in row.coeffs.items():
            kind, col, off = var_map[j]
            a = conv(a)
            if kind == "lower":
                coeffs[col] = a
                rhs -= a * off
            elif kind == "upper":
                coeffs[col] = -a
                rhs -= a * off
            else:
                coeffs[col] = a
        raw.append((coeffs, row.sense, rhs, i))
    for j in range(problem.num_vars):
        lo, hi = problem.lb[j], problem.ub[j]
        if lo is not None and hi is not None:
            kind, col, off = var_map[j]
            raw.append(({col: conv(1)}, "<=", conv(hi) - off, ("ub", j)))

    rows, b, flip, origin = [], [], [], []
    c = list(cols_c)
    art = [False] * n_struct
    slack_of = []
    for coeffs, sense, rhs, org in raw:
        coeffs = dict(coeffs)
        slack = None
        if sense != "=":
            slack = len(c)
            coeffs[slack] = conv(1) if sense == "<=" else conv(-1)
            c.append(zero)
            free.append(False)
            art.append(False)
        f = 1
        if rhs < 0:
            f = -1
            coeffs = {k: -v for k, v in coeffs.items()}
            rhs = -rhs
        rows.append(coeffs)
        b.append(rhs)
        flip.append(f)
        origin.append(org)
        slack_of.append(slack)
    init = []
    for i, coeffs in enumerate(rows):
        sl = slack_of[i]
        if sl is not None and coeffs[sl] == 1:
            init.append(sl)
        else:
            a = len(c)
            coeffs[a] = conv(1)
            c.append(zero)
            free.append(False)
            art.append(True)
            init.append(a)
    return StandardForm(rows, b, c, free, art, init, flip, origin, var_map, s, obj_const, n_struct)


def recover(sf, problem, xbar, ybar):
    """Map standard-form primal/dual vectors back to the original problem."""
    x = []
    for kind, col, off in sf.var_map:
        v = xbar[col]
        x.append(off + v if kind == "lower" else off - v if kind == "upper" else v)
    y = [None] * len(problem.rows)
    for i, org in enumerate(sf.row_origin):
        if not isinstance(org, tuple):
            y[org] = sf.obj_sign * sf.flip[i] * ybar[i]
    return x, y


def farkas_rows(sf, problem, ybar):
    y = [None] * len(problem.rows)
    for i, org in enumerate(sf.row_origin):
        if not isinstance(org, tuple):
            y[org] = sf.flip[i] * ybar[i]
    return y


def ray_to_original(sf, dbar):
    d = []
    for kind, col, _ in sf.var_map:
        v = dbar[col]
        d.append(-v if kind == "upper" else v)
    return d
