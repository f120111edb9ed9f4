"""Exact rational simplex on a dense tableau (gmpy2.mpq entries).

Pricing is Dantzig's largest-coefficient rule, switching to Bland's
smallest-index rule after any degenerate pivot.  Cycling needs an unbroken
run of degenerate pivots, and such a run is driven by Bland's rule after its
first step, so the method terminates.
"""
from __future__ import annotations

from fractions import Fraction

import gmpy2

from .problem import LPSolution
from .standard import farkas_rows, ray_to_original, recover, to_standard

mpq = gmpy2.mpq
ZERO = mpq(0)


def _to_fraction(v):
    return Fraction(int(v.numerator), int(v.denominator))


def _conv(v):
    if isinstance(v, float):
        return mpq(Fraction(v))
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


class _Tableau:
    def __init__(self, sf):
        self.sf = sf
        n = sf.ncols
        self.rows = []
        for coeffs in sf.rows:
            r = [ZERO] * n
            for j, a in coeffs.items():
                r[j] = a
            self.rows.append(r)
        self.rhs = list(sf.b)
        self.basis = list(sf.init_basis)
        self.is_basic = [False] * n
        for j in self.basis:
            self.is_basic[j] = True
        self.neg = [False] * n
        self.pivots = []
        self.last_degenerate = False

    def cost(self, c, j):
        return -c[j] if self.neg[j] else c[j]

    def price(self, c):
        """Reduced costs and objective for cost vector ``c`` under the current basis."""
        rc = [self.cost(c, j) for j in range(self.sf.ncols)]
        z = ZERO
        for i, bj in enumerate(self.basis):
            cb = self.cost(c, bj)
            if cb != 0:
                row = self.rows[i]
                for j, a in enumerate(row):
                    if a != 0:
                        rc[j] -= cb * a
                z += cb * self.rhs[i]
        self.rc, self.z = rc, z

    def entering(self, allow):
        rc, free, bland = self.rc, self.sf.free, self.last_degenerate
        best, best_val = None, ZERO
        for j in range(self.sf.ncols):
            if self.is_basic[j] or not allow[j]:
                continue
            r = rc[j]
            if r < 0 or (free[j] and r > 0):
                if bland:
                    return j
                if abs(r) > best_val:
                    best, best_val = j, abs(r)
        return best

    def leaving(self, j):
        free = self.sf.free
        best, best_ratio = None, None
        for i, row in enumerate(self.rows):
            a = row[j]
            if a > 0 and not free[self.basis[i]]:
                ratio = self.rhs[i] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[best])
                ):
                    best, best_ratio = i, ratio
        return best

    def negate_column(self, j):
        for row in self.rows:
            if row[j] != 0:
                row[j] = -row[j]
        self.rc[j] = -self.rc[j]
        self.neg[j] = not self.neg[j]

    def pivot(self, r, j):
        prow = self.rows[r]
        inv = 1 / prow[j]
        nz = [k for k, a in enumerate(prow) if a != 0]
        for k in nz:
            prow[k] *= inv
        self.rhs[r] *= inv
        self.last_degenerate = self.rhs[r] == 0
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[j]
            if f != 0:
                for k in nz:
                    row[k] -= f * prow[k]
                self.rhs[i] -= f * self.rhs[r]
        f = self.rc[j]
        if f != 0:
            for k in nz:
                self.rc[k] -= f * prow[k]
            self.z += f * self.rhs[r]
        old = self.basis[r]
        self.is_basic[old] = False
        self.is_basic[j] = True
        self.basis[r] = j
        self.pivots.append((j, old))

    def run(self, allow):
        while True:
            j = self.entering(allow)
            if j is None:
                return "optimal", None
            if self.rc[j] > 0:
                self.negate_column(j)
            r = self.leaving(j)
            if r is None:
                return "unbounded", j
            self.pivot(r, j)

    def primal(self):
        x = [ZERO] * self.sf.ncols
        for i, j in enumerate(self.basis):
            x[j] = self.rhs[i]
        return [-v if self.neg[j] else v for j, v in enumerate(x)]

    def row_duals(self, c):
        # the starting basis columns hold B^-1, so y_i = c_init - rc_init
        return [c[col] - self.rc[col] for col in self.sf.init_basis]


def solve_exact(problem):
    sf = to_standard(problem, _conv)
    tab = _Tableau(sf)
    n = sf.ncols

    c1 = [mpq(1) if a else ZERO for a in sf.art]
    tab.price(c1)
    no_art = [not a for a in sf.art]
    status, _ = tab.run(no_art)
    if tab.z > 0:
        ybar = tab.row_duals(c1)
        y = [_to_fraction(v) for v in farkas_rows(sf, problem, ybar)]
        return LPSolution("infeasible", "exact", certificate={"farkas": _normalize_farkas(problem, y)},
                          pivots=tuple(tab.pivots))
    # drive zero-level artificials out where possible
    for i in range(len(tab.rows)):
        if sf.art[tab.basis[i]]:
            row = tab.rows[i]
            j = next((k for k in range(n) if not sf.art[k] and not tab.is_basic[k] and row[k] != 0), None)
            if j is not None:
                tab.pivot(i, j)
    tab.last_degenerate = False
    tab.price(sf.c)
    status, j = tab.run(no_art)
    if status == "unbounded":
        d = [ZERO] * n
        d[j] = mpq(1)
        for i, bj in enumerate(tab.basis):
            d[bj] = -tab.rows[i][j]
        d = [-v if tab.neg[k] else v for k, v in enumerate(d)]
        ray = [_to_fraction(v) for v in ray_to_original(sf, d)]
        return LPSolution("unbounded", "exact", certificate={"ray": ray}, pivots=tuple(tab.pivots))
    x, y = recover(sf, problem, tab.primal(), tab.row_duals(sf.c))
    x = [_to_fraction(v) for v in x]
    y = [_to_fraction(v) for v in y]
    obj = _to_fraction(sf.obj_sign * (tab.z + sf.obj_const))
    return LPSolution("optimal", "exact", x, y, obj, pivots=tuple(tab.pivots))


def farkas_margin(problem, y, tol=0):
    """sup over the bound box of (A^T y).x - y.b (None when unbounded above).

    Components of A^T y within ``tol`` of zero are treated as zero.
    """
    g = [0] * problem.num_vars
    yb = 0
    for yi, row in zip(y, problem.rows):
        if yi == 0:
            continue
        yb += yi * row.rhs
        for j, a in row.coeffs.items():
            g[j] += yi * a
    total = -yb
    for j, gj in enumerate(g):
        if abs(gj) <= tol:
            continue
        if gj > 0:
            if problem.ub[j] is None:
                return None
            total += gj * problem.ub[j]
        elif gj < 0:
            if problem.lb[j] is None:
                return None
            total += gj * problem.lb[j]
    return total


def _normalize_farkas(problem, y):
    m = farkas_margin(problem, y)
    if m is None or m >= 0:
        return y
    return [v / -m for v in y]
