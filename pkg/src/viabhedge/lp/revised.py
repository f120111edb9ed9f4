"""Floating-point revised simplex with partial pricing.

Same standard form and pivot rules as the exact backend; the basis inverse is
updated in product form and refactored periodically.
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericalBreakdown
from .problem import LPSolution
from .standard import farkas_rows, ray_to_original, recover, to_standard

TOL = 1e-9
REFACTOR = 40


def _conv(v):
    return float(v)


class _Revised:
    def __init__(self, sf):
        self.sf = sf
        m, n = len(sf.rows), sf.ncols
        self.A = np.zeros((m, n))
        for i, coeffs in enumerate(sf.rows):
            for j, a in coeffs.items():
                self.A[i, j] = a
        self.b = np.array(sf.b, dtype=float)
        self.basis = list(sf.init_basis)
        self.is_basic = np.zeros(n, dtype=bool)
        self.is_basic[self.basis] = True
        self.free = np.array(sf.free, dtype=bool)
        self.Binv = np.eye(m)
        self.xB = self.b.copy()
        self.pivots = []
        self.since_refactor = 0
        self.last_degenerate = False
        self.chunk = max(32, n // 4)
        self.start = 0

    def refactor(self):
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(f"singular basis: {exc}") from None
        self.xB = self.Binv @ self.b
        self.since_refactor = 0

    def reduced(self, c, cols):
        y = c[self.basis] @ self.Binv
        return c[cols] - y @ self.A[:, cols]

    def entering(self, c, allow):
        n = self.sf.ncols
        cand = ~self.is_basic & allow
        if self.last_degenerate:
            cols = np.flatnonzero(cand)
            if cols.size == 0:
                return None, 0
            rc = self.reduced(c, cols)
            ok = (rc < -TOL) | (self.free[cols] & (rc > TOL))
            if not ok.any():
                return None, 0
            k = int(np.flatnonzero(ok)[0])
            return int(cols[k]), float(rc[k])
        # partial pricing: scan chunks cyclically, take the best in the first useful chunk
        for step in range(0, n, self.chunk):
            lo = (self.start + step) % n
            idx = np.arange(lo, min(lo + self.chunk, n))
            cols = idx[cand[idx]]
            if cols.size == 0:
                continue
            rc = self.reduced(c, cols)
            score = np.where(rc < -TOL, -rc, np.where(self.free[cols] & (rc > TOL), rc, 0.0))
            if score.max() > 0:
                k = int(np.argmax(score))
                self.start = int(cols[k])
                return int(cols[k]), float(rc[k])
        if self.start:
            # wrap-around leftovers
            self.start = 0
            return self.entering(c, allow)
        return None, 0

    def run(self, c, allow):
        limit = 50 * (self.sf.ncols + len(self.basis)) + 1000
        for _ in range(limit):
            j, r = self.entering(c, allow)
            if j is None:
                return "optimal", None, None
            direction = -1.0 if r > 0 else 1.0
            alpha = self.Binv @ self.A[:, j]
            step = direction * alpha
            mask = step > TOL
            for i, bj in enumerate(self.basis):
                if self.free[bj]:
                    mask[i] = False
            if not mask.any():
                return "unbounded", j, direction
            ratios = np.full(len(self.basis), np.inf)
            ratios[mask] = np.maximum(self.xB[mask], 0.0) / step[mask]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + TOL)
            r_row = min(ties, key=lambda i: self.basis[i])
            theta = ratios[r_row]
            self.last_degenerate = theta <= TOL
            self.xB -= theta * step
            self.xB[r_row] = direction * theta
            piv = alpha[r_row]
            if abs(piv) < 1e-12:
                raise NumericalBreakdown("pivot element vanished")
            prow = self.Binv[r_row] / piv
            self.Binv -= np.outer(alpha, prow)
            self.Binv[r_row] = prow
            old = self.basis[r_row]
            self.is_basic[old] = False
            self.is_basic[j] = True
            self.basis[r_row] = j
            self.pivots.append((j, old))
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR:
                self.refactor()
        raise NumericalBreakdown("iteration limit reached")

    def primal(self):
        x = np.zeros(self.sf.ncols)
        x[self.basis] = self.xB
        return x

    def duals(self, c):
        return c[self.basis] @ self.Binv


def solve_float(problem):
    sf = to_standard(problem, _conv)
    rs = _Revised(sf)
    art = np.array(sf.art, dtype=bool)
    allow = ~art
    c1 = art.astype(float)
    rs.run(c1, allow)
    rs.refactor()
    infeas = float(c1[rs.basis] @ rs.xB)
    if infeas > TOL * max(1.0, float(np.abs(rs.b).max(initial=0.0))):
        ybar = rs.duals(c1)
        y = [float(v) for v in farkas_rows(sf, problem, list(ybar))]
        return LPSolution("infeasible", "float", certificate={"farkas": y}, pivots=tuple(rs.pivots))
    for i in range(len(rs.basis)):
        if sf.art[rs.basis[i]]:
            row = rs.Binv[i] @ rs.A
            cand = [k for k in range(sf.ncols) if not sf.art[k] and not rs.is_basic[k] and abs(row[k]) > 1e-7]
            if cand:
                j = cand[0]
                alpha = rs.Binv @ rs.A[:, j]
                prow = rs.Binv[i] / alpha[i]
                rs.Binv -= np.outer(alpha, prow)
                rs.Binv[i] = prow
                rs.is_basic[rs.basis[i]] = False
                rs.is_basic[j] = True
                rs.basis[i] = j
                rs.pivots.append((j, -1))
    rs.refactor()
    rs.last_degenerate = False
    c = np.array(sf.c, dtype=float)
    status, j, direction = rs.run(c, allow)
    if status == "unbounded":
        d = np.zeros(sf.ncols)
        d[j] = direction
        d[rs.basis] = -direction * (rs.Binv @ rs.A[:, j])
        return LPSolution("unbounded", "float", certificate={"ray": [float(v) for v in ray_to_original(sf, list(d))]},
                          pivots=tuple(rs.pivots))
    rs.refactor()
    xbar = rs.primal()
    resid = np.abs(rs.A @ xbar - rs.b).max(initial=0.0)
    scale = 1.0 + np.abs(rs.b).max(initial=0.0)
    neg = xbar[~rs.free].min(initial=0.0)
    if resid > 1e-7 * scale or neg < -1e-7 * scale:
        raise NumericalBreakdown(f"primal residual {resid:.3g}, bound violation {neg:.3g}")
    ybar = rs.duals(c)
    x, y = recover(sf, problem, list(xbar), list(ybar))
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    obj = sf.obj_sign * (float(c @ xbar) + float(sf.obj_const))
    return LPSolution("optimal", "float", x, y, obj, pivots=tuple(rs.pivots))
