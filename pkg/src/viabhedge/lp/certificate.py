"""Independent re-check of LP solutions and certificates."""
from __future__ import annotations

from ..errors import MismatchError
from .exact import farkas_margin


def _bad(v, tol):
    return v > tol


def check_certificate(problem, solution, tol=1e-9):
    """Recompute feasibility, dual signs, complementary slackness and objective match.

    Exact solutions are held to zero residuals regardless of ``tol``.
    Returns a residual report; raises MismatchError naming the offenders.
    """
    if solution.mode == "exact":
        tol = 0
    if solution.status == "infeasible":
        return _check_farkas(problem, solution.certificate["farkas"], tol)
    if solution.status == "unbounded":
        return _check_ray(problem, solution.certificate["ray"], tol)

    x, y = solution.x, solution.y
    s = 1 if problem.sense == "min" else -1
    viol = []
    primal_res = dual_res = cs_res = 0

    for r, yi in zip(problem.rows, y):
        act = problem.activity(r, x)
        slack = act - r.rhs
        res = {"<=": max(slack, 0), ">=": max(-slack, 0), "=": abs(slack)}[r.sense]
        primal_res = max(primal_res, res)
        if _bad(res, tol):
            viol.append((r.name, "primal", res))
        ym = s * yi
        dres = {"<=": max(ym, 0), ">=": max(-ym, 0), "=": 0}[r.sense]
        dual_res = max(dual_res, dres)
        if _bad(dres, tol):
            viol.append((r.name, "dual sign", dres))
        cs = abs(ym * slack) if r.sense != "=" else 0
        cs_res = max(cs_res, cs)
        if _bad(cs, tol):
            viol.append((r.name, "complementary slackness", cs))

    # reduced costs in min form
    d = [s * cj for cj in problem.c]
    for r, yi in zip(problem.rows, y):
        ym = s * yi
        if ym != 0:
            for j, a in r.coeffs.items():
                d[j] -= ym * a
    dual_obj = sum((s * yi * r.rhs for r, yi in zip(problem.rows, y)), 0)
    for j, name in enumerate(problem.var_names):
        lo, hi, xj, dj = problem.lb[j], problem.ub[j], x[j], d[j]
        below = max(lo - xj, 0) if lo is not None else 0
        above = max(xj - hi, 0) if hi is not None else 0
        primal_res = max(primal_res, below, above)
        if _bad(below, tol) or _bad(above, tol):
            viol.append((name, "bound", max(below, above)))
        if dj > 0:
            if lo is None:
                res = dj
            else:
                res = dj * (xj - lo)
                dual_obj += dj * lo
        elif dj < 0:
            if hi is None:
                res = -dj
            else:
                res = -dj * (hi - xj)
                dual_obj += dj * hi
        else:
            res = 0
        res = abs(res)
        cs_res = max(cs_res, res)
        if _bad(res, tol):
            viol.append((name, "reduced cost", res))
    primal_obj = problem.objective_value(x)
    dual_obj = s * dual_obj
    gap = abs(primal_obj - dual_obj)
    obj_res = abs(primal_obj - solution.objective)
    if _bad(gap, tol * (1 + abs(primal_obj))) or _bad(obj_res, tol * (1 + abs(primal_obj))):
        viol.append(("objective", "gap", max(gap, obj_res)))
    if viol:
        raise MismatchError(viol)
    return {
        "status": "optimal",
        "primal_residual": primal_res,
        "dual_residual": dual_res,
        "cs_residual": cs_res,
        "gap": gap,
        "dual_objective": dual_obj,
    }


def _check_farkas(problem, y, tol):
    viol = []
    for r, yi in zip(problem.rows, y):
        bad = {"<=": yi > tol, ">=": yi < -tol, "=": False}[r.sense]
        if bad:
            viol.append((r.name, "farkas sign", yi))
    margin = farkas_margin(problem, y, tol)
    if margin is None or margin >= -tol:
        viol.append(("farkas", "margin", margin))
    if viol:
        raise MismatchError(viol)
    return {"status": "infeasible", "margin": margin}


def _check_ray(problem, d, tol):
    viol = []
    for r in problem.rows:
        a = problem.activity(r, d)
        bad = {"<=": a > tol, ">=": a < -tol, "=": abs(a) > tol}[r.sense]
        if bad:
            viol.append((r.name, "ray", a))
    for j, name in enumerate(problem.var_names):
        if (problem.lb[j] is not None and d[j] < -tol) or (problem.ub[j] is not None and d[j] > tol):
            viol.append((name, "ray bound", d[j]))
    s = 1 if problem.sense == "min" else -1
    slope = s * problem.objective_value(d)
    if slope >= -tol:
        viol.append(("objective", "ray slope", slope))
    if viol:
        raise MismatchError(viol)
    return {"status": "unbounded", "slope": slope}
