#!/usr/bin/env python3
"""Solve an interchange-format model file and write a solution JSON.

Usage: solver_driver.py MODEL_FILE SOLUTION_FILE

The model dialect is the one produced by the Rust exporter: one row per
line with explicit sign tokens, quadratic blocks in brackets (objective
blocks doubled and divided by two), a full Bounds section, and an optional
Binaries section. Linear and mixed-integer linear models go to HiGHS via
scipy; models with quadratic terms go to cvxpy. The output file is
``{"status": ..., "objective": ..., "values": {"x0": ..., ...}}`` with every
variable present.
"""

import json
import sys

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


def parse_signed(tokens, pos):
    sign = tokens[pos]
    if sign == "+":
        return float(tokens[pos + 1]), pos + 2
    if sign == "-":
        return -float(tokens[pos + 1]), pos + 2
    raise ValueError(f"expected sign token, found {sign!r}")


def parse_bound_token(tokens, pos):
    if tokens[pos] == "-inf":
        return -np.inf, pos + 1
    if tokens[pos] == "+inf":
        return np.inf, pos + 1
    return parse_signed(tokens, pos)


def parse_var(tok):
    if not tok.startswith("x"):
        raise ValueError(f"expected variable, found {tok!r}")
    return int(tok[1:])


def parse_expr(tokens):
    """Return (linear, quad, relation, rhs); quad coefs are canonical."""
    linear = []
    quad = []
    pos = 0
    while pos < len(tokens):
        t = tokens[pos]
        if t in ("=", "<="):
            rhs, end = parse_signed(tokens, pos + 1)
            if end != len(tokens):
                raise ValueError("trailing tokens after right-hand side")
            return linear, quad, t, rhs
        if t == "[":
            pos += 1
            halve = False
            block = []
            while tokens[pos] != "]":
                coef, pos = parse_signed(tokens, pos)
                i = parse_var(tokens[pos])
                if tokens[pos + 1] == "^":
                    assert tokens[pos + 2] == "2"
                    block.append((i, i, coef))
                    pos += 3
                elif tokens[pos + 1] == "*":
                    j = parse_var(tokens[pos + 2])
                    block.append((i, j, coef))
                    pos += 3
                else:
                    raise ValueError(f"bad quad term near {tokens[pos+1]!r}")
            pos += 1  # skip ']'
            if pos + 1 < len(tokens) and tokens[pos] == "/" and tokens[pos + 1] == "2":
                halve = True
                pos += 2
            scale = 0.5 if halve else 1.0
            quad.extend((i, j, c * scale) for (i, j, c) in block)
            continue
        coef, pos = parse_signed(tokens, pos)
        linear.append((parse_var(tokens[pos]), coef))
        pos += 1
    return linear, quad, None, None


def parse_model(path):
    model = {
        "n": 0,
        "constant": 0.0,
        "obj_lin": [],
        "obj_quad": [],
        "eq": [],
        "le": [],
        "quad_cons": [],
        "lower": None,
        "upper": None,
        "binary": set(),
    }
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            tokens = line.split()
            if tokens[0] == "\\":
                if len(tokens) >= 3 and tokens[1] == "vars":
                    model["n"] = int(tokens[2])
                    model["lower"] = np.zeros(model["n"])
                    model["upper"] = np.full(model["n"], np.inf)
                elif len(tokens) >= 4 and tokens[1] == "objective-constant":
                    model["constant"], _ = parse_signed(tokens, 2)
                continue
            if line == "Minimize":
                section = "objective"
                continue
            if line == "Subject To":
                section = "rows"
                continue
            if line == "Binaries":
                section = "binaries"
                continue
            if line == "Bounds":
                section = "bounds"
                continue
            if line == "End":
                break
            if section == "objective":
                assert tokens[0] == "obj:", f"unexpected objective label {tokens[0]!r}"
                lin, quad, rel, _ = parse_expr(tokens[1:])
                assert rel is None
                model["obj_lin"] = lin
                model["obj_quad"] = quad
            elif section == "rows":
                label = tokens[0]
                lin, quad, rel, rhs = parse_expr(tokens[1:])
                if label.startswith("e"):
                    assert rel == "=" and not quad
                    model["eq"].append((lin, rhs))
                elif label.startswith("c"):
                    assert rel == "<=" and not quad
                    model["le"].append((lin, rhs))
                elif label.startswith("q"):
                    assert rel == "<="
                    model["quad_cons"].append((lin, quad, rhs))
                else:
                    raise ValueError(f"unknown row label {label!r}")
            elif section == "binaries":
                for tok in tokens:
                    model["binary"].add(parse_var(tok))
            elif section == "bounds":
                if len(tokens) == 2 and tokens[1] == "free":
                    v = parse_var(tokens[0])
                    model["lower"][v] = -np.inf
                    model["upper"][v] = np.inf
                elif tokens[0].startswith("x") and tokens[1] == "=":
                    v = parse_var(tokens[0])
                    val, _ = parse_signed(tokens, 2)
                    model["lower"][v] = val
                    model["upper"][v] = val
                else:
                    lo, pos = parse_bound_token(tokens, 0)
                    assert tokens[pos] == "<="
                    v = parse_var(tokens[pos + 1])
                    assert tokens[pos + 2] == "<="
                    hi, _ = parse_bound_token(tokens, pos + 3)
                    model["lower"][v] = lo
                    model["upper"][v] = hi
            else:
                raise ValueError(f"line outside any section: {line!r}")
    if model["lower"] is None:
        raise ValueError("missing 'vars' directive")
    return model


def rows_to_sparse(rows, n):
    data, ri, ci, rhs = [], [], [], []
    for r, (lin, b) in enumerate(rows):
        rhs.append(b)
        for v, c in lin:
            ri.append(r)
            ci.append(v)
            data.append(c)
    mat = sp.coo_matrix((data, (ri, ci)), shape=(len(rows), n)).tocsr()
    return mat, np.array(rhs)


def objective_value(model, x):
    val = model["constant"]
    val += sum(c * x[v] for v, c in model["obj_lin"])
    val += sum(c * x[i] * x[j] for i, j, c in model["obj_quad"])
    return float(val)


STATUS_FROM_SCIPY = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded"}


def solve_linear(model):
    n = model["n"]
    c = np.zeros(n)
    for v, coef in model["obj_lin"]:
        c[v] += coef
    a_eq, b_eq = rows_to_sparse(model["eq"], n)
    a_ub, b_ub = rows_to_sparse(model["le"], n)
    if model["binary"]:
        constraints = []
        if len(b_eq):
            constraints.append(LinearConstraint(a_eq, b_eq, b_eq))
        if len(b_ub):
            constraints.append(LinearConstraint(a_ub, -np.inf, b_ub))
        integrality = np.zeros(n)
        for v in model["binary"]:
            integrality[v] = 1
        res = milp(
            c,
            constraints=constraints,
            integrality=integrality,
            bounds=Bounds(model["lower"], model["upper"]),
            options={"mip_rel_gap": 1e-9},
        )
        status = STATUS_FROM_SCIPY.get(res.status, "limit")
        # scipy.milp uses status 4 for "timeout/interrupted with incumbent".
        if res.status == 4 and res.x is not None:
            status = "limit"
        return status, res.x
    res = linprog(
        c,
        A_eq=a_eq if len(b_eq) else None,
        b_eq=b_eq if len(b_eq) else None,
        A_ub=a_ub if len(b_ub) else None,
        b_ub=b_ub if len(b_ub) else None,
        bounds=np.column_stack([model["lower"], model["upper"]]),
        method="highs",
    )
    return STATUS_FROM_SCIPY.get(res.status, "limit"), res.x


def solve_quadratic(model):
    import cvxpy as cp

    n = model["n"]
    x = cp.Variable(n)
    expr = model["constant"]
    if model["obj_lin"]:
        c = np.zeros(n)
        for v, coef in model["obj_lin"]:
            c[v] += coef
        expr = expr + c @ x
    for i, j, coef in model["obj_quad"]:
        expr = expr + coef * x[i] * x[j] if i != j else expr + coef * cp.square(x[i])
    cons = []
    a_eq, b_eq = rows_to_sparse(model["eq"], n)
    if len(b_eq):
        cons.append(a_eq @ x == b_eq)
    a_ub, b_ub = rows_to_sparse(model["le"], n)
    if len(b_ub):
        cons.append(a_ub @ x <= b_ub)
    lo, hi = model["lower"], model["upper"]
    finite_lo = np.isfinite(lo)
    finite_hi = np.isfinite(hi)
    if finite_lo.any():
        cons.append(x[finite_lo] >= lo[finite_lo])
    if finite_hi.any():
        cons.append(x[finite_hi] <= hi[finite_hi])
    for lin, quad, rhs in model["quad_cons"]:
        q = 0
        for i, j, coef in quad:
            q = q + coef * x[i] * x[j] if i != j else q + coef * cp.square(x[i])
        for v, coef in lin:
            q = q + coef * x[v]
        cons.append(q <= rhs)
    if model["binary"]:
        raise SystemExit("mixed-integer quadratic models are not supported here")
    prob = cp.Problem(cp.Minimize(expr), cons)
    prob.solve()
    status_map = {
        cp.OPTIMAL: "optimal",
        cp.OPTIMAL_INACCURATE: "optimal",
        cp.INFEASIBLE: "infeasible",
        cp.INFEASIBLE_INACCURATE: "infeasible",
        cp.UNBOUNDED: "unbounded",
        cp.UNBOUNDED_INACCURATE: "unbounded",
    }
    return status_map.get(prob.status, "limit"), (None if x.value is None else np.asarray(x.value))


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    model = parse_model(sys.argv[1])
    if model["obj_quad"] or model["quad_cons"]:
        status, x = solve_quadratic(model)
    else:
        status, x = solve_linear(model)
    out = {"status": status, "objective": 0.0, "values": {}}
    if x is not None and status in ("optimal", "limit"):
        x = np.asarray(x, dtype=float)
        out["objective"] = objective_value(model, x)
        out["values"] = {f"x{v}": float(x[v]) for v in range(model["n"])}
    with open(sys.argv[2], "w") as fh:
        json.dump(out, fh)


if __name__ == "__main__":
    main()
