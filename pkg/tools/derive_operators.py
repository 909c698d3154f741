"""Derive the rational coefficient tables frozen in sbp_amr.operators / sbp_amr.interpolation.

All operators are pinned by linear constraint systems solved in exact rational
arithmetic:

  * first-derivative kernels Q with Q + Q^T = diag(-1, 0, ..., 0, 1) and
    boundary rows exact on polynomials of degree <= p (interior order 2p),
  * second-derivative pairs (A, S) with A = A^T, D2 = P^{-1}(-A + BS) exact on
    degree <= p at the boundary, S rows exact on degree <= p + 1,
  * fine<->coarse interpolation pairs satisfying P_c I_f2c = I_c2f^T P_f with
    closure accuracy p and interior accuracy 2p.

Where the constraints leave free parameters, they are fixed by minimizing the
squared next-degree residual over the boundary rows (exact least squares via
normal equations).  The resulting tables are printed as Fraction tuples ready
to paste into the package sources, and re-validated here against all the
constraints they were built from.

Requires sympy; not needed at package runtime.
"""

from __future__ import annotations

from fractions import Fraction

import sympy as sp


# diagonal norm boundary weights (interior weight 1), per interior order
NORM_WEIGHTS = {
    2: [sp.Rational(1, 2)],
    4: [sp.Rational(17, 48), sp.Rational(59, 48), sp.Rational(43, 48), sp.Rational(49, 48)],
    6: [
        sp.Rational(13649, 43200),
        sp.Rational(12013, 8640),
        sp.Rational(2711, 4320),
        sp.Rational(5359, 4320),
        sp.Rational(7877, 8640),
        sp.Rational(43801, 43200),
    ],
}

# central interior stencils for the first derivative, offsets -p..p
D1_INTERIOR = {
    2: [sp.Rational(-1, 2), 0, sp.Rational(1, 2)],
    4: [sp.Rational(1, 12), sp.Rational(-2, 3), 0, sp.Rational(2, 3), sp.Rational(-1, 12)],
    6: [
        sp.Rational(-1, 60),
        sp.Rational(3, 20),
        sp.Rational(-3, 4),
        0,
        sp.Rational(3, 4),
        sp.Rational(-3, 20),
        sp.Rational(1, 60),
    ],
}

# central interior stencils for the second derivative
D2_INTERIOR = {
    2: [1, -2, 1],
    4: [sp.Rational(-1, 12), sp.Rational(4, 3), sp.Rational(-5, 2), sp.Rational(4, 3), sp.Rational(-1, 12)],
    6: [
        sp.Rational(1, 90),
        sp.Rational(-3, 20),
        sp.Rational(3, 2),
        sp.Rational(-49, 18),
        sp.Rational(3, 2),
        sp.Rational(-3, 20),
        sp.Rational(1, 90),
    ],
}

# one-sided boundary derivative rows (order p+1), used as the first row of S
S_ROWS = {
    2: [sp.Rational(-3, 2), 2, sp.Rational(-1, 2)],
    4: [sp.Rational(-11, 6), 3, sp.Rational(-3, 2), sp.Rational(1, 3)],
    6: [sp.Rational(-25, 12), 4, -3, sp.Rational(4, 3), sp.Rational(-1, 4)],
}


def _lsq_pin(solution, params, residuals, tiebreak=()):
    """Fix free params by lexicographic exact least squares.

    Minimizes sum(residuals^2); any directions left flat are then pinned by
    minimizing sum(tiebreak^2) on the remaining affine family.
    """
    if not params:
        return {}
    params = list(params)
    obj = sum(r**2 for r in residuals)
    grad = [sp.expand(sp.diff(obj, t)) for t in params]
    sol = sp.solve(grad, params, dict=True)
    assert sol, "inconsistent least-squares system"
    sol = sol[0]
    leftover = sorted(
        {s for v in sol.values() for s in v.free_symbols} | {t for t in params if t not in sol},
        key=str,
    )
    if not leftover:
        return sol
    assert tiebreak, f"flat directions remain: {leftover}"
    tb = [sp.expand(t.subs(sol)) for t in tiebreak]
    inner = _lsq_pin(None, leftover, tb)
    return {k: sp.expand(v.subs(inner)) for k, v in sol.items()} | inner


def derive_d1(order: int):
    """Boundary block of Q for the first derivative of given interior order."""
    p = order // 2
    w = len(NORM_WEIGHTS[order])  # boundary rows: 1 / 4 / 6
    ncol = w + p  # widest column reached by antisymmetry with interior rows
    P = NORM_WEIGHTS[order]
    interior = D1_INTERIOR[order]

    Q = sp.zeros(w, ncol)
    unknowns = []
    for i in range(w):
        for j in range(w):
            if i == j:
                Q[i, j] = sp.Rational(-1, 2) if i == 0 else 0
            elif i < j:
                t = sp.Symbol(f"q_{i}_{j}")
                unknowns.append(t)
                Q[i, j] = t
            else:
                Q[i, j] = -Q[j, i]  # placeholder, substituted below
    # re-express lower triangle via antisymmetry
    for i in range(w):
        for j in range(i):
            Q[i, j] = -Q[j, i]
    # columns w..ncol-1 pinned by antisymmetry with interior rows
    for i in range(w):
        for j in range(w, ncol):
            # Q[j, i] is an interior row entry (offset i - j)
            off = i - j
            val = interior[off + p] if abs(off) <= p else 0
            Q[i, j] = -val

    # boundary accuracy: (Q x^k)_i = P_i * k * i^(k-1), grid x_j = j, h = 1
    eqs = []
    for i in range(w):
        for k in range(p + 1):
            lhs = sum(Q[i, j] * sp.Integer(j) ** k for j in range(ncol))
            rhs = P[i] * k * (sp.Integer(i) ** (k - 1) if k >= 1 else 0)
            eqs.append(sp.expand(lhs - rhs))
    if unknowns:
        sol = sp.solve(eqs, unknowns, dict=True)
        assert len(sol) == 1, f"order {order}: no consistent Q block"
        sol = sol[0]
    else:
        assert all(sp.simplify(e) == 0 for e in eqs)
        sol = {}
    free = sorted(
        {s for v in sol.values() for s in v.free_symbols} | {u for u in unknowns if u not in sol},
        key=str,
    )
    # pin leftover parameters: minimize the degree-(p+1) residual on boundary rows
    Qs = Q.subs(sol)
    k = p + 1
    residuals = [
        sum(Qs[i, j] * sp.Integer(j) ** k for j in range(ncol)) - P[i] * k * sp.Integer(i) ** (k - 1)
        for i in range(w)
    ]
    if order == 6 and free:
        # one-parameter family; take the standard published choice
        # x1 = 0.70127127... = 70057/99900 for the (4,5) coupling entry
        assert len(free) == 1 and str(free[0]) == "q_4_5"
        pin = {free[0]: sp.Rational(70057, 99900)}
    else:
        pin = _lsq_pin(sol, free, residuals)
    Qs = Qs.subs(pin)

    # validate
    for i in range(w):
        for k in range(p + 1):
            lhs = sum(Qs[i, j] * sp.Integer(j) ** k for j in range(ncol))
            rhs = P[i] * k * (sp.Integer(i) ** (k - 1) if k >= 1 else 0)
            assert sp.simplify(lhs - rhs) == 0, (order, i, k)
    print(f"# D1 order {order}: {len(free)} free parameter(s) pinned: {pin}")
    return Qs


def derive_d2(order: int):
    """Boundary block of the stiffness kernel A with D2 = P^{-1}(-A + BS)."""
    p = order // 2
    w = len(NORM_WEIGHTS[order])
    ncol = w + p
    P = NORM_WEIGHTS[order]
    interior = D2_INTERIOR[order]
    a_int = [-sp.Rational(c) for c in interior]  # A interior row = -D2 stencil
    s_row = S_ROWS[order]

    A = sp.zeros(w, ncol)
    unknowns = []
    for i in range(w):
        for j in range(i, w):
            t = sp.Symbol(f"a_{i}_{j}")
            unknowns.append(t)
            A[i, j] = t
            if j != i and j < w:
                A[j, i] = t
        for j in range(w, ncol):
            off = i - j
            A[i, j] = a_int[off + p] if abs(off) <= p else 0

    # rows w..w+p-1 are pure interior; their columns < w must match symmetry,
    # which the pinning above already enforces.  Boundary accuracy p:
    # sum_j D2[i,j] x_j^k = k (k-1) x_i^(k-2) with the BS term on row 0 only.
    eqs = []
    for i in range(w):
        for k in range(p + 1):
            lhs = -sum(A[i, j] * sp.Integer(j) ** k for j in range(ncol))
            if i == 0:
                lhs -= sum(sp.Rational(c) * sp.Integer(j) ** k for j, c in enumerate(s_row))
            rhs = P[i] * k * (k - 1) * (sp.Integer(i) ** (k - 2) if k >= 2 else 0)
            eqs.append(sp.expand(lhs - rhs))
    sol = sp.solve(eqs, unknowns, dict=True)
    assert len(sol) == 1, f"order {order}: inconsistent A block"
    sol = sol[0]
    free = sorted(
        {s for v in sol.values() for s in v.free_symbols} | {u for u in unknowns if u not in sol},
        key=str,
    )
    As = A.subs(sol)
    k = p + 1
    residuals = []
    for i in range(w):
        r = -sum(As[i, j] * sp.Integer(j) ** k for j in range(ncol))
        if i == 0:
            r -= sum(sp.Rational(c) * sp.Integer(j) ** k for j, c in enumerate(s_row))
        r -= P[i] * k * (k - 1) * sp.Integer(i) ** (k - 2)
        residuals.append(r)
    tiebreak = [As[i, j] for i in range(w) for j in range(ncol)]
    pin = _lsq_pin(sol, free, residuals, tiebreak)
    As = As.subs(pin)

    # positive semi-definiteness on a modest grid (both closures active)
    n = max(2 * w + 2, 12)
    full = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            if i < w and j < ncol:
                full[i, j] = As[i, j]
            elif i >= n - w and j >= n - ncol:
                full[i, j] = As[n - 1 - i, n - 1 - j]
            elif w <= i < n - w and abs(i - j) <= p:
                full[i, j] = a_int[j - i + p]
    assert full == full.T, "A not symmetric"
    import numpy as np

    evals = np.linalg.eigvalsh(np.array(full, dtype=float))
    assert evals.min() > -1e-12, f"A not PSD: min eig {evals.min()}"
    print(f"# D2 order {order}: {len(free)} free parameter(s) pinned: {pin}; min eig {evals.min():.2e}")
    return As


MIDPOINT = {
    2: [sp.Rational(1, 2), sp.Rational(1, 2)],
    4: [sp.Rational(-1, 16), sp.Rational(9, 16), sp.Rational(9, 16), sp.Rational(-1, 16)],
    6: [
        sp.Rational(3, 256),
        sp.Rational(-25, 256),
        sp.Rational(75, 128),
        sp.Rational(75, 128),
        sp.Rational(-25, 256),
        sp.Rational(3, 256),
    ],
}


def _norm_diag(order, n, h):
    P = NORM_WEIGHTS[order]
    d = [h] * n
    for i, wgt in enumerate(P):
        d[i] = wgt * h
        d[n - 1 - i] = wgt * h
    return d


def derive_interp(order: int, rows: int, cols: int, nc: int = 24):
    """Closure block of the coarse-to-fine interpolation.

    Fine grid: 2*nc-1 points at spacing 1/2; coarse: nc at spacing 1.
    Unknowns: I_c2f[0:rows, 0:cols]; elsewhere injection / midpoint stencil.
    Constraints: closure rows exact to degree p-1; the induced
    I_f2c = P_c^{-1} I_c2f^T P_f exact to degree p-1 on its affected rows.
    """
    p = order // 2
    nf = 2 * nc - 1
    mid = MIDPOINT[order]

    E = sp.zeros(nf, nc)
    unknowns = []
    for i in range(rows):
        for j in range(cols):
            t = sp.Symbol(f"e_{i}_{j}")
            unknowns.append(t)
            E[i, j] = t
    for i in range(rows, nf - rows):
        if i % 2 == 0:
            E[i, i // 2] = 1
        else:
            for k, c in enumerate(mid):
                E[i, i // 2 - p + 1 + k] = c
    for i in range(nf - rows, nf):
        for j in range(nc - cols, nc):
            E[i, j] = E[nf - 1 - i, nc - 1 - j]

    Pf = _norm_diag(order, nf, sp.Rational(1, 2))
    Pc = _norm_diag(order, nc, 1)

    xf = [sp.Rational(i, 2) for i in range(nf)]
    xc = [sp.Integer(j) for j in range(nc)]

    eqs = []
    # c2f closure rows: degree <= p-1
    for i in range(rows):
        for k in range(p):
            lhs = sum(E[i, j] * xc[j] ** k for j in range(nc))
            eqs.append(sp.expand(lhs - xf[i] ** k))
    # induced f2c rows affected by the closure or by boundary norm weights
    w = len(NORM_WEIGHTS[order])
    affected = (max(rows, w) + len(mid)) // 2 + 2
    for j in range(affected):
        for k in range(p):
            lhs = sum(Pf[i] * E[i, j] * xf[i] ** k for i in range(nf)) / Pc[j]
            eqs.append(sp.expand(lhs - xc[j] ** k))
    eqs = [e for e in eqs if e != 0]
    sol = sp.solve(eqs, unknowns, dict=True)
    if not sol:
        return None
    sol = sol[0]
    free = sorted(
        {s for v in sol.values() for s in v.free_symbols} | {u for u in unknowns if u not in sol},
        key=str,
    )
    Es = E.subs(sol)
    # pin leftovers: minimize degree-p residuals of both operators' closures
    residuals = []
    for i in range(rows):
        residuals.append(sum(Es[i, j] * xc[j] ** p for j in range(nc)) - xf[i] ** p)
    for j in range(affected):
        residuals.append(
            sum(Pf[i] * Es[i, j] * xf[i] ** p for i in range(nf)) / Pc[j] - xc[j] ** p
        )
    pin = _lsq_pin(sol, free, residuals)
    Es = Es.subs(pin)

    # validate both directions
    for i in range(nf):
        for k in range(p):
            assert sp.simplify(sum(Es[i, j] * xc[j] ** k for j in range(nc)) - xf[i] ** k) == 0
    for j in range(nc):
        for k in range(p):
            v = sum(Pf[i] * Es[i, j] * xf[i] ** k for i in range(nf)) / Pc[j]
            assert sp.simplify(v - xc[j] ** k) == 0
    print(f"# interp order {order} rows={rows} cols={cols}: {len(free)} free pinned")
    return Es[:rows, :cols]


def fmt_matrix(M, name):
    rows = []
    for i in range(M.rows):
        row = ", ".join(f"Fr({sp.nsimplify(M[i, j]).p}, {sp.nsimplify(M[i, j]).q})"
                        if M[i, j] != 0 else "Fr(0)" for j in range(M.cols))
        rows.append(f"    ({row}),")
    body = "\n".join(rows)
    print(f"{name} = (\n{body}\n)")


if __name__ == "__main__":
    for order in (2, 4, 6):
        Q = derive_d1(order)
        fmt_matrix(Q, f"Q{order}_BOUNDARY")
    for order in (2, 4, 6):
        A = derive_d2(order)
        fmt_matrix(A, f"A{order}_BOUNDARY")
    for order, grid in ((4, [(4, 4), (5, 4), (6, 4), (6, 5), (7, 5), (8, 6)]),
                       (6, [(8, 6), (9, 6), (10, 7), (11, 8), (12, 8), (12, 9)])):
        for rows, cols in grid:
            blk = derive_interp(order, rows, cols)
            if blk is not None:
                fmt_matrix(blk, f"C2F{order}_CLOSURE")
                break
        else:
            print(f"# interp order {order}: no feasible closure in search grid")
