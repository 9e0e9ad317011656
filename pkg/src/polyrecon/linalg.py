"""Small dense linear algebra over both arithmetic models.

Matrices are lists of row lists.  Exact-mode systems are solved by pivoted
rational elimination (error-free); float-mode systems by full-pivot
elimination with a condition estimate, since conditioning diagnostics are a
first-class output of the recovery pipeline.  Sizes here are desk scale
(m <= ~50), so no effort is spent on asymptotics.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath import mp, mpc, mpf

from .scalars import QComplex, ScalarMode

__all__ = [
    "dot",
    "mat_vec",
    "solve_square",
    "solve_full_pivot",
    "solve_consistent",
    "determinant",
    "first_dependent_column",
    "lstsq",
    "singular_values",
]


def dot(u, v):
    acc = None
    for a, b in zip(u, v):
        term = a * b
        acc = term if acc is None else acc + term
    return acc


def mat_vec(A, x):
    return [dot(row, x) for row in A]


def _is_float_entry(x) -> bool:
    return isinstance(x, (mpf, mpc))


def _mag(x):
    """Pivot magnitude; exact entries use an exact surrogate."""
    if isinstance(x, QComplex):
        return x.abs2()
    if isinstance(x, mpc):
        return abs(x)
    if isinstance(x, (Fraction, int)):
        return abs(x)
    return abs(x)


def _coerce(A, mode: ScalarMode):
    if mode.is_exact:
        return [[x if isinstance(x, (Fraction, QComplex)) else Fraction(x) for x in row]
                for row in A]
    out = []
    for row in A:
        out.append([x if _is_float_entry(x) else mode.convert(x) for x in row])
    return out


def solve_square(A, b, mode: ScalarMode):
    """Solve a square system; returns None when (numerically) singular."""
    x, _, _ = solve_full_pivot(A, b, mode, want_cond=False)
    return x


def solve_full_pivot(A, b, mode: ScalarMode, want_cond: bool = True):
    """Full-pivot Gaussian elimination.

    Returns (x, cond_estimate, residual_inf).  cond/residual are None in
    exact mode (the solve is error-free) or when want_cond is False.
    x is None when the matrix is singular; no exception is raised here.
    """
    n = len(A)
    with mode.context():
        M = _coerce(A, mode)
        rhs = list(_coerce([b], mode)[0])
        orig_M = [row[:] for row in M] if (want_cond and not mode.is_exact) else None
        orig_b = rhs[:] if orig_M is not None else None
        col_of = list(range(n))  # col_of[k]: original unknown in slot k
        for k in range(n):
            # full pivot over the trailing block
            best, br, bc = None, -1, -1
            for i in range(k, n):
                for j in range(k, n):
                    m_ij = _mag(M[i][j])
                    if M[i][j] != 0 and (best is None or m_ij > best):
                        best, br, bc = m_ij, i, j
            if best is None:
                return None, None, None
            if br != k:
                M[k], M[br] = M[br], M[k]
                rhs[k], rhs[br] = rhs[br], rhs[k]
            if bc != k:
                for row in M:
                    row[k], row[bc] = row[bc], row[k]
                col_of[k], col_of[bc] = col_of[bc], col_of[k]
            piv = M[k][k]
            for i in range(k + 1, n):
                if M[i][k] == 0:
                    continue
                f = M[i][k] / piv
                M[i][k] = f * 0
                for j in range(k + 1, n):
                    M[i][j] = M[i][j] - f * M[k][j]
                rhs[i] = rhs[i] - f * rhs[k]
        y = [None] * n
        for i in range(n - 1, -1, -1):
            s = rhs[i]
            for j in range(i + 1, n):
                s = s - M[i][j] * y[j]
            y[i] = s / M[i][i]
        x = [None] * n
        for k in range(n):
            x[col_of[k]] = y[k]
        if mode.is_exact or not want_cond:
            return x, None, None
        # condition estimate + residual at doubled precision
        cond = _cond_inf(orig_M, mode)
        with mp.workprec(2 * max(mode.bits or 53, 53)):
            r = [abs(dot(row, x) - bi) for row, bi in zip(orig_M, orig_b)]
            resid = max(r) if r else mp.mpf(0)
        return x, cond, resid


def _cond_inf(M, mode: ScalarMode):
    """||M||_inf * ||M^-1||_inf, columns of the inverse by repeated solves."""
    n = len(M)
    norm = max(sum(abs(x) for x in row) for row in M)
    inv_cols = []
    for j in range(n):
        e = [mp.mpf(1) if i == j else mp.mpf(0) for i in range(n)]
        col, _, _ = solve_full_pivot(M, e, mode, want_cond=False)
        if col is None:
            return mp.inf
        inv_cols.append(col)
    inv_norm = max(sum(abs(inv_cols[j][i]) for j in range(n)) for i in range(n))
    return norm * inv_norm


def solve_consistent(A, b):
    """Exact solve of a (possibly overdetermined) rational system.

    Returns the unique solution when the system is consistent with full
    column rank, else None.
    """
    rows = [list(r) + [bi] for r, bi in zip(A, b)]
    m = len(rows)
    ncols = len(A[0]) if A else 0
    piv_rows = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            return None  # column rank deficient
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        for i in range(r + 1, m):
            if rows[i][c] == 0:
                continue
            f = rows[i][c] / pv
            for j in range(c, ncols + 1):
                rows[i][j] = rows[i][j] - f * rows[r][j]
        piv_rows.append(c)
        r += 1
        if r == m:
            break
    if r < ncols:
        return None
    for i in range(r, m):  # consistency of the leftover rows
        if rows[i][ncols] != 0:
            return None
    x = [None] * ncols
    for i in range(ncols - 1, -1, -1):
        s = rows[i][ncols]
        for j in range(i + 1, ncols):
            s = s - rows[i][j] * x[j]
        x[i] = s / rows[i][i]
    return x


def determinant(A, mode: ScalarMode):
    n = len(A)
    with mode.context():
        M = [row[:] for row in _coerce(A, mode)]
        det = mode.one()
        sign = 1
        for k in range(n):
            piv = None
            if mode.is_exact:
                piv = next((i for i in range(k, n) if M[i][k] != 0), None)
            else:
                best = None
                for i in range(k, n):
                    if M[i][k] != 0 and (best is None or _mag(M[i][k]) > best):
                        best, piv = _mag(M[i][k]), i
            if piv is None:
                return mode.zero()
            if piv != k:
                M[k], M[piv] = M[piv], M[k]
                sign = -sign
            det = det * M[k][k]
            for i in range(k + 1, n):
                if M[i][k] == 0:
                    continue
                f = M[i][k] / M[k][k]
                for j in range(k + 1, n):
                    M[i][j] = M[i][j] - f * M[k][j]
        return det if sign > 0 else -det


def first_dependent_column(columns):
    """Exact rank profile of an ordered list of column vectors.

    Returns (index, combo, clean) for the first column that is a linear
    combination of its predecessors, where combo[j] are coefficients with
    combo[index] == 1 such that sum_j combo[j] * col_j == 0, and clean says
    whether every later column is dependent too (power-sum sequences must
    have a contiguous rank profile).  Returns None when all columns are
    independent.
    """
    pivots = []  # (pivot_row, reduced_vector, combo_dict)
    found = None
    for j, col in enumerate(columns):
        v = list(col)
        combo = {j: Fraction(1)}
        for prow, pvec, pcombo in pivots:
            if v[prow] == 0:
                continue
            f = v[prow] / pvec[prow]
            for i in range(len(v)):
                v[i] = v[i] - f * pvec[i]
            for key, val in pcombo.items():
                combo[key] = combo.get(key, 0) - f * val
        if all(x == 0 for x in v):
            if found is None:
                found = (j, combo)
            continue
        if found is not None:
            return found[0], found[1], False  # later independent column
        prow = next(i for i in range(len(v)) if v[i] != 0)
        pivots.append((prow, v, combo))
    if found is None:
        return None
    return found[0], found[1], True


def _conj(x):
    return x.conjugate() if isinstance(x, mpc) else x


def lstsq(A, b):
    """Float least squares by full-pivot normal equations.

    Doubled working precision absorbs the squared conditioning; mpmath's own
    qr_solve is avoided because its Householder sweep divides by zero when a
    pivot entry is exactly zero (leading Hankel columns start with exact
    zeros).  The solve is diagnostics machinery, not measured data.
    """
    rows = len(A)
    cols = len(A[0])
    with mp.workprec(2 * max(mp.prec, 53) + 30):
        G = [[sum(_conj(A[i][p]) * A[i][q] for i in range(rows))
              for q in range(cols)] for p in range(cols)]
        rhs = [sum(_conj(A[i][p]) * b[i] for i in range(rows)) for p in range(cols)]
        mode = ScalarMode.floating(mp.prec)
        x, _, _ = solve_full_pivot(G, rhs, mode, want_cond=False)
        if x is None:
            raise ValueError("least-squares system is singular")
    return [+v if not isinstance(v, mpc) else mpc(+v.real, +v.imag) for v in x]


def singular_values(A, guard_bits: int = 30):
    """Singular values (descending) computed with guard precision."""
    rows, cols = len(A), len(A[0])
    cplx = any(isinstance(x, mpc) for row in A for x in row)
    with mp.workprec(max(mp.prec, 53) + guard_bits):
        M = mp.matrix(rows, cols)
        for i in range(rows):
            for j in range(cols):
                M[i, j] = A[i][j]
        if cplx:
            S = mp.svd_c(M, compute_uv=False)
        else:
            S = mp.svd_r(M, compute_uv=False)
        vals = sorted((mp.mpf(S[i]) for i in range(rows if rows < cols else cols)),
                      reverse=True)
    return vals
