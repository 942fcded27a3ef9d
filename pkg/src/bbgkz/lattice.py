"""Exact linear algebra over Q and Z.

Matrices are plain lists of rows. Entries are ints or Fractions; nothing
here touches floating point.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def transpose(rows: Sequence[Sequence]) -> Matrix:
    if not rows:
        return []
    return [list(col) for col in zip(*rows)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def rref(rows: Sequence[Sequence], zero=0) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over any exact field.

    Entries must support ``+ - * /`` and comparison with ``zero``. Pivots are
    taken leftmost-first, so callers control pivot preference by column order.
    Returns the nonzero rows and the pivot columns.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != zero), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c] if not isinstance(m[r][c], int) else Fraction(1, m[r][c])
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != zero:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence], zero=0) -> int:
    return len(rref(rows, zero)[1])


def det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-exact elimination."""
    m = to_fractions(rows)
    n = len(m)
    if n == 0:
        return Fraction(1)
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            result = -result
        result *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return result


def inverse(rows: Sequence[Sequence]) -> Matrix:
    n = len(rows)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(rows)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """One rational solution of ``rows @ x = rhs`` (free variables zero), or None."""
    if not rows:
        return []
    ncols = len(rows[0])
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(red, piv):
        x[c] = row[ncols]
    return x


def nullspace(rows: Sequence[Sequence]) -> Matrix:
    """Basis of the rational right kernel, one vector per free column."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, piv = rref(to_fractions(rows))
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(red, piv):
            v[c] = -row[f]
        basis.append(v)
    return basis


def smith_normal_form(a: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``U @ A @ W = D`` with U, W unimodular.

    D is diagonal (rectangular) with nonnegative entries, each dividing the
    next. All arithmetic is on Python ints.
    """
    m = [[int(x) for x in row] for row in a]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    u = identity(nr)
    w = identity(nc)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in w:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        m[dst] = [x + f * y for x, y in zip(m[dst], m[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, f):
        for row in m:
            row[dst] += f * row[src]
        for row in w:
            row[dst] += f * row[src]

    t = 0
    while t < min(nr, nc):
        entries = [(abs(m[i][j]), i, j) for i in range(t, nr) for j in range(t, nc)
                   if m[i][j] != 0]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, nr):
                if m[i][t]:
                    add_row(i, t, -(m[i][t] // m[t][t]))
                    if m[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, nc):
                if m[t][j]:
                    add_col(j, t, -(m[t][j] // m[t][t]))
                    if m[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                # divisibility of the remaining block
                bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                            if m[i][j] % m[t][t]), None)
                if bad is None:
                    break
                add_row(t, bad[0], 1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, m, w


def elementary_divisors(a: Sequence[Sequence[int]]) -> list[int]:
    if not a or not a[0]:
        return []
    _, d, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]))) if d[i][i] != 0]


def integer_kernel(a: Sequence[Sequence[int]]) -> Matrix:
    """Basis (as rows) of the lattice ``{z in Z^n : A z = 0}``."""
    if not a:
        return []
    nc = len(a[0])
    _, d, w = smith_normal_form(a)
    r = len(elementary_divisors(a))
    # columns r.. of W span the kernel
    return [[w[i][j] for i in range(nc)] for j in range(r, nc)]


def integer_solve(a: Sequence[Sequence[int]], b: Sequence[int]) -> list[int] | None:
    """One integer solution of ``A z = b`` or None if there is none."""
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u, d, w = smith_normal_form(a)
    ub = matvec(u, b)
    y = [0] * nc
    for k in range(nr):
        dk = d[k][k] if k < nc else 0
        if dk == 0:
            if ub[k] != 0:
                return None
        else:
            if ub[k] % dk:
                return None
            y[k] = ub[k] // dk
    return matvec(w, y)


def primitive(v: Sequence[int]) -> list[int]:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return [int(x) // g for x in v] if g else [int(x) for x in v]


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out
