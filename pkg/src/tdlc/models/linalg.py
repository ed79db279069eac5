"""Row-space arithmetic over F_p for small dimensions."""

from __future__ import annotations

import itertools


def rref(rows, p):
    """Reduced row echelon form as a tuple of tuples (zero rows dropped)."""
    m = [list(r) for r in rows]
    if not m:
        return ()
    ncols = len(m[0])
    out = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] % p), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    for row in m[:r]:
        out.append(tuple(x % p for x in row))
    return tuple(out)


def pivots(basis):
    return [next(i for i, x in enumerate(row) if x) for row in basis]


def reduce(v, basis, p):
    """v minus its projection onto span(basis) along the pivot coordinates."""
    v = [x % p for x in v]
    for row, c in zip(basis, pivots(basis)):
        if v[c]:
            f = v[c]
            v = [(a - f * b) % p for a, b in zip(v, row)]
    return tuple(v)


def in_span(v, basis, p):
    return not any(reduce(v, basis, p))


def span_sum(a, b, p):
    return rref(list(a) + list(b), p)


def contains(big, small, p):
    return all(in_span(v, big, p) for v in small)


def intersect(a, b, p, n):
    """Zassenhaus: intersection of two row spaces in F_p^n."""
    if not a or not b:
        return ()
    rows = [list(r) + list(r) for r in a] + [list(r) + [0] * n for r in b]
    red = rref(rows, p)
    out = [row[n:] for row in red if not any(row[:n])]
    return rref(out, p)


def apply(mat, v, p):
    """Matrix (list of rows) times column vector."""
    return tuple(sum(a * b for a, b in zip(row, v)) % p for row in mat)


def image(mat, basis, p):
    return rref([apply(mat, v, p) for v in basis], p)


def matmul(a, b, p):
    n = len(b[0])
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) % p for j in range(n))
                 for i in range(len(a)))


def identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def inverse(mat, p):
    n = len(mat)
    aug = [list(row) + list(r) for row, r in zip(mat, identity(n))]
    red = rref(aug, p)
    if len(red) != n or any(red[i][i] != 1 for i in range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in red)


def solve_decomposition(v, a, b, c, p):
    """Find x in span(a), y in span(b) with v - x - y in span(c); None if impossible."""
    gens = [(row, 0) for row in a] + [(row, 1) for row in b] + [(row, 2) for row in c]
    n = len(v)
    if not gens:
        return ((0,) * n, (0,) * n) if not any(v) else None
    # solve sum coef_i gen_i = v by elimination on the transposed system
    k = len(gens)
    rows = [[gens[j][0][i] for j in range(k)] + [v[i]] for i in range(n)]
    red = rref(rows, p)
    sol = [0] * k
    for row in red:
        piv = next(i for i, x in enumerate(row) if x)
        if piv == k:
            return None
        sol[piv] = row[k]
    x = [0] * n
    y = [0] * n
    for coef, (row, which) in zip(sol, gens):
        if which == 0:
            x = [(s + coef * r) % p for s, r in zip(x, row)]
        elif which == 1:
            y = [(s + coef * r) % p for s, r in zip(y, row)]
    return tuple(x), tuple(y)


def all_subspaces(n, p):
    """Every subspace of F_p^n as an rref basis (small n only)."""
    vectors = list(itertools.product(range(p), repeat=n))
    found = {()}
    frontier = [()]
    while frontier:
        nxt = []
        for S in frontier:
            for v in vectors:
                if any(v) and not in_span(v, S, p):
                    T = rref(list(S) + [v], p)
                    if T not in found:
                        found.add(T)
                        nxt.append(T)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), s))


def span_elements(basis, p):
    n = len(basis[0]) if basis else 0
    out = []
    for coefs in itertools.product(range(p), repeat=len(basis)):
        v = [0] * n
        for c, row in zip(coefs, basis):
            v = [(a + c * b) % p for a, b in zip(v, row)]
        out.append(tuple(v))
    return out
