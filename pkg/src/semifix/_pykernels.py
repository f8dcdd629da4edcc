"""Pure-Python enumeration kernels over a distance matrix and an index map.

Reference twin of ``_ckernels.pyx``: the loop order, tie-breaking and
floating-point operation order match exactly, so both backends return
bit-identical results.

Modes for pair kernels: 0 Banach, 1 Kannan, 2 Chatterjea.
Triangle-function codes: 0 sum, 1 max, 2 scaled sum, 3 power.
"""
import math

INF = math.inf


def _pair_terms(d, m, mode, i, j):
    ti, tj = m[i], m[j]
    num = d[ti][tj]
    if mode == 0:
        den = d[i][j]
    elif mode == 1:
        den = d[i][ti] + d[j][tj]
    else:
        den = d[i][tj] + d[j][ti]
    return num, den


def ratio_constant(d, m, mode):
    """Max of num/den over unordered distinct pairs; returns (value, i, j, num, den)."""
    d = d.tolist()
    m = [int(t) for t in m]
    n = len(m)
    best, bi, bj, bnum, bden = 0.0, -1, -1, 0.0, 0.0
    for i in range(n):
        for j in range(i + 1, n):
            num, den = _pair_terms(d, m, mode, i, j)
            if num == 0.0:
                continue
            r = num / den if den > 0.0 else INF
            if r > best:
                best, bi, bj, bnum, bden = r, i, j, num, den
    return best, bi, bj, bnum, bden


def coefficient_excess(d, m, mode, c):
    """Max of num - c*den over unordered distinct pairs (mode 3: triples)."""
    d = d.tolist()
    m = [int(t) for t in m]
    n = len(m)
    best, w = -INF, (-1, -1, -1)
    if mode == 3:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    num, den = _perimeters(d, m, i, j, k)
                    e = num - c * den
                    if e > best:
                        best, w = e, (i, j, k)
        return best, w[0], w[1], w[2]
    for i in range(n):
        for j in range(i + 1, n):
            num, den = _pair_terms(d, m, mode, i, j)
            e = num - c * den
            if e > best:
                best, w = e, (i, j, -1)
    return best, w[0], w[1], w[2]


def _perimeters(d, m, i, j, k):
    ti, tj, tk = m[i], m[j], m[k]
    num = d[ti][tj] + d[tj][tk] + d[ti][tk]
    den = d[i][j] + d[j][k] + d[i][k]
    return num, den


def perimeter_constant(d, m):
    """Max image-perimeter / perimeter over pairwise distinct triples."""
    d = d.tolist()
    m = [int(t) for t in m]
    n = len(m)
    best, w, bnum, bden = 0.0, (-1, -1, -1), 0.0, 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                num, den = _perimeters(d, m, i, j, k)
                if num == 0.0:
                    continue
                r = num / den if den > 0.0 else INF
                if r > best:
                    best, w, bnum, bden = r, (i, j, k), num, den
    return best, w[0], w[1], w[2], bnum, bden


def crr_excess(d, m, a, b, g):
    """Max over ordered distinct pairs of d(Tx,Ty) - (a d(x,y) + b d(x,Tx) + g d(y,Ty))."""
    d = d.tolist()
    m = [int(t) for t in m]
    n = len(m)
    best, bi, bj = -INF, -1, -1
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            num = d[m[i]][m[j]]
            rhs = a * d[i][j] + b * d[i][m[i]] + g * d[j][m[j]]
            e = num - rhs
            if e > best:
                best, bi, bj = e, i, j
    return best, bi, bj


def _phi(code, K, q, u, v):
    if code == 0:
        return u + v
    if code == 1:
        return u if u >= v else v
    if code == 2:
        return K * (u + v)
    mx = u if u >= v else v
    if mx == 0.0:
        return 0.0
    return mx * ((u / mx) ** q + (v / mx) ** q) ** (1.0 / q)


def tr_excess(d, code, K, q):
    """Max over all ordered triples of d(x,y) - phi(d(x,z), d(z,y))."""
    d = d.tolist()
    n = len(d)
    best, w = -INF, (-1, -1, -1)
    for x in range(n):
        for y in range(n):
            dxy = d[x][y]
            for z in range(n):
                e = dxy - _phi(code, K, q, d[x][z], d[z][y])
                if e > best:
                    best, w = e, (x, y, z)
    return best, w[0], w[1], w[2]


def tr_ratio(d):
    """Smallest K with d(x,y) <= K (d(x,z) + d(z,y)) over all triples."""
    d = d.tolist()
    n = len(d)
    best = 0.0
    for x in range(n):
        for y in range(n):
            for z in range(n):
                den = d[x][z] + d[z][y]
                if den > 0.0:
                    r = d[x][y] / den
                    if r > best:
                        best = r
    return best
