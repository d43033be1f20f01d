"""Slow, independent reference computations used to freeze expected values.

Everything here is naive loops over basis indices (or exact rational
arithmetic) and deliberately shares no code with the package.
"""

from fractions import Fraction
import itertools

import numpy as np


def naive_product(alpha, u, v):
    n = len(u)
    w = [0.0] * n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                w[k] += u[i] * v[j] * alpha[i][j][k]
    return np.array(w)


def naive_residual(alpha):
    alpha = np.asarray(alpha)
    n = alpha.shape[0]
    R = np.zeros((n,) * 4)
    for i, j, k, m in itertools.product(range(n), repeat=4):
        s = 0.0
        for l in range(n):
            s += alpha[i, j, l] * alpha[l, k, m] - alpha[i, l, m] * alpha[j, k, l]
        R[i, j, k, m] = s
    return R


def naive_tangent_matrix(alpha):
    """Entry-by-entry assembly of the linearized associativity equations."""
    n = len(alpha)
    rows = []
    for i, j, k, m in itertools.product(range(n), repeat=4):
        row = {}
        for l in range(n):
            for key, coef in (
                ((l, k, m), alpha[i][j][l]),
                ((i, j, l), alpha[l][k][m]),
                ((j, k, l), -alpha[i][l][m]),
                ((i, l, m), -alpha[j][k][l]),
            ):
                row[key] = row.get(key, 0) + coef
        rows.append([row.get((a, b, c), 0) for a, b, c in itertools.product(range(n), repeat=3)])
    return rows


def exact_rank(rows):
    """Rank by Gaussian elimination over the rationals."""
    M = [[Fraction(x) for x in r] for r in rows]
    rank, ncols = 0, len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def cocycle_via_products(alpha, f):
    """Max over basis triples of |x f(y,z) - f(xy,z) + f(x,yz) - f(x,y) z|."""
    alpha = np.asarray(alpha)
    f = np.asarray(f)
    n = alpha.shape[0]
    E = np.eye(n)
    mul = lambda u, v: naive_product(alpha, u, v)
    fb = lambda u, v: naive_product(f, u, v)
    worst = 0.0
    for i, j, k in itertools.product(range(n), repeat=3):
        x, y, z = E[i], E[j], E[k]
        d = mul(x, fb(y, z)) - fb(mul(x, y), z) + fb(x, mul(y, z)) - mul(fb(x, y), z)
        worst = max(worst, float(np.abs(d).max()))
    return worst


def naive_coboundary(alpha, G):
    alpha = np.asarray(alpha)
    n = alpha.shape[0]
    E = np.eye(n)
    mul = lambda u, v: naive_product(alpha, u, v)
    out = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            out[a, b] = mul(E[a], G @ E[b]) + mul(G @ E[a], E[b]) - G @ mul(E[a], E[b])
    return out


def trace_form_loops(alpha):
    alpha = np.asarray(alpha)
    n = alpha.shape[0]
    T = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            # trace(L_a L_b) = sum_j <x_j*, a (b x_j)>
            T[a, b] = sum(alpha[b, j, k] * alpha[a, k, j] for j in range(n) for k in range(n))
    return T
