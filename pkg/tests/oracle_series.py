"""Brute-force series-substitution oracle for apparency residuals.

Independent route used by the tests: expand W2 and W3 as plain Laurent
series around each puncture by direct Taylor/Laurent bookkeeping, push a
Frobenius series through y''' + W2 y' + W3 y = 0 by convolution, and read
the obstructions off the resonant rows.  Nothing here is shared with the
package's recursion code -- the point is that the two derivations can only
agree if both are right.
"""

import math

import numpy as np


def _w_series(problem, ctx, params, k, Q):
    """Coefficient tables w2[q] ~ u^(q-2), w3[q] ~ u^(q-3) at puncture k."""
    w2 = np.zeros(Q + 1, complex)
    w3 = np.zeros(Q + 1, complex)
    pk = problem.punctures[k]
    alpha_k = float(pk.alpha)
    beta_k = float(pk.beta)
    b = ctx._bn_ext

    w2[0] -= alpha_k
    if Q >= 1:
        w2[1] -= complex(params.Bk[k])
    if Q >= 2:
        w2[2] -= complex(params.B)
    w3[0] -= 2.0 * beta_k
    if Q >= 1:
        w3[1] += complex(params.Dk[k])
    if Q >= 2:
        w3[2] += complex(params.A[k])
    if Q >= 3:
        w3[3] += complex(params.D)

    for i in range(4, Q + 1):
        bi = b[i]
        if bi == 0.0:
            continue
        w2[i] -= alpha_k * bi
        if i + 1 <= Q:
            w2[i + 1] += complex(params.Bk[k]) * bi / (i - 1)
        w3[i] += beta_k * (i - 2) * bi
        if i + 1 <= Q:
            w3[i + 1] += complex(params.Dk[k]) * bi
        if i + 2 <= Q:
            w3[i + 2] -= complex(params.A[k]) * bi / (i - 1)

    for l, pl in enumerate(problem.punctures):
        if l == k:
            continue
        d = complex(pk.p) - complex(pl.p)
        wd = ctx.wp_derivs(d, Q + 2)
        zd = ctx.zeta(d)
        al = float(pl.alpha)
        be = float(pl.beta)
        Bl = complex(params.Bk[l])
        Dl = complex(params.Dk[l])
        Al = complex(params.A[l])
        if Q >= 2:
            w2[2] -= al * wd[0] + Bl * zd
        if Q >= 3:
            w3[3] += be * wd[1] + Dl * wd[0] + Al * zd
        fact = 1.0
        for i in range(1, Q + 1):
            fact *= i
            if i + 2 <= Q:
                w2[i + 2] -= (al * wd[i] - Bl * wd[i - 1]) / fact
            if i + 3 <= Q:
                w3[i + 3] += (be * wd[i + 1] + Dl * wd[i] - Al * wd[i - 1]) / fact
    return w2, w3


def _push_series(w2, w3, rho, jmax, resonances, seed):
    """Run the convolution recursion; return obstructions at the resonances.

    seed maps index -> starting coefficient (e.g. {0: 1} for the principal
    pass).  At a resonant index the obstruction -t is recorded and the
    coefficient is set by the seed (or zero), as in the two-pass scheme.
    """

    def phi(j):
        x = j + rho
        return x * (x - 1.0) * (x - 2.0) + w2[0] * x + w3[0]

    c = np.zeros(jmax + 1, complex)
    obstructions = {}
    for j in range(jmax + 1):
        if j in seed and j not in resonances:
            c[j] = seed[j]
            continue
        t = 0.0 + 0.0j
        for q in range(1, j + 1):
            t += (w2[q] * (j - q + rho) + w3[q]) * c[j - q]
        if j in resonances:
            obstructions[j] = -t
            c[j] = seed.get(j, 0.0)
        elif j in seed:
            c[j] = seed[j]
        else:
            c[j] = -t / phi(j)
    return obstructions


def oracle_obstructions(problem, ctx, params, k):
    """(P1, P2, P3) at puncture k by direct series substitution."""
    pk = problem.punctures[k]
    n1, n2 = pk.n1, pk.n2
    jmax = n1 + n2 + 2
    rho = -float(pk.gamma1)
    w2, w3 = _w_series(problem, ctx, params, k, jmax)
    res = {n1 + 1, jmax}
    outA = _push_series(w2, w3, rho, jmax, res, {0: 1.0})
    outB = _push_series(w2, w3, rho, jmax, res, {0: 0.0, n1 + 1: 1.0})
    return outA[n1 + 1], outB[jmax], outA[jmax]


def oracle_residual(problem, ctx, params):
    """Full residual vector in the package's ordering."""
    out = [sum(params.Bk), sum(params.A)]
    for k in range(len(problem.punctures)):
        out.extend(oracle_obstructions(problem, ctx, params, k))
    return np.array(out, complex)
