"""Pure-Python twin of the compiled kernel (same arguments, same results).

Uses Python integers, so it never overflows; it is the fallback when the
extension is unavailable and the path taken for very large thresholds.
"""
from __future__ import annotations

OK, CERT_FAIL, BUDGET, INEXACT, NONPOSITIVE = 0, 1, 2, 3, 4


def count_subtree(gre, gim, D, root_re, root_im, cplx, target_kind, v, w,
                  c1n, c1d, thresholds, strict, dom_pos, dom_row, budget, hist):
    m = len(gre)
    nn = len(gre[0])
    n = int(round(nn ** 0.5))
    gens = [([int(x) for x in gre[j]], [int(x) for x in gim[j]] if cplx else None)
            for j in range(m)]
    v = [int(x) for x in v]
    w = [int(x) for x in w]
    D, c1n, c1d = int(D), int(c1n), int(c1d)
    thr = [int(x) for x in thresholds]
    T = thr[-1]

    nodes = 0
    maxdepth = 0
    # stack of (re, im, next generator)
    stack = [([int(x) for x in root_re], [int(x) for x in root_im] if cplx else None)]
    nxt = [0]
    while stack:
        j = nxt[-1]
        if j == m:
            stack.pop()
            nxt.pop()
            continue
        nxt[-1] = j + 1
        pre, pim = stack[-1]
        g_re, g_im = gens[j]
        cre = [0] * nn
        cim = [0] * nn if cplx else None
        for i in range(n):
            for k in range(n):
                ar = ai = 0
                for l in range(n):
                    gr, pr = g_re[i * n + l], pre[l * n + k]
                    if cplx:
                        gi, pi = g_im[i * n + l], pim[l * n + k]
                        ar += gr * pr - gi * pi
                        ai += gr * pi + gi * pr
                    else:
                        ar += gr * pr
                if D != 1:
                    if ar % D or ai % D:
                        return nodes, INEXACT, maxdepth
                    ar //= D
                    ai //= D
                cre[i * n + k] = ar
                if cplx:
                    cim[i * n + k] = ai
        nodes += 1
        if nodes > budget:
            return nodes, BUDGET, maxdepth

        if cplx:
            mods = [a * a + b * b for a, b in zip(cre, cim)]
        else:
            mods = [abs(a) for a in cre]
        s = max(mods)
        if dom_pos >= 0 and mods[dom_pos] != s:
            return nodes, CERT_FAIL, maxdepth
        if dom_row >= 0:
            for k in range(n):
                top = cre[dom_row * n + k]
                if any(cre[i * n + k] > top for i in range(n)):
                    return nodes, CERT_FAIL, maxdepth
        if target_kind == 1:
            t = sum(cre[i * n + k] * v[i] * w[k] for i in range(n) for k in range(n))
            if t <= 0:
                return nodes, NONPOSITIVE, maxdepth
            if c1d * t < c1n * s:
                return nodes, CERT_FAIL, maxdepth
        else:
            t = s
        if strict:
            prune, counted = c1n * s >= c1d * T, t < T
        else:
            prune, counted = c1n * s > c1d * T, t <= T
        if prune:
            continue
        if counted:
            q = len(thr) - 1
            if strict:
                while q > 0 and t < thr[q - 1]:
                    q -= 1
            else:
                while q > 0 and t <= thr[q - 1]:
                    q -= 1
            hist[q] += 1
        stack.append((cre, cim))
        nxt.append(0)
        maxdepth = max(maxdepth, len(stack))
    return nodes, OK, maxdepth
