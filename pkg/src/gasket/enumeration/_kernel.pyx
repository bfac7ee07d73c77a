# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled depth-first ball counting over integer-lifted generators.

Node matrices are stored as ``X = D * A_I`` with 64-bit entries.  A child
is ``X_j @ X / D``; the division must be exact.  Callers guarantee that
no product can overflow (see ``engine._overflow_safe``).
"""
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy

ctypedef long long ll

cdef enum:
    OK = 0
    CERT_FAIL = 1
    BUDGET = 2
    INEXACT = 3
    NONPOSITIVE = 4
    NOMEM = 5


cdef inline ll llabs(ll x) nogil:
    return -x if x < 0 else x


cdef int _grow(ll** re, ll** im, int** nxt, Py_ssize_t* cap, int nn, bint cplx) noexcept nogil:
    cdef Py_ssize_t newcap = cap[0] * 2
    cdef ll* r2 = <ll*> realloc(re[0], newcap * nn * sizeof(ll))
    if r2 == NULL:
        return NOMEM
    re[0] = r2
    if cplx:
        r2 = <ll*> realloc(im[0], newcap * nn * sizeof(ll))
        if r2 == NULL:
            return NOMEM
        im[0] = r2
    cdef int* n2 = <int*> realloc(nxt[0], newcap * sizeof(int))
    if n2 == NULL:
        return NOMEM
    nxt[0] = n2
    cap[0] = newcap
    return OK


cdef int _dfs(int n, int m, const ll* gre, const ll* gim, ll D,
              const ll* root_re, const ll* root_im, bint cplx,
              int target_kind, const ll* v, const ll* w, ll c1n, ll c1d,
              const ll* thr, int nthr, bint strict, int dom_pos, int dom_row, ll budget,
              ll* hist, ll* out_nodes, Py_ssize_t* out_depth) noexcept nogil:
    cdef int nn = n * n
    cdef Py_ssize_t cap = 256
    cdef ll* sre = <ll*> malloc(cap * nn * sizeof(ll))
    cdef ll* sim = NULL
    cdef int* nxt = <int*> malloc(cap * sizeof(int))
    if cplx:
        sim = <ll*> malloc(cap * nn * sizeof(ll))
    if sre == NULL or nxt == NULL or (cplx and sim == NULL):
        free(sre); free(sim); free(nxt)
        return NOMEM

    cdef ll nodes = 0
    cdef ll T = thr[nthr - 1]
    cdef int q
    cdef Py_ssize_t sp, top, maxdepth = 0
    cdef int status = OK
    cdef int i, k, l, j
    cdef ll ar, ai, gr, gi, pr, pi, s, val, t, mx
    cdef ll* cr
    cdef ll* ci
    cdef const ll* pre
    cdef const ll* pim
    cdef bint prune, counted

    memcpy(sre, root_re, nn * sizeof(ll))
    if cplx:
        memcpy(sim, root_im, nn * sizeof(ll))
    nxt[0] = 0
    sp = 1

    while sp > 0:
        top = sp - 1
        j = nxt[top]
        if j == m:
            sp -= 1
            continue
        nxt[top] = j + 1
        if sp == cap:
            status = _grow(&sre, &sim, &nxt, &cap, nn, cplx)
            if status != OK:
                break
        cr = sre + sp * nn
        pre = sre + top * nn
        if cplx:
            ci = sim + sp * nn
            pim = sim + top * nn
        # child = G_j @ parent / D
        for i in range(n):
            for k in range(n):
                ar = 0
                ai = 0
                for l in range(n):
                    gr = gre[j * nn + i * n + l]
                    pr = pre[l * n + k]
                    if cplx:
                        gi = gim[j * nn + i * n + l]
                        pi = pim[l * n + k]
                        ar += gr * pr - gi * pi
                        ai += gr * pi + gi * pr
                    else:
                        ar += gr * pr
                if D != 1:
                    if ar % D != 0 or ai % D != 0:
                        status = INEXACT
                        break
                    ar = ar / D
                    ai = ai / D
                cr[i * n + k] = ar
                if cplx:
                    ci[i * n + k] = ai
            if status != OK:
                break
        if status != OK:
            break
        nodes += 1
        if nodes > budget:
            status = BUDGET
            break

        # search norm: max modulus (squared for complex entries)
        s = 0
        for i in range(nn):
            if cplx:
                val = cr[i] * cr[i] + ci[i] * ci[i]
            else:
                val = llabs(cr[i])
            if val > s:
                s = val

        if dom_pos >= 0:
            if cplx:
                val = cr[dom_pos] * cr[dom_pos] + ci[dom_pos] * ci[dom_pos]
            else:
                val = llabs(cr[dom_pos])
            if val != s:
                status = CERT_FAIL
                break
        if dom_row >= 0:
            for k in range(n):
                mx = cr[dom_row * n + k]
                for i in range(n):
                    if cr[i * n + k] > mx:
                        status = CERT_FAIL
                if status != OK:
                    break
            if status != OK:
                break

        if target_kind == 1:
            t = 0
            for i in range(n):
                for k in range(n):
                    t += cr[i * n + k] * v[i] * w[k]
            if t <= 0:
                status = NONPOSITIVE
                break
            if c1d * t < c1n * s:
                status = CERT_FAIL
                break
        else:
            t = s

        if strict:
            prune = c1n * s >= c1d * T
            counted = t < T
        else:
            prune = c1n * s > c1d * T
            counted = t <= T
        if prune:
            continue
        if counted:
            # bucket = smallest threshold index still admitting the node
            q = nthr - 1
            if strict:
                while q > 0 and t < thr[q - 1]:
                    q -= 1
            else:
                while q > 0 and t <= thr[q - 1]:
                    q -= 1
            hist[q] += 1
        nxt[sp] = 0
        sp += 1
        if sp > maxdepth:
            maxdepth = sp

    free(sre); free(sim); free(nxt)
    out_nodes[0] = nodes
    out_depth[0] = maxdepth
    return status


def count_subtree(ll[:, ::1] gre, ll[:, ::1] gim, ll D,
                  ll[::1] root_re, ll[::1] root_im, bint cplx,
                  int target_kind, ll[::1] v, ll[::1] w, ll c1n, ll c1d,
                  ll[::1] thresholds, bint strict, int dom_pos, int dom_row,
                  ll budget, ll[::1] hist):
    """Histogram the proper descendants of ``root`` by threshold bucket.

    ``gre``/``gim`` have shape ``(m, n*n)``; ``thresholds`` is ascending
    and the largest one bounds the search.  A node counted for threshold
    ``q`` is added to ``hist[q]`` for the smallest such ``q``.  Returns
    ``(nodes, status, max_depth)``.
    """
    cdef int m = gre.shape[0]
    cdef int nn = gre.shape[1]
    cdef int n = 1
    while n * n < nn:
        n += 1
    cdef ll nodes = 0
    cdef Py_ssize_t depth = 0
    cdef int nthr = thresholds.shape[0]
    cdef int status
    cdef const ll* gi_ptr = &gre[0, 0]
    cdef const ll* ri_ptr = &root_re[0]
    if cplx:
        gi_ptr = &gim[0, 0]
        ri_ptr = &root_im[0]
    cdef const ll* vp = &v[0]
    cdef const ll* wp = &w[0]
    with nogil:
        status = _dfs(n, m, &gre[0, 0], gi_ptr, D, &root_re[0], ri_ptr, cplx,
                      target_kind, vp, wp, c1n, c1d, &thresholds[0], nthr, strict,
                      dom_pos, dom_row, budget, &hist[0], &nodes, &depth)
    return nodes, status, depth
