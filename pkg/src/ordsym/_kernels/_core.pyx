# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; exact mirror of the pure-Python reference in _py.py.

Word-size contract: the dispatcher only routes here when moduli and input
entries fit well inside int64. Exact integer elimination additionally guards
every intermediate and raises OverflowError so the caller can fall back to
arbitrary precision.
"""

import numpy as np

cimport numpy as cnp

cdef extern from *:
    ctypedef long long i128 "__int128"

ctypedef cnp.int64_t i64

cdef i64 I64_LIM = (<i64>1) << 62


cdef inline i64 _chk(i128 x) except? -9223372036854775807:
    if x >= I64_LIM or x <= -I64_LIM:
        raise OverflowError("int64 overflow in exact elimination")
    return <i64>x


cdef inline i64 _mod(i128 x, i64 q):
    cdef i64 r = <i64>(x % q)
    if r < 0:
        r += q
    return r


cdef inline i64 _nearest_q(i64 x, i64 d):
    # d > 0; quotient minimizing the remainder's absolute value
    cdef i64 f = x / d
    cdef i64 r = x - f * d
    if r < 0:
        f -= 1
        r += d
    if 2 * r > d:
        f += 1
    return f


cdef i64 _inv_mod(i64 a, i64 q):
    cdef i64 old_r = a % q, r = q
    cdef i64 old_s = 1, s = 0
    cdef i64 quo, tmp
    if old_r < 0:
        old_r += q
    while r != 0:
        quo = old_r / r
        tmp = old_r - quo * r
        old_r = r
        r = tmp
        tmp = old_s - quo * s
        old_s = s
        s = tmp
    old_s %= q
    if old_s < 0:
        old_s += q
    return old_s


def matmul_mod(a, b, long long q):
    cdef cnp.ndarray[i64, ndim=2] A = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] BT = np.ascontiguousarray(
        np.asarray(b, dtype=np.int64).T
    )
    cdef Py_ssize_t m = A.shape[0], inner = A.shape[1], n = BT.shape[0]
    cdef cnp.ndarray[i64, ndim=2] C = np.zeros((m, n), dtype=np.int64)
    cdef i128 acc, thresh = (<i128>1) << 126
    cdef Py_ssize_t i, j, t
    for i in range(m):
        for j in range(n):
            acc = 0
            for t in range(inner):
                acc += <i128>A[i, t] * BT[j, t]
                if acc >= thresh or acc <= -thresh:
                    acc = acc % q
            C[i, j] = _mod(acc, q)
    return C.tolist()


def matmul_int(a, b):
    cdef cnp.ndarray[i64, ndim=2] A = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] BT = np.ascontiguousarray(
        np.asarray(b, dtype=np.int64).T
    )
    cdef Py_ssize_t m = A.shape[0], inner = A.shape[1], n = BT.shape[0]
    cdef cnp.ndarray[i64, ndim=2] C = np.zeros((m, n), dtype=np.int64)
    cdef i128 acc
    cdef Py_ssize_t i, j, t
    for i in range(m):
        for j in range(n):
            acc = 0
            for t in range(inner):
                acc += <i128>A[i, t] * BT[j, t]
            C[i, j] = _chk(acc)
    return C.tolist()


def int_snf(a, bint want_u, bint want_v, bint want_vinv):
    cdef cnp.ndarray[i64, ndim=2] A = np.array(a, dtype=np.int64)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef cnp.ndarray[i64, ndim=2] U = np.eye(m if want_u else 1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] V = np.eye(n if want_v else 1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] Vi = np.eye(n if want_vinv else 1, dtype=np.int64)
    cdef Py_ssize_t t = 0, i, j, pi, pj, worst_i, worst_j, offender
    cdef i64 x, ax, best, d, f, r, worst
    cdef bint found, redo
    diag = []
    while t < m and t < n:
        best = 0
        pi = -1
        pj = -1
        found = False
        for i in range(t, m):
            for j in range(t, n):
                x = A[i, j]
                if x != 0:
                    ax = -x if x < 0 else x
                    if not found or ax < best:
                        found = True
                        best = ax
                        pi = i
                        pj = j
                        if ax == 1:
                            break
            if found and best == 1:
                break
        if not found:
            break
        if pi != t:
            for j in range(n):
                x = A[t, j]; A[t, j] = A[pi, j]; A[pi, j] = x
            if want_u:
                for j in range(m):
                    x = U[t, j]; U[t, j] = U[pi, j]; U[pi, j] = x
        if pj != t:
            for i in range(m):
                x = A[i, t]; A[i, t] = A[i, pj]; A[i, pj] = x
            if want_v:
                for i in range(n):
                    x = V[i, t]; V[i, t] = V[i, pj]; V[i, pj] = x
            if want_vinv:
                for j in range(n):
                    x = Vi[t, j]; Vi[t, j] = Vi[pj, j]; Vi[pj, j] = x
        while True:
            if A[t, t] < 0:
                for j in range(t, n):
                    A[t, j] = -A[t, j]
                if want_u:
                    for j in range(m):
                        U[t, j] = -U[t, j]
            redo = False
            # clear column t
            while True:
                d = A[t, t]
                worst = 0
                worst_i = -1
                for i in range(t + 1, m):
                    x = A[i, t]
                    if x != 0:
                        f = _nearest_q(x, d)
                        if f != 0:
                            for j in range(t, n):
                                A[i, j] = _chk(<i128>A[i, j] - <i128>f * A[t, j])
                            if want_u:
                                for j in range(m):
                                    U[i, j] = _chk(<i128>U[i, j] - <i128>f * U[t, j])
                        x = A[i, t]
                        if x != 0:
                            r = -x if x < 0 else x
                            if worst_i < 0 or r < worst:
                                worst = r
                                worst_i = i
                if worst_i < 0:
                    break
                for j in range(t, n):
                    x = A[t, j]; A[t, j] = A[worst_i, j]; A[worst_i, j] = x
                if want_u:
                    for j in range(m):
                        x = U[t, j]; U[t, j] = U[worst_i, j]; U[worst_i, j] = x
                if A[t, t] < 0:
                    for j in range(t, n):
                        A[t, j] = -A[t, j]
                    if want_u:
                        for j in range(m):
                            U[t, j] = -U[t, j]
            # clear row t
            while True:
                d = A[t, t]
                worst = 0
                worst_j = -1
                for j in range(t + 1, n):
                    x = A[t, j]
                    if x != 0:
                        f = _nearest_q(x, d)
                        if f != 0:
                            for i in range(m):
                                A[i, j] = _chk(<i128>A[i, j] - <i128>f * A[i, t])
                            if want_v:
                                for i in range(n):
                                    V[i, j] = _chk(<i128>V[i, j] - <i128>f * V[i, t])
                            if want_vinv:
                                for i in range(n):
                                    Vi[t, i] = _chk(<i128>Vi[t, i] + <i128>f * Vi[j, i])
                        x = A[t, j]
                        if x != 0:
                            r = -x if x < 0 else x
                            if worst_j < 0 or r < worst:
                                worst = r
                                worst_j = j
                if worst_j < 0:
                    break
                for i in range(m):
                    x = A[i, t]; A[i, t] = A[i, worst_j]; A[i, worst_j] = x
                if want_v:
                    for i in range(n):
                        x = V[i, t]; V[i, t] = V[i, worst_j]; V[i, worst_j] = x
                if want_vinv:
                    for j in range(n):
                        x = Vi[t, j]; Vi[t, j] = Vi[worst_j, j]; Vi[worst_j, j] = x
                if A[t, t] < 0:
                    for j in range(t, n):
                        A[t, j] = -A[t, j]
                    if want_u:
                        for j in range(m):
                            U[t, j] = -U[t, j]
                redo = True
            if redo:
                continue
            d = A[t, t]
            offender = -1
            if d != 1:
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i, j] % d != 0:
                            offender = i
                            break
                    if offender >= 0:
                        break
            if offender < 0:
                break
            for j in range(t, n):
                A[t, j] = _chk(<i128>A[t, j] + <i128>A[offender, j])
            if want_u:
                for j in range(m):
                    U[t, j] = _chk(<i128>U[t, j] + <i128>U[offender, j])
        diag.append(int(A[t, t]))
        t += 1
    return (
        diag,
        U.tolist() if want_u else None,
        V.tolist() if want_v else None,
        Vi.tolist() if want_vinv else None,
    )


def local_snf(a, long long p, long long k, bint want_u, bint want_uinv,
              bint want_v, bint want_vinv):
    cdef i64 q = 1
    cdef Py_ssize_t e
    for e in range(k):
        q *= p
    cdef cnp.ndarray[i64, ndim=2] A0 = np.array(a, dtype=np.int64)
    cdef Py_ssize_t m = A0.shape[0], n = A0.shape[1]
    cdef cnp.ndarray[i64, ndim=2] A = np.mod(A0, q)
    cdef cnp.ndarray[i64, ndim=2] U = np.eye(m if want_u else 1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] Ui = np.eye(m if want_uinv else 1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] V = np.eye(n if want_v else 1, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=2] Vi = np.eye(n if want_vinv else 1, dtype=np.int64)
    cdef Py_ssize_t t = 0, i, j, pi, pj
    cdef i64 x, v, best, pv, w, winv, f
    cdef bint found
    vals = []
    while t < m and t < n:
        best = k
        pi = -1
        pj = -1
        found = False
        for i in range(t, m):
            for j in range(t, n):
                x = A[i, j]
                if x != 0:
                    v = 0
                    while x % p == 0:
                        x = x / p
                        v += 1
                    if not found or v < best:
                        found = True
                        best = v
                        pi = i
                        pj = j
                        if v == 0:
                            break
            if found and best == 0:
                break
        if not found:
            break
        if pi != t:
            for j in range(n):
                x = A[t, j]; A[t, j] = A[pi, j]; A[pi, j] = x
            if want_u:
                for j in range(m):
                    x = U[t, j]; U[t, j] = U[pi, j]; U[pi, j] = x
            if want_uinv:
                for i in range(m):
                    x = Ui[i, t]; Ui[i, t] = Ui[i, pi]; Ui[i, pi] = x
        if pj != t:
            for i in range(m):
                x = A[i, t]; A[i, t] = A[i, pj]; A[i, pj] = x
            if want_v:
                for i in range(n):
                    x = V[i, t]; V[i, t] = V[i, pj]; V[i, pj] = x
            if want_vinv:
                for j in range(n):
                    x = Vi[t, j]; Vi[t, j] = Vi[pj, j]; Vi[pj, j] = x
        v = best
        pv = 1
        for e in range(v):
            pv *= p
        w = A[t, t] / pv
        winv = _inv_mod(w, q)
        for j in range(n):
            A[t, j] = _mod(<i128>A[t, j] * winv, q)
        if want_u:
            for j in range(m):
                U[t, j] = _mod(<i128>U[t, j] * winv, q)
        if want_uinv:
            for i in range(m):
                Ui[i, t] = _mod(<i128>Ui[i, t] * w, q)
        for i in range(t + 1, m):
            x = A[i, t]
            if x != 0:
                f = x / pv
                for j in range(t, n):
                    A[i, j] = _mod(<i128>A[i, j] - <i128>f * A[t, j], q)
                if want_u:
                    for j in range(m):
                        U[i, j] = _mod(<i128>U[i, j] - <i128>f * U[t, j], q)
                if want_uinv:
                    for j in range(m):
                        Ui[j, t] = _mod(<i128>Ui[j, t] + <i128>f * Ui[j, i], q)
        for j in range(t + 1, n):
            x = A[t, j]
            if x != 0:
                f = x / pv
                for i in range(m):
                    A[i, j] = _mod(<i128>A[i, j] - <i128>f * A[i, t], q)
                if want_v:
                    for i in range(n):
                        V[i, j] = _mod(<i128>V[i, j] - <i128>f * V[i, t], q)
                if want_vinv:
                    for i in range(n):
                        Vi[t, i] = _mod(<i128>Vi[t, i] + <i128>f * Vi[j, i], q)
        vals.append(int(v))
        t += 1
    while len(vals) < min(m, n):
        vals.append(int(k))
    return (
        vals,
        U.tolist() if want_u else None,
        Ui.tolist() if want_uinv else None,
        V.tolist() if want_v else None,
        Vi.tolist() if want_vinv else None,
    )
