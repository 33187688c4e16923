"""Pure-Python kernels: exact and mod-p^k matrix primitives.

Reference implementations of the hot operations; the compiled module in
``_core.pyx`` mirrors these semantics exactly and tests cross-validate the two.
All matrices are lists of lists of Python ints, row-major.
"""


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul_mod(a, b, q):
    """Product a*b with entries reduced into [0, q)."""
    m = len(a)
    inner = len(b)
    ncols = len(b[0]) if inner else 0
    bt = [[b[t][j] for t in range(inner)] for j in range(ncols)]
    out = []
    for i in range(m):
        ai = a[i]
        row = []
        for j in range(ncols):
            bj = bt[j]
            acc = 0
            for t in range(inner):
                acc += ai[t] * bj[t]
            row.append(acc % q)
        out.append(row)
    return out


def matmul_int(a, b):
    """Exact integer product a*b."""
    m = len(a)
    inner = len(b)
    ncols = len(b[0]) if inner else 0
    bt = [[b[t][j] for t in range(inner)] for j in range(ncols)]
    out = []
    for i in range(m):
        ai = a[i]
        row = []
        for j in range(ncols):
            bj = bt[j]
            acc = 0
            for t in range(inner):
                acc += ai[t] * bj[t]
            row.append(acc)
        out.append(row)
    return out


def _nearest_quotient(x, d):
    # d > 0; quotient f minimizing |x - f*d|
    f, r = divmod(x, d)
    if 2 * r > d:
        f += 1
    return f


def int_snf(a, want_u=False, want_v=False, want_vinv=False):
    """Exact integer Smith normal form.

    Returns (diag, U, V, Vinv) with U*A*V = diag(diag), U and V unimodular,
    diag nonnegative with each entry dividing the next. Transforms not
    requested come back as None. Pivots are chosen with minimal absolute
    value to limit entry growth.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    A = [row[:] for row in a]
    U = _identity(m) if want_u else None
    V = _identity(n) if want_v else None
    Vinv = _identity(n) if want_vinv else None
    diag = []
    t = 0
    while t < m and t < n:
        piv = None
        best = None
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                x = Ai[j]
                if x:
                    ax = -x if x < 0 else x
                    if best is None or ax < best:
                        best = ax
                        piv = (i, j)
                        if ax == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        pi, pj = piv
        if pi != t:
            A[t], A[pi] = A[pi], A[t]
            if want_u:
                U[t], U[pi] = U[pi], U[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
            if want_v:
                for row in V:
                    row[t], row[pj] = row[pj], row[t]
            if want_vinv:
                Vinv[t], Vinv[pj] = Vinv[pj], Vinv[t]
        while True:
            if A[t][t] < 0:
                A[t] = [-x for x in A[t]]
                if want_u:
                    U[t] = [-x for x in U[t]]
            # clear column t
            redo = False
            while True:
                d = A[t][t]
                worst = None
                for i in range(t + 1, m):
                    x = A[i][t]
                    if x:
                        f = _nearest_quotient(x, d)
                        if f:
                            Ai, At = A[i], A[t]
                            for j in range(t, n):
                                Ai[j] -= f * At[j]
                            if want_u:
                                Ui, Ut = U[i], U[t]
                                for j in range(m):
                                    Ui[j] -= f * Ut[j]
                        if A[i][t]:
                            r = abs(A[i][t])
                            if worst is None or r < worst[0]:
                                worst = (r, i)
                if worst is None:
                    break
                i = worst[1]
                A[t], A[i] = A[i], A[t]
                if want_u:
                    U[t], U[i] = U[i], U[t]
                if A[t][t] < 0:
                    A[t] = [-x for x in A[t]]
                    if want_u:
                        U[t] = [-x for x in U[t]]
            # clear row t; column ops leave column t untouched
            while True:
                d = A[t][t]
                worst = None
                for j in range(t + 1, n):
                    x = A[t][j]
                    if x:
                        f = _nearest_quotient(x, d)
                        if f:
                            for row in A:
                                row[j] -= f * row[t]
                            if want_v:
                                for row in V:
                                    row[j] -= f * row[t]
                            if want_vinv:
                                Vt, Vj = Vinv[t], Vinv[j]
                                for c in range(n):
                                    Vt[c] += f * Vj[c]
                        if A[t][j]:
                            r = abs(A[t][j])
                            if worst is None or r < worst[0]:
                                worst = (r, j)
                if worst is None:
                    break
                j = worst[1]
                for row in A:
                    row[t], row[j] = row[j], row[t]
                if want_v:
                    for row in V:
                        row[t], row[j] = row[j], row[t]
                if want_vinv:
                    Vinv[t], Vinv[j] = Vinv[j], Vinv[t]
                if A[t][t] < 0:
                    A[t] = [-x for x in A[t]]
                    if want_u:
                        U[t] = [-x for x in U[t]]
                redo = True
            if redo:
                # row clearing may have reintroduced entries in column t
                continue
            d = A[t][t]
            offender = None
            if d != 1:
                for i in range(t + 1, m):
                    Ai = A[i]
                    for j in range(t + 1, n):
                        if Ai[j] % d:
                            offender = i
                            break
                    if offender is not None:
                        break
            if offender is None:
                break
            Ao, At = A[offender], A[t]
            for j in range(t, n):
                At[j] += Ao[j]
            if want_u:
                Uo, Ut = U[offender], U[t]
                for j in range(m):
                    Ut[j] += Uo[j]
        diag.append(A[t][t])
        t += 1
    return diag, U, V, Vinv


def _valuation_bounded(x, p, k):
    # valuation of the residue x in (0, p^k); returns k for x == 0
    if x == 0:
        return k
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def local_snf(a, p, k, want_u=False, want_uinv=False, want_v=False, want_vinv=False):
    """Smith normal form over Z/p^k.

    Returns (vals, U, Uinv, V, Vinv) where U*A*V = diag(p^vals[i]) mod p^k,
    U and V invertible mod p^k with the stated inverses, and vals is
    nondecreasing of length min(m, n) (value k stands for a zero diagonal
    entry). Pivoting selects a minimal-valuation entry, so each elimination
    step zeroes its row and column exactly in one pass.
    """
    q = p ** k
    m = len(a)
    n = len(a[0]) if m else 0
    A = [[x % q for x in row] for row in a]
    U = _identity(m) if want_u else None
    Uinv = _identity(m) if want_uinv else None
    V = _identity(n) if want_v else None
    Vinv = _identity(n) if want_vinv else None
    vals = []
    t = 0
    while t < m and t < n:
        piv = None
        best = k
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                x = Ai[j]
                if x:
                    v = _valuation_bounded(x, p, k)
                    if v < best:
                        best = v
                        piv = (i, j)
                        if v == 0:
                            break
            if best == 0:
                break
        if piv is None:
            break
        pi, pj = piv
        if pi != t:
            A[t], A[pi] = A[pi], A[t]
            if want_u:
                U[t], U[pi] = U[pi], U[t]
            if want_uinv:
                for row in Uinv:
                    row[t], row[pi] = row[pi], row[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
            if want_v:
                for row in V:
                    row[t], row[pj] = row[pj], row[t]
            if want_vinv:
                Vinv[t], Vinv[pj] = Vinv[pj], Vinv[t]
        v = best
        pv = p ** v
        w = A[t][t] // pv
        winv = pow(w, -1, q)
        A[t] = [x * winv % q for x in A[t]]
        if want_u:
            U[t] = [x * winv % q for x in U[t]]
        if want_uinv:
            for row in Uinv:
                row[t] = row[t] * w % q
        for i in range(t + 1, m):
            x = A[i][t]
            if x:
                f = x // pv
                Ai, At = A[i], A[t]
                for j in range(t, n):
                    Ai[j] = (Ai[j] - f * At[j]) % q
                if want_u:
                    Ui, Ut = U[i], U[t]
                    for j in range(m):
                        Ui[j] = (Ui[j] - f * Ut[j]) % q
                if want_uinv:
                    for row in Uinv:
                        row[t] = (row[t] + f * row[i]) % q
        for j in range(t + 1, n):
            x = A[t][j]
            if x:
                f = x // pv
                for row in A:
                    row[j] = (row[j] - f * row[t]) % q
                if want_v:
                    for row in V:
                        row[j] = (row[j] - f * row[t]) % q
                if want_vinv:
                    Vt, Vj = Vinv[t], Vinv[j]
                    for c in range(n):
                        Vt[c] = (Vt[c] + f * Vj[c]) % q
        vals.append(v)
        t += 1
    while len(vals) < min(m, n):
        vals.append(k)
    return vals, U, Uinv, V, Vinv
