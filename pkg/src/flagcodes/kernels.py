"""Hot GF(q) kernels on integer-encoded matrices.

Every field is handed to the kernels as four lookup tables ``add``, ``neg``,
``mul``, ``inv`` over the integer encodings ``0..q-1``, so one kernel serves
prime and extension fields alike.  Each kernel exists twice:

* ``*_loop``: scalar loops, compiled with numba when available;
* ``*_numpy``: vectorised numpy built on fancy indexing into the tables.

The public names (``rref``, ``rank``, ``batch_rank``, ...) dispatch to one of
the two at import time according to ``FLAGCODES_NUMBA``.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# chunk size for the numpy pairwise scan (pairs per batched elimination)
_PAIR_CHUNK = 4096


# ---------------------------------------------------------------------------
# loop kernels
# ---------------------------------------------------------------------------


@njit
def rref_loop(M, add, neg, mul, inv):
    R = M.copy()
    rows, cols = R.shape
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if R[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(cols):
                t = R[r, j]
                R[r, j] = R[p, j]
                R[p, j] = t
        s = inv[R[r, c]]
        if s != 1:
            for j in range(c, cols):
                R[r, j] = mul[s, R[r, j]]
        for i in range(rows):
            if i == r:
                continue
            f = R[i, c]
            if f == 0:
                continue
            nf = neg[f]
            for j in range(c, cols):
                R[i, j] = add[R[i, j], mul[nf, R[r, j]]]
        pivots[r] = c
        r += 1
    return R, pivots[:r].copy()


@njit
def _rank_inplace(R, add, neg, mul, inv):
    rows, cols = R.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if R[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(c, cols):
                t = R[r, j]
                R[r, j] = R[p, j]
                R[p, j] = t
        s = inv[R[r, c]]
        for i in range(r + 1, rows):
            f = R[i, c]
            if f == 0:
                continue
            nf = neg[mul[f, s]]
            for j in range(c, cols):
                R[i, j] = add[R[i, j], mul[nf, R[r, j]]]
        r += 1
    return r


@njit
def rank_loop(M, add, neg, mul, inv):
    return _rank_inplace(M.copy(), add, neg, mul, inv)


@njit
def batch_rank_loop(stack, add, neg, mul, inv):
    out = np.empty(stack.shape[0], dtype=np.int64)
    for b in range(stack.shape[0]):
        out[b] = _rank_inplace(stack[b].copy(), add, neg, mul, inv)
    return out


@njit
def matmul_loop(A, B, add, mul):
    r, k = A.shape
    c = B.shape[1]
    C = np.zeros((r, c), dtype=np.int64)
    for i in range(r):
        for t in range(k):
            a = A[i, t]
            if a == 0:
                continue
            for j in range(c):
                C[i, j] = add[C[i, j], mul[a, B[t, j]]]
    return C


@njit
def _insert_row(E, pc, size, v, add, neg, mul, inv):
    # E[:size] is an echelon basis with unit pivots at pc[:size]; each row was
    # reduced against its predecessors, so one pass in insertion order suffices
    n = v.shape[0]
    for b in range(size):
        f = v[pc[b]]
        if f == 0:
            continue
        nf = neg[f]
        for j in range(n):
            v[j] = add[v[j], mul[nf, E[b, j]]]
    for j in range(n):
        if v[j] != 0:
            s = inv[v[j]]
            for t in range(n):
                E[size, t] = mul[s, v[t]]
            pc[size] = j
            return size + 1
    return size


@njit
def _prefix_stack_ranks(X, dX, Y, dY, E, pc, v, out, add, neg, mul, inv):
    # out[i] = rank of rows X[:dX[i]] stacked on Y[:dY[i]]; dX, dY non-decreasing
    size = 0
    nx = 0
    ny = 0
    for i in range(dX.shape[0]):
        while nx < dX[i]:
            v[:] = X[nx]
            size = _insert_row(E, pc, size, v, add, neg, mul, inv)
            nx += 1
        while ny < dY[i]:
            v[:] = Y[ny]
            size = _insert_row(E, pc, size, v, add, neg, mul, inv)
            ny += 1
        out[i] = size


@njit
def pairwise_min_distance_loop(bases, dims, add, neg, mul, inv):
    """Minimum of sum_i (rank[X_i; Y_i] - d_i) over unordered distinct pairs.

    Returns ``(dmin, i, j)``; ``dmin`` is -1 when fewer than two codewords.
    """
    N = bases.shape[0]
    n = bases.shape[2]
    m = dims.shape[0]
    E = np.zeros((2 * n, n), dtype=np.int64)
    pc = np.zeros(2 * n, dtype=np.int64)
    v = np.zeros(n, dtype=np.int64)
    ranks = np.zeros(m, dtype=np.int64)
    total = 0
    for i in range(m):
        total += dims[i]
    best = -1
    bi = -1
    bj = -1
    for a in range(N):
        for b in range(a + 1, N):
            _prefix_stack_ranks(bases[a], dims, bases[b], dims, E, pc, v, ranks, add, neg, mul, inv)
            d = -total
            for i in range(m):
                d += ranks[i]
            if best < 0 or d < best:
                best = d
                bi = a
                bj = b
    return best, bi, bj


@njit
def error_counts_loop(bases, dims, Y, dY, add, neg, mul, inv):
    """sum_i dim(V_i + W_i) - dim(V_i & W_i) of every codeword against one received chain."""
    N = bases.shape[0]
    n = bases.shape[2]
    m = dims.shape[0]
    E = np.zeros((bases.shape[1] + Y.shape[0] + 1, n), dtype=np.int64)
    pc = np.zeros(E.shape[0], dtype=np.int64)
    v = np.zeros(n, dtype=np.int64)
    ranks = np.zeros(m, dtype=np.int64)
    out = np.empty(N, dtype=np.int64)
    for a in range(N):
        _prefix_stack_ranks(bases[a], dims, Y, dY, E, pc, v, ranks, add, neg, mul, inv)
        s = 0
        for i in range(m):
            s += 2 * ranks[i] - dims[i] - dY[i]
        out[a] = s
    return out


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------


def rref_numpy(M, add, neg, mul, inv):
    R = np.array(M, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = mul[inv[R[r, c]], R[r]]
        f = neg[R[:, c]]
        f[r] = 0
        R = add[R, mul[f[:, None], R[r][None, :]]]
        pivots.append(c)
        r += 1
    return R, np.array(pivots, dtype=np.int64)


def batch_rank_numpy(stack, add, neg, mul, inv):
    S = np.array(stack, dtype=np.int64, copy=True)
    B, rows, cols = S.shape
    rank = np.zeros(B, dtype=np.int64)
    if B == 0 or rows == 0:
        return rank
    rowidx = np.arange(rows)
    for c in range(cols):
        cand = (S[:, :, c] != 0) & (rowidx[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        b = np.flatnonzero(has)
        p = np.argmax(cand[b], axis=1)
        r = rank[b]
        top = S[b, p].copy()
        S[b, p] = S[b, r]
        top = mul[inv[top[:, c]][:, None], top]
        S[b, r] = top
        f = neg[S[b, :, c]]
        f = np.where(rowidx[None, :] > r[:, None], f, 0)
        S[b] = add[S[b], mul[f[:, :, None], top[:, None, :]]]
        rank[b] += 1
    return rank


def rank_numpy(M, add, neg, mul, inv):
    M = np.asarray(M, dtype=np.int64)
    return int(batch_rank_numpy(M[None], add, neg, mul, inv)[0])


def matmul_numpy(A, B, add, mul):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    P = mul[A[:, :, None], B[None, :, :]]
    acc = P[:, 0, :]
    for t in range(1, A.shape[1]):
        acc = add[acc, P[:, t, :]]
    return np.ascontiguousarray(acc)


def _stacked_prefix_ranks_numpy(X, dX, Y, dY, add, neg, mul, inv):
    # X: (B, *, n), Y: (B, *, n); returns (B, m) ranks of stacked prefixes
    B = X.shape[0]
    n = X.shape[2]
    out = np.zeros((B, len(dX)), dtype=np.int64)
    for i, (a, b) in enumerate(zip(dX, dY)):
        if a + b == 0:
            continue
        stack = np.concatenate([X[:, :a, :], Y[:, :b, :]], axis=1).reshape(B, a + b, n)
        out[:, i] = batch_rank_numpy(stack, add, neg, mul, inv)
    return out


def pairwise_min_distance_numpy(bases, dims, add, neg, mul, inv):
    N = bases.shape[0]
    if N < 2:
        return -1, -1, -1
    dims = np.asarray(dims, dtype=np.int64)
    ia, ib = np.triu_indices(N, k=1)
    best, bi, bj = -1, -1, -1
    for lo in range(0, ia.size, _PAIR_CHUNK):
        a = ia[lo:lo + _PAIR_CHUNK]
        b = ib[lo:lo + _PAIR_CHUNK]
        ranks = _stacked_prefix_ranks_numpy(bases[a], dims, bases[b], dims, add, neg, mul, inv)
        d = ranks.sum(axis=1) - dims.sum()
        k = int(np.argmin(d))
        if best < 0 or d[k] < best:
            best, bi, bj = int(d[k]), int(a[k]), int(b[k])
    return best, bi, bj


def error_counts_numpy(bases, dims, Y, dY, add, neg, mul, inv):
    N = bases.shape[0]
    dims = np.asarray(dims, dtype=np.int64)
    dY = np.asarray(dY, dtype=np.int64)
    Ys = np.broadcast_to(Y, (N,) + Y.shape)
    ranks = _stacked_prefix_ranks_numpy(bases, dims, Ys, dY, add, neg, mul, inv)
    return (2 * ranks - dims[None, :] - dY[None, :]).sum(axis=1)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    rref = rref_loop
    rank = rank_loop
    batch_rank = batch_rank_loop
    matmul = matmul_loop
    pairwise_min_distance = pairwise_min_distance_loop
    error_counts = error_counts_loop
else:
    rref = rref_numpy
    rank = rank_numpy
    batch_rank = batch_rank_numpy
    matmul = matmul_numpy
    pairwise_min_distance = pairwise_min_distance_numpy
    error_counts = error_counts_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
