"""Pure numpy implementations of the numerical kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same results up to floating point reassociation.
"""

import numpy as np

BACKEND = "python"


def chain_products(stack, inv_stack, idx):
    """Prefix products ``P[t+1] = stack[idx[t]] @ P[t]`` and their inverses.

    Returns two arrays of shape ``(len(idx) + 1, d, d)`` with ``P[0] = Id``.
    The inverse chain is accumulated from ``inv_stack`` on the right, so no
    matrix is ever inverted here.
    """
    stack = np.asarray(stack, dtype=float)
    inv_stack = np.asarray(inv_stack, dtype=float)
    idx = np.asarray(idx, dtype=np.intp)
    d = stack.shape[1]
    n = idx.shape[0]
    P = np.empty((n + 1, d, d))
    Q = np.empty((n + 1, d, d))
    P[0] = np.eye(d)
    Q[0] = np.eye(d)
    for t in range(n):
        j = idx[t]
        P[t + 1] = stack[j] @ P[t]
        Q[t + 1] = Q[t] @ inv_stack[j]
    return P, Q


def batch_products(stack, inv_stack, idx2d):
    """Full products along every row of ``idx2d`` (shape ``(N, n)``).

    Row ``w`` gives ``stack[w[n-1]] @ ... @ stack[w[0]]`` and the matching
    inverse product.
    """
    stack = np.asarray(stack, dtype=float)
    inv_stack = np.asarray(inv_stack, dtype=float)
    idx2d = np.asarray(idx2d, dtype=np.intp)
    N, n = idx2d.shape
    d = stack.shape[1]
    P = np.broadcast_to(np.eye(d), (N, d, d)).copy()
    Q = P.copy()
    for t in range(n):
        col = idx2d[:, t]
        P = np.matmul(stack[col], P)
        Q = np.matmul(Q, inv_stack[col])
    return P, Q


def spectral_norms(A):
    """Largest singular value of every matrix in a ``(N, d, d)`` stack."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return np.zeros(0)
    if A.shape[1] == 2:
        a, b = A[:, 0, 0], A[:, 0, 1]
        c, e = A[:, 1, 0], A[:, 1, 1]
        return 0.5 * (np.hypot(a + e, b - c) + np.hypot(a - e, b + c))
    return np.linalg.norm(A, ord=2, axis=(1, 2))


def gl_distances(A, Ainv, B, Binv):
    """``d(A[k], B) = |A[k] - B| + |A[k]^-1 - B^-1|`` for a single ``B``."""
    return spectral_norms(A - B) + spectral_norms(Ainv - Binv)


def min_gl_distances(A, Ainv, B, Binv):
    """For each ``A[k]`` the nearest ``B[l]`` in the GL metric.

    Returns ``(dmin, argmin)``. Memory is kept linear by looping over ``B``.
    """
    A = np.asarray(A, dtype=float)
    Ainv = np.asarray(Ainv, dtype=float)
    n = A.shape[0]
    dmin = np.full(n, np.inf)
    arg = np.full(n, -1, dtype=np.intp)
    for l in range(len(B)):
        dl = gl_distances(A, Ainv, B[l], Binv[l])
        better = dl < dmin
        dmin[better] = dl[better]
        arg[better] = l
    return dmin, arg


def farthest_point_net(A, Ainv, eps):
    """Greedy farthest-point selection until every element is within ``eps``.

    Starts from index 0; ties go to the lowest index (enumeration order).
    Returns the selected indices in selection order.
    """
    A = np.asarray(A, dtype=float)
    Ainv = np.asarray(Ainv, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    chosen = [0]
    dmin = gl_distances(A, Ainv, A[0], Ainv[0])
    while True:
        far = int(np.argmax(dmin))
        if dmin[far] <= eps:
            break
        chosen.append(far)
        dmin = np.minimum(dmin, gl_distances(A, Ainv, A[far], Ainv[far]))
    return np.asarray(chosen, dtype=np.intp)


def _envelope(forms, cb, sb):
    # forms: (N, 3) rows (m, p, s) of m + p cos b + s sin b
    return (forms[:, 0][None, :] + cb[:, None] * forms[:, 1][None, :]
            + sb[:, None] * forms[:, 2][None, :]).max(axis=1)


def _roots(A, B, E):
    """Angles b with ``A sin b + B cos b + E = 0`` (vectorised, may be empty)."""
    R = np.hypot(A, B)
    ok = (R > 0) & (np.abs(E) <= R)
    phi = np.arctan2(A[ok], B[ok])
    t = np.arccos(np.clip(-E[ok] / R[ok], -1.0, 1.0))
    return np.concatenate([phi + t, phi - t])


def sup_ratio_2d(f1, f2):
    """Exact ``sup_b max_i q1_i(b) / max_j q2_j(b)`` for planar quadratic forms.

    Each row ``(m, p, s)`` encodes ``|P v|^2 = m + p cos 2a + s sin 2a`` for the
    unit vector at angle ``a``. The supremum is attained either at a critical
    point of some ratio ``q1_i / q2_j`` or at a breakpoint of the upper
    envelope of the ``q2`` family; both candidate sets have closed forms.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    m1, p1, s1 = (f1[:, k][:, None] for k in range(3))
    m2, p2, s2 = (f2[:, k][None, :] for k in range(3))
    # critical points of q1_i / q2_j
    A = (m1 * p2 - p1 * m2).ravel()
    B = (s1 * m2 - m1 * s2).ravel()
    E = (s1 * p2 - p1 * s2).ravel()
    cands = [np.zeros(1), _roots(A, B, E)]
    # breakpoints of the denominator envelope
    n2 = f2.shape[0]
    if n2 > 1:
        iu, ju = np.triu_indices(n2, 1)
        dm = f2[iu, 0] - f2[ju, 0]
        dp = f2[iu, 1] - f2[ju, 1]
        ds = f2[iu, 2] - f2[ju, 2]
        cands.append(_roots(ds, dp, dm))
    b = np.concatenate(cands)
    cb, sb = np.cos(b), np.sin(b)
    best = 0.0
    chunk = 8192
    for lo in range(0, b.shape[0], chunk):
        num = _envelope(f1, cb[lo:lo + chunk], sb[lo:lo + chunk])
        den = _envelope(f2, cb[lo:lo + chunk], sb[lo:lo + chunk])
        best = max(best, float((num / den).max()))
    return best
