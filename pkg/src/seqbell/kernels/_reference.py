"""Vectorized numpy implementation of the level-expansion kernel.

A protocol state after Alice's undo step is ``sum_i s_i |i>_A (x) U_B|i>_B``
with ``(s_0, s_1) = (cos theta, sin theta)`` and ``U_B`` real orthogonal
(Alice's Kraus operators along z and x are real, so the frame stays real).
Measuring Alice with a real Kraus operator ``K`` gives the amplitude matrix
``K diag(s) U_B^T``, whose singular values are those of ``A = K diag(s)``.
The smaller one is taken as ``det(A) / sigma_max`` with
``det(A) = det(K) s_0 s_1``, which keeps full relative precision when the
Schmidt angle is tiny.

Children are emitted per parent in the order z/0, z/1, x/0, x/1.
"""

import numpy as np

BACKEND = "numpy"


def _kraus_entries(mu):
    """Entries ``(k00, k01, k10, k11)`` of the four Kraus operators, shape (N, 4) each."""
    cm, sm = np.cos(mu), np.sin(mu)
    zero = np.zeros_like(mu)
    h = 0.5
    # z/0, z/1, x/0, x/1
    k00 = np.stack([cm, sm, h * (cm + sm), h * (sm + cm)], axis=1)
    k01 = np.stack([zero, zero, h * (cm - sm), h * (sm - cm)], axis=1)
    k11 = np.stack([sm, cm, h * (cm + sm), h * (sm + cm)], axis=1)
    det = np.repeat((cm * sm)[:, None], 4, axis=1)
    return k00, k01, k01, k11, det


def expand(theta, ub, mu, zero=1e-12):
    """Expand ``N`` parents into ``4N`` children.

    Returns ``(theta_children, ub_children, outcome_probability)`` with shapes
    ``(4N,)``, ``(4N, 2, 2)`` and ``(4N,)``. ``outcome_probability`` is the
    quantum probability of the outcome given the choice.
    """
    theta = np.asarray(theta, dtype=np.float64)
    ub = np.asarray(ub, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    n = theta.shape[0]
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    k00, k01, k10, k11, detk = _kraus_entries(mu)

    a, b = k00 * c, k01 * s
    cc, d = k10 * c, k11 * s
    det = detk * c * s

    e, f = 0.5 * (a + d), 0.5 * (a - d)
    g, h = 0.5 * (cc + b), 0.5 * (cc - b)
    q = np.hypot(e, h)
    r = np.hypot(f, g)
    sx = q + r
    with np.errstate(divide="ignore", invalid="ignore"):
        sy = np.where(sx > 0.0, det / sx, 0.0)
    a1 = np.arctan2(g, f)
    a2 = np.arctan2(h, e)
    rot_v = 0.5 * (a2 - a1)

    sigma0, sigma1 = sx, np.abs(sy)
    prob = a * a + b * b + cc * cc + d * d

    # A = Rot(rot_w) diag(sx, sy) Rot(rot_v); only V = Rot(-rot_v) is kept,
    # Alice's undo step discards the left factor and any sign of sy
    cv, sv = np.cos(rot_v), np.sin(rot_v)
    # columns of V
    v00, v10 = cv, -sv
    v01, v11 = sv, cv
    p = ub[:, None, :, :]
    u00 = p[..., 0, 0] * v00 + p[..., 0, 1] * v10
    u10 = p[..., 1, 0] * v00 + p[..., 1, 1] * v10
    u01 = p[..., 0, 0] * v01 + p[..., 0, 1] * v11
    u11 = p[..., 1, 0] * v01 + p[..., 1, 1] * v11

    f0 = np.where(np.abs(u00) > zero, np.sign(u00), np.sign(u10))
    f1 = np.where(np.abs(u01) > zero, np.sign(u01), np.sign(u11))
    f0 = np.where(f0 == 0.0, 1.0, f0)
    f1 = np.where(f1 == 0.0, 1.0, f1)

    out_ub = np.empty((n, 4, 2, 2))
    out_ub[..., 0, 0] = u00 * f0
    out_ub[..., 1, 0] = u10 * f0
    out_ub[..., 0, 1] = u01 * f1
    out_ub[..., 1, 1] = u11 * f1

    out_theta = np.arctan2(sigma1, sigma0)
    return out_theta.reshape(4 * n), out_ub.reshape(4 * n, 2, 2), prob.reshape(4 * n)


def _pair_cost(r, p, k, js):
    """Merge cost between class ``k`` and each class in ``js``."""
    dx = r[js, 0] - r[k, 0]
    dy = r[js, 1] - r[k, 1]
    dz = r[js, 2] - r[k, 2]
    return p[k] * p[js] / (p[k] + p[js]) * (0.5 * np.sqrt(dx * dx + dy * dy + dz * dz))


def quantize(bloch, probability, m):
    """Greedy pairwise merging of Bloch-vector classes down to ``m`` slots.

    Each round merges the live pair with the smallest
    ``p_i p_j / (p_i + p_j) * D`` (``D`` the trace distance), ties going to
    the lexicographically smallest pair; the merged class is the weighted
    mixture and keeps the smaller index. Returns the class -> slot map.

    Every class caches its cheapest partner among larger indices. When that
    partner is consumed the cache is kept as a lower bound and marked stale;
    a stale row is rescanned only once its bound is the smallest, which
    gives the same merges as rescanning eagerly.
    """
    r = np.array(bloch, dtype=np.float64, order="C")
    p = np.array(probability, dtype=np.float64)
    n = r.shape[0]
    if n <= m:
        return np.arange(n)
    alive = np.ones(n, dtype=bool)
    stale = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    arg = np.full(n, -1, dtype=np.int64)
    into = np.arange(n)

    def rescan(k):
        js = np.flatnonzero(alive[k + 1:]) + k + 1
        stale[k] = False
        if js.size:
            c = _pair_cost(r, p, k, js)
            t = int(np.argmin(c))
            best[k], arg[k] = c[t], js[t]
        else:
            best[k], arg[k] = np.inf, -1

    for k in range(n):
        rescan(k)
    for _ in range(n - m):
        i = int(np.argmin(best))
        while stale[i]:
            rescan(i)
            i = int(np.argmin(best))
        j = int(arg[i])
        total = p[i] + p[j]
        r[i] = (p[i] * r[i] + p[j] * r[j]) / total
        p[i] = total
        alive[j] = False
        stale[j] = False
        best[j], arg[j] = np.inf, -1
        into[j] = i
        rescan(i)

        low = np.flatnonzero(alive[:i])
        if low.size:
            c = _pair_cost(r, p, i, low)
            b, a, st = best[low], arg[low], stale[low]
            # stale rows: the bound can only drop to the new cost
            lower = st & (c < b)
            # fresh rows pointing at i keep it if the cost did not rise
            kept = ~st & (a == i) & (c <= b)
            lost = ~st & (((a == i) & (c > b)) | (a == j))
            better = ~st & (a != i) & (a != j) & ((c < b) | ((c == b) & (i < a)))
            best[low[lower | kept | better]] = c[lower | kept | better]
            arg[low[kept | better]] = i
            # a lost row's other costs are unchanged, so min(old best, new cost) bounds it
            best[low[lost]] = np.minimum(b[lost], c[lost])
            stale[low[lost]] = True
        mid = np.flatnonzero(alive[i + 1:j]) + i + 1
        stale[mid[(arg[mid] == j) & ~stale[mid]]] = True
    # merges always point to a smaller index, so one ascending pass resolves chains
    for k in range(n):
        into[k] = into[into[k]]
    return into
