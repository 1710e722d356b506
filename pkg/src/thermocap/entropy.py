"""Smoothed entropies of commuting (classical) pairs, in bits.

``d0_smoothed`` is the subset-restricted 0-entropy, ``dh_smoothed`` the
hypothesis-testing relative entropy. Both are exact for classical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prob_core import TAU_PROB, Distribution

TAU_STRICT = 1e-12
EXHAUSTIVE_MAX_DIM = 20
DP_GRANULARITY = 1e-6


class InfeasibleError(ValueError):
    """No index set carries enough probability mass."""


@dataclass(frozen=True, eq=False)
class SmoothedEntropyResult:
    """Value in bits plus the optimizer.

    ``optimizer`` is a sorted tuple of indices for the 0-entropy and a test
    vector in [0, 1]^d for the hypothesis-testing entropy. ``achieved_mass``
    is the q-mass captured by the optimizer and ``r_mass`` the r-mass it costs.
    """

    value_bits: float
    optimizer: object
    achieved_mass: float
    r_mass: float


def _vec(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else Distribution(p).probs


def _bits_from_mass(mass: float) -> float:
    return math.inf if mass <= 0.0 else 0.0 - math.log2(mass)


def _check_pair(q, r):
    if q.size != r.size:
        raise ValueError(f"dimension mismatch {q.size} vs {r.size}")


# ---------------------------------------------------------------- D_0 solvers

def _d0_exhaustive(q, r, target):
    d = q.size
    qm = np.zeros(1)
    rm = np.zeros(1)
    for i in range(d):
        # bit i of the mask marks index i
        qm = np.concatenate([qm, qm + q[i]])
        rm = np.concatenate([rm, rm + r[i]])
    order = np.lexsort((np.arange(rm.size), rm))
    feasible = qm[order] >= target - 1e-15
    for mask in order[feasible]:
        idx = tuple(i for i in range(d) if (int(mask) >> i) & 1)
        if math.fsum(q[list(idx)]) >= target:
            return idx
    return None


def _d0_pareto(q, r, target):
    """Exact minimum r-mass via a Pareto frontier over groups of equal r.

    Within a group all entries cost the same, so only the top-c entries by q
    can be optimal; each group therefore contributes one of n_g + 1 options.
    """
    active = np.flatnonzero(q > 0)
    if active.size == 0:
        return None
    keys, inv = np.unique(r[active], return_inverse=True)
    groups = []
    for g in range(keys.size):
        members = active[inv == g]
        members = members[np.lexsort((members, -q[members]))]
        groups.append(members)
    # remaining q-mass after each group, for pruning unreachable points
    gq = [q[m].sum() for m in groups]
    rest = np.concatenate([np.cumsum(gq[::-1])[::-1][1:], [0.0]])

    fq = np.zeros(1)
    fr = np.zeros(1)
    choice = np.zeros((1, 0), dtype=np.int64)
    for g, members in enumerate(groups):
        cq = np.concatenate([[0.0], np.cumsum(q[members])])
        cr = np.arange(members.size + 1) * keys[g]
        nq = (fq[:, None] + cq[None, :]).ravel()
        nr = (fr[:, None] + cr[None, :]).ravel()
        parent = np.repeat(np.arange(fq.size), cq.size)
        cnt = np.tile(np.arange(cq.size), fq.size)
        keep = nq + rest[g] >= target - 1e-9
        nq, nr, parent, cnt = nq[keep], nr[keep], parent[keep], cnt[keep]
        order = np.lexsort((-nq, nr))
        nq, nr, parent, cnt = nq[order], nr[order], parent[order], cnt[order]
        best_before = np.concatenate([[-np.inf], np.maximum.accumulate(nq)[:-1]])
        keep = nq > best_before
        fq, fr = nq[keep], nr[keep]
        choice = np.column_stack([choice[parent[keep]], cnt[keep]])
        if fq.size == 0:
            return None
    for k in np.flatnonzero(fq >= target - 1e-15):
        idx = sorted(int(i) for g, c in enumerate(choice[k]) for i in groups[g][:c])
        if math.fsum(q[idx]) >= target:
            return tuple(idx)
    return None


def _d0_quantized(q, r, target, granularity=DP_GRANULARITY):
    """0/1 knapsack on the complement with q rounded up to the granularity.

    Rounding the excluded weights up keeps every returned set feasible; the
    set is optimal for the quantized weights.
    """
    budget = 1.0 - target
    if budget < 0:
        return None
    cap = int(math.floor(budget / granularity + 1e-9))
    w = np.ceil(q / granularity - 1e-9).astype(np.int64)
    free = np.flatnonzero(w == 0)
    items = [i for i in np.flatnonzero(w > 0) if w[i] <= cap]
    best = np.zeros(cap + 1)
    take = np.zeros((len(items), cap + 1), dtype=bool)
    for k, i in enumerate(items):
        wi = int(w[i])
        cand = best[:cap + 1 - wi] + r[i]
        better = cand > best[wi:]
        take[k, wi:] = better
        best[wi:] = np.where(better, cand, best[wi:])
    excluded = set(int(i) for i in free)
    c = cap
    for k in range(len(items) - 1, -1, -1):
        if take[k, c]:
            excluded.add(int(items[k]))
            c -= int(w[items[k]])
    idx = tuple(i for i in range(q.size) if i not in excluded)
    if math.fsum(q[list(idx)]) >= target:
        return idx
    return None


def d0_smoothed(q, r, delta: float, method: str = "auto") -> SmoothedEntropyResult:
    """Smoothed relative 0-entropy ``max_L log2(1 / r(L))`` over ``q(L) > 1 - delta``.

    The strict inequality is realized as ``q(L) >= 1 - delta + TAU_STRICT``.

    Args:
        q, r: distributions of equal dimension.
        delta: smoothing in [0, 1).
        method: ``"pareto"`` (exact frontier search), ``"exhaustive"``
            (all subsets, dim <= 20), ``"quantized"`` (knapsack DP over q
            rounded to 1e-6) or ``"auto"``, which uses the exact frontier
            search up to dim 20 and the quantized DP beyond.

    Raises:
        InfeasibleError: if no index set has enough q-mass (e.g. delta = 0).
    """
    q, r = _vec(q), _vec(r)
    _check_pair(q, r)
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    target = 1.0 - delta + TAU_STRICT
    if method == "auto":
        method = "pareto" if q.size <= EXHAUSTIVE_MAX_DIM else "quantized"
    if method == "pareto":
        idx = _d0_pareto(q, r, target)
    elif method == "exhaustive":
        if q.size > EXHAUSTIVE_MAX_DIM:
            raise ValueError(f"exhaustive search limited to dim <= {EXHAUSTIVE_MAX_DIM}")
        idx = _d0_exhaustive(q, r, target)
    elif method == "quantized":
        idx = _d0_quantized(q, r, target)
    else:
        raise ValueError(f"unknown method {method!r}")
    if idx is None:
        raise InfeasibleError(f"no index set has q-mass > 1 - {delta}")
    sel = list(idx)
    r_mass = math.fsum(r[sel])
    return SmoothedEntropyResult(_bits_from_mass(r_mass), tuple(idx), math.fsum(q[sel]), r_mass)


# ---------------------------------------------------------------- D_h

def _np_order(q, r):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(r > 0, q / np.where(r > 0, r, 1.0), np.where(q > 0, np.inf, -1.0))
    # decreasing ratio, ties to the lower index
    return np.lexsort((np.arange(q.size), -ratio))


def dh_smoothed(q, r, eps: float) -> SmoothedEntropyResult:
    """Hypothesis-testing relative entropy ``-log2 min{<t, r> : <t, q> >= 1 - eps}``.

    The commuting program is a fractional knapsack: indices are filled in
    decreasing q/r order (zero-cost indices first, ties to the lower index)
    with at most one fractional entry.
    """
    q, r = _vec(q), _vec(r)
    _check_pair(q, r)
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    t = np.zeros(q.size)
    remaining = 1.0 - eps
    for i in _np_order(q, r):
        if remaining <= TAU_STRICT:
            break
        if q[i] <= 0:
            break
        if q[i] <= remaining + TAU_STRICT:
            t[i] = 1.0
            remaining -= q[i]
        else:
            t[i] = remaining / q[i]
            remaining = 0.0
    r_mass = float(t @ r)
    return SmoothedEntropyResult(_bits_from_mass(r_mass), t, float(t @ q), r_mass)


# ---------------------------------------------------------------- scalars

def relative_entropy(p, s) -> float:
    """``sum_j p_j log2(p_j / s_j)`` in bits; ``inf`` when supp(p) is not inside supp(s)."""
    p, s = _vec(p), _vec(s)
    _check_pair(p, s)
    on = p > 0
    if np.any(s[on] <= 0):
        return math.inf
    return float(np.sum(p[on] * (np.log2(p[on]) - np.log2(s[on]))))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError("binary entropy needs x in [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def hayashi_nagaoka_commuting_check(a: float, b: float, c: float) -> bool:
    """Truth of ``1 - a/(a+b) <= (1+c)(1-a) + (2 + c + 1/c) b`` for scalars.

    ``a/(a+b)`` is taken as 0 when ``a + b = 0``. The left side is evaluated
    as ``b/(a+b)`` to avoid cancellation.
    """
    if not (0.0 <= a <= 1.0 and b >= 0.0 and c > 0.0):
        raise ValueError("need 0 <= a <= 1, b >= 0, c > 0")
    lhs = 1.0 if a + b == 0 else b / (a + b)
    rhs = (1 + c) * (1 - a) + (2 + c + 1 / c) * b
    return bool(lhs <= rhs)
