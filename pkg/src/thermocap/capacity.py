"""One-shot classical capacity by exhaustive codebook search, its entropic bounds,
and Holevo-type asymptotic quantities for classical channels.

Classical versions of a channel are ``L o N o K`` with a deterministic encoder
``K`` (a codebook) and a deterministic decoder ``L`` (output index -> message).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .entropy import TAU_STRICT, d0_smoothed, dh_smoothed, relative_entropy
from .prob_core import (
    BipartiteClassicalState,
    ClassicalChannel,
    Codebook,
    Distribution,
    apply_channel,
    trace_distance,
)

TAU_CMP = 1e-12
DEFAULT_SEARCH_BUDGET = 5_000_000
DEFAULT_MIXTURE_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class CapacityResult:
    capacity_bits: float
    message_count: int
    best_codebook: Codebook
    best_success_prob: float
    per_M_success: dict = field(default_factory=dict)


@dataclass(frozen=True)
class VersionWitness:
    """Best classical version found by a search, with the objective it attains."""

    value_bits: float
    message_count: int
    codebook: Codebook | None
    decoder: tuple | None
    prior: tuple | None = None


@dataclass(frozen=True)
class InputFamily:
    """Separable inputs ``sum_m lam_m |m><m| x |m><m|`` searched by the lower bounds.

    For each message count M the family holds the uniform prior (the maximally
    correlated state) and, for every component m and grid value w, the prior
    with weight w on m and (1 - w)/(M - 1) on each other component.
    """

    grid: tuple = DEFAULT_MIXTURE_GRID

    def priors(self, M: int) -> list[np.ndarray]:
        out = [np.full(M, 1.0 / M)]
        if M == 1:
            return out
        for m in range(M):
            for w in self.grid:
                lam = np.full(M, (1.0 - w) / (M - 1))
                lam[m] = w
                if not any(np.allclose(lam, o, atol=1e-15, rtol=0) for o in out):
                    out.append(lam)
        return out


# ---------------------------------------------------------------- codes

def _codewords(cb) -> tuple:
    return cb.codewords if isinstance(cb, Codebook) else tuple(int(c) for c in cb)


def ml_decoder(ch: ClassicalChannel, cb) -> np.ndarray:
    """Maximum-likelihood decoder, ties to the lowest message index."""
    cw = _codewords(cb)
    Codebook(cw).check(ch)
    return np.argmax(ch.matrix[:, list(cw)], axis=1)


def optimal_success_probability(ch: ClassicalChannel, cb) -> float:
    """Average success probability of ``cb`` under maximum-likelihood decoding."""
    cw = _codewords(cb)
    Codebook(cw).check(ch)
    return float(ch.matrix[:, list(cw)].max(axis=1).sum() / len(cw))


def classical_version(ch: ClassicalChannel, cb, decoder=None) -> ClassicalChannel:
    """Channel ``L o N o K``; with ``decoder=None`` the encoder-only ``N o K``.

    ``decoder[y]`` is the message assigned to output ``y``; the version has
    ``M = len(cb)`` outputs even if some message is never decoded.
    """
    cw = _codewords(cb)
    Codebook(cw).check(ch)
    cols = ch.matrix[:, list(cw)]
    if decoder is None:
        return ClassicalChannel(cols)
    dec = np.asarray(decoder, dtype=int)
    if dec.shape != (ch.out_dim,):
        raise ValueError(f"decoder must assign a message to each of {ch.out_dim} outputs")
    M = len(cw)
    if dec.min() < 0 or dec.max() >= M:
        raise ValueError("decoder labels must lie in 0..M-1")
    D = np.zeros((M, ch.out_dim))
    D[dec, np.arange(ch.out_dim)] = 1.0
    return ClassicalChannel(D @ cols)


def gibbs_deviation(ch_mm: ClassicalChannel) -> float:
    """``|| ch(uniform) - uniform ||_1`` for a square channel."""
    if ch_mm.in_dim != ch_mm.out_dim:
        raise ValueError("Gibbs deviation needs an M-to-M channel")
    u = Distribution.uniform(ch_mm.in_dim)
    return trace_distance(apply_channel(ch_mm, u), u)


def _deviation(V: np.ndarray) -> float:
    M = V.shape[0]
    return float(np.abs(V.mean(axis=1) - 1.0 / M).sum())


def multiset_codebooks(in_dim: int, M: int) -> Iterator[tuple]:
    """Codebooks up to message relabeling, in lexicographic order."""
    return itertools.combinations_with_replacement(range(in_dim), M)


def canonical_decoders(out_dim: int, M: int) -> Iterator[tuple]:
    """Decoders up to relabeling of messages: set partitions of the outputs into at
    most M blocks, as restricted growth strings."""
    def grow(prefix, top):
        if len(prefix) == out_dim:
            yield tuple(prefix)
            return
        for label in range(min(top + 2, M)):
            yield from grow(prefix + [label], max(top, label))
    yield from grow([], -1)


def count_canonical_decoders(out_dim: int, M: int) -> int:
    # Stirling numbers of the second kind summed over block counts <= M
    S = [[0] * (M + 1) for _ in range(out_dim + 1)]
    S[0][0] = 1
    for n in range(1, out_dim + 1):
        for k in range(1, M + 1):
            S[n][k] = k * S[n - 1][k] + S[n - 1][k - 1]
    return sum(S[out_dim])


def _check_budget(ch: ClassicalChannel, M: int, budget: int, with_decoders: bool):
    size = math.comb(ch.in_dim + M - 1, M)
    what = f"C({ch.in_dim}+{M}-1, {M}) = {size} codebooks"
    if with_decoders:
        nd = count_canonical_decoders(ch.out_dim, M)
        size *= nd
        what += f" x {nd} decoders = {size} versions"
    if size > budget:
        raise ValueError(f"search over {what} exceeds budget {budget}")


def deterministic_versions(ch: ClassicalChannel, M: int,
                           budget: int = DEFAULT_SEARCH_BUDGET) -> Iterator[tuple]:
    """All M-to-M classical versions up to relabeling of input and output messages.

    Yields ``(codebook, decoder, V)`` with ``V[m', m]`` the version's transition
    matrix. Objectives that are invariant under separately permuting input and
    output messages lose nothing by this reduction.
    """
    _check_budget(ch, M, budget, with_decoders=True)
    decoders = list(canonical_decoders(ch.out_dim, M))
    onehots = []
    for dec in decoders:
        D = np.zeros((M, ch.out_dim))
        D[list(dec), np.arange(ch.out_dim)] = 1.0
        onehots.append(D)
    for cw in multiset_codebooks(ch.in_dim, M):
        cols = ch.matrix[:, list(cw)]
        for dec, D in zip(decoders, onehots):
            yield cw, dec, D @ cols


# ---------------------------------------------------------------- capacity

def _best_codebook(ch: ClassicalChannel, M: int, chunk: int = 20000):
    best_p, best_cw = -1.0, None
    it = multiset_codebooks(ch.in_dim, M)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        idx = np.array(block)
        ps = ch.matrix[:, idx].max(axis=2).sum(axis=0) / M
        k = int(np.argmax(ps))
        if ps[k] > best_p:
            best_p, best_cw = float(ps[k]), block[k]
    return best_p, best_cw


def one_shot_capacity(ch: ClassicalChannel, eps: float, m_max: int,
                      budget: int = DEFAULT_SEARCH_BUDGET) -> CapacityResult:
    """``log2`` of the largest M <= m_max with a codebook of success probability >= 1 - eps.

    Codebooks are enumerated as multisets (P_s ignores codeword order) and
    decoded by maximum likelihood, which is optimal for uniform messages.
    Ties go to the lexicographically smallest codebook.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    for M in range(1, m_max + 1):
        _check_budget(ch, M, budget, with_decoders=False)
    table = {}
    best = (1, Codebook((0,)), 1.0)
    for M in range(1, m_max + 1):
        p, cw = _best_codebook(ch, M)
        table[M] = p
        if p >= 1.0 - eps - TAU_CMP:
            best = (M, Codebook(cw), p)
    M, cb, p = best
    return CapacityResult(math.log2(M) + 0.0, M, cb, p, table)


# ---------------------------------------------------------------- entropic bounds

def phi_joint(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint and product-of-marginals of ``(V x id)`` applied to the maximally
    correlated state, flattened row-major over (output, reference)."""
    M = V.shape[1]
    joint = V / M
    prod = np.repeat(V.mean(axis=1)[:, None] / M, M, axis=1)
    return joint.ravel(), prod.ravel()


def prior_joint(W: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint and product of marginals of ``(W x id)(sum_m lam_m |m,m><m,m|)``."""
    joint = W * lam[None, :]
    prod = np.outer(joint.sum(axis=1), lam)
    return joint.ravel(), prod.ravel()


def upper_bound_search(ch: ClassicalChannel, smoothing: float, deviation_cap: float,
                       m_max: int, budget: int = DEFAULT_SEARCH_BUDGET) -> VersionWitness:
    """Max of ``D_0^smoothing`` over versions whose Gibbs deviation is <= deviation_cap."""
    best = VersionWitness(0.0, 1, Codebook((0,)), tuple([0] * ch.out_dim))
    for M in range(2, m_max + 1):
        for cw, dec, V in deterministic_versions(ch, M, budget):
            if _deviation(V) > deviation_cap:
                continue
            q, r = phi_joint(V)
            val = d0_smoothed(q, r, smoothing).value_bits
            if val > best.value_bits:
                best = VersionWitness(val, M, Codebook(cw), dec)
    return best


def capacity_upper_bound_d0(ch: ClassicalChannel, eps: float, delta: float, m_max: int,
                            budget: int = DEFAULT_SEARCH_BUDGET) -> float:
    """Sup over versions with Gibbs deviation <= 2(eps + delta) of
    ``D_0^{eps+delta}`` between the version's output on the maximally correlated
    state and the product of its marginals, in bits."""
    if not 0.0 < delta <= eps:
        raise ValueError("need 0 < delta <= eps")
    if eps + delta >= 1.0:
        raise ValueError("need eps + delta < 1")
    cap = 2.0 * (eps + delta) + TAU_CMP
    return upper_bound_search(ch, eps + delta, cap, m_max, budget).value_bits


def hn_penalty_bits(eps: float, omega: float) -> float:
    """``log2(4 eps / (eps - omega)^2)``, the one-shot random-coding loss."""
    return math.log2(4.0 * eps / (eps - omega) ** 2)


def lower_bound_search(ch: ClassicalChannel, omega: float, m_max: int,
                       family: InputFamily | None = None,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> VersionWitness:
    """Max of ``D_h^omega`` over encoder-only versions and inputs of ``family``."""
    family = family or InputFamily()
    best = VersionWitness(0.0, 1, Codebook((0,)), None, (1.0,))
    for M in range(2, m_max + 1):
        _check_budget(ch, M, budget, with_decoders=False)
        priors = family.priors(M)
        for cw in multiset_codebooks(ch.in_dim, M):
            W = ch.matrix[:, list(cw)]
            for lam in priors:
                q, r = prior_joint(W, lam)
                val = dh_smoothed(q, r, omega).value_bits
                if val > best.value_bits:
                    best = VersionWitness(val, M, Codebook(cw), None, tuple(float(x) for x in lam))
    return best


def capacity_lower_bound_dh(ch: ClassicalChannel, eps: float, omega: float, m_max: int,
                            family: InputFamily | None = None,
                            budget: int = DEFAULT_SEARCH_BUDGET) -> float:
    """``max(0, sup D_h^omega - log2(4 eps / (eps - omega)^2))`` over the input family."""
    if not 0.0 < omega < eps <= 0.5:
        raise ValueError("need 0 < omega < eps <= 1/2")
    if m_max < 2:
        return 0.0
    best = lower_bound_search(ch, omega, m_max, family, budget)
    return max(0.0, best.value_bits - hn_penalty_bits(eps, omega))


# ---------------------------------------------------------------- Holevo quantities

def holevo_classical(ch: ClassicalChannel, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Capacity ``max_p I(p, ch)`` in bits by Blahut-Arimoto iteration.

    Stops when successive lower estimates differ by less than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = ch.matrix
    logT = np.where(T > 0, np.log(np.where(T > 0, T, 1.0)), 0.0)
    p = np.full(ch.in_dim, 1.0 / ch.in_dim)
    prev = -np.inf
    for _ in range(max_iter):
        out = T @ p
        logout = np.log(np.where(out > 0, out, 1.0))
        # per-input divergence D(T[.|i] || out) in nats
        d = np.sum(T * (logT - logout[:, None]), axis=0)
        c = np.exp(d)
        lower = math.log(float(p @ c))
        if abs(lower - prev) < tol * math.log(2):
            return max(0.0, lower / math.log(2))
        prev = lower
        p = p * c
        p /= p.sum()
    raise RuntimeError(f"Blahut-Arimoto did not converge within {max_iter} iterations")


def constrained_holevo(ch: ClassicalChannel, theta: float, m_max: int,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> float:
    """Sup over versions with Gibbs deviation <= 2 theta of the mutual information
    of the version's output on the maximally correlated state, in bits."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    cap = 2.0 * theta + TAU_CMP
    best = 0.0
    for M in range(2, m_max + 1):
        for _, _, V in deterministic_versions(ch, M, budget):
            if _deviation(V) > cap:
                continue
            q, r = phi_joint(V)
            best = max(best, relative_entropy(q, r))
    return best
