"""Average work quantities and channel-resource witnesses.

``w_ssp = kT ln2 S(rho || gamma_H)`` splits into the zero-Hamiltonian part
``w_info`` and the remainder ``w_gap``. A channel outside a polytope of free
channels is certified by a state discrimination game, which is then compiled
into Hamiltonians whose summed ``w_gap`` separates the channel from every
free one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import relative_entropy
from .prob_core import (
    ClassicalChannel,
    DiagonalHamiltonian,
    Distribution,
    ThermoConfig,
    apply_channel,
    gibbs_state,
)

ETA_POS = 1e-6
FW_MAX_ITER = 10_000


# ---------------------------------------------------------------- SSP work

def _ham(h) -> DiagonalHamiltonian:
    return h if isinstance(h, DiagonalHamiltonian) else DiagonalHamiltonian(h)


def _dist(p) -> Distribution:
    return p if isinstance(p, Distribution) else Distribution(p)


def w_ssp(state: Distribution, h: DiagonalHamiltonian, cfg: ThermoConfig) -> float:
    """Average extractable work ``kT ln2 S(state || gamma_H)``."""
    state, h = _dist(state), _ham(h)
    if state.dim != h.dim:
        raise ValueError(f"state has dim {state.dim}, Hamiltonian has dim {h.dim}")
    return cfg.bit_energy * relative_entropy(state, gibbs_state(h, cfg))


def w_info(state: Distribution, cfg: ThermoConfig) -> float:
    """Work from the state alone, with a fully degenerate Hamiltonian."""
    state = _dist(state)
    return w_ssp(state, DiagonalHamiltonian.degenerate(state.dim), cfg)


def w_gap(state: Distribution, h: DiagonalHamiltonian, cfg: ThermoConfig) -> float:
    """``w_ssp(state, h) - w_info(state)``."""
    return w_ssp(state, h, cfg) - w_info(state, cfg)


def w_gap_closed_form(state: Distribution, h: DiagonalHamiltonian, cfg: ThermoConfig) -> float:
    """``<E>_state + kT ln2 (log2 sum_n exp(-E_n / kT) - log2 d)``."""
    state, h = _dist(state), _ham(h)
    e = h.energies
    emin = e.min()
    log2_z = (np.log(np.exp(-(e - emin) / cfg.kT).sum()) - emin / cfg.kT) / math.log(2)
    return float(state.probs @ e) + cfg.bit_energy * (log2_z - math.log2(h.dim))


# ---------------------------------------------------------------- free sets

@dataclass(frozen=True, eq=False)
class FreeSetPolytope:
    """Convex hull of finitely many channels with common dimensions."""

    vertices: tuple

    def __post_init__(self):
        vs = tuple(v if isinstance(v, ClassicalChannel) else ClassicalChannel(v) for v in self.vertices)
        if not vs:
            raise ValueError("a free set needs at least one vertex")
        shape = vs[0].matrix.shape
        if any(v.matrix.shape != shape for v in vs):
            raise ValueError("all vertices must share in_dim and out_dim")
        object.__setattr__(self, "vertices", vs)

    @property
    def in_dim(self) -> int:
        return self.vertices[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.vertices[0].out_dim

    def stacked(self) -> np.ndarray:
        """Vertices as rows of flattened matrices."""
        return np.array([v.matrix.ravel() for v in self.vertices])

    @classmethod
    def constant_channels(cls, in_dim: int, out_dim: int) -> "FreeSetPolytope":
        """All channels that ignore their input (hull of the constant point-mass channels)."""
        return cls(tuple(ClassicalChannel.constant(Distribution.point(out_dim, j), in_dim)
                         for j in range(out_dim)))


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    point: np.ndarray
    weights: np.ndarray
    distance: float
    separated: bool
    iterations: int


def _affine_minimizer(P: np.ndarray) -> np.ndarray:
    """Weights (summing to one) of the min-norm point in the affine hull of the rows of P."""
    k = P.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = P @ P.T
    kkt[:k, k] = kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    return np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]


def project_onto_hull(x: np.ndarray, vertices: np.ndarray, tol: float = 1e-9,
                      max_iter: int = FW_MAX_ITER) -> ProjectionResult:
    """Projection of ``x`` onto the hull of the rows of ``vertices`` by fully
    corrective Frank-Wolfe (Wolfe's nearest-point method).

    Each major step adds the vertex returned by an exact linear scan; minor
    steps re-minimize over the affine hull of the active vertices and drop
    those whose weight would turn negative. Stops when the distance drops to
    ``tol`` (``x`` is in the hull up to tolerance) or when the duality gap
    falls below half the squared distance, at which point the residual
    ``x - y`` strictly separates ``x`` from the hull.
    """
    P = np.asarray(vertices, dtype=float) - x
    K = P.shape[0]
    active = [int(np.argmin((P * P).sum(axis=1)))]
    lam = np.array([1.0])
    for it in range(max_iter):
        g = lam @ P[active]
        dist = float(np.linalg.norm(g))
        w = np.zeros(K)
        w[active] = lam
        if dist <= tol:
            return ProjectionResult(g + x, w, dist, False, it)
        scores = P @ g
        s = int(np.argmin(scores))
        gap = float(g @ g - scores[s])
        if gap <= 0.5 * dist * dist or s in active:
            return ProjectionResult(g + x, w, dist, True, it)
        active.append(s)
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_minimizer(P[active])
            if alpha.min() > 1e-14:
                lam = alpha
                break
            neg = alpha <= 1e-14
            theta = min(1.0, float(np.min(lam[neg] / (lam[neg] - alpha[neg]))))
            lam = (1 - theta) * lam + theta * alpha
            keep = lam > 1e-14
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep] / lam[keep].sum()
    raise RuntimeError(f"Frank-Wolfe projection did not converge within {max_iter} iterations")


# ---------------------------------------------------------------- witnesses

@dataclass(frozen=True, eq=False)
class DiscriminationWitness:
    """Ensemble ``{prior_i, states_i}`` on the channel input and diagonal POVM
    ``{povm_i}`` on its output; the payoff is ``sum_i prior_i <povm_i, ch(states_i)>``."""

    prior: Distribution
    states: tuple
    povm: tuple
    channel: ClassicalChannel
    free: FreeSetPolytope

    def __post_init__(self):
        E = np.array([np.asarray(e, dtype=float) for e in self.povm])
        if len(self.states) != self.prior.dim or E.shape[0] != self.prior.dim:
            raise ValueError("prior, states and POVM must have one entry per ensemble member")
        if np.any(self.prior.probs <= 0):
            raise ValueError("prior must be strictly positive")
        if E.min() < ETA_POS * (1 - 1e-9):
            raise ValueError(f"POVM entries must be >= {ETA_POS}")
        if np.max(np.abs(E.sum(axis=0) - 1.0)) > 1e-9:
            raise ValueError("POVM elements must sum to the all-ones vector")

    def payoff(self, ch: ClassicalChannel) -> float:
        return float(sum(p * (np.asarray(e) @ apply_channel(ch, s).probs)
                         for p, s, e in zip(self.prior.probs, self.states, self.povm)))

    def free_max(self) -> float:
        return max(self.payoff(v) for v in self.free.vertices)


def _centered(M: np.ndarray) -> np.ndarray:
    # drop the part every uniform-prior point-mass game is blind to
    return M - M.mean(axis=1, keepdims=True)


def _uniform_game(ch, free, r):
    n = ch.in_dim
    neg = max(0.0, float(-r.min()))
    if neg == 0.0:
        return None
    alpha = (1.0 / n - ETA_POS) / neg
    E = alpha * r + 1.0 / n
    states = tuple(Distribution.point(n, i) for i in range(n))
    return DiscriminationWitness(Distribution.uniform(n), states, tuple(E[:, i] for i in range(n)),
                                 ch, free)


def _padded_game(ch, free, r, margin):
    """Point masses plus one uniform-input member carrying the leftover POVM element."""
    n = ch.in_dim
    omega = r - r.min(axis=0, keepdims=True)
    top = float(omega.sum(axis=1).max())
    kappa = (1.0 - (n + 1) * ETA_POS) / top if top > 0 else 0.0
    E = kappa * omega + ETA_POS
    rest = 1.0 - E.sum(axis=1)
    a = kappa * margin / n
    p_last = a / (2.0 + a)
    prior = np.concatenate([np.full(n, (1.0 - p_last) / n), [p_last]])
    states = tuple(Distribution.point(n, i) for i in range(n)) + (Distribution.uniform(n),)
    povm = tuple(E[:, i] for i in range(n)) + (rest,)
    return DiscriminationWitness(Distribution(prior), states, povm, ch, free)


def detect_resource(ch: ClassicalChannel, free: FreeSetPolytope, tol: float = 1e-9,
                    max_iter: int = FW_MAX_ITER) -> DiscriminationWitness | None:
    """Discrimination game won more often by ``ch`` than by any free channel,
    or ``None`` if ``ch`` lies in the free hull within ``tol``.

    Channels are compared as flattened matrices. If the separation survives
    removing each output row's mean, the game uses a uniform prior over
    point-mass inputs; otherwise one extra ensemble member is added whose
    small weight cannot close the gap.
    """
    if (ch.in_dim, ch.out_dim) != (free.in_dim, free.out_dim):
        raise ValueError("channel and free set dimensions differ")
    X = free.stacked()
    x = ch.matrix.ravel()
    full = project_onto_hull(x, X, tol, max_iter)
    if not full.separated:
        return None
    shape = ch.matrix.shape
    Xc = np.array([_centered(v.matrix).ravel() for v in free.vertices])
    xc = _centered(ch.matrix).ravel()
    cen = project_onto_hull(xc, Xc, tol, max_iter)
    if cen.separated:
        w = _uniform_game(ch, free, (xc - cen.point).reshape(shape))
        if w is not None and w.payoff(ch) > w.free_max():
            return w
    r = x - full.point
    margin = float(r @ x - (X @ r).max())
    w = _padded_game(ch, free, r.reshape(shape), margin)
    if not w.payoff(ch) > w.free_max():
        raise RuntimeError("separating functional lost strictness; tighten tol")
    return w


@dataclass(frozen=True, eq=False)
class GapWitness:
    hamiltonians: tuple
    states: tuple
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def _gap_sum(ch: ClassicalChannel, states, hams, cfg) -> float:
    return sum(w_gap(apply_channel(ch, s), h, cfg) for s, h in zip(states, hams))


def compile_gap_witness(w: DiscriminationWitness, cfg: ThermoConfig) -> GapWitness:
    """Hamiltonians ``H_i = kT ln2 prior_i povm_i`` whose summed ``w_gap`` on the
    channel's outputs exceeds the best free channel's.

    The right side is a maximum over vertices, which is exact because the
    state-dependent part of ``w_gap`` is linear in the channel.
    """
    hams = tuple(DiagonalHamiltonian(cfg.bit_energy * p * np.asarray(e))
                 for p, e in zip(w.prior.probs, w.povm))
    if any(h.energies.min() <= 0 for h in hams):
        raise ValueError("compiled Hamiltonians must be strictly positive")
    lhs = _gap_sum(w.channel, w.states, hams, cfg)
    rhs = max(_gap_sum(v, w.states, hams, cfg) for v in w.free.vertices)
    if not lhs > rhs:
        raise ValueError("compiled gap is not strict; use a larger POVM positivity margin")
    return GapWitness(hams, tuple(w.states), lhs, rhs)
