"""Single-shot work extraction with level transformations and thermalizations.

A protocol is a sequence of Hamiltonians ``start -> H(1) -> ... -> H(K) -> end``.
Each change is a quench: the occupied level ``n`` pays ``E'_n - E_n``; after
each quench the system thermalizes, which costs nothing. Work values below are
extracted work (minus the cost), in absolute energy units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import d0_smoothed
from .prob_core import (
    BipartiteClassicalState,
    DiagonalHamiltonian,
    Distribution,
    ThermoConfig,
    gibbs_state,
    marginals,
    product_of_marginals,
)

EPS_MAX = 1.0 - 1.0 / math.sqrt(2.0)
DEFAULT_DELTA_KT = 1e-3
SAMPLE_BLOCK = 1 << 14


@dataclass(frozen=True, eq=False)
class WorkProtocol:
    stages: tuple
    start_h: DiagonalHamiltonian
    end_h: DiagonalHamiltonian

    def __post_init__(self):
        stages = tuple(s if isinstance(s, DiagonalHamiltonian) else DiagonalHamiltonian(s)
                       for s in self.stages)
        object.__setattr__(self, "stages", stages)
        d = self.start_h.dim
        if self.end_h.dim != d or any(s.dim != d for s in stages):
            raise ValueError("all Hamiltonians of a protocol must share one dimension")
        if not np.array_equal(self.start_h.energies, self.end_h.energies):
            raise ValueError("a protocol must end at its starting Hamiltonian")

    @property
    def dim(self) -> int:
        return self.start_h.dim

    def hamiltonians(self) -> list[DiagonalHamiltonian]:
        return [self.start_h, *self.stages, self.end_h]


@dataclass(frozen=True, eq=False)
class WorkSample:
    total_work: float
    trajectory: np.ndarray


class WorkSamples(Sequence):
    """Column store of simulated samples; indexing yields :class:`WorkSample`."""

    def __init__(self, total_work: np.ndarray, trajectories: np.ndarray):
        self.total_work = total_work
        self.trajectories = trajectories

    def __len__(self):
        return int(self.total_work.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return WorkSamples(self.total_work[i], self.trajectories[i])
        return WorkSample(float(self.total_work[i]), self.trajectories[i])


@dataclass(frozen=True)
class EpsDeterministicEstimate:
    value: float
    eps: float
    delta: float
    confidence_samples: int
    mass: float


def _check_eps(eps: float):
    if not 0.0 < eps <= EPS_MAX + 1e-12:
        raise ValueError(f"eps must lie in (0, 1 - 1/sqrt(2)] = (0, {EPS_MAX:.6f}]")


def _simulate_block(energies: np.ndarray, thermal: np.ndarray, init: np.ndarray,
                    n: int, rng: np.random.Generator):
    quenches = energies.shape[0] - 1
    level = np.searchsorted(np.cumsum(init), rng.random(n) * init.sum(), side="right")
    level = np.minimum(level, init.size - 1)
    traj = np.empty((n, quenches), dtype=np.int16)
    work = np.zeros(n)
    for k in range(quenches):
        traj[:, k] = level
        work -= energies[k + 1, level] - energies[k, level]
        if k + 1 < quenches:
            cdf = thermal[k + 1]
            level = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right"),
                               init.size - 1)
    return work, traj


def simulate_protocol(p: WorkProtocol, initial: Distribution, cfg: ThermoConfig,
                      n_samples: int, seed: int) -> WorkSamples:
    """Sample the extracted-work random variable of protocol ``p``.

    Samples are drawn in fixed blocks whose generators are seeded by
    ``(seed, block index)``, so results do not depend on how blocks are
    scheduled.
    """
    initial = initial if isinstance(initial, Distribution) else Distribution(initial)
    if initial.dim != p.dim:
        raise ValueError(f"initial state has dim {initial.dim}, protocol has dim {p.dim}")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    hs = p.hamiltonians()
    energies = np.array([h.energies for h in hs])
    thermal = np.array([np.cumsum(gibbs_state(h, cfg).probs) for h in hs])
    works, trajs = [], []
    for b, start in enumerate(range(0, n_samples, SAMPLE_BLOCK)):
        n = min(SAMPLE_BLOCK, n_samples - start)
        rng = np.random.default_rng([seed, b])
        w, t = _simulate_block(energies, thermal, initial.probs, n, rng)
        works.append(w)
        trajs.append(t)
    return WorkSamples(np.concatenate(works), np.concatenate(trajs))


def eps_deterministic_work(samples, eps: float, delta: float) -> EpsDeterministicEstimate:
    """Largest observed value ``w`` with more than ``1 - eps`` of the samples
    within ``delta`` of it; ``-inf`` if there is none."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    x = samples.total_work if isinstance(samples, WorkSamples) else np.array(
        [s.total_work if isinstance(s, WorkSample) else s for s in samples], dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    x = np.sort(x)
    grid = np.unique(x)
    inside = np.searchsorted(x, grid + delta, side="right") - np.searchsorted(x, grid - delta, side="left")
    frac = inside / x.size
    ok = np.flatnonzero(frac > 1.0 - eps)
    if ok.size == 0:
        return EpsDeterministicEstimate(-math.inf, eps, delta, int(x.size), 0.0)
    k = ok[-1]
    return EpsDeterministicEstimate(float(grid[k]), eps, delta, int(x.size), float(frac[k]))


def w_ext_bounds(state: Distribution, h: DiagonalHamiltonian, eps: float,
                 cfg: ThermoConfig) -> tuple[float, float]:
    """Bracket ``[kT ln2 D_0^eps(state || gamma_H), same + kT ln(1/(1 - eps))]``
    on the eps-deterministic extractable work."""
    _check_eps(eps)
    d0 = d0_smoothed(state, gibbs_state(h, cfg), eps).value_bits
    lower = cfg.bit_energy * d0
    return lower, lower + cfg.kT * math.log(1.0 / (1.0 - eps))


def build_extraction_protocol(state: Distribution, h: DiagonalHamiltonian, eps: float,
                              k_steps: int, e_cut: float, cfg: ThermoConfig) -> WorkProtocol:
    """Staircase protocol extracting about ``kT ln2 D_0^eps(state || gamma_H)``.

    Levels outside the optimal index set are first raised to ``e_cut * kT`` above
    the ground level; this costs work only on the failure branch, whose
    probability is below ``eps``. Those levels are then lowered back to their
    original energies in ``k_steps`` equal quench + thermalize steps, which
    extracts the free-energy difference ``kT ln(Z / Z_set)`` in the
    quasi-static limit.
    """
    if k_steps < 1:
        raise ValueError("k_steps must be >= 1")
    if e_cut <= 0:
        raise ValueError("e_cut must be positive")
    h = h if isinstance(h, DiagonalHamiltonian) else DiagonalHamiltonian(h)
    res = d0_smoothed(state, gibbs_state(h, cfg), eps)
    e = h.energies
    outside = np.ones(e.size, dtype=bool)
    outside[list(res.optimizer)] = False
    if not outside.any():
        return WorkProtocol((), h, h)
    raised = e.copy()
    raised[outside] = np.maximum(e[outside], e.min() + e_cut * cfg.kT)
    stages = [raised + (e - raised) * k / k_steps for k in range(k_steps)]
    return WorkProtocol(tuple(stages), h, h)


def local_hamiltonians(s: BipartiteClassicalState, cfg: ThermoConfig):
    """Hamiltonians ``-kT ln p`` that make each marginal of ``s`` thermal."""
    hs = []
    for m in marginals(s):
        if np.any(m.probs <= 0):
            raise ValueError("marginal has zero entries; restrict the state to its support first")
        hs.append(DiagonalHamiltonian(-cfg.kT * np.log(m.probs)))
    return tuple(hs)


def w_corr_state(s: BipartiteClassicalState, eps: float, cfg: ThermoConfig) -> tuple[float, float]:
    """Work bracket for the correlations of ``s`` under locally thermalizing Hamiltonians.

    With the local Hamiltonians of :func:`local_hamiltonians` the global Gibbs
    state is the product of marginals, so the bracket is the one of
    :func:`w_ext_bounds` for the joint against that product.
    """
    _check_eps(eps)
    local_hamiltonians(s, cfg)
    return _corr_bracket(s.joint.ravel(), product_of_marginals(s).joint.ravel(), eps, cfg)


def _corr_bracket(joint: np.ndarray, product: np.ndarray, eps: float, cfg: ThermoConfig):
    lower = cfg.bit_energy * d0_smoothed(joint, product, eps).value_bits
    return lower, lower + cfg.kT * math.log(1.0 / (1.0 - eps))
