"""Work extractable from correlations a channel maintains, and the two-sided
bound relating it to one-shot capacity.

Searches run over deterministic classical versions ``L o N o K`` (see
:mod:`thermocap.capacity`). Work values are absolute energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .aberg_work import EPS_MAX, _check_eps
from .capacity import (
    DEFAULT_SEARCH_BUDGET,
    TAU_CMP,
    InputFamily,
    _deviation,
    capacity_lower_bound_dh,
    capacity_upper_bound_d0,
    classical_version,
    deterministic_versions,
    holevo_classical,
    one_shot_capacity,
    prior_joint,
)
from .entropy import TAU_STRICT, d0_smoothed, dh_smoothed
from .prob_core import (
    BipartiteClassicalState,
    ClassicalChannel,
    Codebook,
    ThermoConfig,
    apply_local,
    product_of_marginals,
    tensor_power,
)


@dataclass(frozen=True, eq=False)
class ChannelWorkResult:
    """Best value found and the version and input that attain it.

    ``witness_decoder[y]`` is the message assigned to output ``y``.
    """

    value: float
    witness_m: int
    witness_encoder: Codebook
    witness_decoder: tuple
    witness_input: BipartiteClassicalState
    smoothing: float


def _trivial(ch: ClassicalChannel, smoothing: float) -> ChannelWorkResult:
    return ChannelWorkResult(0.0, 1, Codebook((0,)), tuple([0] * ch.out_dim),
                             BipartiteClassicalState(np.ones((1, 1))), smoothing)


def output_state(ch: ClassicalChannel, res: ChannelWorkResult) -> BipartiteClassicalState:
    """``(L o N o K x id)(eta)`` for the witness stored in ``res``."""
    V = classical_version(ch, res.witness_encoder, res.witness_decoder)
    return apply_local(V, res.witness_input)


def evaluate_witness(ch: ClassicalChannel, res: ChannelWorkResult, cfg: ThermoConfig) -> float:
    """Recompute the objective at the stored witness."""
    if res.witness_m == 1:
        return 0.0
    out = output_state(ch, res)
    joint = out.joint.ravel()
    prod = product_of_marginals(out).joint.ravel()
    return cfg.bit_energy * d0_smoothed(joint, prod, res.smoothing).value_bits


def _search(ch, smoothing, m_max, cfg, priors_for, deviation_cap, budget):
    best = _trivial(ch, smoothing)
    best_bits = 0.0
    for M in range(2, m_max + 1):
        priors = priors_for(M)
        for cw, dec, V in deterministic_versions(ch, M, budget):
            if deviation_cap is not None and _deviation(V) > deviation_cap:
                continue
            for lam in priors:
                q, r = prior_joint(V, lam)
                # D_0 never exceeds D_h, so the cheap greedy value prunes exactly
                if dh_smoothed(q, r, smoothing).value_bits <= best_bits:
                    continue
                val = d0_smoothed(q, r, smoothing).value_bits
                if val > best_bits:
                    best_bits = val
                    best = ChannelWorkResult(cfg.bit_energy * val, M, Codebook(cw), dec,
                                             BipartiteClassicalState(np.diag(lam)), smoothing)
    return best


def w_corr_channel(ch: ClassicalChannel, eps: float, m_max: int, cfg: ThermoConfig,
                   family: InputFamily | None = None,
                   budget: int = DEFAULT_SEARCH_BUDGET) -> ChannelWorkResult:
    """Largest correlation work ``kT ln2 D_0^eps((V x id)(eta) || marginals)`` over
    versions V with at most ``m_max`` messages and inputs eta of ``family``.

    Output messages that are never decoded are dropped from the output
    register (the state is restricted to its support) rather than skipped.
    """
    _check_eps(eps)
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    family = family or InputFamily()
    return _search(ch, eps, m_max, cfg, family.priors, None, budget)


def w_phi_channel(ch: ClassicalChannel, eps: float, m_max: int, cfg: ThermoConfig,
                  budget: int = DEFAULT_SEARCH_BUDGET) -> ChannelWorkResult:
    """Correlation work on the maximally correlated input, over versions whose
    Gibbs deviation is below ``2 eps`` (realized as ``<= 2 eps - TAU_STRICT``)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    uniform = lambda M: [np.full(M, 1.0 / M)]
    return _search(ch, eps, m_max, cfg, uniform, 2.0 * eps - TAU_STRICT, budget)


def corr_penalty(eps: float, omega: float, cfg: ThermoConfig) -> float:
    """``kT ln(4 eps / ((eps - omega)^2 (1 - omega)))``."""
    return cfg.kT * math.log(4.0 * eps / ((eps - omega) ** 2 * (1.0 - omega)))


@dataclass(frozen=True, eq=False)
class Theorem1Report:
    """Lower, middle and upper terms of the work/capacity sandwich (energies).

    ``lower`` comes from a restricted search, so it is itself a lower bound on
    the exact lower term; the check ``lower <= capacity`` stays sound.
    """

    lower: float
    capacity: float
    upper: float
    penalty: float
    corr: ChannelWorkResult
    phi: ChannelWorkResult
    capacity_bits: float
    entropic_lower_bits: float | None = None
    entropic_upper_bits: float | None = None
    slack: float = 1e-9

    @property
    def holds(self) -> bool:
        ok = self.lower <= self.capacity + self.slack and self.capacity <= self.upper + self.slack
        if self.entropic_lower_bits is not None:
            ok = ok and self.entropic_lower_bits <= self.capacity_bits + self.slack
            ok = ok and self.capacity_bits <= self.entropic_upper_bits + self.slack
        return ok

    @property
    def gap(self) -> float:
        return self.upper - self.capacity


def verify_theorem1(ch: ClassicalChannel, eps: float, omega: float, delta: float,
                    m_max: int, cfg: ThermoConfig, entropic: bool = True,
                    family: InputFamily | None = None) -> Theorem1Report:
    """Evaluate ``W_corr^omega - penalty <= kT ln2 C^eps <= W_Phi^{eps+delta}``.

    With ``entropic=True`` the report also carries the D_h lower and D_0
    upper capacity bounds in bits.
    """
    if not 0.0 < delta <= omega < eps <= EPS_MAX + 1e-12:
        raise ValueError("need 0 < delta <= omega < eps <= 1 - 1/sqrt(2)")
    corr = w_corr_channel(ch, omega, m_max, cfg, family)
    phi = w_phi_channel(ch, eps + delta, m_max, cfg)
    cap = one_shot_capacity(ch, eps, m_max)
    penalty = corr_penalty(eps, omega, cfg)
    lo_bits = hi_bits = None
    if entropic:
        lo_bits = capacity_lower_bound_dh(ch, eps, omega, m_max, family)
        hi_bits = capacity_upper_bound_d0(ch, eps, delta, m_max)
    return Theorem1Report(
        lower=corr.value - penalty,
        capacity=cfg.bit_energy * cap.capacity_bits,
        upper=phi.value,
        penalty=penalty,
        corr=corr,
        phi=phi,
        capacity_bits=cap.capacity_bits,
        entropic_lower_bits=lo_bits,
        entropic_upper_bits=hi_bits,
    )


def asymptotic_sweep(ch: ClassicalChannel, eps: float, k_max: int, m_max: int,
                     budget: int = DEFAULT_SEARCH_BUDGET) -> dict:
    """Per k: ``(capacity rate of ch^k, Holevo information of ch)`` in bits.

    For classical channels the Holevo information is additive, so the
    single-letter value is the asymptotic reference for every k.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    chi = holevo_classical(ch)
    table = {}
    for k in range(1, k_max + 1):
        chk = tensor_power(ch, k)
        table[k] = (one_shot_capacity(chk, eps, m_max, budget).capacity_bits / k, chi)
    return table
