import math

import numpy as np
import pytest

from thermocap.aberg_work import (
    EPS_MAX,
    WorkProtocol,
    build_extraction_protocol,
    eps_deterministic_work,
    local_hamiltonians,
    simulate_protocol,
    w_corr_state,
    w_ext_bounds,
)
from thermocap.prob_core import (
    BipartiteClassicalState,
    DiagonalHamiltonian,
    Distribution,
    ThermoConfig,
    gibbs_state,
)

CFG = ThermoConfig()


def exact_moments(protocol, initial, cfg):
    """Mean and variance of extracted work; thermalization makes the steps independent."""
    hs = [h.energies for h in protocol.hamiltonians()]
    p = np.asarray(initial.probs)
    mean = var = 0.0
    for k in range(len(hs) - 1):
        step = -(hs[k + 1] - hs[k])
        m = float(p @ step)
        mean += m
        var += float(p @ step**2) - m * m
        w = np.exp(-(hs[k + 1] - hs[k + 1].min()) / cfg.kT)
        p = w / w.sum()
    return mean, var


class TestEpsDeterministic:
    def test_constant_samples(self):
        assert eps_deterministic_work([1.5] * 10, 0.2, 0.0).value == 1.5

    def test_majority_atom(self):
        samples = [0.0] * 30 + [1.0] * 70
        assert eps_deterministic_work(samples, 0.35, 0.01).value == 1.0

    def test_no_atom_heavy_enough(self):
        samples = [0.0] * 50 + [1.0] * 50
        assert eps_deterministic_work(samples, 0.4, 0.01).value == -math.inf

    def test_window_joins_atoms(self):
        est = eps_deterministic_work([0.0] * 50 + [0.5] * 50, 0.1, 0.5)
        assert est.value == 0.5 and est.mass == 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            eps_deterministic_work([1.0], 0.0, 0.1)
        with pytest.raises(ValueError):
            eps_deterministic_work([], 0.1, 0.1)


class TestBounds:
    def test_pure_state_degenerate(self):
        lo, hi = w_ext_bounds(Distribution.point(4, 0), DiagonalHamiltonian.degenerate(4), 0.1, CFG)
        assert math.isclose(lo, 2 * CFG.bit_energy)
        assert math.isclose(hi - lo, math.log(1 / 0.9))

    def test_thermal_state_gives_zero(self):
        h = DiagonalHamiltonian([0.0, 0.4, 1.3])
        lo, _ = w_ext_bounds(gibbs_state(h, CFG), h, 0.05, CFG)
        assert abs(lo) < 1e-12

    def test_eps_range(self):
        with pytest.raises(ValueError, match="1 - 1/sqrt"):
            w_ext_bounds(Distribution.point(2), DiagonalHamiltonian.degenerate(2), 0.3, CFG)
        w_ext_bounds(Distribution.point(2), DiagonalHamiltonian.degenerate(2), EPS_MAX, CFG)

    def test_scales_with_temperature(self):
        s, h = Distribution([0.7, 0.2, 0.1]), DiagonalHamiltonian([0.0, 0.5, 1.0])
        lo1, _ = w_ext_bounds(s, h, 0.1, CFG)
        lo2, _ = w_ext_bounds(s, DiagonalHamiltonian([0.0, 1.0, 2.0]), 0.1, CFG.scaled(2.0))
        assert math.isclose(2 * lo1, lo2)


class TestProtocol:
    def test_must_close(self):
        with pytest.raises(ValueError):
            WorkProtocol((), DiagonalHamiltonian([0, 1]), DiagonalHamiltonian([0, 2]))

    def test_structure(self):
        h = DiagonalHamiltonian.degenerate(2)
        p = build_extraction_protocol(Distribution.point(2, 0), h, 0.1, 5, 30.0, CFG)
        assert len(p.stages) == 5
        assert np.allclose(p.stages[0].energies, [0.0, 30.0])
        assert np.allclose(p.stages[-1].energies, [0.0, 6.0])
        assert np.array_equal(p.end_h.energies, h.energies)

    def test_full_set_needs_no_stages(self):
        h = DiagonalHamiltonian.degenerate(3)
        p = build_extraction_protocol(Distribution.uniform(3), h, 0.1, 10, 30.0, CFG)
        assert p.stages == ()

    def test_quasi_static_mean_approaches_landauer(self):
        # exact expectation, no sampling: finer staircases converge to kT ln 2
        s, h = Distribution.point(2, 0), DiagonalHamiltonian.degenerate(2)
        errs = []
        for k in (50, 500, 5000):
            mean, _ = exact_moments(build_extraction_protocol(s, h, 0.1, k, 30.0, CFG), s, CFG)
            errs.append(abs(mean - CFG.bit_energy))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.01 * CFG.bit_energy


class TestSimulation:
    def setup_method(self):
        self.s = Distribution([0.6, 0.3, 0.1])
        self.h = DiagonalHamiltonian([0.0, 0.7, 1.5])
        self.p = build_extraction_protocol(self.s, self.h, 0.15, 20, 8.0, CFG)

    def test_reproducible(self):
        a = simulate_protocol(self.p, self.s, CFG, 40_000, seed=7)
        b = simulate_protocol(self.p, self.s, CFG, 40_000, seed=7)
        c = simulate_protocol(self.p, self.s, CFG, 40_000, seed=8)
        assert np.array_equal(a.total_work, b.total_work)
        assert not np.array_equal(a.total_work, c.total_work)
        assert a.trajectories.shape == (40_000, 21)

    def test_moments_match_exact(self):
        n = 200_000
        w = simulate_protocol(self.p, self.s, CFG, n, seed=1).total_work
        mean, var = exact_moments(self.p, self.s, CFG)
        assert abs(w.mean() - mean) < 5 * math.sqrt(var / n)
        assert abs(w.var() - var) < 0.02 * var

    def test_first_step_uses_initial_state(self):
        samples = simulate_protocol(self.p, self.s, CFG, 50_000, seed=3)
        freq = np.bincount(samples.trajectories[:, 0], minlength=3) / 50_000
        assert np.allclose(freq, self.s.probs, atol=0.01)
        assert isinstance(samples[0].total_work, float)


class TestCorrelations:
    def test_max_correlated(self):
        lo, hi = w_corr_state(BipartiteClassicalState.max_correlated(2), 0.1, CFG)
        assert math.isclose(lo, CFG.bit_energy)

    def test_product_state_has_none(self):
        s = BipartiteClassicalState.product(Distribution([0.3, 0.7]), Distribution([0.5, 0.5]))
        assert w_corr_state(s, 0.1, CFG)[0] == 0.0

    def test_local_hamiltonians_make_marginals_thermal(self):
        s = BipartiteClassicalState(np.array([[0.4, 0.1], [0.2, 0.3]]))
        ha, hb = local_hamiltonians(s, CFG)
        assert np.allclose(gibbs_state(ha, CFG).probs, [0.5, 0.5])
        assert np.allclose(gibbs_state(hb, CFG).probs, [0.6, 0.4])
        with pytest.raises(ValueError):
            local_hamiltonians(BipartiteClassicalState(np.array([[1.0, 0.0], [0.0, 0.0]])), CFG)
