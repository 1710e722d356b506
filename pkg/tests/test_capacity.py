import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_channel
from thermocap.capacity import (
    InputFamily,
    canonical_decoders,
    capacity_lower_bound_dh,
    capacity_upper_bound_d0,
    classical_version,
    constrained_holevo,
    count_canonical_decoders,
    deterministic_versions,
    gibbs_deviation,
    holevo_classical,
    hn_penalty_bits,
    lower_bound_search,
    one_shot_capacity,
    optimal_success_probability,
    phi_joint,
    upper_bound_search,
)
from thermocap.entropy import binary_entropy, d0_smoothed
from thermocap.prob_core import ClassicalChannel, Codebook


def brute_success(T, cw):
    """Best success probability over every decoder map, not just maximum likelihood."""
    M, out = len(cw), T.shape[0]
    return max(sum(T[y, cw[dec[y]]] for y in range(out)) / M for dec in product(range(M), repeat=out))


def brute_capacity(T, eps, m_max):
    best = 0.0
    for M in range(1, m_max + 1):
        ps = max(brute_success(T, cw) for cw in product(range(T.shape[1]), repeat=M))
        if ps >= 1 - eps - 1e-12:
            best = math.log2(M)
    return best


def mutual_information(T, p):
    out = T @ p
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(T > 0, T * np.log2(T / out[:, None]), 0.0)
    return float(terms.sum(axis=0) @ p)


class TestSuccessProbability:
    def test_examples(self):
        assert optimal_success_probability(ClassicalChannel.identity(2), (0, 1)) == 1.0
        assert optimal_success_probability(ClassicalChannel.constant([0.5, 0.5]), (0, 1)) == 0.5
        assert math.isclose(optimal_success_probability(ClassicalChannel.bsc(0.1), (0, 1)), 0.9)

    def test_ml_matches_all_decoders(self, rng):
        for _ in range(20):
            T = random_channel(rng, 3, 3)
            cw = tuple(int(c) for c in rng.integers(0, 3, 3))
            assert math.isclose(optimal_success_probability(ClassicalChannel(T), cw),
                                brute_success(T, cw), abs_tol=1e-12)

    def test_randomized_maps_do_not_help(self, rng):
        # success probability is affine in encoder and decoder, so a grid of
        # randomized maps never beats the best deterministic pair
        T = random_channel(rng, 2, 2)
        best = max(optimal_success_probability(ClassicalChannel(T), cw) for cw in product(range(2), repeat=2))
        for a, b, c, d in product(np.linspace(0, 1, 6), repeat=4):
            E = np.array([[a, b], [1 - a, 1 - b]])
            D = np.array([[c, d], [1 - c, 1 - d]])
            assert np.trace(D @ T @ E) / 2 <= best + 1e-12


class TestCapacity:
    @pytest.mark.parametrize("ch,eps,m_max,want", [
        (ClassicalChannel.identity(4), 0.01, 4, 2.0),
        (ClassicalChannel.identity(4), 0.1, 4, 2.0),
        (ClassicalChannel.bsc(0.1), 0.1, 2, 1.0),
        (ClassicalChannel.bsc(0.1), 0.05, 2, 0.0),
        (ClassicalChannel.constant([0.3, 0.7], 3), 0.1, 3, 0.0),
    ])
    def test_golden(self, ch, eps, m_max, want):
        assert one_shot_capacity(ch, eps, m_max).capacity_bits == want

    def test_against_full_enumeration(self, rng):
        for _ in range(15):
            T = random_channel(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
            eps = float(rng.uniform(0.05, 0.5))
            assert one_shot_capacity(ClassicalChannel(T), eps, 3).capacity_bits == brute_capacity(T, eps, 3)

    def test_budget_error(self):
        with pytest.raises(ValueError, match="codebooks"):
            one_shot_capacity(ClassicalChannel.identity(4), 0.1, 4, budget=10)


class TestVersions:
    def test_decoder_count(self):
        for out in range(1, 6):
            for M in range(1, 5):
                assert count_canonical_decoders(out, M) == len(list(canonical_decoders(out, M)))

    def test_deviation(self):
        assert gibbs_deviation(classical_version(ClassicalChannel.constant([1.0, 0.0]), (0, 1), (0, 0))) == 1.0
        assert gibbs_deviation(classical_version(ClassicalChannel.identity(2), (0, 1), (0, 1))) == 0.0
        with pytest.raises(ValueError):
            gibbs_deviation(ClassicalChannel.constant([1.0, 0.0], 3))

    def test_reduced_search_matches_unreduced(self, rng):
        for _ in range(4):
            T = random_channel(rng, 2, 3)
            ch = ClassicalChannel(T)
            for M in (2, 3):
                best = 0.0
                for cw in product(range(2), repeat=M):
                    for dec in product(range(M), repeat=3):
                        V = classical_version(ch, cw, dec).matrix
                        if np.abs(V.mean(axis=1) - 1 / M).sum() <= 0.6:
                            best = max(best, d0_smoothed(*phi_joint(V), 0.3).value_bits)
                reduced = upper_bound_search(ch, 0.3, 0.6, M)
                # the reduced search also covers smaller M, so compare per-M maxima
                assert reduced.value_bits >= best - 1e-12
            assert upper_bound_search(ch, 0.3, 0.6, 3).value_bits <= max(
                best, upper_bound_search(ch, 0.3, 0.6, 2).value_bits) + 1e-12

    def test_versions_are_stochastic(self, rng):
        ch = ClassicalChannel(random_channel(rng, 3, 2))
        for _, _, V in deterministic_versions(ch, 3):
            assert np.allclose(V.sum(axis=0), 1.0)


class TestBounds:
    def test_upper_examples(self):
        assert capacity_upper_bound_d0(ClassicalChannel.identity(2), 0.1, 0.05, 2) == 1.0
        assert capacity_upper_bound_d0(ClassicalChannel.constant([0.5, 0.5]), 0.1, 0.05, 3) == 0.0

    def test_lower_floor_and_domain(self):
        assert capacity_lower_bound_dh(ClassicalChannel.identity(2), 0.25, 0.15, 2) == 0.0
        with pytest.raises(ValueError):
            capacity_lower_bound_dh(ClassicalChannel.identity(2), 0.25, 0.3, 2)
        with pytest.raises(ValueError):
            capacity_upper_bound_d0(ClassicalChannel.identity(2), 0.1, 0.2, 2)

    def test_penalty(self):
        assert math.isclose(hn_penalty_bits(0.25, 0.15), math.log2(100.0))

    def test_lower_search_identity_closed_form(self):
        # uniform input on the identity: q is flat on M diagonal cells, r = 1/M^2 everywhere
        best = lower_bound_search(ClassicalChannel.identity(4), 0.25, 4, InputFamily(grid=()))
        assert best.message_count == 4
        assert math.isclose(best.value_bits, math.log2(4 / 0.75), abs_tol=1e-12)

    def test_sandwich_random(self, rng):
        for _ in range(5):
            ch = ClassicalChannel(random_channel(rng, 3, 3))
            c = one_shot_capacity(ch, 0.25, 3).capacity_bits
            assert capacity_lower_bound_dh(ch, 0.25, 0.15, 3) <= c + 1e-9
            assert c <= capacity_upper_bound_d0(ch, 0.25, 0.05, 3) + 1e-9

    def test_input_family(self):
        priors = InputFamily(grid=(0.5,)).priors(2)
        assert len(priors) == 1 and np.allclose(priors[0], 0.5)
        assert all(math.isclose(p.sum(), 1.0) for p in InputFamily().priors(4))


class TestHolevo:
    def test_bsc_closed_form(self):
        assert math.isclose(holevo_classical(ClassicalChannel.bsc(0.1)), 1 - binary_entropy(0.1), abs_tol=1e-9)

    def test_grid_oracle_binary_input(self, rng):
        for _ in range(5):
            T = random_channel(rng, 2, 3)
            grid = np.linspace(0, 1, 20001)
            want = max(mutual_information(T, np.array([g, 1 - g])) for g in grid)
            assert abs(holevo_classical(ClassicalChannel(T)) - want) < 1e-6

    def test_constrained(self, rng):
        assert constrained_holevo(ClassicalChannel.identity(2), 0.0, 2) == 1.0
        ch = ClassicalChannel(random_channel(rng, 3, 3))
        vals = [constrained_holevo(ch, t, 3) for t in (0.0, 0.05, 0.2, 0.5, 1.0, 2.0)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= holevo_classical(ch) + 1e-9
        assert vals[-2] == vals[-1]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 0.6))
def test_success_implies_gibbs_preservation(seed, eps):
    rng = np.random.default_rng(seed)
    ch = ClassicalChannel(random_channel(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5))))
    M = int(rng.integers(2, 5))
    cb = Codebook(tuple(int(c) for c in rng.integers(0, ch.in_dim, M)))
    dec = np.argmax(ch.matrix[:, list(cb.codewords)], axis=1)
    if optimal_success_probability(ch, cb) >= 1 - eps:
        assert gibbs_deviation(classical_version(ch, cb, dec)) <= 2 * eps + 1e-9
