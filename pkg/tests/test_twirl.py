import numpy as np
import pytest

from framefree.states import IE, RE, HamiltonianSpec, ghz_state, make_pair, product_plus_state
from framefree.tensor import QuditLayout, StateVector, hamming, partial_trace, swap_operator, trace_product
from framefree.twirl import (
    LuiState,
    g_twirl_apply,
    ghz_coefficient_derivatives,
    ghz_coefficients,
    global_overlap,
    global_overlap_derivative,
    gui_density,
    gui_state,
    lui_coefficient_derivatives,
    lui_coefficients,
    lui_density,
    mc_local_twirl,
    overlap_coefficient,
    pair_product_density,
    product_coefficient_derivatives,
    product_coefficient_second_derivatives,
    product_coefficients,
)

from conftest import random_hermitian, random_state


def z_sum_pair(probe, theta, mode=RE):
    n = probe.layout.n_sites
    return make_pair(probe, HamiltonianSpec.pauli_z_sum(n), theta, mode)


def trace_dist(a, b):
    vals = np.linalg.eigvalsh(a - b)
    return 0.5 * np.sum(np.abs(vals))


class TestOverlapCoefficient:
    def test_ghz_full_mask(self):
        for n in (2, 3):
            pair = z_sum_pair(ghz_state(n), 0.47)
            got = overlap_coefficient(pair, (1 << n) - 1)
            assert np.isclose(got, np.cos(n * 0.47) ** 2, atol=1e-12)

    def test_ghz_partial_masks_half(self):
        pair = z_sum_pair(ghz_state(3), 0.31)
        for mask in (0b001, 0b011, 0b101, 0b110):
            assert np.isclose(overlap_coefficient(pair, mask), 0.5, atol=1e-12)

    def test_product_power_law(self):
        pair = z_sum_pair(product_plus_state(3), 0.62)
        for mask in range(8):
            expected = np.cos(0.62) ** (2 * hamming(mask))
            assert np.isclose(overlap_coefficient(pair, mask), expected, atol=1e-12)

    def test_empty_mask_is_one(self, rng):
        pair = z_sum_pair(random_state(2, rng), 1.1)
        assert overlap_coefficient(pair, 0) == 1.0

    def test_matches_swap_expectation(self, rng):
        # oracle: Tr(S_a P) on the dense two-copy product
        psi = random_state(2, rng)
        pair = z_sum_pair(psi, 0.8)
        dense = pair_product_density(pair).matrix
        lay2 = pair.layout.two_copy()
        for mask in range(4):
            expect = trace_product(swap_operator(mask, lay2), dense).real
            assert np.isclose(overlap_coefficient(pair, mask), expect, atol=1e-11)


class TestLuiCoefficients:
    def test_zero_angle_reduces_to_purity(self, rng):
        # oracle: purity of each reduction of the probe
        psi = random_state(3, rng)
        pair = z_sum_pair(psi, 0.0)
        lui = lui_coefficients(pair)
        rho = psi.density()
        for mask in range(1, 8):
            red = partial_trace(rho, mask).matrix
            assert np.isclose(lui.coeffs[mask], np.trace(red @ red).real, atol=1e-11)

    def test_ie_thetas_all_match_zero_angle(self, rng):
        psi = random_state(2, rng)
        base = lui_coefficients(z_sum_pair(psi, 0.0, IE)).coeffs
        for theta in (0.3, 0.9, 1.4):
            now = lui_coefficients(z_sum_pair(psi, theta, IE)).coeffs
            assert np.allclose(now, base, atol=1e-11)

    def test_ghz_quarter_pi(self):
        lui = lui_coefficients(z_sum_pair(ghz_state(2), np.pi / 4))
        assert np.allclose(lui.coeffs, [1.0, 0.5, 0.5, 0.0], atol=1e-12)

    def test_complement_symmetry_at_zero(self, rng):
        # pure global state: reductions onto a mask and its complement share purity
        psi = random_state(3, rng)
        lui = lui_coefficients(z_sum_pair(psi, 0.0))
        full = 0b111
        for mask in range(1, 7):
            assert np.isclose(lui.coeffs[mask], lui.coeffs[full ^ mask], atol=1e-11)

    def test_closed_form_models_match_numeric(self):
        for n in (1, 2, 3):
            for theta in (0.0, 0.5, 1.2):
                ghz_num = lui_coefficients(z_sum_pair(ghz_state(n), theta)).coeffs
                assert np.allclose(ghz_num, ghz_coefficients(n, theta), atol=1e-12)
                prod_num = lui_coefficients(z_sum_pair(product_plus_state(n), theta)).coeffs
                assert np.allclose(prod_num, product_coefficients(n, theta), atol=1e-12)

    def test_exact_derivatives_match_finite_difference(self, rng):
        psi = random_state(2, rng)
        h = 1e-6
        for mode in (IE, RE):
            exact = lui_coefficient_derivatives(z_sum_pair(psi, 0.7, mode))
            fd = (lui_coefficients(z_sum_pair(psi, 0.7 + h, mode)).coeffs
                  - lui_coefficients(z_sum_pair(psi, 0.7 - h, mode)).coeffs) / (2 * h)
            assert np.allclose(exact, fd, atol=1e-8)

    def test_closed_form_derivatives(self):
        h = 1e-6
        for n in (2, 3):
            fd = (ghz_coefficients(n, 0.4 + h) - ghz_coefficients(n, 0.4 - h)) / (2 * h)
            assert np.allclose(ghz_coefficient_derivatives(n, 0.4), fd, atol=1e-8)
            fd = (product_coefficients(n, 0.4 + h) - product_coefficients(n, 0.4 - h)) / (2 * h)
            assert np.allclose(product_coefficient_derivatives(n, 0.4), fd, atol=1e-8)
            fd2 = (product_coefficient_derivatives(n, 0.4 + h)
                   - product_coefficient_derivatives(n, 0.4 - h)) / (2 * h)
            assert np.allclose(product_coefficient_second_derivatives(n, 0.4), fd2, atol=1e-6)


class TestLuiDensity:
    def test_single_site_symmetric_projector(self, rng):
        # oracle: (I + S) / (d (d + 1)) for unit coefficients
        for d in (2, 3):
            lay = QuditLayout(1, d, 1)
            lui = LuiState(lay, np.array([1.0, 1.0]), RE, 0.0)
            dense = lui_density(lui).matrix
            swap = swap_operator(1, lay.two_copy())
            expected = (np.eye(d * d) + swap) / (d * (d + 1))
            assert np.allclose(dense, expected, atol=1e-12)

    def test_unit_trace_random_pairs(self, rng):
        for n in (1, 2, 3):
            psi = random_state(n, rng)
            dense = lui_density(lui_coefficients(z_sum_pair(psi, 0.9))).matrix
            assert np.isclose(dense.trace().real, 1.0, atol=1e-10)

    def test_matches_brute_force_single_site_twirl(self, rng):
        # oracle: Monte-Carlo twirl of |psi><psi| x |psi><psi| at one site
        psi = random_state(1, rng)
        pair = z_sum_pair(psi, 0.0)
        analytic = lui_density(lui_coefficients(pair)).matrix
        sampled = mc_local_twirl(pair, 20000, np.random.default_rng(321)).matrix
        assert trace_dist(analytic, sampled) < 0.02


class TestGui:
    def test_ie_pure_overlap_one(self, rng):
        pair = z_sum_pair(random_state(2, rng), 0.8, IE)
        assert np.isclose(gui_state(pair).s_global, 1.0, atol=1e-12)

    def test_ghz_overlap(self):
        for n in (2, 3):
            pair = z_sum_pair(ghz_state(n), 0.33)
            assert np.isclose(gui_state(pair).s_global, np.cos(n * 0.33) ** 2, atol=1e-12)

    def test_zero_angle(self, rng):
        pair = z_sum_pair(random_state(2, rng), 0.0)
        assert np.isclose(gui_state(pair).s_global, 1.0, atol=1e-12)

    def test_density_valid_and_swap_expectation(self):
        pair = z_sum_pair(ghz_state(2), 0.4)
        state = gui_state(pair)
        dense = gui_density(state)
        lay2 = pair.layout.two_copy()
        got = trace_product(swap_operator(0b11, lay2), dense.matrix).real
        assert np.isclose(got, state.s_global, atol=1e-10)

    def test_overlap_derivative_exact(self, rng):
        psi = random_state(2, rng)
        h = 1e-6
        pair = z_sum_pair(psi, 0.6)
        fd = (global_overlap(z_sum_pair(psi, 0.6 + h))
              - global_overlap(z_sum_pair(psi, 0.6 - h))) / (2 * h)
        assert np.isclose(global_overlap_derivative(pair), fd, atol=1e-8)
        assert global_overlap_derivative(z_sum_pair(psi, 0.6, IE)) == 0.0


class TestMcLocalTwirl:
    def test_single_sample_valid_state(self, rng):
        pair = z_sum_pair(random_state(2, rng), 0.5)
        out = mc_local_twirl(pair, 1, np.random.default_rng(4))
        assert np.isclose(out.matrix.trace().real, 1.0, atol=1e-12)

    def test_converges_to_analytic_n2(self):
        pair = z_sum_pair(ghz_state(2), 0.3)
        target = lui_density(lui_coefficients(pair)).matrix
        sampled = mc_local_twirl(pair, 20000, np.random.default_rng(77)).matrix
        assert trace_dist(target, sampled) <= 0.03

    def test_swap_expectations_preserved(self):
        # sampled twirl leaves every swap-mask expectation of the input intact
        pair = z_sum_pair(ghz_state(2), 0.3)
        coeffs = lui_coefficients(pair).coeffs
        sampled = mc_local_twirl(pair, 20000, np.random.default_rng(13))
        lay2 = pair.layout.two_copy()
        for mask in range(4):
            got = trace_product(swap_operator(mask, lay2), sampled.matrix).real
            assert abs(got - coeffs[mask]) < 0.05

    def test_rejects_zero_samples(self, rng):
        with pytest.raises(ValueError, match="samples"):
            mc_local_twirl(z_sum_pair(random_state(1, rng), 0.1), 0, rng)


class TestGTwirlApply:
    def test_identity_rotations(self, rng):
        pair = z_sum_pair(random_state(2, rng), 0.4)
        dense = lui_density(lui_coefficients(pair))
        out = g_twirl_apply(dense, [np.eye(2), np.eye(2)])
        assert np.allclose(out.matrix, dense.matrix, atol=1e-14)

    def test_invariant_state_fixed(self, rng):
        from framefree.tensor import haar_unitary

        for n, d in ((2, 2), (3, 2), (2, 3)):
            lay = QuditLayout(n, d, 1)
            amps = rng.standard_normal(lay.dim) + 1j * rng.standard_normal(lay.dim)
            psi = StateVector(lay, amps / np.linalg.norm(amps))
            ham = HamiltonianSpec.dense(lay, random_hermitian(lay.dim, rng))
            dense = lui_density(lui_coefficients(make_pair(psi, ham, 0.5, RE)))
            for _ in range(5):
                rotations = [haar_unitary(d, rng) for _ in range(n)]
                out = g_twirl_apply(dense, rotations)
                assert trace_dist(out.matrix, dense.matrix) <= 1e-10

    def test_moves_untwirled_product(self, rng):
        from framefree.tensor import haar_unitary

        pair = z_sum_pair(ghz_state(2), 0.3)
        dense = pair_product_density(pair)
        rotations = [haar_unitary(2, rng) for _ in range(2)]
        out = g_twirl_apply(dense, rotations)
        assert trace_dist(out.matrix, dense.matrix) > 0.1

    def test_rejects_non_unitary(self, rng):
        pair = z_sum_pair(random_state(2, rng), 0.4)
        dense = lui_density(lui_coefficients(pair))
        with pytest.raises(ValueError, match="unitar"):
            g_twirl_apply(dense, [np.eye(2), np.ones((2, 2))])


def test_lui_state_shape_checks():
    with pytest.raises(ValueError, match="coefficients"):
        LuiState(QuditLayout(2, 2, 1), np.ones(3), RE, 0.1)
