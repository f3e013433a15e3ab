"""Core transform, multiplier, norm and dyadic-projection contracts."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnls_lab import spectral as sp
from fnls_lab.errors import (
    DimensionError,
    DomainError,
    ResolutionError,
    SingularMultiplierError,
)

TWO_PI = 2.0 * math.pi


def mode(grid: sp.TorusGrid, k: tuple, amp=1.0) -> sp.SpectralField:
    """Field amp * e^{i k.x} built directly in coefficient space."""
    c = np.zeros(grid.shape, dtype=np.complex128)
    c[tuple(ki % grid.m for ki in k)] = amp
    return sp.SpectralField(grid, c)


def random_field(grid: sp.TorusGrid, seed=0, kmax=None) -> sp.SpectralField:
    rng = np.random.Generator(np.random.Philox(seed))
    c = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    if kmax is not None:
        c = np.where(grid.k_norm() <= kmax, c, 0.0)
    return sp.SpectralField(grid, c)


class TestGridAndField:
    def test_grid_validation(self):
        with pytest.raises(DomainError):
            sp.TorusGrid(4, 16)
        with pytest.raises(DomainError):
            sp.TorusGrid(1, 7)
        with pytest.raises(DomainError):
            sp.TorusGrid(1, 2)

    def test_shape_mismatch_rejected(self):
        grid = sp.TorusGrid(2, 8)
        with pytest.raises(DimensionError):
            sp.SpectralField(grid, np.zeros((8, 4), dtype=complex))
        with pytest.raises(DimensionError):
            sp.analyze(np.zeros((8, 4)), grid)

    def test_fields_are_immutable(self):
        f = mode(sp.TorusGrid(1, 8), (1,))
        with pytest.raises(ValueError):
            f.coeff[0] = 1.0

    def test_conjugation_matches_physical_space(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=3)
        got = sp.synthesize(f.conj())
        assert np.allclose(got, np.conj(sp.synthesize(f)), atol=1e-13)


class TestTransforms:
    def test_single_mode_analyze(self):
        # u(x) = e^{i 3 x} has exactly one unit coefficient at k = 3
        grid = sp.TorusGrid(1, 16)
        (x,) = grid.nodes()
        f = sp.analyze(np.exp(3j * x), grid)
        expected = np.zeros(16, dtype=complex)
        expected[3] = 1.0
        assert np.allclose(f.coeff, expected, atol=1e-14)

    def test_constant_analyze(self):
        grid = sp.TorusGrid(2, 8)
        f = sp.analyze(np.full(grid.shape, 2.5 + 0.5j), grid)
        assert abs(f.coeff[0, 0] - (2.5 + 0.5j)) < 1e-14
        assert np.sum(np.abs(f.coeff)) == pytest.approx(abs(2.5 + 0.5j), abs=1e-13)

    @pytest.mark.parametrize("d,m", [(1, 16), (2, 16), (3, 8)])
    def test_round_trip(self, d, m):
        grid = sp.TorusGrid(d, m)
        rng = np.random.Generator(np.random.Philox(7))
        u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        back = sp.synthesize(sp.analyze(u, grid))
        assert np.max(np.abs(back - u)) < 1e-12 * max(1.0, np.max(np.abs(u)))

    @given(seed=st.integers(0, 2**31), d=st.sampled_from([1, 2]), logm=st.integers(2, 5))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_property(self, seed, d, logm):
        grid = sp.TorusGrid(d, 2 ** logm)
        rng = np.random.Generator(np.random.Philox(seed))
        u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        back = sp.synthesize(sp.analyze(u, grid))
        assert np.max(np.abs(back - u)) < 1e-12 * max(1.0, np.max(np.abs(u)))

    def test_linearity(self):
        grid = sp.TorusGrid(2, 8)
        rng = np.random.Generator(np.random.Philox(11))
        u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        v = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        a, b = 1.7 - 0.3j, -2.2 + 1j
        lhs = sp.analyze(a * u + b * v, grid).coeff
        rhs = a * sp.analyze(u, grid).coeff + b * sp.analyze(v, grid).coeff
        assert np.allclose(lhs, rhs, atol=1e-13)

    def test_parseval(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=5, kmax=6)
        u = sp.synthesize(f)
        grid_l2 = sp.lebesgue_norm(u, grid, 2.0)
        coeff_l2 = sp.l2_norm(f)
        assert grid_l2 == pytest.approx(coeff_l2, rel=1e-10)
        assert coeff_l2 == pytest.approx(sp.sobolev_norm(f, 0.0), rel=1e-12)


class TestMultipliers:
    def test_fractional_power_single_mode(self):
        # |D|^s e^{i k.x} = |k|^s e^{i k.x}
        grid = sp.TorusGrid(2, 16)
        f = mode(grid, (3, -4))
        for s in (0.5, 1.0, 2.5):
            g = sp.apply_fractional_power(f, s)
            assert g.coeff[3, -4 % 16] == pytest.approx(5.0 ** s, rel=1e-14)
        assert sp.apply_fractional_power(f, 0.0).coeff[3, -4 % 16] == 1.0

    def test_zero_mode_killed_for_positive_s(self):
        grid = sp.TorusGrid(1, 8)
        f = mode(grid, (0,), amp=2.0)
        g = sp.apply_fractional_power(f, 1.5)
        assert np.all(g.coeff == 0.0)

    def test_negative_power_requires_mean_zero(self):
        grid = sp.TorusGrid(1, 8)
        with pytest.raises(SingularMultiplierError):
            sp.apply_fractional_power(mode(grid, (0,)), -1.0)
        g = sp.apply_fractional_power(mode(grid, (2,)), -1.0)
        assert g.coeff[2] == pytest.approx(0.5, rel=1e-14)

    def test_composition_on_mean_zero(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=9, kmax=6)
        c = f.coeff.copy()
        c[0, 0] = 0.0
        f = sp.SpectralField(grid, c)
        one = sp.apply_fractional_power(sp.apply_fractional_power(f, 0.7), -0.7)
        kn = grid.k_norm()
        expected = np.where(kn > 0, f.coeff, 0.0)
        assert np.allclose(one.coeff, expected, atol=1e-12)

    def test_symbol_derivative_beta0_matches_fractional(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=2, kmax=7)
        a = sp.apply_symbol_derivative(f, 1.3, (0, 0)).coeff
        b = sp.apply_fractional_power(f, 1.3).coeff
        assert np.allclose(a, b, atol=0.0)

    def test_symbol_derivative_first_order_1d(self):
        # d_xi |xi|^2 = 2 xi, so the multiplier is -i * 2k
        grid = sp.TorusGrid(1, 16)
        f = mode(grid, (3,))
        g = sp.apply_symbol_derivative(f, 2.0, (1,))
        assert g.coeff[3] == pytest.approx(-6j, rel=1e-14)

    def test_symbol_derivative_closed_forms_2d(self):
        grid = sp.TorusGrid(2, 16)
        k = (3, 2)
        kn = math.hypot(*k)
        f = mode(grid, k)
        s = 1.7
        cases = {
            (1, 0): (-1j) * s * kn ** (s - 2) * k[0],
            (1, 1): (-1j) ** 2 * s * (s - 2) * kn ** (s - 4) * k[0] * k[1],
            (2, 0): (-1j) ** 2 * (s * kn ** (s - 2) + s * (s - 2) * kn ** (s - 4) * k[0] ** 2),
        }
        for beta, want in cases.items():
            got = sp.apply_symbol_derivative(f, s, beta).coeff[k]
            assert got == pytest.approx(want, rel=1e-13)

    def test_symbol_derivative_rejects_high_order(self):
        grid = sp.TorusGrid(1, 8)
        with pytest.raises(DomainError):
            sp.apply_symbol_derivative(mode(grid, (1,)), 1.0, (3,))

    def test_odd_symbol_zeroes_nyquist(self):
        grid = sp.TorusGrid(1, 8)
        f = mode(grid, (-4,))  # the unpaired row
        g = sp.apply_symbol_derivative(f, 2.0, (1,))
        assert np.all(g.coeff == 0.0)
        h = sp.apply_partial_derivative(f, (1,))
        assert np.all(h.coeff == 0.0)
        # even symbols keep it
        e = sp.apply_fractional_power(f, 2.0)
        assert e.coeff[4] == pytest.approx(16.0)

    def test_partial_derivative_matches_gradient(self):
        grid = sp.TorusGrid(2, 16)
        f = mode(grid, (2, 5))
        g = sp.apply_partial_derivative(f, (1, 0))
        assert g.coeff[2, 5] == pytest.approx(2j, rel=1e-14)
        g2 = sp.apply_partial_derivative(f, (0, 2))
        assert g2.coeff[2, 5] == pytest.approx(-25.0, rel=1e-14)


class TestNorms:
    def test_sobolev_single_mode(self):
        # ||e^{i k.x}||_{H^s} = (2pi)^{d/2} (1+|k|^2)^{s/2}
        for d, k in [(1, (3,)), (2, (3, 4))]:
            grid = sp.TorusGrid(d, 16)
            f = mode(grid, k)
            k2 = sum(ki ** 2 for ki in k)
            for s in (0.0, 1.0, 2.5, -1.0):
                want = TWO_PI ** (d / 2) * (1 + k2) ** (s / 2)
                assert sp.sobolev_norm(f, s) == pytest.approx(want, rel=1e-12)

    def test_sobolev_monotone_in_s(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=13)
        norms = [sp.sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))

    def test_lebesgue_constant(self):
        # ||c||_{L^p} = |c| (2pi)^{d/p}
        grid = sp.TorusGrid(2, 8)
        u = np.full(grid.shape, -1.5 + 2j)
        c = abs(-1.5 + 2j)
        for p in (1.0, 2.0, 4.0):
            assert sp.lebesgue_norm(u, grid, p) == pytest.approx(c * TWO_PI ** (2 / p), rel=1e-12)
        assert sp.lebesgue_norm(u, grid, math.inf) == pytest.approx(c, rel=1e-14)

    def test_quartic_of_cosine(self):
        # int_0^{2pi} (2 cos x)^4 dx = 16 * (3/8) * 2pi = 12 pi
        grid = sp.TorusGrid(1, 32)
        (x,) = grid.nodes()
        val = sp.lebesgue_norm(2.0 * np.cos(x), grid, 4.0)
        assert val ** 4 == pytest.approx(12.0 * math.pi, rel=1e-12)

    def test_lebesgue_rejects_p_below_one(self):
        grid = sp.TorusGrid(1, 8)
        with pytest.raises(DomainError):
            sp.lebesgue_norm(np.zeros(grid.shape), grid, 0.5)

    def test_holder_consistency(self):
        grid = sp.TorusGrid(1, 32)
        u = sp.synthesize(random_field(grid, seed=21, kmax=10))
        l2 = sp.lebesgue_norm(u, grid, 2.0)
        l1 = sp.lebesgue_norm(u, grid, 1.0)
        linf = sp.lebesgue_norm(u, grid, math.inf)
        assert l2 ** 2 <= l1 * linf * (1 + 1e-12)


class TestLPBlocks:
    def test_profile_support_and_range(self):
        r = np.linspace(0.0, 4.0, 4001)
        psi = sp.annulus_profile(r)
        assert np.all(psi >= -1e-15) and np.all(psi <= 1.0 + 1e-15)
        assert np.all(psi[(r <= 0.5) | (r >= 2.0)] == 0.0)
        assert np.all(psi[(r > 0.6) & (r < 1.9)] > 0.0)

    def test_partition_of_unity(self):
        # sum_{j>=1} psi(2^-j r) = 1 for every r >= 2
        r = np.concatenate([np.linspace(2.0, 64.0, 997), [2.0, 4.0, 17.3]])
        assert np.max(sp.LPBump.partition_defect(r)) <= 1e-12

    def test_block_sum_reconstructs(self):
        # complement block + all resolvable annuli = identity on fields
        # band-limited to |k| <= 2^{j_max}
        grid = sp.TorusGrid(2, 64)
        j_max = 4  # 2^{j+1} <= 32
        f = random_field(grid, seed=17, kmax=2 ** j_max)
        total = lp_total = sp.lp_project(f, 0).coeff.copy()
        for j in range(1, j_max + 1):
            total = total + sp.lp_project(f, j).coeff
        assert np.max(np.abs(total - f.coeff)) <= 1e-12 * np.max(np.abs(f.coeff))

    def test_blocks_idempotent_overlap(self):
        # neighbouring annuli overlap but the same block applied twice only
        # squares the profile; projecting far-separated blocks gives zero
        grid = sp.TorusGrid(1, 64)
        f = random_field(grid, seed=19)
        b2 = sp.lp_project(f, 2)
        b4 = sp.lp_project(b2, 4)
        assert np.max(np.abs(b4.coeff)) == 0.0

    def test_constant_passes_complement(self):
        grid = sp.TorusGrid(1, 16)
        f = mode(grid, (0,), amp=3.3)
        assert np.allclose(sp.lp_project(f, 0).coeff, f.coeff)

    def test_unresolvable_block_rejected(self):
        grid = sp.TorusGrid(1, 16)
        f = random_field(grid, seed=1)
        with pytest.raises(ResolutionError):
            sp.lp_project(f, 3)  # needs |k| < 16 > m/2 = 8
        sp.lp_project(f, 2)


class TestPaddedProducts:
    def test_pad_round_trip(self):
        grid = sp.TorusGrid(2, 16)
        f = random_field(grid, seed=23)
        back = sp.truncate_coefficients(sp.pad_coefficients(f, 3), grid)
        assert np.allclose(back.coeff, f.coeff, atol=0.0)

    def test_padding_preserves_samples(self):
        # padded synthesize interpolates: values at common nodes agree
        grid = sp.TorusGrid(1, 8)
        f = random_field(grid, seed=29, kmax=3)
        u = sp.synthesize(f)
        u_fine = sp.synthesize(sp.pad_coefficients(f, 2))
        assert np.allclose(u_fine[::2], u, atol=1e-12)

    def test_product_of_modes(self):
        # e^{i2x} * e^{i3x} = e^{i5x}, computed alias-free
        grid = sp.TorusGrid(1, 16)
        prod = sp.padded_product([mode(grid, (2,)), mode(grid, (3,))], grid, factor=2)
        expected = np.zeros(16, dtype=complex)
        expected[5] = 1.0
        assert np.allclose(prod.coeff, expected, atol=1e-13)

    def test_conjugate_flag(self):
        grid = sp.TorusGrid(1, 16)
        f = mode(grid, (2,))
        sq = sp.padded_product([f, f], grid, factor=2, conjugate=[False, True])
        expected = np.zeros(16, dtype=complex)
        expected[0] = 1.0  # e^{i2x} * conj(e^{i2x}) = 1
        assert np.allclose(sq.coeff, expected, atol=1e-13)
