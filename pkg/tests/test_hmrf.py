"""Spatial bases, mixture initialization, hidden-MRF EM."""

import numpy as np
import pytest

from gridmrf import (DiscreteField, InteractionStructure, RealField,
                     SamplerConfig, expand_array, fit_ghm, fourier_basis,
                     init_from_quantiles, polynomial_basis, sample_mrf)
from gridmrf.hmrf import _independent_em

NN = InteractionStructure(((1, 0), (0, 1)))


class TestPolynomialBasis:
    def test_count_3_3(self):
        assert polynomial_basis((3, 3), (30, 30)).size == 15

    def test_count_1_1(self):
        b = polynomial_basis((1, 1), (10, 10))
        assert b.size == 3
        assert b.names == ("poly_0_1", "poly_1_0", "poly_1_1")

    def test_linear_row_column_zero_mean_odd(self):
        b = polynomial_basis((1, 0), (11, 4))
        assert b.size == 1
        col = b.columns[:, 0].reshape(11, 4)
        # centered linear-in-row term: zero mean by symmetry, range [-1, 1]
        assert col.sum() == pytest.approx(0.0, abs=1e-12)
        assert col.min() == -1.0 and col.max() == 1.0

    def test_scaled_to_unit_interval(self):
        b = polynomial_basis((2, 2), (50, 80))
        assert np.abs(b.columns).max() <= 1.0

    def test_no_constant_column(self):
        b = polynomial_basis((3, 2), (9, 9))
        spans = b.columns.max(axis=0) - b.columns.min(axis=0)
        assert (spans > 1e-9).all()

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            polynomial_basis((0, 0), (5, 5))


class TestFourierBasis:
    def test_count_1_0(self):
        b = fourier_basis((1, 0), (12, 9))
        assert b.size == 2

    def test_count_1_1(self):
        assert fourier_basis((1, 1), (12, 9)).size == 6

    def test_zero_sum_on_complete_grid(self):
        b = fourier_basis((2, 2), (16, 12))
        sums = np.abs(b.columns.sum(axis=0))
        assert sums.max() < 1e-8

    def test_degenerate_columns_dropped(self):
        # q1 = N gives sin identically 0 and cos identically 1: both dropped
        b = fourier_basis((6, 0), (6, 5))
        for name in b.names:
            assert not name.endswith("_6_0")

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fourier_basis((0, 0), (5, 5))


class TestInitFromQuantiles:
    def test_uniform_quantiles(self):
        rng = np.random.default_rng(0)
        y = RealField.from_values(rng.uniform(0, 1, (80, 80)))
        params = init_from_quantiles(y, 1)
        # refinement moves mu around, but ordering and rough placement hold
        assert params.mu[0] < 0.5 < params.mu[1]
        assert (params.sigma > 0).all()
        assert params.beta.size == 0

    def test_quantile_formula_before_refinement(self):
        rng = np.random.default_rng(1)
        vals = rng.uniform(0, 1, 10000)
        levels = (2 * np.arange(2) + 1) / 4.0
        q = np.quantile(vals, levels)
        assert q[0] == pytest.approx(0.25, abs=0.02)
        assert q[1] == pytest.approx(0.75, abs=0.02)

    def test_constant_field_rejected(self):
        y = RealField.from_values(np.full((4, 4), 2.5))
        with pytest.raises(ValueError, match="constant"):
            init_from_quantiles(y, 1)

    def test_two_point_data_separates(self):
        rng = np.random.default_rng(2)
        vals = rng.choice([0.0, 10.0], size=(30, 30))
        params = init_from_quantiles(RealField.from_values(vals), 1)
        assert params.mu[0] <= params.mu[1]
        assert params.mu[0] == pytest.approx(0.0, abs=0.5)
        assert params.mu[1] == pytest.approx(10.0, abs=0.5)


def synth(seed=5, dims=(60, 60), mu=(0.0, 3.0), sigma=(1.0, 1.0), phi=-1.0):
    pot = expand_array([phi], "onepar", NN, 1)
    latent = sample_mrf(dims, NN, pot, SamplerConfig(cycles=50, seed=seed))
    rng = np.random.default_rng(seed + 1000)
    vals = (np.asarray(mu)[latent.labels]
            + np.asarray(sigma)[latent.labels] * rng.standard_normal(dims))
    return latent, RealField(vals, latent.mask), pot


def accuracy(pred: DiscreteField, truth: DiscreteField) -> float:
    a = np.mean(pred.labels[truth.mask] == truth.labels[truth.mask])
    b = np.mean(pred.labels[truth.mask] == 1 - truth.labels[truth.mask])
    return max(a, b)


class TestFitGhm:
    def test_recovers_separated_components(self):
        latent, y, pot = synth()
        fit = fit_ghm(y, NN, pot)
        assert accuracy(fit.z_pred, latent) > 0.9
        assert np.abs(fit.params.mu - [0, 3]).max() < 0.15
        assert np.abs(fit.params.sigma - 1.0).max() < 0.15

    def test_zero_theta_reduces_to_independent_em(self):
        _, y, _ = synth(seed=6)
        pot0 = expand_array([0.0], "onepar", NN, 1)
        fit = fit_ghm(y, NN, pot0, maxiter=40)
        start = init_from_quantiles(y, 1)
        mu, sigma = _independent_em(y.values[y.mask], start.mu.copy(),
                                    start.sigma.copy(), maxiter=40)
        order = np.argsort(mu)
        assert np.abs(fit.params.mu - mu[order]).max() < 1e-8
        assert np.abs(fit.params.sigma - sigma[order]).max() < 1e-8

    def test_components_sorted_by_mu(self):
        _, y, pot = synth(seed=7)
        fit = fit_ghm(y, NN, pot, init_mus=[3.0, 0.0], init_sigmas=[1.0, 1.0])
        assert fit.params.mu[0] < fit.params.mu[1]

    def test_label_permutation_invariance(self):
        latent, y, pot = synth(seed=8)
        a = fit_ghm(y, NN, pot, init_mus=[0.0, 3.0], init_sigmas=[1.0, 1.0])
        b = fit_ghm(y, NN, pot, init_mus=[3.0, 0.0], init_sigmas=[1.0, 1.0])
        assert np.abs(a.params.mu - b.params.mu).max() < 1e-8
        assert np.array_equal(a.z_pred.labels, b.z_pred.labels)

    def test_equal_vars_exact(self):
        _, y, pot = synth(seed=9, sigma=(0.8, 1.4))
        fit = fit_ghm(y, NN, pot, equal_vars=True)
        assert fit.params.sigma.max() == fit.params.sigma.min()

    def test_predicted_equals_fixed_plus_mu(self):
        _, y, pot = synth(seed=10)
        basis = polynomial_basis((1, 1), (60, 60))
        fit = fit_ghm(y, NN, pot, basis=basis)
        mask = y.mask
        expected = fit.fixed.values[mask] + \
            fit.params.mu[fit.z_pred.labels[mask]]
        assert np.array_equal(fit.predicted.values[mask], expected)

    def test_stops_on_max_dist(self):
        _, y, pot = synth(seed=11)
        loose = fit_ghm(y, NN, pot, max_dist=1.0)
        assert loose.iterations == 1

    def test_maxiter_respected(self):
        _, y, pot = synth(seed=12)
        fit = fit_ghm(y, NN, pot, maxiter=2, max_dist=1e-12)
        assert fit.iterations == 2

    def test_component_counts_match_z_pred(self):
        _, y, pot = synth(seed=13)
        fit = fit_ghm(y, NN, pot)
        counts = np.bincount(fit.z_pred.labels[y.mask], minlength=2)
        assert np.array_equal(fit.component_counts, counts)

    def test_masked_field(self):
        latent, y, pot = synth(seed=14, dims=(40, 40))
        mask = y.mask.copy()
        mask[:5, :] = False
        y2 = RealField(np.where(mask, y.values, np.nan), mask)
        fit = fit_ghm(y2, NN, pot)
        assert np.array_equal(fit.z_pred.mask, mask)
        assert np.isnan(fit.predicted.values[~mask]).all()

    def test_init_pair_required_together(self):
        _, y, pot = synth(seed=15)
        with pytest.raises(ValueError, match="both"):
            fit_ghm(y, NN, pot, init_mus=[0.0, 3.0])

    def test_empty_component_error_names_component(self):
        _, y, _ = synth(seed=17)
        pot3 = expand_array([0.0], "onepar", NN, 2)
        with pytest.raises(RuntimeError, match="component 2"):
            fit_ghm(y, NN, pot3, init_mus=[0.0, 3.0, 1e6],
                    init_sigmas=[1.0, 1.0, 1.0])

    def test_structure_mismatch_rejected(self):
        _, y, pot = synth(seed=16)
        other = InteractionStructure(((1, 0),))
        with pytest.raises(ValueError, match="structure"):
            fit_ghm(y, other, pot)
