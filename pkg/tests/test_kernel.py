"""Model kernel: counts, energy, local fields, conditionals, PL, gradient."""

import numpy as np
import pytest

from gridmrf import (DiscreteField, InteractionStructure, build_structure,
                     cohist, conditional_probs, energy, expand_array,
                     family_dim, local_field, pl_gradient, pseudo_likelihood,
                     suff_stat)
from gridmrf.potentials import FAMILIES

NN = InteractionStructure(((1, 0), (0, 1)))


def brute_pair_count(z, structure):
    """Independent oracle: plain nested loops over all pixel pairs."""
    n, m = z.labels.shape
    counts = np.zeros((z.C + 1, z.C + 1, len(structure)), dtype=np.int64)
    for k, (r1, r2) in enumerate(structure):
        for i in range(n):
            for j in range(m):
                ni, nj = i + r1, j + r2
                if 0 <= ni < n and 0 <= nj < m \
                        and z.mask[i, j] and z.mask[ni, nj]:
                    counts[z.labels[i, j], z.labels[ni, nj], k] += 1
    return counts


def random_instance(rng, max_c=3, max_side=7):
    n, m = rng.integers(2, max_side + 1, 2)
    c = int(rng.integers(1, max_c + 1))
    labels = rng.integers(0, c + 1, (n, m))
    mask = rng.random((n, m)) > 0.2
    if not mask.any():
        mask[0, 0] = True
    return DiscreteField(labels, mask, c)


class TestCohist:
    def test_single_offset_by_hand(self):
        z = DiscreteField.from_labels([[0, 1], [1, 0]])
        s = InteractionStructure(((1, 0),))
        h = cohist(z, s).counts[:, :, 0]
        assert h[0, 1] == 1 and h[1, 0] == 1
        assert h[0, 0] == 0 and h[1, 1] == 0

    def test_constant_field_closed_form(self):
        z = DiscreteField.from_labels(np.zeros((4, 6), dtype=int), C=1)
        s = InteractionStructure(((0, 1),))
        h = cohist(z, s).counts
        assert h[0, 0, 0] == 4 * 5
        assert h.sum() == h[0, 0, 0]

    def test_masked_row_excludes_crossing_pairs(self):
        labels = np.zeros((3, 3), dtype=int)
        mask = np.ones((3, 3), dtype=bool)
        mask[1, :] = False
        z = DiscreteField(labels, mask, 1)
        s = InteractionStructure(((1, 0),))
        assert cohist(z, s).counts.sum() == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(2)
        s = InteractionStructure(((1, 0), (0, 1), (1, -1), (2, 2)))
        for _ in range(30):
            z = random_instance(rng)
            assert np.array_equal(cohist(z, s).counts, brute_pair_count(z, s))

    def test_slice_totals_count_valid_pairs(self):
        rng = np.random.default_rng(7)
        s = InteractionStructure(((1, 0), (0, 2)))
        for _ in range(10):
            z = random_instance(rng)
            h = cohist(z, s).counts
            brute = brute_pair_count(z, s)
            for k in range(len(s)):
                assert h[:, :, k].sum() == brute[:, :, k].sum()


class TestSuffStat:
    def test_onepar_counts_different_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            z = random_instance(rng)
            v = suff_stat(z, NN, "onepar").values
            counts = brute_pair_count(z, NN)
            expected = counts.sum() - sum(
                counts[a, a, :].sum() for a in range(z.C + 1))
            assert v[0] == expected

    def test_oneeach_hand_example(self):
        z = DiscreteField.from_labels([[0, 1], [1, 0]])
        assert suff_stat(z, NN, "oneeach").values.tolist() == [2.0, 2.0]

    def test_constant_zero_field_gives_zero_vector(self):
        z = DiscreteField.from_labels(np.zeros((3, 3), dtype=int), C=1)
        for family in FAMILIES:
            assert not suff_stat(z, NN, family).values.any()

    def test_constant_nonzero_field_free_family(self):
        z = DiscreteField.from_labels(np.full((3, 3), 2), C=2)
        v = suff_stat(z, NN, "free").values
        # only the (2,2) class is populated; symmetric families give zero
        assert v.sum() == 2 * 3 * 2  # 12 pairs
        for family in ("onepar", "oneeach", "absdif", "dif"):
            assert not suff_stat(z, NN, family).values.any()

    def test_label_exceeding_c_rejected(self):
        z = DiscreteField.from_labels([[0, 2]], C=2)
        with pytest.raises(ValueError, match="exceed"):
            suff_stat(z, NN, "onepar", C=1)


class TestEnergy:
    def test_zero_theta(self):
        rng = np.random.default_rng(4)
        pot = expand_array(np.zeros(2), "oneeach", NN, 2)
        for _ in range(5):
            z = random_instance(rng, max_c=2)
            z = DiscreteField(np.minimum(z.labels, 2), z.mask, 2)
            assert energy(z, pot) == 0.0

    def test_potts_hand_example(self):
        z = DiscreteField.from_labels([[0, 1], [1, 0]])
        pot = expand_array([-1.0], "onepar", NN, 1)
        assert energy(z, pot) == -4.0

    def test_energy_identity_inner_product(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            z = random_instance(rng)
            family = FAMILIES[rng.integers(0, 5)]
            dim = family_dim(family, len(NN), z.C)
            v = rng.uniform(-2, 2, dim)
            pot = expand_array(v, family, NN, z.C)
            s = suff_stat(z, NN, family).values
            assert energy(z, pot) == pytest.approx(s @ v, abs=1e-10)

    def test_potts_specialization(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            z = random_instance(rng)
            phi = rng.uniform(-2, 2)
            pot = expand_array([phi], "onepar", NN, z.C)
            counts = brute_pair_count(z, NN)
            n_diff = counts.sum() - sum(
                counts[a, a, :].sum() for a in range(z.C + 1))
            assert energy(z, pot) == pytest.approx(phi * n_diff, abs=1e-10)

    def test_c_mismatch_rejected(self):
        z = DiscreteField.from_labels([[0, 1]], C=1)
        pot = expand_array([1.0], "onepar", NN, 2)
        with pytest.raises(ValueError, match="C mismatch"):
            energy(z, pot)


class TestLocalField:
    def test_zero_theta(self):
        z = DiscreteField.from_labels([[0, 1], [1, 0]])
        pot = expand_array(np.zeros(2), "oneeach", NN, 1)
        assert not local_field(z, (0, 0), pot).any()

    def test_potts_neighbor_count(self):
        rng = np.random.default_rng(8)
        phi = -0.75
        for _ in range(10):
            labels = rng.integers(0, 3, (5, 5))
            z = DiscreteField.from_labels(labels, C=2)
            pot = expand_array([phi], "onepar", NN, 2)
            i = (2, 3)
            nbrs = [labels[1, 3], labels[3, 3], labels[2, 2], labels[2, 4]]
            h = local_field(z, i, pot)
            for k in range(3):
                assert h[k] == pytest.approx(
                    phi * sum(1 for b in nbrs if b != k), abs=1e-12)

    def test_independent_of_own_value(self):
        rng = np.random.default_rng(9)
        z = random_instance(rng)
        pot = expand_array(rng.uniform(-1, 1, 2), "oneeach", NN, z.C)
        rows, cols = np.nonzero(z.mask)
        i = (int(rows[0]), int(cols[0]))
        h0 = local_field(z, i, pot)
        flipped = z.labels.copy()
        flipped[i] = (flipped[i] + 1) % (z.C + 1)
        h1 = local_field(DiscreteField(flipped, z.mask, z.C), i, pot)
        assert np.array_equal(h0, h1)

    def test_masked_pixel_rejected(self):
        mask = np.array([[True, False]])
        z = DiscreteField(np.array([[0, 0]]), mask, 1)
        pot = expand_array([1.0], "onepar", NN, 1)
        with pytest.raises(ValueError, match="masked"):
            local_field(z, (0, 1), pot)


class TestConditionalProbs:
    def test_uniform_at_zero_theta(self):
        z = DiscreteField.from_labels([[0, 1, 2]], C=2)
        pot = expand_array(np.zeros(1), "onepar",
                           InteractionStructure(((0, 1),)), 2)
        p = conditional_probs(z, (0, 1), pot)
        assert np.allclose(p, 1.0 / 3.0, atol=1e-15)

    def test_normalized_and_positive(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            z = random_instance(rng)
            pot = expand_array(rng.uniform(-20, 20, 2), "oneeach", NN, z.C)
            rows, cols = np.nonzero(z.mask)
            t = rng.integers(0, rows.size)
            p = conditional_probs(z, (int(rows[t]), int(cols[t])), pot)
            assert abs(p.sum() - 1.0) <= 1e-12
            assert (p > 0).all()

    def test_shift_invariance(self):
        # softmax of h and h + c agree; realized via onepar theta where
        # adding a constant to all entries of h happens with equal fields
        z = DiscreteField.from_labels([[1, 1], [1, 1]], C=1)
        pot = expand_array([3.0], "onepar", NN, 1)
        p = conditional_probs(z, (0, 0), pot)
        assert abs(p.sum() - 1.0) <= 1e-12


class TestPseudoLikelihood:
    def test_zero_theta_closed_form(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            z = random_instance(rng)
            pot = expand_array(np.zeros(2), "oneeach", NN, z.C)
            expected = -z.n_sites * np.log(z.C + 1)
            assert pseudo_likelihood(z, pot) == pytest.approx(expected, abs=1e-9)

    def test_matches_per_pixel_conditionals(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            z = random_instance(rng, max_side=5)
            pot = expand_array(rng.uniform(-1.5, 1.5, 2), "oneeach", NN, z.C)
            total = 0.0
            for i, j in zip(*np.nonzero(z.mask)):
                p = conditional_probs(z, (int(i), int(j)), pot)
                total += np.log(p[z.labels[i, j]])
            assert pseudo_likelihood(z, pot) == pytest.approx(total, abs=1e-10)

    def test_mask_robustness(self):
        # statistics of a masked field equal those of the sub-lattice
        labels = np.array([[0, 1, 1], [1, 0, 0], [0, 0, 1]])
        mask = np.array([[True, True, False],
                         [True, True, False],
                         [False, False, False]])
        z_masked = DiscreteField(labels, mask, 1)
        z_sub = DiscreteField(labels[:2, :2], np.ones((2, 2), bool), 1)
        pot = expand_array([-0.8, 0.4], "oneeach", NN, 1)
        assert np.array_equal(cohist(z_masked, NN).counts,
                              cohist(z_sub, NN).counts)
        assert pseudo_likelihood(z_masked, pot) == pytest.approx(
            pseudo_likelihood(z_sub, pot), abs=1e-12)


class TestGradient:
    def finite_difference(self, z, v, family, structure, h=1e-5):
        fd = np.zeros(v.size)
        for m in range(v.size):
            vp, vm = v.copy(), v.copy()
            vp[m] += h
            vm[m] -= h
            fp = pseudo_likelihood(z, expand_array(vp, family, structure, z.C))
            fm = pseudo_likelihood(z, expand_array(vm, family, structure, z.C))
            fd[m] = (fp - fm) / (2 * h)
        return fd

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        s = InteractionStructure(((1, 0), (0, 1), (1, 1)))
        for trial in range(50):
            z = random_instance(rng, max_c=2, max_side=6)
            family = FAMILIES[trial % 5]
            dim = family_dim(family, len(s), z.C)
            v = rng.uniform(-1, 1, dim)
            an = pl_gradient(z, v, family, s, z.C)
            fd = self.finite_difference(z, v, family, s)
            denom = max(1.0, np.abs(fd).max())
            assert np.abs(an - fd).max() / denom < 1e-6
