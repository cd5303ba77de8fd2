import numpy as np
import pytest

import povmkit as pk
from povmkit.errors import SparseBins, UnsupportedFamily
from povmkit.outcomes import TWO_PI, Region
from povmkit.sampling import make_rng, phase_cdf, spin_polar_cdf

from oracles import arc_probability_quadrature

UP_AXIS = np.array([0.0, 0.0, 1.0])


def hemisphere():
    return Region.of_caps([((0.0, 0.0, 1.0), np.pi / 2)])


class TestRng:
    def test_reproducible(self):
        a = make_rng(7).uniform(size=5)
        b = make_rng(7).uniform(size=5)
        assert np.array_equal(a, b)

    def test_streams_distinct(self):
        a = make_rng(7, stream=0).uniform(size=5)
        b = make_rng(7, stream=1).uniform(size=5)
        assert not np.array_equal(a, b)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            make_rng(-1)


class TestDirectSpin:
    def test_deterministic(self, up):
        spin = pk.spin_direction_povm()
        r1 = pk.sample_direct(spin, up, 100, seed=3)
        r2 = pk.sample_direct(spin, up, 100, seed=3)
        assert np.array_equal(r1.omega, r2.omega)

    def test_unit_vectors(self, up):
        recs = pk.sample_direct(pk.spin_direction_povm(), up, 1000, seed=1)
        norms = np.linalg.norm(recs.omega, axis=1)
        assert np.allclose(norms, 1.0)

    def test_inverse_cdf_exactness(self, plus):
        # regenerate the generator's uniform draws; the analytic CDF at the
        # sampled polar cosines must reproduce them
        n = 2000
        seed = 9
        recs = pk.sample_direct(pk.spin_direction_povm(), plus, n, seed=seed)
        rng = make_rng(seed)
        v = rng.uniform(0.0, 1.0, n)
        w, vecs = np.linalg.eigh(plus)
        psi = vecs[:, -1]
        axis = np.array(
            [
                2 * (psi[0].conj() * psi[1]).real,
                2 * (psi[0].conj() * psi[1]).imag,
                abs(psi[0]) ** 2 - abs(psi[1]) ** 2,
            ]
        )
        u = recs.omega @ axis
        assert np.max(np.abs(spin_polar_cdf(plus, u) - v)) <= 1e-10

    def test_mixed_state_uniform(self, maximally_mixed):
        n = 100_000
        recs = pk.sample_direct(pk.spin_direction_povm(), maximally_mixed, n, seed=21)
        mean = recs.omega.mean(axis=0)
        sigma = np.sqrt(1.0 / 3.0 / n)
        assert np.all(np.abs(mean) <= 4 * sigma)

    def test_up_state_hemisphere_fraction(self, up):
        n = 100_000
        recs = pk.sample_direct(pk.spin_direction_povm(), up, n, seed=2)
        frac = np.mean(hemisphere().contains(recs.omega))
        assert abs(frac - 0.75) <= 4 * np.sqrt(3.0 / 16.0 / n)


class TestDirectPhase:
    def test_cdf_monotone_normalized(self, rng):
        rho = pk.random_density_matrix(rng, 4)
        phis = np.linspace(0, TWO_PI, 200)
        cdf = phase_cdf(rho, phis)
        assert cdf[0] == pytest.approx(0.0, abs=1e-12)
        assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(cdf) >= -1e-12)

    def test_plus_state_arc_fraction(self, plus):
        n = 100_000
        recs = pk.sample_direct(pk.phase_povm(2), plus, n, seed=4)
        arc = Region.of_arcs([(-np.pi / 2, np.pi / 2)])
        frac = np.mean(arc.contains(recs.omega))
        target = 0.5 + 1.0 / np.pi
        assert abs(frac - target) <= 4 * np.sqrt(target * (1 - target) / n)

    def test_matches_quadrature_density(self, rng):
        rho = pk.random_density_matrix(rng, 3)
        n = 200_000
        recs = pk.sample_direct(pk.phase_povm(3), rho, n, seed=17)
        a, b = 1.0, 2.2
        frac = np.mean(Region.of_arcs([(a, b)]).contains(recs.omega))
        target = arc_probability_quadrature(rho, a, b)
        assert abs(frac - target) <= 4 * np.sqrt(target * (1 - target) / n)

    def test_unsupported_family(self, up):
        class Fake(pk.ContinuousPOVM):
            def __init__(self):
                self.dim = 2
                self.space = pk.SPHERE
                self.family = "fake"

        with pytest.raises(UnsupportedFamily):
            pk.sample_direct(Fake(), up, 10, seed=0)


class TestTwoStage:
    def test_records_bookkeeping(self, up):
        sg = pk.stern_gerlach_scheme()
        recs = pk.sample_two_stage(sg, up, 5000, seed=6)
        assert recs.x is not None and recs.i is not None
        signs = np.where(recs.i == 0, 1.0, -1.0)
        assert np.allclose(recs.omega, signs[:, None] * recs.x)

    def test_conditional_born_rule(self, up):
        # P(i = up | x) = cos^2(theta_x / 2); test the joint moment
        # E[1{i=up} 1{x in upper hemisphere}] = int_{u>0} (1+u)/2 du/2 = 3/8
        n = 200_000
        recs = pk.sample_two_stage(pk.stern_gerlach_scheme(), up, n, seed=8)
        upper = recs.x[:, 2] > 0
        moment = np.mean((recs.i == 0) & upper)
        assert abs(moment - 3.0 / 8.0) <= 4 * np.sqrt(0.375 * 0.625 / n)

    def test_phase_member_index_uniform(self, up):
        recs = pk.sample_two_stage(pk.phase_scheme(2), up, 100_000, seed=10)
        frac = np.mean(recs.i == 0)
        assert abs(frac - 0.5) <= 4 * np.sqrt(0.25 / 100_000)
        comb = pk.phase_scheme(2).comb
        expected = np.mod(recs.x + comb[recs.i], TWO_PI)
        assert np.allclose(recs.omega, expected)

    def test_mixing_marginal_uniform(self, up):
        # the x-marginal must follow the mixing law regardless of the state
        from povmkit.sampling import sphere12_bins

        n = 120_000
        recs = pk.sample_two_stage(pk.stern_gerlach_scheme(), up, n, seed=12)
        counts = np.bincount(sphere12_bins(recs.x), minlength=12).astype(float)
        expected = n / 12.0
        stat = float(np.sum((counts - expected) ** 2 / expected))
        from scipy.special import gammaincc

        assert gammaincc(11 / 2.0, stat / 2.0) > 1e-4

    def test_generic_route_matches_fast_path(self, up):
        sg = pk.stern_gerlach_scheme()
        xs = sg.sample_x(make_rng(3), 10)
        fast = sg.member_probabilities(xs, up)
        slow = np.array(
            [pk.born_probabilities(sg.member(x), up) for x in xs]
        )
        assert np.allclose(fast, slow, atol=1e-12)

    def test_finite_mixture_sampling(self, rng):
        res = pk.decompose_extremal(pk.coin_flip_povm())
        scheme = pk.scheme_from_decomposition(res)
        recs = pk.sample_two_stage(scheme, np.eye(2) / 2, 2000, seed=13)
        assert len(recs) == 2000
        assert set(np.unique(recs.i)) <= {0, 1}


class TestCompareSamples:
    def test_same_law_accepts(self, up):
        spin = pk.spin_direction_povm()
        sg = pk.stern_gerlach_scheme()
        passes = 0
        for seed in range(10):
            a = pk.sample_direct(spin, up, 20_000, seed=seed)
            b = pk.sample_two_stage(sg, up, 20_000, seed=1000 + seed)
            rep = pk.compare_samples(a, b, "sphere12")
            assert rep.dof == 11
            passes += rep.p_value > 0.001
        assert passes >= 9

    def test_different_law_rejects(self, up, maximally_mixed):
        spin = pk.spin_direction_povm()
        a = pk.sample_direct(spin, up, 100_000, seed=3)
        b = pk.sample_direct(spin, maximally_mixed, 100_000, seed=4)
        rep = pk.compare_samples(a, b, "sphere12")
        assert rep.p_value < 1e-6

    def test_sparse_bins_raise(self, up):
        spin = pk.spin_direction_povm()
        a = pk.sample_direct(spin, up, 30, seed=3)
        b = pk.sample_direct(spin, up, 30, seed=4)
        with pytest.raises(SparseBins):
            pk.compare_samples(a, b, "sphere12")

    def test_region_partition_bins(self, plus):
        ph = pk.phase_povm(2)
        a = pk.sample_direct(ph, plus, 20_000, seed=5)
        b = pk.sample_direct(ph, plus, 20_000, seed=6)
        edges = np.linspace(0, TWO_PI, 9)
        regions = [Region.of_arcs([(lo, hi)]) for lo, hi in zip(edges, edges[1:])]
        rep = pk.compare_samples(a, b, regions)
        assert rep.dof == 7
        assert rep.p_value > 1e-6

    def test_partition_must_cover(self, plus):
        ph = pk.phase_povm(2)
        a = pk.sample_direct(ph, plus, 1000, seed=5)
        with pytest.raises(ValueError):
            pk.compare_samples(a, a, [Region.of_arcs([(0.0, 1.0)])])
