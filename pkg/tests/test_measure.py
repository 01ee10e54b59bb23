import math

import numpy as np
import pytest

from focklab.errors import FocklabError, GridExtentError, PositivityError
from focklab.fock import FockParams
from focklab.measure import (AdmissibilityReport, Density, GaussianDensity,
                             PointMasses, RadialDensity, admissibility_probe,
                             berezin_grid, berezin_lr_constant, berezin_lr_norm,
                             berezin_measure, disk_cell_area, is_positive,
                             require_positive, support_radius_of, total_mass,
                             total_variation, translate, uniform_disk)
from focklab.numerics import polar_grid

PARAMS = FockParams(alpha=1.0)


def delta(w, weight=1.0):
    return PointMasses(((complex(w), complex(weight)),))


class TestVariants:

    def test_point_mass_accessors(self):
        mu = PointMasses(((1j, 2.0), (3.0, -0.5)))
        np.testing.assert_allclose(mu.locations, [1j, 3.0])
        np.testing.assert_allclose(mu.weights, [2.0, -0.5])

    def test_radial_requires_exactly_one_spec(self):
        with pytest.raises(ValueError):
            RadialDensity(profile=lambda t: t, support_radius=1.0,
                          constant_value=1.0)
        with pytest.raises(ValueError):
            RadialDensity()

    def test_constant_disk_needs_finite_radius(self):
        with pytest.raises(ValueError):
            RadialDensity(support_radius=math.inf, constant_value=1.0)

    def test_gaussian_validation(self):
        with pytest.raises(ValueError):
            GaussianDensity(1.0, 0.0)

    def test_positivity_flags(self):
        assert is_positive(delta(0.5, 2.0))
        assert not is_positive(delta(0.5, -2.0))
        assert not is_positive(delta(0.5, 1j))
        assert is_positive(uniform_disk(1.0, 2.0))
        assert not is_positive(uniform_disk(-1.0, 2.0))
        assert is_positive(GaussianDensity(0.5, 1.0))
        smooth = Density(lambda w: np.ones_like(w), 1.0)
        assert not is_positive(smooth)  # callables are not trusted by default
        with pytest.raises(PositivityError):
            require_positive(smooth, "a mass identity")


class TestTotalVariation:

    def test_point_mass(self):
        assert total_variation(delta(0j)) == 1.0
        assert total_variation(PointMasses(((0j, -2.0), (1.0, 1j)))) == pytest.approx(3.0)

    def test_uniform_disk_exact(self):
        assert total_variation(uniform_disk(1.0, 1.0)) == pytest.approx(
            math.pi, rel=1e-12)

    def test_gaussian_closed_form(self):
        assert total_variation(GaussianDensity(1.0, 4.0)) == pytest.approx(
            math.pi / 4.0, rel=1e-14)

    def test_sampled_density(self):
        mu = Density(lambda w: np.exp(-np.abs(w) ** 2), 6.0)
        assert total_variation(mu) == pytest.approx(math.pi, rel=1e-10)
        assert total_mass(mu) == pytest.approx(math.pi, rel=1e-10)

    def test_infinite_radial_support_rejected(self):
        leb = RadialDensity(profile=lambda t: np.ones_like(t))
        with pytest.raises(FocklabError):
            total_variation(leb)
        with pytest.raises(FocklabError):
            support_radius_of(leb)


class TestBerezinMeasure:

    def test_delta_origin(self):
        for z in (0j, 1.0, 1 - 2j):
            got = berezin_measure(delta(0j), z, PARAMS)
            assert got == pytest.approx(
                math.exp(-abs(z) ** 2) / math.pi, rel=1e-13)

    def test_gaussian_closed_form(self):
        beta = 2.0
        mu = GaussianDensity(1.0, beta)
        for z in (0j, 0.5 + 1j):
            expected = (1.0 / (1.0 + beta)) * math.exp(
                -beta / (1.0 + beta) * abs(z) ** 2)
            assert berezin_measure(mu, z, PARAMS) == pytest.approx(expected,
                                                                  rel=1e-13)

    def test_lebesgue_flattens_to_one(self):
        leb = Density(lambda w: np.ones_like(w, dtype=complex), 9.0)
        for z in (0j, 2 + 1j, -3.0):
            assert berezin_measure(leb, z, PARAMS) == pytest.approx(1.0,
                                                                    rel=1e-10)

    def test_vectorized_evaluation(self):
        mu = delta(1.0, 0.5)
        zs = np.array([0j, 1.0, 2j])
        out = berezin_measure(mu, zs, PARAMS)
        assert out.shape == (3,)
        assert out[1] == pytest.approx(0.5 / math.pi, rel=1e-13)

    def test_translation_covariance(self):
        offset = 0.7 - 0.4j
        z = 1.1 + 0.2j
        candidates = [
            PointMasses(((0j, 1.0), (2.0, 1.0))),
            Density(lambda w: np.exp(-0.7 * np.abs(w) ** 2) * (1 + 0.3 * w.real),
                    4.0),
            GaussianDensity(2.0, 1.5),
            uniform_disk(1.0, 1.0),
        ]
        for mu in candidates:
            a = berezin_measure(translate(mu, offset), z, PARAMS)
            b = berezin_measure(mu, z - offset, PARAMS)
            assert abs(a - b) < 1e-12


class TestBerezinLrNorm:

    def test_delta_pair_l1(self):
        pair = PointMasses(((0j, 1.0), (2.0 + 0j, 1.0)))
        assert berezin_lr_norm(pair, 1.0, PARAMS) == pytest.approx(2.0,
                                                                   abs=1e-8)

    def test_delta_sup_probes_origin(self):
        assert berezin_lr_norm(delta(0j), math.inf, PARAMS) == pytest.approx(
            1.0 / math.pi, rel=1e-14)

    def test_mass_identity_corpus(self):
        corpus = [
            delta(0j),
            PointMasses(((0j, 1.0), (2.0, 1.0))),
            uniform_disk(1.0, 1.0),
            GaussianDensity(1.0, 2.0),
            PointMasses(((1 + 1j, 0.5), (-1j, 1.5), (0.25, 2.0))),
        ]
        for mu in corpus:
            require_positive(mu, "mass identity")
            lhs = berezin_lr_norm(mu, 1.0, PARAMS)
            rhs = total_variation(mu)
            assert lhs == pytest.approx(rhs, rel=1e-7), mu

    @pytest.mark.parametrize("r", [1.0, 2.0, 4.0, math.inf])
    def test_lr_bound_with_explicit_constant(self, r):
        for alpha in (0.5, 1.0, math.pi):
            params = FockParams(alpha=alpha)
            for mu in (delta(1.0, 0.8), GaussianDensity(1.0, 1.0)):
                lhs = berezin_lr_norm(mu, r, params)
                rhs = berezin_lr_constant(alpha, r) * total_variation(mu)
                assert lhs <= rhs * (1.0 + 1e-10)

    def test_lr_bound_for_disk_density(self):
        # r = 1 equality for this measure is the mass identity test above.
        mu = uniform_disk(0.5, 1.5)
        for r in (2.0, math.inf):
            lhs = berezin_lr_norm(mu, r, PARAMS)
            rhs = berezin_lr_constant(PARAMS.alpha, r) * total_variation(mu)
            assert lhs <= rhs * (1.0 + 1e-10)

    def test_small_grid_rejected(self):
        grid = polar_grid(2.0, 64, 64)
        with pytest.raises(GridExtentError):
            berezin_lr_norm(delta(1.0), 1.0, PARAMS, grid=grid)


class TestAdmissibility:

    def test_point_mass_value(self):
        w = 1.5 + 0.5j
        report = admissibility_probe(delta(w), [0j], PARAMS)
        assert isinstance(report, AdmissibilityReport)
        assert report.values[0] == pytest.approx(math.exp(-abs(w) ** 2),
                                                 rel=1e-13)
        assert report.admissible

    def test_unit_disk_value_at_origin(self):
        report = admissibility_probe(uniform_disk(1.0, 1.0), [0j], PARAMS)
        expected = math.pi * (1.0 - math.exp(-1.0))
        assert report.values[0] == pytest.approx(expected, rel=1e-10)
        assert report.admissible

    def test_refinement_agreement_for_smooth_density(self):
        mu = Density(lambda w: np.exp(-np.abs(w) ** 2), 6.0)
        report = admissibility_probe(mu, [0j, 1.0, 2j], PARAMS)
        assert report.admissible


class TestDiskCellArea:

    def test_full_cover(self):
        assert disk_cell_area(-3, 3, -3, 3, 1.0) == pytest.approx(math.pi,
                                                                  rel=1e-14)

    def test_quadrant(self):
        assert disk_cell_area(0, 2, 0, 2, 1.0) == pytest.approx(math.pi / 4,
                                                                rel=1e-14)

    def test_disjoint(self):
        assert disk_cell_area(2, 3, 2, 3, 1.0) == 0.0

    def test_tiling_recovers_disk_area(self):
        r, R = 0.25, 1.3
        ks = int(R / r) + 2
        total = math.fsum(
            disk_cell_area((i - 0.5) * r, (i + 0.5) * r,
                           (j - 0.5) * r, (j + 0.5) * r, R)
            for i in range(-ks, ks + 1) for j in range(-ks, ks + 1))
        assert total == pytest.approx(math.pi * R * R, rel=1e-13)

    def test_off_center(self):
        assert disk_cell_area(0, 2, 0, 2, 0.5, cx=1.0, cy=1.0) == pytest.approx(
            math.pi * 0.25, rel=1e-14)
