import math

import numpy as np
import pytest
from pydantic import ValidationError

from needlets.besov_models import (
    BesovParams,
    besov_norm,
    besov_seminorm,
    embedding_check,
    generate_besov_function,
    level_terms,
)
from needlets.needlet_frame import CoefficientPyramid, analyze, synthesize_on_grid, zero_pyramid
from utils.errors import ValidationFailure


def _random_pyramid(system, rng):
    return CoefficientPyramid(entries=[rng.standard_normal(c) for c in system.counts], B=system.B)


class TestBesovParams:

    def test_norm_equivalence_condition(self):
        BesovParams(r=1.2, pi=1, q=math.inf)
        with pytest.raises(ValidationError):
            BesovParams(r=0.9, pi=1, q=math.inf)
        with pytest.raises(ValidationError):
            BesovParams(r=1, pi=0.5, q=2)

    def test_rate_hypothesis(self):
        BesovParams(r=2, pi=1, q=2).check_rate_hypothesis()
        with pytest.raises(ValidationFailure):
            BesovParams(r=1, pi=1, q=2).check_rate_hypothesis()

    def test_level_exponent(self):
        assert BesovParams(r=1, pi=2, q=2).level_exponent() == pytest.approx(1.0)


class TestSeminorm:

    def test_zero_pyramid(self, system3):
        assert besov_seminorm(zero_pyramid(system3), BesovParams(r=1, pi=2, q=2)) == 0.0
        assert besov_norm(zero_pyramid(system3), BesovParams(r=1, pi=2, q=2), system3) == 0.0

    def test_single_coefficient(self, system3):
        pyr = zero_pyramid(system3)
        pyr.entries[2][5] = 0.3
        assert besov_seminorm(pyr, BesovParams(r=1, pi=2, q=2)) == pytest.approx(1.2, rel=1e-14)

    def test_sup_over_single_level(self, system3):
        pyr = zero_pyramid(system3)
        pyr.entries[3][:4] = [1.0, -2.0, 0.5, 0.25]
        two = besov_seminorm(pyr, BesovParams(r=1.5, pi=2, q=2))
        sup = besov_seminorm(pyr, BesovParams(r=1.5, pi=2, q=math.inf))
        assert sup == pytest.approx(two, rel=1e-14)

    def test_homogeneity(self, system3):
        rng = np.random.default_rng(42)
        pyr = _random_pyramid(system3, rng)
        params = BesovParams(r=1.2, pi=1.5, q=3)
        base = besov_seminorm(pyr, params)
        for c in (-3.0, 0.25, 7.0):
            assert besov_seminorm(pyr.scaled(c), params) == pytest.approx(abs(c) * base, rel=1e-12)

    def test_triangle_inequality(self, system3):
        rng = np.random.default_rng(42)
        params = BesovParams(r=2, pi=1, q=2)
        for _ in range(20):
            a, b = _random_pyramid(system3, rng), _random_pyramid(system3, rng)
            assert besov_seminorm(a + b, params) <= besov_seminorm(a, params) + besov_seminorm(b, params) + 1e-12

    def test_level_terms(self, system2):
        pyr = zero_pyramid(system2)
        pyr.entries[1][0] = 1.0
        np.testing.assert_allclose(level_terms(pyr, BesovParams(r=1, pi=1, q=1)), [0.0, 2 ** 0.5, 0.0])


class TestGenerate:

    @pytest.mark.parametrize("params", [
        BesovParams(r=2, pi=2, q=2),
        BesovParams(r=2, pi=1, q=math.inf, M=3.0),
        BesovParams(r=1.5, pi=4, q=1, M=0.5),
    ])
    def test_seminorm_equals_radius(self, system4, params):
        pyr = generate_besov_function(params, system4, seed=7)
        assert besov_seminorm(pyr, params) == pytest.approx(params.M, rel=1e-9)

    def test_deterministic(self, system3):
        params = BesovParams(r=2, pi=2, q=2)
        a = generate_besov_function(params, system3, seed=1)
        assert a.equals(generate_besov_function(params, system3, seed=1))
        assert not a.equals(generate_besov_function(params, system3, seed=2))

    def test_generator_argument(self, system3):
        params = BesovParams(r=2, pi=2, q=2)
        a = generate_besov_function(params, system3, np.random.default_rng(5), project=False)
        b = generate_besov_function(params, system3, np.random.default_rng(5), project=False)
        assert a.equals(b)

    def test_extremal_profile_flattens_level_terms(self, system4):
        params = BesovParams(r=2, pi=2, q=2, M=2.0)
        pyr = generate_besov_function(params, system4, seed=4, project=False, profile="extremal")
        terms = level_terms(pyr, params)
        np.testing.assert_allclose(terms, np.full(len(terms), terms[0]), rtol=1e-9)
        summable = level_terms(generate_besov_function(params, system4, seed=4, project=False), params)
        assert summable[-1] < summable[0]

    def test_unknown_profile(self, system3):
        with pytest.raises(ValidationFailure):
            generate_besov_function(BesovParams(r=2, pi=2, q=2), system3, seed=1, profile="flat")

    def test_sparse_regime_support(self, system4):
        params = BesovParams(r=2, pi=1, q=2)
        pyr = generate_besov_function(params, system4, seed=3, project=False)
        for beta, n_j in zip(pyr.entries, system4.counts):
            active = np.count_nonzero(beta)
            assert active == math.ceil(n_j ** 0.5)
            l1, l2 = np.abs(beta).sum(), math.sqrt(beta @ beta)
            assert l1 <= math.sqrt(active) * l2 * (1 + 1e-12)
        assert np.count_nonzero(pyr.entries[4]) < system4.counts[4] // 10

    def test_dense_regime_support(self, system3):
        pyr = generate_besov_function(BesovParams(r=2, pi=2, q=2), system3, seed=3, project=False)
        assert all(np.count_nonzero(beta) == n for beta, n in zip(pyr.entries, system3.counts))

    def test_round_trip_keeps_seminorm(self, system4):
        params = BesovParams(r=2, pi=1, q=2)
        pyr = generate_besov_function(params, system4, seed=11)
        samples = synthesize_on_grid(system4, pyr, system4.analysis_grid)
        again = analyze(system4, samples)
        assert besov_seminorm(again, params) == pytest.approx(besov_seminorm(pyr, params), rel=0.05)


class TestEmbeddings:

    def test_fineness(self, system3):
        pyr = _random_pyramid(system3, np.random.default_rng(42))
        report = embedding_check(pyr, BesovParams(r=1, pi=2, q=2), BesovParams(r=1, pi=2, q=math.inf))
        assert report.pattern == "fineness"
        assert report.constant == 1.0
        assert report.holds
        assert report.lhs <= report.rhs

    def test_integrability(self, system3):
        rng = np.random.default_rng(42)
        for _ in range(20):
            pyr = _random_pyramid(system3, rng)
            report = embedding_check(pyr, BesovParams(r=1, pi=1, q=2), BesovParams(r=1, pi=2, q=2))
            assert report.pattern == "integrability"
            assert report.holds
            assert report.measured <= report.constant

    def test_smoothness_shift(self, system3):
        rng = np.random.default_rng(42)
        p1 = BesovParams(r=2, pi=1, q=2)
        p2 = BesovParams(r=2 - 2 * (1 - 0.5), pi=2, q=2)
        for _ in range(100):
            report = embedding_check(_random_pyramid(system3, rng), p1, p2)
            assert report.pattern == "smoothness_shift"
            assert report.holds

    def test_zero_pyramid(self, system3):
        report = embedding_check(zero_pyramid(system3), BesovParams(r=1, pi=2, q=1), BesovParams(r=1, pi=2, q=3))
        assert (report.lhs, report.rhs, report.measured) == (0.0, 0.0, 0.0)
        assert report.holds

    def test_unrelated_parameters(self, system3):
        with pytest.raises(ValidationFailure):
            embedding_check(zero_pyramid(system3), BesovParams(r=1, pi=2, q=2), BesovParams(r=3, pi=1, q=2))
