import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extrapolab.dyadic import PowerFunction, StepFunction, weighted_norm
from extrapolab.exponents import ScaleSetup
from extrapolab.maximal import (
    bmo_norm,
    doob_constant,
    maximal,
    maximal_three_grid,
    n_operator,
    n_operator_bound,
    power_maximal_norm,
    power_sweep,
    sharp_maximal,
    strong_bound_check,
    weak_norm,
    weak_norm_experiment,
    weighted_dyadic_maximal,
)
from extrapolab.weights import product, random_symmetric_weights, random_weights, weight_constant

from conftest import oracle_maximal

F8 = [1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0, 1.0]
G8 = [0.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0, 4.0]


class TestMaximal:
    def test_half_indicator(self):
        m = maximal([StepFunction.indicator(4, 0, 8)], [1.0])
        np.testing.assert_array_equal(m.values, [1.0] * 8 + [0.5] * 8)

    def test_frozen_oracle(self):
        frozen1 = [1.0, 0.875, 2.0, 1.0, 1.0, 1.0, 3.0, 2.0]
        frozen2 = [1.48363468, 1.48363468, 2.0, 1.48363468, 2.23606798, 2.23606798, 5.65685425, 5.65685425]
        np.testing.assert_allclose(oracle_maximal([F8], [1.0]), frozen1, rtol=1e-15)
        np.testing.assert_allclose(oracle_maximal([F8, G8], [1.0, 0.5]), frozen2, rtol=1e-8)
        np.testing.assert_allclose(maximal([StepFunction(3, F8)], [1.0]).values, frozen1, rtol=1e-14)
        got = maximal([StepFunction(3, F8), StepFunction(3, G8)], [1.0, 0.5]).values
        np.testing.assert_allclose(got, oracle_maximal([F8, G8], [1.0, 0.5]), rtol=1e-13)

    def test_constants(self):
        fs = [StepFunction.constant(5, 2.0), StepFunction.constant(5, 3.0)]
        np.testing.assert_allclose(maximal(fs, [1.0, 0.5]).values, 6.0, rtol=1e-15)

    def test_random_against_oracle(self, rng):
        for _ in range(5):
            fs = [rng.lognormal(size=32) for _ in range(2)]
            got = maximal([StepFunction(5, f) for f in fs], [0.7, 0.4]).values
            np.testing.assert_allclose(got, oracle_maximal(fs, [0.7, 0.4]), rtol=1e-12)

    def test_three_grid(self, rng):
        fs = [StepFunction(7, rng.lognormal(size=128)) for _ in range(2)]
        per, total = maximal_three_grid(fs, [1.0, 1.0])
        m = maximal(fs, [1.0, 1.0])
        np.testing.assert_array_equal(per[0].values, m.values)
        assert np.all(m.values <= total.values)

    def test_monotone(self, rng):
        f = rng.lognormal(size=64)
        g = f + rng.uniform(0, 1, 64)
        a = maximal([StepFunction(6, f)], [0.5]).values
        b = maximal([StepFunction(6, g)], [0.5]).values
        assert np.all(a <= b)

    def test_level_mismatch(self):
        with pytest.raises(ValueError):
            maximal([StepFunction.constant(3), StepFunction.constant(4)], [1.0, 1.0])


class TestWeightedMaximal:
    def test_unit_weight_bitwise(self, rng):
        h = StepFunction(8, rng.lognormal(size=256))
        for rc in (1.0, 0.5, 0.3):
            a = weighted_dyadic_maximal(StepFunction.constant(8), rc, h).values
            np.testing.assert_array_equal(a, maximal([h], [rc]).values)

    def test_constant_input(self, rng):
        u = StepFunction(6, rng.lognormal(size=64))
        np.testing.assert_allclose(weighted_dyadic_maximal(u, 0.5, StepFunction.constant(6, 3.0)).values, 3.0, rtol=1e-14)

    def test_doob(self, rng):
        for _ in range(20):
            u = StepFunction(8, rng.lognormal(0, 1.5, 256))
            h = StepFunction(8, rng.lognormal(0, 1.5, 256))
            rr = rng.uniform(0.3, 1.0)
            rq = rng.uniform(0.2, 0.9) * rr
            m = weighted_dyadic_maximal(u, rr, h)
            lhs = weighted_norm(m, u.pow(rq), rq)
            rhs = weighted_norm(h, u.pow(rq), rq)
            assert lhs <= doob_constant(rr, rq) * rhs * (1 + 1e-12)


class TestNOperator:
    def test_zero(self, rng):
        ws = random_weights(6, 2, rng, 0.4)
        out = n_operator([0.4, 0.2], [1.0, 0.5], ws, 0, StepFunction.constant(6, 0.0))
        assert np.all(out.values == 0)

    def test_domination_and_bound(self, rng):
        p, r = [0.4, 0.2], [1.0, 0.5]
        gamma = max(rj / (rj - pj) for pj, rj in zip(p, r))
        for _ in range(10):
            ws = random_weights(7, 2, rng, 0.4)
            fs = [StepFunction(7, rng.lognormal(0, 1, 128)) for _ in range(2)]
            wc = weight_constant(ws, ScaleSetup(tuple(r), 0.0, tuple(p))).value
            ns = [n_operator(p, r, ws, j, fs[j]) for j in range(2)]
            lhs = maximal(fs, r).values
            rhs = wc**gamma * ns[0].values * ns[1].values
            assert np.all(lhs <= rhs * (1 + 1e-12))
            for j in range(2):
                ratio = weighted_norm(ns[j], ws[j], p[j]) / weighted_norm(fs[j], ws[j], p[j])
                assert ratio <= n_operator_bound(p, r, j)


class TestSharp:
    def test_indicator(self):
        s = sharp_maximal(StepFunction.indicator(4, 0, 8))
        np.testing.assert_allclose(s.values, 0.5)

    def test_constant(self):
        assert bmo_norm(StepFunction.constant(4, 3.0)) == 0.0

    def test_homogeneous(self, rng):
        f = StepFunction(6, rng.lognormal(size=64))
        np.testing.assert_allclose(sharp_maximal(3.0 * f).values, 3.0 * sharp_maximal(f).values, rtol=1e-13)


class TestWeakNorm:
    def test_indicator(self):
        assert weak_norm(StepFunction.indicator(3, 0, 2)) == 0.25

    def test_brute_force(self, rng):
        g = StepFunction(5, np.round(rng.lognormal(size=32), 1))
        u = StepFunction(5, rng.lognormal(size=32))
        # sup over lambda just below each value
        best = 0.0
        for v in np.unique(g.values):
            best = max(best, v * np.sum(u.cell_integrals()[g.values >= v]))
        np.testing.assert_allclose(weak_norm(g, u), best, rtol=1e-14)

    def test_experiment_unit_weights(self, rng):
        ws = [StepFunction.constant(6)] * 3
        rep = weak_norm_experiment(ws, [0.5, 0.25, 0.25], [1.0, 0.5, 0.5], rng, trials=6)
        assert rep.constant == 1.0
        np.testing.assert_allclose(rep.lower_ratio, 1.0, rtol=1e-12)
        assert rep.upper_ratio <= 1.0 + 1e-12

    def test_experiment_random(self, rng):
        ws = random_symmetric_weights(7, 3, rng, 0.5)
        rep = weak_norm_experiment(ws, [0.4, 0.3, 0.3], [0.9, 0.7, 0.8], rng, trials=10)
        assert rep.upper_ratio <= rep.constant * (1 + 1e-12)
        assert rep.lower_ratio >= rep.constant * (1 - 1e-9)


class TestStrong:
    def test_unit_weights_indicators(self):
        L = 8
        ws = [StepFunction.constant(L)] * 2
        fs = [StepFunction.indicator(L, 0, 16), StepFunction.indicator(L, 8, 64)]
        rep = strong_bound_check(ws, [0.25, 0.25], [1.0, 1.0], fs)
        assert rep.constant == 1.0
        assert rep.multiplier <= 1.0

    def test_a1_endpoint(self, rng):
        # ||(Mf) w||_inf <= [w^-1]_A1 ||f w||_inf
        w = random_weights(7, 1, rng)[0]
        f = StepFunction(7, rng.lognormal(size=128))
        rep = strong_bound_check([w], [0.0], [1.0], [f])
        assert rep.ratio <= rep.constant * (1 + 1e-12)


class TestPowerBackend:
    def test_norms_exact(self):
        eps = [2.0**-k for k in range(2, 7)]
        for row in power_sweep(eps, [1.0, 1.0], [1 / 3, 1 / 6], 12):
            np.testing.assert_allclose(row.norms, row.eps ** -0.5, rtol=1e-12)

    def test_self_similar_norm_matches_fine_model(self):
        # power data without the tail: truncation converges to the analytic value
        fs = [PowerFunction(14, -0.3)]
        w = PowerFunction(14, 0.1)
        exact = power_maximal_norm(fs, [1.0], w, 0.5)
        coarse = power_maximal_norm([PowerFunction(10, -0.3)], [1.0], PowerFunction(10, 0.1), 0.5)
        np.testing.assert_allclose(exact, coarse, rtol=1e-3)


@given(st.lists(st.floats(0.0, 10.0), min_size=8, max_size=8), st.floats(0.2, 1.0))
@settings(max_examples=60, deadline=None)
def test_maximal_matches_oracle(vals, rc):
    np.testing.assert_allclose(maximal([StepFunction(3, vals)], [rc]).values, oracle_maximal([vals], [rc]), rtol=1e-12, atol=1e-300)
