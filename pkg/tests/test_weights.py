import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extrapolab.dyadic import PowerFunction, StepFunction
from extrapolab.exponents import ScaleSetup, rescale, symmetric_extension, translate, translation_params
from extrapolab.weights import (
    classical_ap,
    product,
    random_symmetric_weights,
    random_weights,
    rescale_weights,
    symmetric_constant,
    v_weights,
    wconst_char_check,
    weight_constant,
)

from conftest import oracle_wconst

W1 = [1.0, 2.0, 4.0, 1.0, 0.5, 3.0, 2.0, 1.0]
W2 = [2.0, 1.0, 1.0, 3.0, 1.0, 0.25, 1.0, 2.0]


def step(v):
    return StepFunction(int(np.log2(len(v))), v)


class TestFrozenValues:
    def test_two_cell(self):
        wc = weight_constant([step([1.0, 2.0])], ScaleSetup((1.0,), 0.0, (0.5,)))
        np.testing.assert_allclose(wc.value, 1.25, rtol=1e-15)
        assert (wc.cube.level, wc.cube.index) == (0, 0)

    def test_two_cell_ap(self):
        np.testing.assert_allclose(classical_ap(step([1.0, 4.0]), 0.5).value ** 0.5, 1.25, rtol=1e-15)

    @pytest.mark.parametrize(
        "ws, r, s, p, frozen",
        [
            ([W1], [1.0], 0.0, [0.5], 3.0833333333333335),
            ([W1, W2], [1.0, 0.5], 0.0, [0.5, 0.25], 4.966099832275683),
            ([W1, W2], [1.0, 1.0], 0.25, [0.5, 0.25], 3.0899113109067735),
        ],
    )
    def test_oracle(self, ws, r, s, p, frozen):
        np.testing.assert_allclose(oracle_wconst(ws, r, s, p), frozen, rtol=1e-14)
        got = weight_constant([step(w) for w in ws], ScaleSetup(tuple(r), s, tuple(p))).value
        np.testing.assert_allclose(got, frozen, rtol=1e-13)


class TestTrivial:
    def test_unit_weights(self):
        one = StepFunction.constant(5)
        assert weight_constant([one, one], ScaleSetup((1.0, 0.5), 0.1, (0.5, 0.25))).value == 1.0
        assert symmetric_constant([one] * 3, [0.5, 0.25, 0.25], [1.0, 1.0, 0.5]).value == 1.0
        assert classical_ap(StepFunction.constant(5, 7.0), 0.5).value == pytest.approx(1.0, rel=1e-15)
        assert classical_ap(StepFunction.constant(5, 7.0), 1.0).value == pytest.approx(1.0, rel=1e-15)
        np.testing.assert_allclose(wconst_char_check([one] * 3, [0.5, 0.25, 0.25], [1.0, 1.0, 0.5]), (1.0, 1.0), rtol=1e-12)

    def test_inadmissible(self):
        with pytest.raises(ValueError):
            weight_constant([step(W1)], ScaleSetup((0.5,), 0.0, (1.0,)))
        with pytest.raises(ValueError):
            weight_constant([step(W1)], ScaleSetup((1.0, 1.0), 0.0, (0.5, 0.5)))


class TestIdentities:
    def test_symmetric_equals_mform(self, rng):
        for _ in range(20):
            ws = random_weights(6, 2, rng, 0.5)
            setup = ScaleSetup((1.0, 0.8), 0.1, (0.4, 0.3))
            p, r = symmetric_extension(setup)
            ext = list(ws) + [product(ws).pow(-1.0)]
            np.testing.assert_allclose(symmetric_constant(ext, p, r).value, weight_constant(ws, setup).value, rtol=1e-12)

    def test_permutation_exact(self, rng):
        p, r = [0.3, 0.2, 0.5], [0.9, 0.6, 0.7]
        for _ in range(20):
            ws = random_symmetric_weights(6, 3, rng)
            perm = rng.permutation(3)
            a = symmetric_constant(ws, p, r).value
            b = symmetric_constant([ws[j] for j in perm], [p[j] for j in perm], [r[j] for j in perm]).value
            assert a == b

    def test_char_check(self, rng):
        for _ in range(10):
            ws = random_symmetric_weights(6, 3, rng, 0.5)
            c, w = wconst_char_check(ws, [0.3, 0.2, 0.5], [0.9, 0.6, 0.7])
            np.testing.assert_allclose(c, w, rtol=1e-12)

    def test_duality(self, rng):
        w = random_weights(7, 1, rng)[0]
        for rp in (0.25, 0.5, 0.7):
            a = weight_constant([w], ScaleSetup((1.0,), 0.0, (rp,))).value
            b = weight_constant([w.pow(-1.0)], ScaleSetup((1.0,), 0.0, (1 - rp,))).value
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_ap_relation(self, rng):
        w = random_weights(7, 1, rng)[0]
        for rp in (0.25, 0.5, 0.7):
            a = weight_constant([w], ScaleSetup((1.0,), 0.0, (rp,))).value
            b = classical_ap(w.pow(1 / rp), rp).value ** rp
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_infinity_is_a1(self, rng):
        w = random_weights(7, 1, rng)[0]
        a = weight_constant([w], ScaleSetup((1.0,), 0.0, (0.0,))).value
        np.testing.assert_allclose(a, classical_ap(w.pow(-1.0), 1.0).value, rtol=1e-12)

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5])
    def test_rescale(self, rng, alpha):
        ws = random_weights(6, 2, rng, 0.5)
        setup = ScaleSetup((1.0, 0.5), 0.0, (0.5, 0.25))
        lhs = weight_constant(ws, rescale(setup, alpha)).value ** (1 / alpha)
        rhs = weight_constant(rescale_weights(ws, alpha), setup).value
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_rescale_power_weight(self):
        # alpha = 1/r with 1/r = 2
        ws = [PowerFunction(8, 0.3)]
        setup = ScaleSetup((2.0,), 0.0, (1.0,))
        alpha = 0.5
        lhs = weight_constant(ws, rescale(setup, alpha)).value ** (1 / alpha)
        rhs = weight_constant(rescale_weights(ws, alpha), setup).value
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_translation(self, rng):
        ws = random_weights(6, 2, rng, 0.5)
        setup = ScaleSetup((1.0, 0.8), 0.3, (0.6, 0.5))
        t = translate(setup, translation_params(setup.p, setup.s))
        np.testing.assert_allclose(weight_constant(ws, t).value, weight_constant(ws, setup).value, rtol=1e-12)

    def test_three_grid_dominates(self, rng):
        ws = random_weights(7, 2, rng)
        setup = ScaleSetup((1.0, 1.0), 0.0, (0.5, 0.25))
        assert weight_constant(ws, setup, "three-grid").value >= weight_constant(ws, setup).value

    def test_power_weight_scaling(self):
        # [w] grows like eps^(1/p - 1/r) for w = x^((1-eps)(1/r - 1/p))
        r, p = 1.0, 0.5
        eps = np.array([2.0**-k for k in range(3, 8)])
        vals = [weight_constant([PowerFunction(16, (1 - e) * (r - p))], ScaleSetup((r,), 0.0, (p,))).value for e in eps]
        slope = np.polyfit(np.log(eps), np.log(vals), 1)[0]
        assert abs(slope - (p - r)) / (r - p) < 0.1

    def test_v_weights(self):
        w = step(W1)
        (v,) = v_weights([w], [0.25], [0.75])
        np.testing.assert_allclose(v.values, np.asarray(W1) ** -2.0)
        with pytest.raises(ValueError):
            v_weights([w], [0.5], [0.5])


@given(st.lists(st.floats(0.05, 20.0), min_size=8, max_size=8), st.floats(0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_constant_at_least_one(vals, rp):
    w = step(vals)
    assert weight_constant([w], ScaleSetup((1.0,), 0.0, (rp,))).value >= 1 - 1e-12
    np.testing.assert_allclose(
        weight_constant([w], ScaleSetup((1.0,), 0.0, (rp,))).value, oracle_wconst([vals], [1.0], 0.0, [rp]), rtol=1e-12
    )
