from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extrapolab.exponents import (
    InadmissiblePair,
    InadmissibleSetup,
    PowerLaw,
    ScaleSetup,
    central_exponents,
    constant_cpr,
    extrapolation_exponent,
    phi_compose,
    recip,
    rescale,
    sparse_exponent,
    step2_path,
    symmetric_extension,
    translate,
    translation_params,
    validate_setup,
    vector_valued_exponent,
)

GRID = ["4/3", "3/2", "2", "3", "4", "inf"]


def conj(x):
    """Reciprocal of the dual exponent."""
    return 1 - x


class TestRecip:
    def test_parsing(self):
        assert recip("4/3") == F(3, 4)
        assert recip("inf") == 0
        assert recip(2) == 0.5
        assert recip(float("inf")) == 0


class TestValidate:
    def test_admissible(self):
        assert validate_setup(ScaleSetup((F(1), F(1, 2)), F(0), (F(1, 2), F(1, 3))))

    def test_index_violation(self):
        rep = validate_setup(ScaleSetup((F(1, 2),), F(0), (F(1),)))
        assert not rep and rep.index == 0

    def test_aggregate_violation(self):
        # 1/p = 1/2 + 1/3 < 1/s = 1
        rep = validate_setup(ScaleSetup((F(1), F(1, 2)), F(1), (F(1, 2), F(1, 3))))
        assert not rep and rep.index == 2

    def test_strict_mode(self):
        setup = ScaleSetup((F(1),), F(0), (F(1),))
        assert validate_setup(setup, "le")
        assert not validate_setup(setup, "lt")


class TestExtension:
    def test_symmetric_extension(self):
        p, r = symmetric_extension(ScaleSetup((F(1), F(1)), F(1, 4), (F(1, 3), F(1, 6))))
        assert p == (F(1, 3), F(1, 6), F(1, 2))
        assert r == (F(1), F(1), F(3, 4))
        assert sum(p) == 1

    def test_rescale(self):
        s = ScaleSetup((F(1), F(1)), F(0), (F(1, 4), F(1, 4)))
        half = rescale(s, F(1, 2))
        assert half.r_sum == 1
        assert rescale(s, 1) == s
        assert rescale(ScaleSetup((F(1),), F(0), (F(1, 4),)), 2).p == (F(1, 2),)
        assert rescale(half, 2) == s


class TestTranslation:
    def test_generic_symmetric(self):
        assert translation_params((F(1, 4), F(1, 4)), F(1, 2)) == (F(1, 4), F(1, 4))

    def test_step1_worked(self):
        sj = translation_params((F(1, 2), F(1, 4)), F(0), (F(1, 4), F(1, 4)), mode="step1")
        assert sj == (F(-1, 4), F(1, 4))

    def test_step1_equality_index(self):
        p, q = (F(1, 3), F(1, 6)), (F(1, 4), F(1, 6))
        sj = translation_params(p, F(1, 10), q, mode="step1")
        assert sj[1] == p[1]
        assert sum(sj) == F(1, 10)

    def test_step1_degenerate(self):
        with pytest.raises(InadmissiblePair):
            translation_params((F(1, 2), F(1, 4)), F(0), (F(1, 4), F(1, 2)), mode="step1")

    def test_translate_lands_at_infinity(self):
        s = ScaleSetup((F(1), F(1, 2)), F(1, 4), (F(1, 2), F(1, 4)))
        t = translate(s, translation_params(s.p, s.s))
        assert t.s == 0
        assert t.p_sum == s.p_sum - s.s


class TestExtrapolationExponent:
    def test_sharp_ap(self):
        assert extrapolation_exponent((F(1, 4),), (F(1, 2),), (F(1),), F(0)) == 2

    def test_equal(self):
        assert extrapolation_exponent((F(1, 3), F(1, 5)), (F(1, 3), F(1, 5)), (F(1), F(1, 2)), F(0)) == 1

    def test_buckley(self):
        assert extrapolation_exponent((F(1, 3),), (F(0),), (F(1),), F(0)) == F(3, 2)

    def test_grid_regression(self):
        for ps in GRID:
            for qs in GRID:
                p, q = recip(ps), recip(qs)
                if p == 0 and q != 0:
                    # 1/p = 0 with 1/q > 0 has no admissible ratio
                    with pytest.raises(InadmissiblePair):
                        extrapolation_exponent((p,), (q,), (F(1),), F(0))
                    continue
                want = max(conj(q) / conj(p), q / p if p else 1)
                assert extrapolation_exponent((p,), (q,), (F(1),), F(0)) == want

    def test_unsanctioned_zero(self):
        with pytest.raises(InadmissiblePair):
            extrapolation_exponent((F(1),), (F(1, 2),), (F(1),), F(0))


class TestPhiCompose:
    def test_a2_squared(self):
        out = phi_compose(PowerLaw(1.0, 2), (F(1, 4),), (F(1, 2),), (F(1),), F(0))
        assert out.alpha == 4
        assert out.multiplier == 2.0
        assert out.unknowns == ("C^2",)

    def test_identity(self):
        out = phi_compose(PowerLaw(3.0, 1), (F(1, 3),), (F(1, 3),), (F(1),), F(0))
        assert out.alpha == 1 and out.coeff == 3.0

    def test_buckley(self):
        for p in (F(1, 3), F(2, 3), F(1, 5)):
            out = phi_compose(PowerLaw(1.0, 1), (p,), (F(0),), (F(1),), F(0))
            assert out.alpha == 1 / (1 - p)


class TestSparseExponent:
    def test_central_m1(self):
        assert central_exponents((F(1),), F(0)) == (F(1, 2),)
        assert sparse_exponent((F(1, 2),), (F(1),), F(0)) == 2

    def test_central_ratios_equal(self):
        r, s = (F(1), F(1, 2), F(1, 3)), F(1, 5)
        q = central_exponents(r, s)
        ratios = [rj / (rj - qj) for rj, qj in zip(r, q)] + [(1 - s) / (sum(q) - s)]
        assert len(set(ratios)) == 1

    def test_r_ones(self):
        p = (F(1, 3), F(1, 6))
        want = max(1 / conj(p[0]) * 1, 1 / conj(p[1]), 1 / sum(p))
        assert sparse_exponent(p, (F(1), F(1)), F(0)) == want

    def test_pole(self):
        assert sparse_exponent((F(1), F(0)), (F(1), F(1)), F(0)) == float("inf")

    def test_vector_valued(self):
        assert vector_valued_exponent((F(1, 4),), (F(1, 2),), (F(1),), F(0)) == 4
        p = (F(1, 4), F(1, 4))
        q = (F(1, 2), F(1, 2))
        assert vector_valued_exponent(p, q, (F(1), F(1)), F(0)) == 4


class TestCpr:
    def test_values(self):
        assert constant_cpr((0.0, 0.0), (1.0, 0.5)) == 1.0
        assert constant_cpr((0.5, 0.5), (1.0, 1.0)) == 4.0
        assert constant_cpr((1.0, 0.0), (1.0, 1.0)) == float("inf")

    def test_monotone(self):
        vals = [constant_cpr((x, 0.2), (1.0, 1.0)) for x in np.linspace(0.1, 0.5, 9)]
        assert np.all(np.diff(vals) >= 0)


class TestStep2Path:
    def test_worked(self):
        p = (F(1, 2), F(1, 4), F(1, 4))
        q = (F(1, 4), F(1, 4), F(1, 2))
        path = step2_path(p, q, (F(1),) * 3)
        assert path.j1 == 2
        assert path.stages == 1
        assert path.gammas == (F(3, 2),)
        assert path.tuples[0] == q and path.tuples[-1] == p

    def test_trivial(self):
        p = (F(1, 2), F(1, 4), F(1, 4))
        path = step2_path(p, p, (F(1),) * 3)
        assert path.gammas == () and path.gamma_product() == 1

    def test_bad_sum(self):
        with pytest.raises(InadmissibleSetup):
            step2_path((F(1, 2), F(1, 4)), (F(1, 2), F(1, 2)), (F(1), F(1)))


@st.composite
def symmetric_triples(draw):
    n1 = draw(st.integers(2, 4))
    r = [F(draw(st.integers(5, 20)), 20) for _ in range(n1)]
    # p and q as compositions of 1 under r
    def comp():
        parts = [F(draw(st.integers(1, 40)), 1) for _ in range(n1)]
        tot = sum(parts)
        return [x / tot for x in parts]
    p, q = comp(), comp()
    return p, q, r


class TestProperties:
    @given(symmetric_triples())
    @settings(max_examples=200, deadline=None)
    def test_gamma_product_exact(self, pqr):
        p, q, r = pqr
        if not all(pj < rj and qj <= rj for pj, qj, rj in zip(p, q, r)):
            return
        path = step2_path(p, q, r)
        ratios = [(rj - qj) / (rj - pj) for pj, qj, rj in zip(p, q, r)]
        assert path.gamma_product() == max(ratios)
        for t in path.tuples:
            assert sum(t) == 1

    @given(st.lists(st.integers(1, 9), min_size=1, max_size=4), st.integers(0, 5))
    @settings(max_examples=100, deadline=None)
    def test_exponent_permutation_and_identity(self, ints, shift):
        m = len(ints)
        r = (F(1),) * m
        p = tuple(F(k, 10 * m) for k in ints)
        q = tuple(p[(j + shift) % m] for j in range(m))
        perm = list(reversed(range(m)))
        a = extrapolation_exponent(p, q, r, F(0))
        b = extrapolation_exponent([p[j] for j in perm], [q[j] for j in perm], [r[j] for j in perm], F(0))
        assert a == b
        assert extrapolation_exponent(p, p, r, F(0)) == 1

    @given(st.lists(st.floats(0.05, 0.95), min_size=4, max_size=4))
    def test_fk_monotone(self, th):
        t0, t1 = sorted(th)[:2]
        x = np.linspace(0, 50, 200)
        fk = ((1 - t0) * x + t0) / ((1 - t1) * x + t1)
        assert np.all(np.diff(fk) >= -1e-15)

    @given(st.floats(0.1, 5.0))
    def test_rescale_inverse(self, a):
        s = ScaleSetup((1.0, 0.5), 0.2, (0.5, 0.25))
        back = rescale(rescale(s, a), 1 / a)
        np.testing.assert_allclose(back.r + back.p + (back.s,), s.r + s.p + (s.s,), rtol=1e-12)
