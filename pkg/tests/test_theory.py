import json
import math

import numpy as np
import pytest

from stablenn.activations import builtin
from stablenn.simulate import sample_shallow
from stablenn.stable import c_alpha, frac_abs_moment
from stablenn.theory import (
    LayerScaleSequence,
    LimitPrediction,
    compare_exponents,
    deep_recursion,
    first_layer_scale,
    gclt_limit,
    product_tail,
    relu_explicit_scale,
    shallow_exponent,
    shallow_limit,
)
from stablenn.verify import ks_against_prediction

RELU = builtin("relu")
IDENT = builtin("identity")
TANH = builtin("tanh")
CUBE = builtin("odd_power", 3)
Z32 = builtin("positive_part_power", 1.5)


class TestLimitPrediction:
    def test_fields_are_plain_floats(self):
        p = LimitPrediction(np.float64(1.5), np.float64(2.0), 1.5)
        assert type(p.stability) is float and type(p.scale) is float

    @pytest.mark.parametrize("kw", [dict(stability=0.0), dict(stability=2.5), dict(scale=0.0), dict(scaling_exponent=0.0)])
    def test_rejects_invalid(self, kw):
        base = dict(stability=1.0, scale=1.0, scaling_exponent=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            LimitPrediction(**base)

    def test_normalizer(self):
        assert LimitPrediction(1.5, 1.0, 1.5).normalizer(1000) == pytest.approx(1000 ** (-1 / 1.5))
        assert LimitPrediction(1.0, 1.0, 1.0, True).normalizer(1000) == pytest.approx(1 / (1000 * math.log(1000)))

    def test_json_layout(self):
        seq = deep_recursion(1.0, 1.0, 1.0, [1.0], 2, RELU)
        d = json.loads(seq.prediction().to_json())
        assert set(d) >= {"stability", "scale", "scaling_exponent", "log_correction", "per_layer", "centering"}
        assert [row["layer"] for row in d["per_layer"]] == [1, 2, 3]
        assert d["per_layer"][-1]["scale"] == pytest.approx(d["scale"])

    def test_symmetric_flag(self):
        assert LimitPrediction(1.0, 1.0, 1.0).symmetric
        assert not gclt_limit(2.0, 1.0, 1.0).symmetric


class TestLayerScaleSequence:
    def test_indexing(self):
        s = LayerScaleSequence(((1.0, 2.0), (1.0, 3.0)), 1.0, False)
        assert len(s) == 2 and s[0] == (1.0, 2.0) and s.output == (1.0, 3.0)

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            LayerScaleSequence((), 1.0, False)
        with pytest.raises(ValueError):
            LayerScaleSequence(((1.0, 0.0),), 1.0, False)


class TestCompareExponents:
    def test_exact_rational_tie(self):
        assert compare_exponents(1.5, 1.5, 1.0) == 0
        assert compare_exponents(1.0, 1.7, 1.7) == 0

    def test_thirds(self):
        assert compare_exponents(1 / 3, 0.5, 1.5) == 0

    def test_orderings(self):
        assert compare_exponents(3.0, 1.5, 1.5) == 1
        assert compare_exponents(0.5, 1.5, 1.0) == -1

    def test_irrational_near_tie(self):
        g = math.sqrt(2)
        assert compare_exponents(g, g * 1.3, 1.3) == 0
        assert compare_exponents(g, g * 1.3 * (1 + 1e-9), 1.3) == -1


class TestGCLT:
    @pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
    def test_symmetric_tails(self, p):
        pred = gclt_limit(0.5, 0.5, p)
        assert pred.skewness == 0.0 and pred.centering == 0.0
        assert pred.stability == p and pred.scaling_exponent == p

    def test_p_one_centering(self):
        pred = gclt_limit(2.0, 1.0, 1.0)
        assert pred.centering == 1.0
        assert pred.skewness == pytest.approx(1 / 3)

    def test_p_below_one_no_centering(self):
        assert gclt_limit(2.0, 1.0, 0.7).centering == 0.0

    def test_mean_centering(self):
        assert gclt_limit(2.0, 1.0, 1.5, mean=0.25).centering == 0.25
        with pytest.raises(ValueError, match="mean"):
            gclt_limit(2.0, 1.0, 1.5)

    def test_scale_value(self):
        s = gclt_limit(0.5, 0.5, 1.5).scale
        assert s == pytest.approx((1 / c_alpha(1.5)) ** (2 / 3), rel=1e-14)
        assert s == pytest.approx(1.848, rel=2e-3)

    def test_log_factor_echoed(self):
        assert gclt_limit(1, 1, 1, log_factor=True).log_correction

    @pytest.mark.parametrize("args", [(1, 1, 0.0), (1, 1, 2.0), (0, 0, 1.0), (-1, 1, 1.0)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            gclt_limit(*args)


class TestProductTail:
    def test_identity_equal_rate(self):
        t = product_tail(1.0, 1.0, 1.0, 1.0, IDENT)
        assert (t.index, t.log_factor) == (1.0, True)
        assert t.constant == pytest.approx((2 / math.pi) ** 2)

    @pytest.mark.parametrize("a", [0.8, 1.0, 1.5])
    def test_relu_equal_rate(self, a):
        # |Z| constant; each sign of Z carries half of it
        t = product_tail(a, 1.3, a, 0.7, RELU)
        assert t.log_factor and t.index == a
        assert t.constant == pytest.approx(0.5 * a * c_alpha(a) ** 2 * 1.3**a * 0.7**a)

    def test_cube_heavy_activation_branch(self):
        t = product_tail(1.5, 1.0, 1.5, 1.0, CUBE)
        assert t.index == pytest.approx(0.5) and not t.log_factor
        assert t.constant == pytest.approx(c_alpha(1.5) * frac_abs_moment(1.5, 1.0, 0.5))

    def test_light_activation_branch(self):
        spec = builtin("odd_power", 0.5)
        t = product_tail(1.5, 2.0, 1.5, 1.0, spec)
        assert t.index == 1.5 and not t.log_factor
        assert t.constant == pytest.approx(c_alpha(1.5) * 2**1.5 * spec.abs_moment(1.5, 1.0, 1.5))

    def test_e1(self):
        t = product_tail(1.2, 1.0, 0.9, 1.0, TANH)
        assert t.index == 1.2 and not t.log_factor
        assert t.constant == pytest.approx(c_alpha(1.2) * TANH.abs_moment(0.9, 1.0, 1.2))

    def test_e1_precondition(self):
        spec = builtin("tanh")
        bounded = type(spec)("f", np.tanh, "E1", beta_bound=0.9)
        with pytest.raises(ValueError):
            product_tail(1.5, 1.0, 1.0, 1.0, bounded)

    def test_gaussian_rejected(self):
        with pytest.raises(ValueError):
            product_tail(2.0, 1.0, 2.0, 1.0, IDENT)


class TestShallowLimit:
    @pytest.mark.parametrize("a", [0.8, 1.0, 1.5])
    def test_identity(self, a):
        p = shallow_limit(a, 2.0, a, 0.5, IDENT)
        assert p.log_correction and p.stability == a
        assert p.scale == pytest.approx((a * c_alpha(a)) ** (1 / a) * 2.0 * 0.5)

    @pytest.mark.parametrize("a", [0.8, 1.0, 1.5])
    def test_relu(self, a):
        p = shallow_limit(a, 1.0, a, 1.0, RELU)
        assert p.log_correction
        assert p.scale == pytest.approx((0.5 * a * c_alpha(a)) ** (1 / a))

    def test_z32_is_log_corrected_cauchy(self):
        p = shallow_limit(1.5, 1.0, 1.0, 1.0, Z32)
        assert (p.stability, p.log_correction) == (1.0, True)

    def test_tanh(self):
        p = shallow_limit(1.7, 1.0, 1.7, 1.0, TANH)
        assert (p.stability, p.log_correction, p.scaling_exponent) == (1.7, False, 1.7)
        assert p.scale == pytest.approx(TANH.abs_moment(1.7, 1.0, 1.7) ** (1 / 1.7))

    def test_cube(self):
        p = shallow_limit(1.5, 1.0, 1.5, 1.0, CUBE)
        assert p.stability == pytest.approx(0.5) and p.scaling_exponent == pytest.approx(0.5)
        assert not p.log_correction

    @pytest.mark.parametrize("spec", [RELU, IDENT, TANH, CUBE, builtin("odd_power", 0.5), Z32])
    @pytest.mark.parametrize("a", [0.8, 1.5])
    def test_matches_gclt_of_product_tail(self, spec, a):
        """The shallow scale is the generalized-CLT scale of the product tail."""
        if spec is TANH:
            a0, a1 = 1.2, a
        else:
            a0, a1 = a, a
        pred = shallow_limit(a0, 1.3, a1, 0.8, spec)
        tail = product_tail(a1, 0.8, a0, 1.3, spec)
        g = gclt_limit(tail.constant / 2, tail.constant / 2, tail.index, tail.log_factor)
        assert pred.stability == pytest.approx(g.stability)
        assert pred.scale == pytest.approx(g.scale, rel=1e-9)
        assert pred.log_correction == g.log_correction

    def test_gaussian_branch(self):
        p = shallow_limit(2.0, 1.0, 2.0, 1.0, IDENT)
        assert p.stability == 2.0 and p.scale == pytest.approx(math.sqrt(2.0))

    def test_exponent_helper_agrees(self):
        for spec, a0, a1 in [(RELU, 1, 1), (CUBE, 1.5, 1.5), (TANH, 1.7, 1.7), (Z32, 1.5, 1.0)]:
            p = shallow_limit(a0, 1.0, a1, 1.0, spec)
            assert shallow_exponent(a0, a1, spec) == (pytest.approx(p.scaling_exponent), p.log_correction)

    @pytest.mark.slow
    def test_gaussian_limit_monte_carlo(self):
        pred = shallow_limit(2.0, 1.0, 2.0, 1.0, IDENT)
        v = sample_shallow(10_000, 2.0, 1.0, 2.0, 1.0, IDENT, seed=31, replications=10_000, block_size=512)
        assert ks_against_prediction(v, pred) < 0.02


class TestDeepRecursion:
    def test_first_layer(self):
        assert first_layer_scale(1.0, 1.0, 1.0, [1.0, 1.0]) == pytest.approx(3.0)
        assert first_layer_scale(2.0, 1.0, 0.0, [3.0, 4.0]) == pytest.approx(5.0)

    @pytest.mark.parametrize("L", [1, 2, 5])
    @pytest.mark.parametrize("a", [0.8, 1.0, 1.5])
    def test_relu_zero_bias(self, L, a):
        seq = deep_recursion(a, 1.4, 0.0, [0.5, -1.0], L, RELU)
        sx = first_layer_scale(a, 1.4, 0.0, [0.5, -1.0])
        assert seq.output[1] == pytest.approx((0.5 * a * c_alpha(a)) ** (L / a) * 1.4**L * sx)
        assert seq.log_correction

    @pytest.mark.parametrize("L", [1, 2, 3, 6])
    def test_relu_matches_explicit(self, L):
        x = [1.0, 1.0]
        seq = deep_recursion(1.0, 1.0, 1.0, x, L, RELU)
        assert len(seq) == L + 1
        assert seq.output[1] == pytest.approx(relu_explicit_scale(L, 1.0, 1.0, 1.0, first_layer_scale(1.0, 1.0, 1.0, x)))

    def test_relu_reference_values(self):
        seq = deep_recursion(1.0, 1.0, 1.0, [1.0, 1.0], 3, RELU)
        assert [s for _, s in seq.layers] == pytest.approx([3.0, 1.954930, 1.622273, 1.516386], rel=1e-6)

    def test_cube_geometric_stabilities(self):
        seq = deep_recursion(1.5, 1.0, 1.0, [1.0], 2, CUBE)
        assert [a for a, _ in seq.layers] == pytest.approx([1.5, 0.5, 1 / 6])
        assert seq.output[0] == pytest.approx(1.5 / 9)

    def test_e1_recursion(self):
        seq = deep_recursion(1.7, 1.2, 0.5, [1.0], 2, TANH)
        s = first_layer_scale(1.7, 1.2, 0.5, [1.0])
        for _ in range(2):
            s = (1.2**1.7 * TANH.abs_moment(1.7, s, 1.7) + 0.5**1.7) ** (1 / 1.7)
        assert seq.output == (1.7, pytest.approx(s))
        assert not seq.log_correction

    @pytest.mark.parametrize("spec", [RELU, IDENT, TANH, CUBE, builtin("odd_power", 0.5)])
    @pytest.mark.parametrize("a", [0.8, 1.5])
    def test_single_layer_reproduces_shallow(self, spec, a):
        seq = deep_recursion(a, 1.3, 0.0, [1.0], 1, spec)
        shallow = shallow_limit(a, 1.3, a, 1.3, spec)
        assert seq.output[0] == pytest.approx(shallow.stability)
        assert seq.output[1] == pytest.approx(shallow.scale, rel=1e-9)

    def test_rejects_depth_zero(self):
        with pytest.raises(ValueError):
            deep_recursion(1.0, 1.0, 1.0, [1.0], 0, RELU)


class TestReluExplicit:
    def test_depth_one(self):
        a, sw, sb, sx = 1.3, 0.7, 0.4, 2.0
        want = (0.5 * a * c_alpha(a) * sw**a * sx**a + sb**a) ** (1 / a)
        assert relu_explicit_scale(1, a, sw, sb, sx) == pytest.approx(want)

    def test_depth_two_no_bias(self):
        assert relu_explicit_scale(2, 1.0, 1.0, 0.0, 1.0) == pytest.approx(1 / math.pi**2)

    @pytest.mark.parametrize("L", [1, 3, 7])
    def test_unit_geometric_factor(self, L):
        a = 1.5
        sw = (2 / (a * c_alpha(a))) ** (1 / a)
        assert relu_explicit_scale(L, a, sw, 0.6, 1.1) == pytest.approx((1.1**a + L * 0.6**a) ** (1 / a))

    @pytest.mark.parametrize("args", [(0, 1.0, 1, 1, 1), (1, 2.0, 1, 1, 1)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            relu_explicit_scale(*args)
