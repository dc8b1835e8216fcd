import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from taylorsim import ConsistencyError, InvalidInputError
from taylorsim.linalg import exact_evolution, materialize_series, operator_distance
from taylorsim.series import (
    W_PLUS_BOUND,
    PowerSeries,
    add,
    adjoint,
    build_series,
    choose_K,
    choose_Q,
    choose_r,
    correction_series,
    delta_series,
    exp_series,
    exp_tail,
    extend,
    lemma_bounds_report,
    majorant,
    make_plan,
    mul,
    power,
    scale,
    truncate,
    v_delta_series,
    v_oaa_series,
    w_series,
    w_series_crosscheck,
)

from conftest import SX, SZ, random_hermitian

mpmath.mp.dps = 50


def tail_oracle(theta, K):
    """sum_{k>K} theta^k/k! = e^theta - partial sum, in 50-digit arithmetic."""
    theta = mpmath.mpf(theta)
    return float(mpmath.e**theta - mpmath.fsum(theta**k / mpmath.factorial(k) for k in range(K + 1)))


def inverse_oracle(S):
    """Reciprocal of a series with S[0] != 0 by the long-division recurrence."""
    c = S.coeffs
    inv = np.zeros_like(c)
    inv[0] = 1 / c[0]
    for k in range(1, c.size):
        inv[k] = -np.dot(c[1:k + 1], inv[k - 1::-1][:k]) / c[0]
    return PowerSeries(inv)


def random_series(rng, cap, density=0.5):
    c = (rng.normal(size=cap + 1) + 1j * rng.normal(size=cap + 1)) * (rng.random(cap + 1) < density)
    return PowerSeries(c)


class TestBasicOps:
    def test_exp_series(self):
        np.testing.assert_allclose(exp_series(0.2, 2).coeffs, [1, 0.2, 0.02], rtol=1e-15)
        np.testing.assert_array_equal(exp_series(0.0, 4).coeffs, [1, 0, 0, 0, 0])

    def test_exp_series_materializes_to_exponential(self):
        U = materialize_series(exp_series(0.3, 40), SZ)
        assert operator_distance(U, exact_evolution(SZ, 0.3)) <= 1e-14

    def test_truncate(self):
        V = exp_series(0.2, 6)
        np.testing.assert_allclose(truncate(V, 2).coeffs[:3], [1, 0.2, 0.02])
        assert np.all(truncate(V, 2).coeffs[3:] == 0)
        np.testing.assert_array_equal(truncate(V, 10).coeffs, V.coeffs)

    def test_dropped_tail_majorant(self):
        V = exp_series(0.2, 30)
        tail = V - truncate(V, 2)
        assert majorant(tail, 1.0) == pytest.approx(tail_oracle(0.2, 2), rel=1e-13)

    def test_adjoint(self, rng):
        S = random_series(rng, 8, 1.0)
        np.testing.assert_array_equal(adjoint(adjoint(S)).coeffs, S.coeffs)
        np.testing.assert_allclose(adjoint(exp_series(0.3, 10)).coeffs,
                                   exp_series(-0.3, 10).coeffs, rtol=1e-15)

    def test_unitarity_as_series(self):
        prod = mul(exp_series(0.4, 20), exp_series(-0.4, 20))
        np.testing.assert_allclose(prod.coeffs, np.eye(1, 21)[0], atol=1e-15)

    def test_scale_zero(self, rng):
        assert majorant(scale(random_series(rng, 5, 1.0), 0), 3.0) == 0.0

    def test_mul_associative(self, rng):
        for _ in range(20):
            a, b, c = (random_series(rng, 10, 1.0) for _ in range(3))
            lhs = mul(mul(a, b), c).coeffs
            rhs = mul(a, mul(b, c)).coeffs
            np.testing.assert_allclose(lhs, rhs, atol=1e-13 * np.abs(lhs).max())

    def test_products_respect_cap(self):
        assert mul(exp_series(1, 5), exp_series(1, 5)).cap == 5
        assert power(exp_series(1, 7), 4).cap == 7

    def test_power_matches_repeated_mul(self, rng):
        S = random_series(rng, 9, 1.0)
        ref = PowerSeries.one(9)
        for _ in range(5):
            ref = mul(ref, S)
        np.testing.assert_allclose(power(S, 5).coeffs, ref.coeffs, rtol=1e-12)

    def test_majorant_zero_series(self):
        assert majorant(PowerSeries.zeros(5), 10.0) == 0.0

    def test_majorant_partial_exponential(self):
        assert majorant(truncate(exp_series(0.2, 2), 2), 1.0) == pytest.approx(1.22, abs=1e-15)


class TestSegmentSeries:
    """theta = 0.2, K = 2 worked example."""

    theta, K = 0.2, 2

    @pytest.fixture
    def parts(self):
        V = exp_series(self.theta, 20)
        Vt = truncate(V, self.K)
        D = delta_series(V, Vt)
        VD = v_delta_series(V, D, theta=self.theta)
        return V, Vt, D, VD

    def test_delta(self, parts):
        _, _, D, _ = parts
        assert np.all(D.coeffs[:3] == 0)
        assert D[3] == pytest.approx(0.2**3 / 6, rel=1e-15)
        assert majorant(D, 1.0) == pytest.approx(1.4028e-3, abs=5e-8)
        assert majorant(D, 1.0) == pytest.approx(tail_oracle(0.2, 2), rel=1e-12)

    def test_delta_rejects_non_truncation(self):
        V = exp_series(0.2, 8)
        bad = PowerSeries(np.where(np.arange(9) == 5, 0, V.coeffs))
        with pytest.raises(InvalidInputError):
            delta_series(V, bad)

    def test_v_delta(self, parts):
        _, _, _, VD = parts
        assert np.all(VD.coeffs[:3] == 0)
        assert VD[3].real == pytest.approx(0.2**3 / 6, rel=1e-14)
        assert abs(VD[4]) <= 0.4**4 / 24

    def test_v_delta_coefficients_against_closed_form(self, parts):
        # b_m = theta^m/m! * sum_{j>K} (-1)^(m-j) C(m, j)
        _, _, _, VD = parts
        for m in range(3, 15):
            closed = self.theta**m / math.factorial(m) * sum(
                (-1) ** (m - j) * math.comb(m, j) for j in range(self.K + 1, m + 1))
            assert VD[m].real == pytest.approx(closed, rel=1e-9, abs=1e-30)

    def test_v_delta_bound_violation_detected(self):
        V = exp_series(0.2, 10)
        D = V - truncate(V, 2)
        with pytest.raises(ConsistencyError):
            v_delta_series(V, scale(D, 1e6), theta=0.2)

    def test_w(self, parts):
        V, Vt, D, VD = parts
        W = w_series(VD)
        assert W.lowest_order() == 3
        assert W[3].real == pytest.approx(VD[3].real, rel=1e-14)
        sD = majorant(D, 1.0)
        assert majorant(W, 1.0) <= 2 * sD + 9 * sD**2 + 6 * sD**3 + sD**4

    def test_w_forms_agree(self, parts):
        V, Vt, D, VD = parts
        W = w_series(VD)
        eight, definitional = w_series_crosscheck(V, Vt, D)
        np.testing.assert_allclose(eight.coeffs, definitional.coeffs, atol=1e-12)
        np.testing.assert_allclose(W.coeffs, definitional.coeffs, atol=1e-12)
        assert np.all(np.abs(eight.coeffs[:3]) <= 1e-18)

    def test_w_first_order_part(self, parts):
        # orders K+1 .. 2K+1 only see the terms linear in V_Delta
        V, Vt, D, VD = parts
        _, definitional = w_series_crosscheck(V, Vt, D)
        linear = VD / 2 - adjoint(VD) / 2
        np.testing.assert_allclose(definitional.coeffs[:6], linear.coeffs[:6], atol=1e-16)

    def test_correction_coefficients(self, parts):
        *_, VD = parts
        a = correction_series(w_series(VD), r=5, Q=12)
        assert a[0] == 1
        assert np.all(a.coeffs[1:3] == 0)
        assert a[3].real == pytest.approx(5 * 0.2**3 / 6, rel=1e-14)

    def test_correction_matches_inverse_route(self):
        # V_C = U * V_oaa^{-r}: an independent route through series division
        theta, K, r, Q = 0.2, 2, 5, 25
        V = exp_series(theta, Q)
        voaa = v_oaa_series(truncate(V, K))
        oracle = mul(exp_series(r * theta, Q), power(inverse_oracle(voaa), r))
        a = correction_series(w_series(v_delta_series(V, delta_series(V, truncate(V, K)))), r, Q)
        np.testing.assert_allclose(a.coeffs, oracle.coeffs, atol=1e-15, rtol=1e-11)

    def test_v_oaa_series(self, xz):
        assert np.all(v_oaa_series(PowerSeries.one(5)).coeffs == np.eye(1, 6)[0])
        Vt = truncate(exp_series(0.2, 6), 2)
        assert v_oaa_series(Vt)[0] == 1
        H = (SX + SZ) / 2
        Vt_m = materialize_series(Vt, H)
        formula = Vt_m @ (1.5 * np.eye(2) - 0.5 * Vt_m.conj().T @ Vt_m)
        assert operator_distance(materialize_series(v_oaa_series(Vt), H), formula) <= 1e-13


class TestSchedule:
    @pytest.mark.parametrize("T,r", [(1, 5), (0.1, 1), (10, 41), (0, 1), (0.25, 2)])
    def test_choose_r(self, T, r):
        assert choose_r(T) == r

    def test_choose_K_examples(self):
        assert choose_K(0.2, 0.098) == 2
        assert choose_K(0.2, 1e-6) == 5
        assert tail_oracle(0.2, 5) <= 1e-6 < tail_oracle(0.2, 4)
        assert exp_tail(0.2, 5) == pytest.approx(9.149e-8, rel=1e-3)
        assert exp_tail(0.2, 4) == pytest.approx(2.758e-6, rel=1e-3)

    def test_choose_K_floor(self):
        assert choose_K(0.2, tail_oracle(0.2, 2)) == 2
        assert choose_K(0.0, 1e-300) == 2

    def test_choose_K_rejects_bad_budget(self):
        with pytest.raises(InvalidInputError):
            choose_K(0.2, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 1.0), st.floats(1e-15, 0.5), st.floats(0.0, 1.0), st.floats(1e-15, 0.5))
    def test_choose_K_monotone(self, th1, b1, th2, b2):
        assume(th1 <= th2)
        assert choose_K(th1, b1) <= choose_K(th1, b1 / 2)
        assert choose_K(th1, b1) <= choose_K(th2, b1)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-6, 1.0), st.integers(0, 25))
    def test_exp_tail_matches_oracle(self, theta, K):
        expected = tail_oracle(theta, K)
        assume(expected > 1e-300)
        assert exp_tail(theta, K) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("r,eps,Q", [(5, 1e-3, 14), (5, 1e-8, 31), (81, 1e-12, 120)])
    def test_choose_Q(self, r, eps, Q):
        assert choose_Q(r, eps) == Q
        assert 2.0 ** (r - Q - 1) <= eps < 2.0 ** (r - Q)

    def test_choose_Q_respects_K(self):
        assert choose_Q(1, 0.4, K=5) == 5

    def test_plan_t1(self):
        plan, _ = make_plan(1.0, 1.0, 1e-8, 0.49)
        assert (plan.r, plan.K, plan.Q) == (5, 2, 31)
        assert plan.s == pytest.approx(1.22, abs=1e-15)
        assert plan.s == pytest.approx(math.exp(0.2) - tail_oracle(0.2, 2), abs=1e-14)


class TestSAlgebra:
    def test_sub_additive_and_sub_multiplicative(self, rng):
        for _ in range(200):
            cap = int(rng.integers(1, 15))
            F, G = random_series(rng, cap, 0.4), random_series(rng, cap, 0.4)
            A = float(rng.uniform(1e-3, 2.0))
            alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            lhs = majorant(add(scale(F, alpha), scale(G, beta)), A)
            assert lhs <= (abs(alpha) * majorant(F, A) + abs(beta) * majorant(G, A)) * (1 + 1e-12)
            assert majorant(mul(F, G), A) <= majorant(F, A) * majorant(G, A) * (1 + 1e-12)

    def test_adjoint_preserves_majorant(self, rng):
        for _ in range(50):
            S = random_series(rng, 12)
            y = float(rng.uniform(0, 3))
            assert majorant(adjoint(S), y) == majorant(S, y)


class TestHomomorphism:
    def test_ops_commute_with_materialization(self, rng):
        for _ in range(20):
            dim = int(rng.integers(1, 5))
            H = random_hermitian(rng, dim)
            H /= max(1.0, np.linalg.norm(H, 2))
            S1, S2 = random_series(rng, 6, 1.0), random_series(rng, 6, 1.0)
            m1, m2 = materialize_series(S1, H), materialize_series(S2, H)
            z = complex(*rng.normal(size=2))
            tol = 1e-12 * max(1, np.abs(m1).max() * np.abs(m2).max())
            assert operator_distance(materialize_series(add(S1, S2), H), m1 + m2) <= tol
            assert operator_distance(materialize_series(scale(S1, z), H), z * m1) <= tol * abs(z)
            assert operator_distance(materialize_series(adjoint(S1), H), m1.conj().T) <= tol
            # product matches when truncation does not bite
            full = mul(extend(S1, 12), extend(S2, 12))
            assert operator_distance(materialize_series(full, H), m1 @ m2) <= tol


class TestPerfectCorrection:
    @pytest.mark.parametrize("t", [1.0, 5.0])
    def test_series_identity_extended(self, t):
        # a_k are geometric while t^k/k! is factorial, so the high orders come
        # from heavy cancellation; 40 digits leave plenty of headroom
        with mpmath.workdps(40):
            plan, series = make_plan(t, 1.0, 1e-8, 0.49, dps=40)
            prod = mul(series.a, power(series.Voaa, plan.r, plan.Q))
            expected = exp_series(t, plan.Q, dps=40)
            rel = max(abs(p - e) / abs(e) for p, e in zip(prod.coeffs, expected.coeffs))
        assert rel <= 1e-11

    @pytest.mark.parametrize("t", [1.0, 5.0])
    def test_series_identity_float64_within_conditioning(self, t):
        plan, series = make_plan(t, 1.0, 1e-8, 0.49)
        P = power(series.Voaa, plan.r, plan.Q)
        prod = mul(series.a, P).coeffs
        expected = exp_series(t, plan.Q).coeffs.real
        # sum_j |a_j||P_{k-j}| measures the cancellation in coefficient k
        scale_k = np.convolve(np.abs(series.a.coeffs), np.abs(P.coeffs))[: plan.Q + 1]
        assert np.all(np.abs(prod - expected) <= 1e-13 * scale_k + 1e-11 * expected)


class TestBoundsReport:
    def test_all_pass_t1(self):
        plan, series = make_plan(1.0, 1.0, 1e-8, 0.49)
        checks = lemma_bounds_report(plan, series, strict=True)
        assert all(c.passed for c in checks)

    def test_w_plus_constant(self):
        v = math.e - 2.5
        assert W_PLUS_BOUND == pytest.approx(v + 1.5 * v**2 + 0.5 * v**3, rel=1e-15)
        assert 0.29495 - 1e-5 < W_PLUS_BOUND < 0.29495 + 1e-5

    def test_strict_raises_on_violation(self):
        plan, series = make_plan(1.0, 1.0, 1e-8, 0.49)
        from dataclasses import replace
        bad = replace(plan, s_C=2.5)
        with pytest.raises(ConsistencyError):
            lemma_bounds_report(bad, series, strict=True)

    def test_build_series_shapes(self):
        s = build_series(0.2, 2, 5, 10)
        assert s.a.cap == 10 and s.a_long.cap == 20 and s.Voaa.cap == 10


class TestExtendedPrecision:
    def test_exp_series_digits(self):
        with mpmath.workdps(50):
            S = exp_series(mpmath.mpf(1) / 3, 20, dps=50)
            assert S.extended
            assert abs(S[20] - (mpmath.mpf(1) / 3) ** 20 / mpmath.factorial(20)) < mpmath.mpf(10) ** -60

    def test_matches_float_path(self):
        plan, fl = make_plan(1.0, 1.0, 1e-8, 0.49)
        _, ext = make_plan(1.0, 1.0, 1e-8, 0.49, dps=30)
        for name in ("Vt", "W", "a", "Voaa"):
            e = getattr(ext, name).to_complex().coeffs
            f = getattr(fl, name).coeffs
            # tiny far-tail coefficients of W are pure cancellation in float64
            assert np.allclose(e, f, rtol=1e-12, atol=1e-16), name

    def test_plan_numbers_unchanged(self):
        plan_f, _ = make_plan(5.0, 1.0, 1e-8, 0.49)
        plan_e, series = make_plan(5.0, 1.0, 1e-8, 0.49, dps=30)
        assert (plan_f.r, plan_f.K, plan_f.Q) == (plan_e.r, plan_e.K, plan_e.Q)
        assert plan_e.s_C == pytest.approx(plan_f.s_C, rel=1e-12)
        assert all(c.passed for c in lemma_bounds_report(plan_e, series))

    def test_float_path_not_extended(self):
        assert not exp_series(0.2, 3).extended
        assert exp_series(0.2, 3).to_complex().coeffs.dtype == np.complex128

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            PowerSeries(np.array([mpmath.mpc(1), mpmath.mpf("inf")], dtype=object))
