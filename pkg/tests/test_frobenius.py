import random

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from fuchsian.bignum import precision_context, to_mpc
from fuchsian.frobenius import (
    ProblemSpec,
    Q_at,
    build_Q,
    build_T_and_F,
    continue_solution,
    frobenius_coefficients,
    modular_series,
    ode_residual_series,
    wronskian_series,
)
from fuchsian.series import max_coeff_diff

PREC = 256
random.seed(20240817)


def rand_param(lo=-3, hi=3):
    return mpc(mpfr(random.randint(4 * lo, 4 * hi)) / 4, mpfr(random.randint(-6, 6)) / 8)


def spec_for(alpha, rho, N=24):
    return ProblemSpec(alpha, rho, N=N, precision_bits=PREC)


def test_printed_low_order_coefficients():
    # a1 = rho, b1 = alpha+1-2rho for five random parameter pairs
    for _ in range(5):
        alpha = rand_param() + 3  # keep away from 0, 1
        rho = rand_param()
        a, b = frobenius_coefficients(spec_for(alpha, rho))
        with precision_context(PREC):
            assert abs(a[1] - rho) < mpfr(2) ** (-PREC + 8)
            assert abs(b[1] - (alpha + 1 - 2 * rho)) < mpfr(2) ** (-PREC + 8)
            a2 = (rho * rho + 2 * rho * (alpha + 1) - alpha) / 4
            assert abs(a[2] - a2) < mpfr(2) ** (-PREC + 8)


def test_b_recursion_matches_printed_b1_not_the_variant():
    """The inhomogeneous b-term ends in 2(n+1)a_{n+1}; the variant ending in
    2(n-1)a_{n+1} contradicts the closed form b1 = alpha+1-2rho."""
    alpha, rho = mpc(3), mpc(2)
    _, b = frobenius_coefficients(spec_for(alpha, rho))
    with precision_context(PREC):
        good = alpha + 1 - 2 * rho
        variant = alpha + 1 + 2 * rho  # what 2(n-1)a_{n+1} at n=0 would give
        assert abs(b[1] - good) < mpfr(2) ** (-PREC + 8)
        assert abs(b[1] - variant) > mpfr("0.1")


def test_ode_substitution_residuals_vanish():
    spec = spec_for(mpc(2, 1), mpc(mpfr("0.5"), mpfr("-0.25")), N=40)
    a, _ = frobenius_coefficients(spec)
    res_y, res_hat = ode_residual_series(spec)
    with precision_context(PREC):
        scale = max(max(abs(x) for x in a), mpfr(1))
        tol = mpfr(2) ** (-PREC + 40) * scale
    assert max(abs(res_y[k]) for k in range(spec.N - 2)) < tol
    assert max(abs(res_hat[k]) for k in range(spec.N - 2)) < tol


def test_wronskian_is_kappa_over_P():
    spec = spec_for(mpc(3, mpfr("0.5")), mpc(1, 1), N=40)
    a, _ = frobenius_coefficients(spec)
    w = wronskian_series(spec)
    with precision_context(PREC):
        kappa = 1 / spec.alpha
        scale = max(max(abs(x) for x in a), mpfr(1))
        tol = mpfr(2) ** (-PREC + 40) * scale
        assert abs(w[0] - kappa) < tol
        assert max(abs(w[k]) for k in range(1, spec.N - 2)) < tol


def test_build_Q_leading_terms():
    alpha, rho = mpc(2), mpc(1)
    spec = spec_for(alpha, rho)
    Q = build_Q(spec)
    with precision_context(PREC):
        assert Q[0] == 0
        assert abs(Q[1] - 1) < mpfr(2) ** (-PREC + 8)
        assert abs(Q[2] - (alpha + 1 - 2 * rho)) < mpfr(2) ** (-PREC + 8)
    # at rho = (alpha+1)/2 the quadratic coefficient vanishes
    spec2 = spec_for(mpc(3), mpc(2))
    Q2 = build_Q(spec2)
    assert abs(Q2[2]) < mpfr(2) ** (-PREC + 8)


def test_T_and_F_printed_coefficients():
    for _ in range(5):
        alpha = rand_param() + 3
        rho = rand_param()
        spec = spec_for(alpha, rho, N=16)
        a, b = frobenius_coefficients(spec)
        Q = build_Q(spec, a, b)
        T, F = build_T_and_F(spec, a, Q)
        with precision_context(PREC):
            assert abs(T[2] - (2 * rho - alpha - 1)) < mpfr(2) ** (-PREC + 16)
            f2 = (9 * rho * rho - 2 * rho * (alpha + 1) - alpha) / 4
            assert abs(F[2] - f2) < mpfr(2) ** (-PREC + 16)
        assert T.var == "Q" and F.var == "Q"


def test_Q_T_round_trip():
    spec = spec_for(mpc(2, mpfr("0.5")), mpc(1, mpfr("-0.5")), N=20)
    a, b = frobenius_coefficients(spec)
    Q = build_Q(spec, a, b)
    T, _ = build_T_and_F(spec, a, Q)
    comp = Q.compose(T)
    with precision_context(PREC):
        scale = max(max(abs(x) for x in Q.coeffs), mpfr(1))
        tol = mpfr(2) ** (-PREC + 40) * scale
        assert abs(comp[1] - 1) < tol
        others = max(abs(comp[k]) for k in range(comp.order + 1) if k != 1)
        assert others < tol


def test_modular_series_matches_reference_route():
    spec = spec_for(mpc(mpfr("2.5"), mpfr("0.25")), mpc(mpfr("1.25"), mpfr("0.5")), N=20)
    a, b = frobenius_coefficients(spec)
    Q = build_Q(spec, a, b)
    Tref, Fref = build_T_and_F(spec, a, Q)
    with precision_context(PREC):
        for r in (mpc(1), mpc(3, 1)):
            tq, fq = modular_series(spec, r)
            scale = mpc(1)
            for k in range(spec.N + 1):
                assert abs(tq[k] - Tref[k] * scale) < mpfr(2) ** (-PREC + 40) * max(1, abs(scale))
                assert abs(fq[k] - Fref[k] * scale) < mpfr(2) ** (-PREC + 40) * max(1, abs(scale))
                scale *= r


def test_continuation_agrees_with_series_inside_disk():
    spec = spec_for(mpc(2), mpc(1), N=40)
    a, b = frobenius_coefficients(ProblemSpec(spec.alpha, spec.rho, N=PREC + 64, precision_bits=PREC))
    target = mpc(mpfr("0.3"), mpfr("0.05"))
    yv, ypv, hyv, hypv = continue_solution(spec, target)
    with precision_context(PREC):
        y_direct = sum(a[k] * target**k for k in range(len(a)))
        u_direct = sum(b[k] * target**k for k in range(len(b)))
        hy_direct = y_direct * gmpy2.log(target) + u_direct
        assert abs(yv - y_direct) < mpfr(2) ** (-PREC + 48)
        assert abs(hyv - hy_direct) < mpfr(2) ** (-PREC + 48)


def test_closed_loop_monodromy_around_origin():
    spec = spec_for(mpc(2), mpc(1), N=24)
    s = mpfr("0.2")
    loop = [mpc(s), mpc(0, s), mpc(-s, 0), mpc(0, -s), mpc(s)]
    y0, _, hy0, _ = continue_solution(spec, mpc(s), path=[mpc(s)])
    y1, _, hy1, _ = continue_solution(spec, mpc(s), path=loop)
    with precision_context(PREC):
        two_pi_i = 2 * gmpy2.const_pi() * mpc(0, 1)
        assert abs(y1 - y0) < mpfr(2) ** (-PREC + 48)
        assert abs(hy1 - (hy0 + two_pi_i * y0)) < mpfr(2) ** (-PREC + 48)


def test_continuation_reaches_far_fixed_point():
    spec = spec_for(mpc(2), mpc(1), N=24)
    with precision_context(PREC):
        z0 = 1 - gmpy2.sqrt(mpfr(2)) / 2
    yv, _, hyv, _ = continue_solution(spec, z0)
    assert abs(yv) > mpfr("0.1")
    assert gmpy2.is_finite(hyv.real) and gmpy2.is_finite(hyv.imag)


def test_Q_at_agreement_and_conjugation():
    spec = spec_for(mpc(2), mpc(1), N=60)
    z = mpc(mpfr("0.25"), mpfr("0.1"))
    q1 = Q_at(spec, z)
    Qmap = build_Q(ProblemSpec(2, 1, N=PREC + 64, precision_bits=PREC))
    v, _ = Qmap.eval_at(z, radius=mpfr("0.5"))
    with precision_context(PREC):
        assert abs(q1 - v) < mpfr(2) ** (-PREC + 56)
        # Schwarz reflection for real parameters
        q2 = Q_at(spec, mpc(z.real, -z.imag))
        assert abs(q2 - mpc(q1.real, -q1.imag)) < mpfr(2) ** (-PREC + 56)
