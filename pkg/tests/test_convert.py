import random

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from fuchsian.bignum import precision_context, to_mpc
from fuchsian.convert import (
    AccessoryData,
    CollidingPunctures,
    Polynomial,
    RationalFunction,
    canonical_form,
    closed_forms_four,
    constraint_defect,
    four_puncture_data,
    m_infinity,
    normal_form_potential,
    rho_to_m,
    self_adjoint_potential,
    transport_rho,
)
from fuchsian.geometry import TransformRecord, UnsupportedTransform, normalize_domain

PREC = 192
random.seed(11)


def rand_c(scale=4):
    return mpc(mpfr(random.randint(-4 * scale, 4 * scale)) / 4, mpfr(random.randint(-8, 8)) / 8)


def test_reference_point_values():
    data = four_puncture_data(2, 1, PREC)
    m = rho_to_m(data)  # ordered by punctures [1, 1/alpha, 0]
    with precision_context(PREC):
        assert abs(m[0] + 1) < mpfr(2) ** (-PREC + 8)  # m at 1
        assert abs(m[1]) < mpfr(2) ** (-PREC + 8)  # m at 1/alpha
        assert abs(m[2] - 1) < mpfr(2) ** (-PREC + 8)  # m at 0
        assert abs(m_infinity(data, m) - mpfr("0.5")) < mpfr(2) ** (-PREC + 8)
        d0, d1 = constraint_defect(data, m)
        assert d0 < mpfr(2) ** (-PREC + 8) and d1 < mpfr(2) ** (-PREC + 8)


def test_residue_formula_matches_closed_forms_at_random_points():
    for _ in range(20):
        alpha = rand_c() + 3
        rho = rand_c()
        data = four_puncture_data(alpha, rho, PREC)
        m = rho_to_m(data)
        m0, m1, m_alpha, m_inf = closed_forms_four(alpha, rho, PREC)
        with precision_context(PREC):
            tol = mpfr(2) ** (-PREC + 20)
            assert abs(m[0] - m1) < tol
            assert abs(m[1] - m_alpha) < tol
            assert abs(m[2] - m0) < tol
            assert abs(m_infinity(data, m) - m_inf) < tol


def test_constraints_hold_generically():
    for _ in range(10):
        data = four_puncture_data(rand_c() + 3, rand_c(), PREC)
        m = rho_to_m(data)
        d0, d1 = constraint_defect(data, m)
        assert d0 < mpfr(2) ** (-PREC + 20)
        assert d1 < mpfr(2) ** (-PREC + 20)


def test_colliding_punctures_rejected():
    with pytest.raises(CollidingPunctures):
        AccessoryData(punctures=[mpc(1), mpc(1), mpc(0)], rho_vec=[mpc(0), mpc(1)], precision_bits=PREC)


def test_canonical_form_trivial_p():
    P1 = Polynomial([1], PREC)
    u = RationalFunction(Polynomial([2, 0, 1], PREC), P1)
    p = RationalFunction(Polynomial([0], PREC), P1)
    V = canonical_form(p, u)
    with precision_context(PREC):
        for t in (mpfr("0.3"), mpfr("1.7")):
            assert abs(V(t) - u(t)) < mpfr(2) ** (-PREC + 8)


def test_canonical_form_reproduces_reduced_numerator():
    """For p = P'/P, u = R/P the canonical potential equals
    (4 P R - 2 P'' P + P'^2)/(4 P^2)."""
    alpha, rho = mpc(2), mpc(1)
    data = four_puncture_data(alpha, rho, PREC)
    V = self_adjoint_potential(data)
    P = Polynomial.from_roots(data.punctures, PREC)
    R = Polynomial(data.rho_vec, PREC)
    with precision_context(PREC):
        for _ in range(8):
            t = rand_c()
            if min(abs(t - a) for a in data.punctures) < mpfr("0.1"):
                continue
            want = (4 * P(t) * R(t) - 2 * P.derivative().derivative()(t) * P(t) + P.derivative()(t) ** 2) / (
                4 * P(t) ** 2
            )
            assert abs(V(t) - want) < mpfr(2) ** (-PREC + 24) * max(1, abs(want))


def test_two_potentials_agree_with_converted_parameters():
    for _ in range(3):
        alpha = rand_c() + 3
        rho = rand_c()
        data = four_puncture_data(alpha, rho, PREC)
        m = rho_to_m(data)
        V1 = self_adjoint_potential(data)
        V2 = normal_form_potential(data, m)
        with precision_context(PREC):
            for _ in range(10):
                t = rand_c()
                if min(abs(t - a) for a in data.punctures) < mpfr("0.15"):
                    continue
                v1, v2 = V1(t), V2(t)
                assert abs(v1 - v2) < mpfr(2) ** (-PREC + 32) * max(1, abs(v1))


def test_transport_identity_record():
    rec = TransformRecord((), to_mpc("0.6", PREC), to_mpc("0.6", PREC))
    v = transport_rho(rec, to_mpc(("1.25", "0.5"), PREC), PREC)
    assert v == to_mpc(("1.25", "0.5"), PREC)


def test_transport_conjugation():
    w = to_mpc(("0.5", "-0.01"), PREC)
    alpha, rec = normalize_domain(w, PREC)
    rho_n = to_mpc(("0.99", "0.02"), PREC)
    v = transport_rho(rec, rho_n, PREC)
    with precision_context(PREC):
        assert abs(v - mpc(rho_n.real, -rho_n.imag)) < mpfr(2) ** (-PREC + 8)


def test_transport_reflection_is_involutive():
    """Applying the reflection rule twice returns the original value."""
    with precision_context(PREC):
        z = to_mpc(("0.6", "0.1"), PREC)
        rho = to_mpc(("1.1", "-0.3"), PREC)
        rec = TransformRecord(("reflect",), 1 - z, z)
        v = transport_rho(rec, rho, PREC)  # value at 1-z
        rec_back = TransformRecord(("reflect",), z, 1 - z)
        w = transport_rho(rec_back, v, PREC)
        assert abs(w - rho) < mpfr(2) ** (-PREC + 12)


def test_transport_unknown_move():
    rec = TransformRecord(("swirl",), to_mpc("0.6", PREC), to_mpc("0.6", PREC))
    with pytest.raises(UnsupportedTransform):
        transport_rho(rec, mpc(1), PREC)
