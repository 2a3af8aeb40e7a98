import random

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from fuchsian.bignum import precision_context
from fuchsian.expansion import (
    ExpandConfig,
    ExpansionError,
    SampleSet,
    fit_coefficients,
    line_point,
    verify_relations,
)

PREC = 256
random.seed(31)

# a synthetic coefficient table with the expected structural relations:
# a_{i+1,j} = -2 a_{i,j} for odd i+j, a_{0,2} = 0
TRUE_A = {
    (0, 0): mpfr(1),
    (1, 0): mpfr("-1.25"),
    (0, 1): mpfr("0.0625"),
    (2, 0): mpfr("2.5"),
    (1, 1): mpfr("-0.125"),
    (0, 2): mpfr(0),
    (3, 0): mpfr("-4.8"),
    (2, 1): mpfr("0.19"),
    (1, 2): mpfr("0.012"),
    (0, 3): mpfr("0.063"),
}


def synth_samples(slopes, xs, noise=mpfr("1e-40")):
    out = []
    with precision_context(PREC):
        for n in slopes:
            s = SampleSet(slope=n, xs=[], ws=[], values=[])
            zp = mpc(1, mpfr(1) / n)
            zm = mpc(1, -mpfr(1) / n)
            for x in xs:
                x = mpfr(x)
                v = mpc(0)
                for (j, k), a in TRUE_A.items():
                    v += a * zp**j * zm**k * x ** (j + k)
                v += mpc(noise * random.uniform(-1, 1), noise * random.uniform(-1, 1))
                s.xs.append(x)
                s.ws.append(line_point(n, x, PREC))
                s.values.append(v)
            out.append(s)
    return out


def signed(xs):
    return [x for m in xs for x in (m, -m)]


def test_fit_recovers_synthetic_coefficients():
    samples = synth_samples((1, 2, 3, 5), signed((0.002, 0.004, 0.006, 0.008, 0.01, 0.012)))
    fit = fit_coefficients(samples, degree=3, guard_degree=0, prec=PREC)
    with precision_context(PREC):
        for jk, val in TRUE_A.items():
            assert abs(fit.coeff(*jk) - val) < mpfr("1e-25"), jk
    assert float(fit.max_imag) < 1e-25
    assert float(fit.residual_norm) < 1e-30


def test_fit_guard_degree_removes_truncation_bias():
    # data carries cubic terms; a quadratic-only fit is visibly biased,
    # the guarded fit is not
    samples = synth_samples((1, 2, 3, 5, 8), signed((0.004, 0.008, 0.012, 0.016)), noise=mpfr(0))
    biased = fit_coefficients(samples, degree=2, guard_degree=0, prec=PREC)
    guarded = fit_coefficients(samples, degree=2, guard_degree=2, prec=PREC)
    err_biased = abs(biased.coeff(1, 0) - TRUE_A[(1, 0)])
    err_guarded = abs(guarded.coeff(1, 0) - TRUE_A[(1, 0)])
    assert err_guarded < err_biased / mpfr("1e3")


def test_fit_needs_enough_samples():
    samples = synth_samples((1,), (0.002, -0.002))
    with pytest.raises(ExpansionError):
        fit_coefficients(samples, degree=4, guard_degree=2, prec=PREC)


def test_verify_relations_on_synthetic_fit():
    samples = synth_samples((1, 2, 3, 5, 7), signed((0.002, 0.004, 0.006, 0.008, 0.01, 0.012)))
    fit = fit_coefficients(samples, degree=3, guard_degree=0, prec=PREC)
    report = verify_relations(fit)
    names = {r["name"]: r for r in report["relations"]}
    assert float(names["a20+2a10"]["normalized"]) < 1e-20
    assert float(names["a11+2a01"]["normalized"]) < 1e-20
    assert float(names["a02"]["normalized"]) < 1e-20
    # degree-2 truncation of the table violates nothing structural
    assert report["normalizer"] > 0


def test_line_point_geometry():
    with precision_context(PREC):
        z = line_point(4, mpfr("0.01"), PREC)
        assert abs(z.real - mpfr("0.51")) < mpfr(2) ** (-PREC + 8)
        assert abs(z.imag - mpfr("0.0025")) < mpfr(2) ** (-PREC + 8)
        # the defining line relation Im = Re/n - 1/(2n)
        assert abs(z.imag - (z.real / 4 - mpfr(1) / 8)) < mpfr(2) ** (-PREC + 8)
