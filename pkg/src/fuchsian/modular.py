"""Rankin-Cohen brackets on q-expansions and the uniformization identities.

Brackets use theta = q d/dq, which agrees with the half-plane derivative
(2 pi i)^-1 d/dtau at cusp width one, so all identity constants stay
algebraic.  Binomial coefficients are evaluated as falling factorials, so
rational weights are admitted.

With kappa = 1/alpha, P(X) = X^3 - (1+kappa) X^2 + kappa X and the solved
accessory value rho_hat = rho_F/alpha, the checked identities are

    (i)   theta t = kappa^-1 f P(t),                    f = F^2 of weight 2,
    (ii)  [f,f]_2 P(t) = -12 f^2 (theta t)^2 (t - rho_hat),
    (iii) P(t) F_tt + P'(t) F_t + (t - rho_hat) F = 0,  F_t = theta F/theta t,

together with the weight-one generator pair g = F, g1 = g t:

    [g,g1]_1 = kappa^-1 g^4 P(t),
    [g,g]_2  = -2 kappa^-2 g^6 P(t) (t - rho_hat).

The sign of the (t - rho_hat) factor and the constant in [g,g]_2 follow
from [f,f]_2 = 6 f [g,g]_2 and the leading Fourier coefficients; both are
exercised against perturbed accessory values in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .bignum import precision_context
from .series import PowerSeries


class ModularError(Exception):
    pass


class IdentityViolation(ModularError):
    def __init__(self, message, coefficient_index=None):
        super().__init__(message)
        self.coefficient_index = coefficient_index


class RankDeficient(ModularError):
    pass


@dataclass
class QExpansion:
    series: PowerSeries
    weight: Fraction
    label: str = ""

    def __post_init__(self):
        if self.series.var != "q":
            raise ModularError("QExpansion requires a q-variable series")
        self.weight = Fraction(self.weight)

    @property
    def prec(self):
        return self.series.prec


def _rat_binom(weight: Fraction, n_shift: int, m: int) -> mpq:
    """binomial(weight + n_shift, m) as an exact rational via falling factorials."""
    x = mpq(weight.numerator, weight.denominator) + n_shift
    num = mpq(1)
    for i in range(m):
        num *= x - i
    den = mpq(1)
    for i in range(1, m + 1):
        den *= i
    return num / den


def rc_bracket(f: QExpansion, g: QExpansion, n: int) -> QExpansion:
    """n-th Rankin-Cohen bracket; output weight is weight(f)+weight(g)+2n."""
    if n < 0:
        raise ModularError("bracket index must be >= 0")
    prec = max(f.prec, g.prec)
    m = min(f.series.order, g.series.order)
    with precision_context(prec):
        total = PowerSeries([mpc(0)] * (m + 1), "q", prec)
        df = [f.series.truncate(m)]
        dg = [g.series.truncate(m)]
        for _ in range(n):
            df.append(df[-1].derive("theta"))
            dg.append(dg[-1].derive("theta"))
        for r in range(n + 1):
            s = n - r
            coef = _rat_binom(f.weight, n - 1, s) * _rat_binom(g.weight, n - 1, r)
            if r % 2 == 1:
                coef = -coef
            if coef == 0:
                continue
            total = total + mpfr(coef) * (df[r] * dg[s])
    return QExpansion(total, f.weight + g.weight + 2 * n, f"[{f.label},{g.label}]_{n}")


# ---------------------------------------------------------------------------
# reports

def _scale(series: PowerSeries, upto: int) -> mpfr:
    vals = [abs(c) for c in series.coeffs[: upto + 1]]
    return max(vals) if vals else mpfr(0)


def _deviation(series: PowerSeries, upto: int):
    """(max |coeff|, argmax index) over orders 0..upto."""
    worst = mpfr(0)
    where = 0
    for k in range(min(upto, series.order) + 1):
        a = abs(series[k])
        if a > worst:
            worst, where = a, k
    return worst, where


def _relative_deviation(resid: PowerSeries, lead: PowerSeries, upto: int):
    """max_k |resid_k| / max(|lead_k|, 1): deviation against the local scale
    of the leading term, which is what the cancellation happens against."""
    worst = mpfr(0)
    where = 0
    top = min(upto, resid.order, lead.order)
    for k in range(top + 1):
        denom = abs(lead[k])
        if denom < 1:
            denom = mpfr(1)
        a = abs(resid[k]) / denom
        if a > worst:
            worst, where = a, k
    return worst, where


def _abs_series(s: PowerSeries) -> PowerSeries:
    """Series of coefficient absolute values (for backward-error scales)."""
    with precision_context(s.prec):
        return PowerSeries([mpc(abs(c)) for c in s.coeffs], s.var, s.prec)


def _backward_deviation(resid: PowerSeries, term_scale: PowerSeries, upto: int):
    """max_k |resid_k| / term_scale_k with the scale from summed absolute
    products: the backward error of the identity evaluation."""
    worst = mpfr(0)
    where = 0
    top = min(upto, resid.order, term_scale.order)
    for k in range(top + 1):
        denom = abs(term_scale[k])
        if denom < 1:
            denom = mpfr(1)
        a = abs(resid[k]) / denom
        if a > worst:
            worst, where = a, k
    return worst, where


def verify_bracket_identities(forms, prec=None) -> dict:
    """Algebraic bracket identities on a list of >= 3 weighted forms.

    Checks, coefficientwise to order N-4:
      * the weighted cocycle  m[f,g]_1 h + k[g,h]_1 f + l[h,f]_1 g = 0,
      * the Jacobi identity for [.,.]_1,
      * the second-bracket relation
            k^2(k+1) f^2 [g,g]_2
          = l^2(l+1) g^2 [f,f]_2 - (k+1)(l+1)^2 [f,g]_1^2
            - l(l+1)(k+1) g [[f,g]_1, f]_1 .
    Report-only: returns per-identity maximal deviation and relative size.
    """
    if len(forms) < 3:
        raise ModularError("need at least three forms")
    f, g, h = forms[0], forms[1], forms[2]
    prec = prec or max(x.prec for x in (f, g, h))
    n_ok = min(x.series.order for x in (f, g, h)) - 4
    k, l, m = f.weight, g.weight, h.weight
    report = {}
    with precision_context(prec):
        def record(name, series: PowerSeries, upto):
            dev, idx = _deviation(series, upto)
            scl = _scale(series, upto)
            report[name] = {
                "deviation": dev,
                "scale": scl,
                "worst_index": idx,
            }

        e4 = (
            _wmul(m, rc_bracket(f, g, 1), h)
            + _wmul(k, rc_bracket(g, h, 1), f)
            + _wmul(l, rc_bracket(h, f, 1), g)
        )
        record("first_bracket_cocycle", e4, n_ok)

        jac = (
            rc_bracket(rc_bracket(f, g, 1), h, 1).series
            + rc_bracket(rc_bracket(g, h, 1), f, 1).series
            + rc_bracket(rc_bracket(h, f, 1), g, 1).series
        )
        record("jacobi", jac, n_ok - 2)

        fg1 = rc_bracket(f, g, 1)
        lhs = _wmul(k * k * (k + 1), f.series * f.series, QExpansion(rc_bracket(g, g, 2).series, 0))
        rhs = (
            _wmul(l * l * (l + 1), g.series * g.series, QExpansion(rc_bracket(f, f, 2).series, 0))
            - _wmul((k + 1) * (l + 1) * (l + 1), fg1.series, QExpansion(fg1.series, 0))
            - _wmul(l * (l + 1) * (k + 1), g.series, QExpansion(rc_bracket(fg1, f, 1).series, 0))
        )
        record("second_bracket_relation", lhs - rhs, n_ok - 2)
    return report


def _wmul(weight_factor, a, b):
    """Scalar (possibly Fraction) times product of a series/QExpansion pair."""
    as_ = a.series if isinstance(a, QExpansion) else a
    bs_ = b.series if isinstance(b, QExpansion) else b
    w = Fraction(weight_factor)
    with precision_context(max(as_.prec, bs_.prec)):
        c = mpc(mpfr(w.numerator)) / mpfr(w.denominator)
    return c * (as_ * bs_)


def puncture_polynomial(t: PowerSeries, kappa, rho_hat=None) -> PowerSeries:
    """P(t) = t^3 - (1+kappa) t^2 + kappa t as a q-series (optionally t-rho_hat)."""
    with precision_context(t.prec):
        t2 = t * t
        out = t2 * t - (1 + kappa) * t2 + kappa * t
    return out


def verify_uniformizing_identities(result, tolerance_bits_offset: int = 200) -> dict:
    """The three uniformization checks on a solved result's q-expansions.

    Deviations are measured relative to the size of the coefficients involved;
    the pass threshold is 2^-(precision - tolerance_bits_offset).  Raises
    IdentityViolation (with the failing coefficient index) if any check fails.
    """
    prec = result.precision_bits
    t = result.t_series
    F = result.f_series
    N = min(t.order, F.order)
    upto = N - 4
    with precision_context(prec):
        kappa = 1 / result.alpha
        rho_hat = result.rho_hat_F
        f = F * F
        tht = t.derive("theta")
        P = puncture_polynomial(t, kappa)
        t_shift = t + (-rho_hat)

        checks = {}

        def record(name, series, scale_series, upto_n, term_scale=None):
            dev, idx = _deviation(series, upto_n)
            scl = max(_scale(scale_series, upto_n), mpfr(1))
            rel, ridx = _relative_deviation(series, scale_series, upto_n)
            entry = {"deviation": dev, "scale": scl, "relative": rel, "worst_index": ridx}
            if term_scale is not None:
                bwd, bidx = _backward_deviation(series, term_scale, upto_n)
                entry["backward"] = bwd
                entry["backward_index"] = bidx
            checks[name] = entry

        # absolute-value shadows for backward-error scales
        a_t = _abs_series(t)
        a_f = _abs_series(f)
        a_tht = _abs_series(tht)
        a_F = _abs_series(F)
        a_P = a_t * a_t * a_t + abs(1 + kappa) * (a_t * a_t) + abs(kappa) * a_t
        a_shift = a_t + abs(rho_hat)

        # (i) theta t = kappa^-1 f P(t)
        lhs = tht - (1 / kappa) * (f * P)
        scale_i = a_tht + abs(1 / kappa) * (a_f * a_P)
        record("hauptmodul_derivative", lhs, tht, upto, scale_i)

        # (ii) [f,f]_2 P(t) + 12 f^2 (theta t)^2 (t - rho_hat) = 0
        qf = QExpansion(f, 2, "f")
        ff2 = rc_bracket(qf, qf, 2).series
        lhs2 = ff2 * P + 12 * ((f * f) * (tht * tht) * t_shift)
        a_th2f = _abs_series(f.derive("theta").derive("theta"))
        a_thf = _abs_series(f.derive("theta"))
        a_ff2 = 6 * (a_f * a_th2f) + 9 * (a_thf * a_thf)
        scale_ii = a_ff2 * a_P + 12 * ((a_f * a_f) * (a_tht * a_tht) * a_shift)
        record("second_bracket_accessory", lhs2, ff2 * P, upto - 2, scale_ii)

        # (iii) P F_tt + P' F_t + (t - rho_hat) F = 0 with F_t = theta F / theta t
        thF = F.derive("theta")
        F_t = _q_ratio(thF, tht)
        F_tt = _q_ratio(F_t.derive("theta"), tht)
        Pp = 3 * (t * t) - 2 * (1 + kappa) * t + kappa
        lead = P * F_tt
        ode = lead + Pp * F_t + t_shift * F
        a_Pp = 3 * (a_t * a_t) + abs(2 * (1 + kappa)) * a_t + abs(kappa)
        scale_iii = a_P * _abs_series(F_tt) + a_Pp * _abs_series(F_t) + a_shift * a_F
        record("weight_one_ode", ode, lead, upto - 2, scale_iii)

        tol = mpfr(2) ** (-max(prec - tolerance_bits_offset, prec // 3))
        for name, data in checks.items():
            if data["relative"] > tol:
                raise IdentityViolation(
                    f"{name}: relative deviation {float(data['relative']):.3g} exceeds "
                    f"{float(tol):.3g} at coefficient {data['worst_index']}",
                    coefficient_index=data["worst_index"],
                )
    return checks


def _q_ratio(num: PowerSeries, den: PowerSeries) -> PowerSeries:
    """num/den for two q-series vanishing at q=0 (one power of q cancels)."""
    if num[0] != 0 or den[0] != 0:
        raise ModularError("q-ratio expects series vanishing at q=0")
    prec = max(num.prec, den.prec)
    a = PowerSeries(num.coeffs[1:], "q", prec)
    b = PowerSeries(den.coeffs[1:], "q", prec)
    return a / b


# ---------------------------------------------------------------------------
# ring bases and rational-weight generators

@dataclass
class RingBasis:
    k: int
    elements: list  # QExpansion, elements f^k t^i
    rank: int


def ring_basis(result, k: int, rank_tol_bits: int = 80) -> RingBasis:
    """Basis f^k t^i, i = 0..2k, of the weight-2k forms; verifies numerical rank."""
    if k < 0:
        raise ModularError("k must be >= 0")
    prec = result.precision_bits
    with precision_context(prec):
        f = result.f_series * result.f_series
        elements = []
        power = PowerSeries([mpc(1)] + [mpc(0)] * f.order, "q", prec)
        for _ in range(k):
            power = power * f
        current = power
        for i in range(2 * k + 1):
            elements.append(QExpansion(current, 2 * k, f"f^{k} t^{i}"))
            if i < 2 * k:
                current = current * result.t_series
        size = 2 * k + 1
        mat = [[elements[i].series[j] for j in range(size)] for i in range(size)]
        rank = _numeric_rank(mat, prec, rank_tol_bits)
        if rank < size:
            raise RankDeficient(f"rank {rank} < {size} for weight {2*k}")
    return RingBasis(k=k, elements=elements, rank=rank)


def _numeric_rank(mat, prec, tol_bits):
    n = len(mat)
    if n == 0:
        return 0
    with precision_context(prec):
        m = [row[:] for row in mat]
        scale = max(max(abs(x) for x in row) for row in m) or mpfr(1)
        tol = scale * mpfr(2) ** (-tol_bits)
        rank = 0
        for col in range(n):
            piv, piv_val = None, tol
            for row in range(rank, n):
                a = abs(m[row][col])
                if a > piv_val:
                    piv, piv_val = row, a
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = 1 / m[rank][col]
            for row in range(rank + 1, n):
                fac = m[row][col] * inv
                for j in range(col, n):
                    m[row][j] -= fac * m[rank][j]
            rank += 1
        return rank


def rational_generators(result, tolerance_bits_offset: int = 200):
    """Weight-one generator pair (g, g1=g t) and their bracket relations."""
    prec = result.precision_bits
    with precision_context(prec):
        kappa = 1 / result.alpha
        rho_hat = result.rho_hat_F
        F = result.f_series
        t = result.t_series
        g = QExpansion(F, 1, "g")
        g1 = QExpansion(F * t, 1, "g1")
        f = F * F
        P = puncture_polynomial(t, kappa)
        t_shift = t + (-rho_hat)
        upto = F.order - 4

        report = {}

        def record(name, series, scale_series):
            dev, idx = _deviation(series, upto)
            scl = max(_scale(scale_series, upto), mpfr(1))
            rel, ridx = _relative_deviation(series, scale_series, upto)
            report[name] = {"deviation": dev, "scale": scl, "relative": rel, "worst_index": ridx}

        gg1 = rc_bracket(g, g1, 1).series
        rhs1 = (1 / kappa) * ((f * f) * P)
        record("first_bracket_pair", gg1 - rhs1, gg1)

        gg2 = rc_bracket(g, g, 2).series
        rhs2 = (-2 / (kappa * kappa)) * (((f * f) * f) * (P * t_shift))
        record("second_bracket_self", gg2 - rhs2, gg2)

        sq = F * F - f
        record("square_is_weight_two", sq, f)

        tol = mpfr(2) ** (-max(prec - tolerance_bits_offset, prec // 3))
        for name, data in report.items():
            if data["relative"] > tol:
                raise IdentityViolation(
                    f"{name}: relative deviation {float(data['relative']):.3g} exceeds {float(tol):.3g}",
                    coefficient_index=data["worst_index"],
                )
    return g, g1, report
