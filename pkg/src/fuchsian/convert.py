"""Conversions between modular and classical accessory parameters.

The classical normal form carries parameters m_j at the finite punctures
alpha_j, constrained by sum m_j = 0 and sum alpha_j m_j = 1 - n/2.  The
self-adjoint form carries the polynomial sum rho_i t^i with leading
coefficient (n/2-1)^2.  Equating canonical (reduced) forms of the two
equations gives

    sum_j m_j/(t - alpha_j) = (4 sum_i rho_i t^i - P''(t)) / (2 P(t)),

so m_j is the residue of the right side at alpha_j.  The data model is kept
n-generic even though the solver itself is specific to four punctures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import complex_from_json, complex_to_json, precision_context, to_mpc
from .geometry import TransformRecord, UnsupportedTransform


class ConvertError(Exception):
    pass


class CollidingPunctures(ConvertError):
    pass


# ---------------------------------------------------------------------------
# small exact-shape polynomial / rational function helpers

class Polynomial:
    """Dense polynomial over mpc, low degree first."""

    def __init__(self, coeffs, prec: int):
        self.prec = prec
        cs = [to_mpc(c, prec) for c in coeffs] or [mpc(0)]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        with precision_context(max(self.prec, other.prec)):
            c = [
                (self.coeffs[k] if k < len(self.coeffs) else mpc(0))
                + (other.coeffs[k] if k < len(other.coeffs) else mpc(0))
                for k in range(n)
            ]
        return Polynomial(c, max(self.prec, other.prec))

    def __neg__(self):
        with precision_context(self.prec):
            c = [-ck for ck in self.coeffs]
        return Polynomial(c, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        prec = max(self.prec, other.prec)
        with precision_context(prec):
            out = [mpc(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(out, prec)

    def derivative(self):
        with precision_context(self.prec):
            c = [k * self.coeffs[k] for k in range(1, len(self.coeffs))] or [mpc(0)]
        return Polynomial(c, self.prec)

    def __call__(self, z):
        with precision_context(self.prec):
            z = to_mpc(z, self.prec)
            s = mpc(0)
            for c in reversed(self.coeffs):
                s = s * z + c
            return s

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other], self.prec)

    @staticmethod
    def from_roots(roots, prec: int):
        with precision_context(prec):
            p = Polynomial([1], prec)
            for r in roots:
                p = p * Polynomial([-to_mpc(r, prec), 1], prec)
        return p


@dataclass
class RationalFunction:
    num: Polynomial
    den: Polynomial

    def __add__(self, other):
        other = self._coerce(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    def derivative(self):
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def __call__(self, z):
        with precision_context(max(self.num.prec, self.den.prec)):
            return self.num(z) / self.den(z)

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other, Polynomial([1], other.prec))
        return RationalFunction(Polynomial([other], self.num.prec), Polynomial([1], self.num.prec))


# ---------------------------------------------------------------------------
# accessory data

@dataclass
class AccessoryData:
    """Finite punctures alpha_1..alpha_{n-1} (0 belongs at the end), the
    modular coefficients rho_0..rho_{n-3}, and optionally the m_j."""

    punctures: list
    rho_vec: list
    m_vec: list = field(default_factory=list)
    precision_bits: int = 256

    def __post_init__(self):
        p = self.precision_bits
        self.punctures = [to_mpc(x, p) for x in self.punctures]
        self.rho_vec = [to_mpc(x, p) for x in self.rho_vec]
        self.m_vec = [to_mpc(x, p) for x in self.m_vec]
        n = self.n
        if len(self.rho_vec) != n - 2:
            raise ConvertError(f"expected {n-2} modular coefficients for n={n}")
        for i, a in enumerate(self.punctures):
            for b in self.punctures[i + 1 :]:
                if a == b:
                    raise CollidingPunctures("punctures must be distinct")

    @property
    def n(self) -> int:
        return len(self.punctures) + 1  # punctures list excludes infinity


def four_puncture_data(alpha, rho, precision_bits: int = 256) -> AccessoryData:
    """AccessoryData for {infinity, 1, 0, 1/alpha} with rho = alpha*rho_hat:
    the polynomial is t - rho_hat, i.e. (rho_0, rho_1) = (-rho/alpha, 1)."""
    with precision_context(precision_bits):
        alpha = to_mpc(alpha, precision_bits)
        rho = to_mpc(rho, precision_bits)
        return AccessoryData(
            punctures=[mpc(1), 1 / alpha, mpc(0)],
            rho_vec=[-rho / alpha, mpc(1)],
            precision_bits=precision_bits,
        )


def rho_to_m(data: AccessoryData) -> list:
    """m_j = (4 sum_i rho_i alpha_j^i - P''(alpha_j)) / (2 P'(alpha_j))."""
    prec = data.precision_bits
    with precision_context(prec):
        P = Polynomial.from_roots(data.punctures, prec)
        Pp = P.derivative()
        Ppp = Pp.derivative()
        R = Polynomial(data.rho_vec, prec)
        out = []
        for aj in data.punctures:
            denom = Pp(aj)
            if denom == 0:
                raise CollidingPunctures("repeated puncture")
            out.append((4 * R(aj) - Ppp(aj)) / (2 * denom))
    return out


def constraint_defect(data: AccessoryData, m_vec=None):
    """Deviations from sum m_j = 0 and sum alpha_j m_j = 1 - n/2."""
    m_vec = m_vec if m_vec is not None else data.m_vec
    prec = data.precision_bits
    with precision_context(prec):
        s0 = sum(m_vec, mpc(0))
        s1 = sum((a * m for a, m in zip(data.punctures, m_vec)), mpc(0))
        return abs(s0), abs(s1 - (1 - mpfr(data.n) / 2))


def m_infinity(data: AccessoryData, m_vec=None) -> mpc:
    """The puncture-at-infinity parameter sum_j alpha_j (1 + m_j alpha_j)."""
    m_vec = m_vec if m_vec is not None else data.m_vec
    with precision_context(data.precision_bits):
        return sum((a * (1 + m * a) for a, m in zip(data.punctures, m_vec)), mpc(0))


def closed_forms_four(alpha, rho, precision_bits: int = 256):
    """(m_0, m_1, m_alpha, m_infinity) for the four-punctured sphere:
    alpha+1-2rho, (1-2rho)/(alpha-1), alpha(2rho-alpha)/(alpha-1), (1+alpha-2rho)/alpha."""
    with precision_context(precision_bits):
        a = to_mpc(alpha, precision_bits)
        rho = to_mpc(rho, precision_bits)
        return (
            a + 1 - 2 * rho,
            (1 - 2 * rho) / (a - 1),
            a * (2 * rho - a) / (a - 1),
            (1 + a - 2 * rho) / a,
        )


# ---------------------------------------------------------------------------
# canonical (reduced) form of a second-order equation

def canonical_form(p: RationalFunction, u: RationalFunction) -> RationalFunction:
    """Potential u - p'/2 - p^2/4 of the reduced equation y'' + V y = 0."""
    half = mpfr("0.5")
    quarter = mpfr("0.25")
    return u - p.derivative() * _const(p, half) - (p * p) * _const(p, quarter)


def _const(rf: RationalFunction, value):
    prec = rf.num.prec
    return RationalFunction(Polynomial([value], prec), Polynomial([1], prec))


def normal_form_potential(data: AccessoryData, m_vec=None) -> RationalFunction:
    """(1/4) sum 1/(t-a_j)^2 + (1/2) sum m_j/(t-a_j) as one rational function."""
    m_vec = m_vec if m_vec is not None else data.m_vec
    prec = data.precision_bits
    with precision_context(prec):
        total = RationalFunction(Polynomial([0], prec), Polynomial([1], prec))
        for aj, mj in zip(data.punctures, m_vec):
            lin = Polynomial([-aj, 1], prec)
            sq = lin * lin
            total = total + RationalFunction(Polynomial([mpfr("0.25")], prec), sq)
            total = total + RationalFunction(Polynomial([mj * mpfr("0.5")], prec), lin)
        return total


def self_adjoint_potential(data: AccessoryData) -> RationalFunction:
    """Canonical potential of P y'' + P' y' + (sum rho_i t^i) y = 0."""
    prec = data.precision_bits
    P = Polynomial.from_roots(data.punctures, prec)
    R = Polynomial(data.rho_vec, prec)
    p = RationalFunction(P.derivative(), P)
    u = RationalFunction(R, P)
    return canonical_form(p, u)


# ---------------------------------------------------------------------------
# transporting the solved value back to the caller's puncture

def transport_rho(record: TransformRecord, rho_F, precision_bits: int = 256) -> mpc:
    """Value of the accessory function at the original puncture, undoing the
    normalization moves (conjugation, reflection w -> 1-w)."""
    with precision_context(precision_bits):
        rho = to_mpc(rho_F, precision_bits)
        point = to_mpc(record.normalized_w, precision_bits)
        for move in reversed(record.moves):
            if move == "conjugate":
                rho = mpc(rho.real, -rho.imag)
                point = mpc(point.real, -point.imag)
            elif move == "reflect":
                rho = (point * rho - 1) / (point - 1)
                point = 1 - point
            else:
                raise UnsupportedTransform(f"unknown move {move!r}")
        return rho


# ---------------------------------------------------------------------------
# JSON forms

def accessory_to_json(data: AccessoryData, m_vec=None, hex_floats=False) -> dict:
    out = {
        "punctures": [complex_to_json(x, hex_floats) for x in data.punctures],
        "rho_vec": [complex_to_json(x, hex_floats) for x in data.rho_vec],
        "precision_bits": data.precision_bits,
    }
    mv = m_vec if m_vec is not None else data.m_vec
    if mv:
        out["m_vec"] = [complex_to_json(x, hex_floats) for x in mv]
    return out


def accessory_from_json(obj: dict) -> AccessoryData:
    prec = int(obj.get("precision_bits", 256))
    return AccessoryData(
        punctures=[complex_from_json(x, prec) for x in obj["punctures"]],
        rho_vec=[complex_from_json(x, prec) for x in obj["rho_vec"]],
        m_vec=[complex_from_json(x, prec) for x in obj.get("m_vec", [])],
        precision_bits=prec,
    )
