"""Automorphisms of the four-punctured sphere and the candidate group data.

The sphere {infinity, 1, 0, 1/alpha} carries the Klein four-group generated
by the involutions

    phi0: t -> (1 - alpha t)/(alpha (1 - t)),
    phi1: t -> (t - 1)/(alpha t - 1),
    phi2: t -> 1/(alpha t),

whose fixed points map, through the covering coordinate, to cusp
representatives of the uniformizing group.  From two representatives
0 < c1 < c2 < 1 the stabilizer constants and parabolic generators follow in
closed form, tied together by S_c2 S_c1 S_0 = T.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import precision_context, to_mpc


class GeometryError(Exception):
    pass


class DegeneratePuncture(GeometryError):
    pass


class UnsupportedTransform(GeometryError):
    pass


class OrderingViolation(GeometryError):
    pass


class RelationViolation(GeometryError):
    pass


class ZeroQ(GeometryError):
    pass


# ---------------------------------------------------------------------------
# Moebius matrices

@dataclass(frozen=True)
class Moebius:
    m11: mpc
    m12: mpc
    m21: mpc
    m22: mpc

    # gmpy2 rounds every operation (negation included) to the ambient
    # context, so each method pins the context to the entry precision.
    def _ctx(self):
        from .bignum import prec_of

        return precision_context(max(prec_of(e) for e in self.entries()))

    def __mul__(self, o: "Moebius") -> "Moebius":
        with self._ctx():
            return Moebius(
                self.m11 * o.m11 + self.m12 * o.m21,
                self.m11 * o.m12 + self.m12 * o.m22,
                self.m21 * o.m11 + self.m22 * o.m21,
                self.m21 * o.m12 + self.m22 * o.m22,
            )

    def inv(self) -> "Moebius":
        with self._ctx():
            d = self.det()
            return Moebius(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    def det(self) -> mpc:
        with self._ctx():
            return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> mpc:
        with self._ctx():
            return self.m11 + self.m22

    def apply(self, tau: mpc) -> mpc:
        with self._ctx():
            return (self.m11 * tau + self.m12) / (self.m21 * tau + self.m22)

    def entries(self):
        return (self.m11, self.m12, self.m21, self.m22)


def translation(prec: int) -> Moebius:
    with precision_context(prec):
        one = mpc(1)
        return Moebius(one, one, mpc(0), one)


# ---------------------------------------------------------------------------
# involutions of the sphere and their fixed points

def involution_map(index: int, alpha: mpc) -> Moebius:
    """phi_index as a Moebius matrix acting on the sphere coordinate t."""
    a = alpha
    if index == 0:
        return Moebius(-a, mpc(1), -a, a)
    if index == 1:
        return Moebius(mpc(1), mpc(-1), a, mpc(-1))
    if index == 2:
        return Moebius(mpc(0), mpc(1), a, mpc(0))
    raise GeometryError("involution index must be 0, 1, or 2")


def fixed_points(alpha, prec: int = None, z2_branch: int = +1):
    """Fixed points (z0, z1, z2) used for cusp identification.

    z0 = 1 - sqrt(alpha(alpha-1))/alpha (phi0, on the 0 -- 1/alpha curve),
    z1 = (1 + sqrt(1-alpha))/alpha with the positive-imaginary branch (phi1),
    z2 = +-1/sqrt(alpha) (phi2); the sign is a selectable branch.
    """
    if prec is None:
        from .bignum import prec_of

        prec = max(64, prec_of(alpha))
    with precision_context(prec):
        a = to_mpc(alpha, prec)
        z0 = 1 - gmpy2.sqrt(a * (a - 1)) / a
        s = gmpy2.sqrt(1 - a)
        z1 = (1 + s) / a
        if z1.imag <= 0:
            z1 = (1 - s) / a
        if z1.imag <= 0:
            raise GeometryError("no positive-imaginary fixed point for phi1")
        z2 = z2_branch / gmpy2.sqrt(a)
    return z0, z1, z2


# ---------------------------------------------------------------------------
# cusp representatives and stabilizer constants

def cusp_representatives(Q0, Q1, Q2, prec: int):
    """Representatives in (0,1) from log(Q_j/Q_0)/(2 pi i), sorted ascending.

    Returns (c1, c2, imag_parts, permutation); imag_parts are the imaginary
    parts of the two logs (in sorted order), which at the solved accessory
    value must equal 1/sqrt(D_j) - 1/sqrt(D_0).
    """
    with precision_context(prec):
        if Q0 == 0 or Q1 == 0 or Q2 == 0:
            raise ZeroQ("vanishing Q value at a fixed point")
        two_pi_i = 2 * gmpy2.const_pi() * mpc(0, 1)
        l1 = gmpy2.log(Q1 / Q0) / two_pi_i
        l2 = gmpy2.log(Q2 / Q0) / two_pi_i
        f1 = l1.real - gmpy2.floor(l1.real)
        f2 = l2.real - gmpy2.floor(l2.real)
        if f1 <= f2:
            c1, c2, im, perm = f1, f2, (l1.imag, l2.imag), (1, 2)
        else:
            c1, c2, im, perm = f2, f1, (l2.imag, l1.imag), (2, 1)
        if not (0 < c1 < c2 < 1):
            raise OrderingViolation(
                f"representatives not ordered in (0,1): {float(c1)}, {float(c2)}"
            )
    return c1, c2, im, perm


def stabilizer_constants(c1: mpfr, c2: mpfr):
    """D0 = 1/(c1(1-c2)), D1 = 1/(c1(c2-c1)), D2 = 1/((c2-c1)(1-c2))."""
    from .bignum import prec_of

    if not (0 < c1 < c2 < 1):
        raise OrderingViolation("need 0 < c1 < c2 < 1")
    with precision_context(max(prec_of(c1), prec_of(c2))):
        D0 = 1 / (c1 * (1 - c2))
        D1 = 1 / (c1 * (c2 - c1))
        D2 = 1 / ((c2 - c1) * (1 - c2))
    return D0, D1, D2


def parabolic(c, D, prec: int) -> Moebius:
    """Stabilizer generator of the cusp c: [[1+cD, -c^2 D], [D, 1-cD]]."""
    with precision_context(prec):
        c = to_mpc(c, prec)
        D = to_mpc(D, prec)
        return Moebius(1 + c * D, -c * c * D, D, 1 - c * D)


@dataclass
class GroupData:
    c1: mpfr
    c2: mpfr
    D0: mpfr
    D1: mpfr
    D2: mpfr
    T: Moebius
    S0: Moebius
    Sc1: Moebius
    Sc2: Moebius
    relation_defect: mpfr

    def generators(self):
        return {"T": self.T, "S0": self.S0, "Sc1": self.Sc1, "Sc2": self.Sc2}


def build_generators(c1, c2, D0=None, D1=None, D2=None, prec: int = 256, tol=None) -> GroupData:
    """Parabolic generators from the representatives; checks the product
    relation S_c2 S_c1 S_0 T^-1 = Id."""
    with precision_context(prec):
        c1 = mpfr(c1)
        c2 = mpfr(c2)
        if D0 is None or D1 is None or D2 is None:
            D0, D1, D2 = stabilizer_constants(c1, c2)
        T = translation(prec)
        S0 = parabolic(mpfr(0), D0, prec)
        Sc1 = parabolic(c1, D1, prec)
        Sc2 = parabolic(c2, D2, prec)
        prod = Sc2 * Sc1 * S0 * T.inv()
        defect = max(
            abs(prod.m11 - 1), abs(prod.m12), abs(prod.m21), abs(prod.m22 - 1)
        )
        tol = mpfr(tol) if tol is not None else mpfr(2) ** (-(prec - 16))
        if defect > tol:
            raise RelationViolation(f"generator relation defect {float(defect):.3g}")
    return GroupData(c1, c2, D0, D1, D2, T, S0, Sc1, Sc2, defect)


def involution_lift(c, Dc, prec: int) -> Moebius:
    """Traceless det-1 lift W of the involution attached to the cusp c:
    sqrt(D)[[c, -(1+c^2 D)/D], [1, -c]].

    For any real traceless W the conjugate W T W^-1 has lower-left entry
    -(sqrt(D))^2 < 0, so it equals the *inverse* of the positive-D stabilizer
    generator: the stabilizer is recovered as S_c = W T^-1 W^-1."""
    with precision_context(prec):
        c = to_mpc(c, prec)
        D = to_mpc(Dc, prec)
        s = gmpy2.sqrt(D)
        return Moebius(c * s, -(1 + c * c * D) / s, s, -c * s)


def stabilizer_from_lift(W: Moebius, prec: int) -> Moebius:
    """S_c = W T^-1 W^-1 (the positive-D parabolic fixing W's cusp)."""
    with precision_context(prec):
        T = translation(prec)
        return W * T.inv() * W.inv()


def lift_fixed_point(c, Dc, prec: int) -> mpc:
    """Fixed point on the upper half-plane of the involution lift: c + i/sqrt(D)."""
    with precision_context(prec):
        return to_mpc(c, prec) + mpc(0, 1) / gmpy2.sqrt(to_mpc(Dc, prec).real)


def scale_factor(Q0, D0, prec: int) -> mpc:
    """r with Q0 = r exp(-2 pi / sqrt(D0))."""
    with precision_context(prec):
        if Q0 == 0:
            raise ZeroQ("Q0 must be nonzero")
        return to_mpc(Q0, prec) * gmpy2.exp(2 * gmpy2.const_pi() / gmpy2.sqrt(mpfr(D0)))


# ---------------------------------------------------------------------------
# normalization of the puncture location

@dataclass(frozen=True)
class TransformRecord:
    """The moves applied to bring the puncture into the reference region."""

    moves: tuple  # subset of ("conjugate", "reflect"), applied left to right
    original_w: mpc
    normalized_w: mpc


def in_reference_region(w: mpc) -> bool:
    """|w| < 1, Re w > 0, Im w >= 0 (real boundary admitted)."""
    return abs(w) < 1 and w.real > 0 and w.imag >= 0


def normalize_domain(w, prec: int = 256):
    """Map the puncture w into the reference region by conjugation and/or
    w -> 1-w; returns (alpha, record) with alpha = 1/normalized_w."""
    with precision_context(prec):
        w = to_mpc(w, prec)
        if (not gmpy2.is_finite(w.real)) or (not gmpy2.is_finite(w.imag)):
            raise DegeneratePuncture("puncture must be finite")
        for special in (mpc(0), mpc(1)):
            if abs(w - special) < mpfr(2) ** (-prec // 2):
                raise DegeneratePuncture("puncture collides with 0 or 1")
        candidates = [
            ((), w),
            (("conjugate",), mpc(w.real, -w.imag)),
            (("reflect",), 1 - w),
            (("reflect", "conjugate"), mpc((1 - w).real, -(1 - w).imag)),
        ]
        for moves, wn in candidates:
            if in_reference_region(wn):
                return 1 / wn, TransformRecord(moves, w, wn)
    raise UnsupportedTransform(
        f"puncture {complex(w)} not reachable by conjugation/reflection"
    )
