"""Truncated power series over arbitrary-precision complex coefficients.

A PowerSeries holds coefficients c[0..N] of sum c_n x^n in one of the three
variables used by the pipeline ("t", "Q", "q").  Binary operations require
matching variables and truncate to the shorter operand; arithmetic runs at
the larger of the two operand precisions.  Coefficients are stored exactly
as computed, nothing is rounded between operations.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpc, mpfr

from .bignum import precision_context, to_mpc


class SeriesError(Exception):
    pass


class TagMismatch(SeriesError):
    pass


class DivisionByZeroSeries(SeriesError):
    pass


class NonzeroInnerConstant(SeriesError):
    pass


class NonUnitLinearCoefficient(SeriesError):
    pass


class OutsideConvergenceHeuristic(SeriesError):
    pass


def _mul_lists(a, b, n_out):
    """Coefficients 0..n_out of the product of coefficient lists a, b."""
    la, lb = len(a), len(b)
    out = []
    for k in range(n_out + 1):
        i0 = max(0, k - lb + 1)
        i1 = min(k, la - 1)
        s = mpc(0)
        for i in range(i0, i1 + 1):
            s += a[i] * b[k - i]
        out.append(s)
    return out


def _div_lists(a, b, n_out):
    la, lb = len(a), len(b)
    inv0 = 1 / b[0]
    out = []
    for k in range(n_out + 1):
        s = a[k] if k < la else mpc(0)
        for i in range(1, min(k, lb - 1) + 1):
            s -= b[i] * out[k - i]
        out.append(s * inv0)
    return out


class PowerSeries:
    __slots__ = ("coeffs", "var", "prec")

    def __init__(self, coeffs, var: str, prec: int):
        if var not in ("t", "Q", "q"):
            raise SeriesError(f"unknown variable tag {var!r}")
        self.coeffs = [c if isinstance(c, mpc) else to_mpc(c, prec) for c in coeffs]
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant term")
        self.var = var
        self.prec = prec

    # -- basics ------------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n: int) -> mpc:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else mpc(0)

    def __repr__(self):
        head = ", ".join(format(complex(c), ".6g") for c in self.coeffs[:4])
        return f"PowerSeries[{self.var}; N={self.order}; {head}, ...]"

    def truncate(self, n: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: n + 1], self.var, self.prec)

    def _pair(self, other):
        if not isinstance(other, PowerSeries):
            raise TagMismatch("expected a PowerSeries operand")
        if other.var != self.var:
            raise TagMismatch(f"variable mismatch: {self.var!r} vs {other.var!r}")
        n = min(self.order, other.order)
        return other, n, max(self.prec, other.prec)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            other, n, prec = self._pair(other)
            with precision_context(prec):
                c = [self[k] + other[k] for k in range(n + 1)]
            return PowerSeries(c, self.var, prec)
        with precision_context(self.prec):
            c = list(self.coeffs)
            c[0] = c[0] + to_mpc(other, self.prec)
        return PowerSeries(c, self.var, self.prec)

    __radd__ = __add__

    def __neg__(self):
        with precision_context(self.prec):
            c = [-ck for ck in self.coeffs]
        return PowerSeries(c, self.var, self.prec)

    def __sub__(self, other):
        if isinstance(other, PowerSeries):
            return self + (-other)
        with precision_context(self.prec):
            return self + (-to_mpc(other, self.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            other, n, prec = self._pair(other)
            with precision_context(prec):
                c = _mul_lists(self.coeffs, other.coeffs, n)
            return PowerSeries(c, self.var, prec)
        with precision_context(self.prec):
            z = to_mpc(other, self.prec)
            c = [z * ck for ck in self.coeffs]
        return PowerSeries(c, self.var, self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            other, n, prec = self._pair(other)
            if other.coeffs[0] == 0:
                raise DivisionByZeroSeries("divisor has zero constant term")
            with precision_context(prec):
                c = _div_lists(self.coeffs, other.coeffs, n)
            return PowerSeries(c, self.var, prec)
        return self * (1 / to_mpc(other, self.prec))

    # -- calculus -----------------------------------------------------------

    def derive(self, mode: str = "d_dvar") -> "PowerSeries":
        """Termwise derivative: 'd_dvar' shifts degrees down, 'theta' is x d/dx."""
        with precision_context(self.prec):
            if mode == "theta":
                c = [k * self.coeffs[k] for k in range(len(self.coeffs))]
            elif mode == "d_dvar":
                c = [k * self.coeffs[k] for k in range(1, len(self.coeffs))] or [mpc(0)]
            else:
                raise SeriesError(f"unknown derivative mode {mode!r}")
        return PowerSeries(c, self.var, self.prec)

    def exp(self) -> "PowerSeries":
        """exp of a series with zero constant term, via E' = a'E."""
        if self.coeffs[0] != 0:
            raise SeriesError("exp requires zero constant term")
        n = self.order
        with precision_context(self.prec):
            e = [mpc(1)]
            for k in range(1, n + 1):
                s = mpc(0)
                for j in range(1, k + 1):
                    s += j * self[j] * e[k - j]
                e.append(s / k)
        return PowerSeries(e, self.var, self.prec)

    # -- composition and reversion -------------------------------------------

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """self(inner), requiring inner(0)=0; result carries inner's variable."""
        if inner.coeffs[0] != 0:
            raise NonzeroInnerConstant("inner series must vanish at 0")
        n = min(self.order, inner.order)
        prec = max(self.prec, inner.prec)
        with precision_context(prec):
            c = _compose_lists(self.coeffs[: n + 1], inner.coeffs[: n + 1], n)
        return PowerSeries(c, inner.var, prec)

    def revert(self) -> "PowerSeries":
        """Compositional inverse by Newton iteration, doubling the order."""
        if self.coeffs[0] != 0:
            raise NonUnitLinearCoefficient("series must vanish at 0 to revert")
        if self.coeffs[1] == 0:
            raise NonUnitLinearCoefficient("linear coefficient must be nonzero")
        n = self.order
        with precision_context(self.prec):
            b = [mpc(0), 1 / self.coeffs[1]]
            order = 1
            while order < n:
                order = min(2 * order, n)
                bx = (b + [mpc(0)] * (order + 1))[: order + 1]
                ax = self.coeffs[: order + 1]
                ab = _compose_lists(ax, bx, order)
                ad = [k * ax[k] for k in range(1, len(ax))]
                adb = _compose_lists(ad, bx, order)
                err = ab
                err[1] -= 1
                corr = _div_lists(err, adb, order)
                b = [bx[k] - corr[k] for k in range(order + 1)]
        return PowerSeries(b, self.var, self.prec)

    # -- evaluation -----------------------------------------------------------

    def growth_radius(self, window: int = 24) -> mpfr:
        """Convergence-radius estimate from the growth of the top coefficients."""
        with precision_context(self.prec):
            best = None
            for k in range(max(1, len(self.coeffs) - window), len(self.coeffs)):
                a = abs(self.coeffs[k])
                if a == 0:
                    continue
                est = a ** (mpfr(-1) / k)
                if best is None or est < best:
                    best = est
            return best if best is not None else mpfr("inf")

    def eval_at(self, z, radius=None, tail_tol=None):
        """Horner evaluation; returns (value, tail_estimate).

        radius: convergence-radius heuristic; evaluation is refused outside
        0.75*radius.  Default: coefficient-growth estimate.
        """
        prec = self.prec
        with precision_context(prec):
            z = to_mpc(z, prec)
            rad = mpfr(radius) if radius is not None else self.growth_radius()
            if gmpy2.is_finite(rad) and abs(z) > mpfr("0.75") * rad:
                raise OutsideConvergenceHeuristic(
                    f"|z|={float(abs(z)):.4g} exceeds 0.75*radius={float(rad):.4g}"
                )
            s = mpc(0)
            for c in reversed(self.coeffs):
                s = s * z + c
            tail = abs(self.coeffs[-1]) * abs(z) ** self.order
            if tail_tol is not None and tail > mpfr(tail_tol):
                raise OutsideConvergenceHeuristic(
                    f"tail estimate {float(tail):.3g} exceeds tolerance {float(tail_tol):.3g}"
                )
        return s, tail


def _compose_lists(outer, inner, n):
    """outer(inner) to order n by Brent-Kung block decomposition."""
    lo = len(outer)
    if lo == 1:
        return [outer[0]] + [mpc(0)] * n
    m = max(1, int(gmpy2.isqrt(lo)))
    # powers inner^0 .. inner^m
    powers = [[mpc(1)] + [mpc(0)] * n, list(inner[: n + 1]) + [mpc(0)] * (n - len(inner) + 1)]
    for _ in range(2, m + 1):
        powers.append(_mul_lists(powers[-1], inner, n))
    step = powers[m]
    blocks = []
    for j0 in range(0, lo, m):
        blk = [mpc(0)] * (n + 1)
        for i in range(j0, min(j0 + m, lo)):
            ci = outer[i]
            if ci == 0:
                continue
            pw = powers[i - j0]
            for k in range(min(n, len(pw) - 1) + 1):
                blk[k] += ci * pw[k]
        blocks.append(blk)
    res = blocks[-1]
    for blk in reversed(blocks[:-1]):
        res = _mul_lists(res, step, n)
        for k in range(n + 1):
            res[k] += blk[k]
    return res


def arith(a: PowerSeries, b: PowerSeries, op: str) -> PowerSeries:
    """Dispatcher form of the four ring operations."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise SeriesError(f"unknown op {op!r}")


def identity_series(n: int, var: str, prec: int) -> PowerSeries:
    return PowerSeries([mpc(0), mpc(1)] + [mpc(0)] * (n - 1), var, prec)


def constant_series(value, n: int, var: str, prec: int) -> PowerSeries:
    return PowerSeries([to_mpc(value, prec)] + [mpc(0)] * n, var, prec)


def max_coeff_diff(a: PowerSeries, b: PowerSeries) -> mpfr:
    n = min(a.order, b.order)
    with precision_context(max(a.prec, b.prec)):
        return max(abs(a[k] - b[k]) for k in range(n + 1))


def series_to_json(s: PowerSeries, hex_floats: bool = False) -> dict:
    from .bignum import complex_to_json

    return {
        "var": s.var,
        "precision_bits": s.prec,
        "coeffs": [complex_to_json(c, hex_floats) for c in s.coeffs],
    }


def series_from_json(obj) -> PowerSeries:
    from .bignum import complex_from_json

    prec = int(obj["precision_bits"])
    coeffs = [complex_from_json(c, prec) for c in obj["coeffs"]]
    return PowerSeries(coeffs, obj["var"], prec)
